#include "zeroprobe/corpus.hpp"

#include "zeroprobe/error.hpp"
#include "zeroprobe/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <set>

namespace zeroprobe {

namespace {

constexpr std::array<ExperimentId, 4> kExperiments = {ExperimentId::Exp1, ExperimentId::Exp2Arg,
                                                      ExperimentId::Exp2Form, ExperimentId::Exp4};

ExpectedDirection subject_faster(std::string factor) {
    return ExpectedDirection{std::move(factor), "subject", "object", "", "", ""};
}

std::vector<ExperimentDesign> make_designs() {
    const Factor antecedent{"antecedent", {"subject", "object"}};
    std::vector<ExperimentDesign> d;
    d.push_back({ExperimentId::Exp1,
                 {antecedent},
                 {{"EXP1.antecedent", TestKind::LrtMain, {"antecedent"}, subject_faster("antecedent")}}});
    d.push_back({ExperimentId::Exp2Arg,
                 {antecedent},
                 {{"EXP2_ARG.antecedent", TestKind::LrtMain, {"antecedent"}, subject_faster("antecedent")}}});
    d.push_back({ExperimentId::Exp2Form,
                 {Factor{"object_form", {"name", "pronoun"}}},
                 {{"EXP2_FORM.object_form",
                   TestKind::LrtMain,
                   {"object_form"},
                   ExpectedDirection{"object_form", "pronoun", "name", "", "", ""}}}});
    d.push_back({ExperimentId::Exp4,
                 {Factor{"argument", {"subject", "object"}}, Factor{"person", {"first_second", "third"}}},
                 {{"EXP4.argument", TestKind::AnovaType3Main, {"argument"}, subject_faster("argument")},
                  {"EXP4.argument_x_person",
                   TestKind::LrtInteraction,
                   {"argument", "person"},
                   ExpectedDirection{"argument", "subject", "object", "person", "third", "first_second"}}}});
    return d;
}

// RFC 4180 records: quoted fields may contain commas, quotes ("") and newlines.
std::vector<std::vector<std::string>> parse_csv_records(std::string_view csv) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    std::size_t line = 1;
    for (std::size_t i = 0; i < csv.size(); ++i) {
        char c = csv[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < csv.size() && csv[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (field_started && !field.empty()) {
                    throw Error(ErrorKind::Parse, "stray quote in unquoted field on line " + std::to_string(line));
                }
                quoted = true;
                field_started = true;
                break;
            case ',':
                row.push_back(std::move(field));
                field.clear();
                field_started = false;
                break;
            case '\r':
                break;
            case '\n':
                row.push_back(std::move(field));
                field.clear();
                field_started = false;
                if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
                row.clear();
                ++line;
                break;
            default:
                field.push_back(c);
                field_started = true;
        }
    }
    if (quoted) throw Error(ErrorKind::Parse, "unterminated quoted field");
    if (field_started || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string csv_escape(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::size_t parse_offset(std::string_view s, std::string_view where) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw Error(ErrorKind::Parse, std::string(where) + ": main_clause_start '" + std::string(s) +
                                          "' is not a non-negative integer");
    }
    return v;
}

ExperimentId require_experiment(std::string_view s, std::string_view where) {
    auto id = parse_experiment_id(s);
    if (!id) throw Error(ErrorKind::Parse, std::string(where) + ": unknown experiment_id '" + std::string(s) + "'");
    return *id;
}

const std::array<std::string_view, 6> kColumns = {"stimulus_id", "experiment_id", "frame_id",
                                                  "factors",     "text",          "main_clause_start"};

}  // namespace

std::string_view to_string(ExperimentId id) {
    switch (id) {
        case ExperimentId::Exp1: return "EXP1";
        case ExperimentId::Exp2Arg: return "EXP2_ARG";
        case ExperimentId::Exp2Form: return "EXP2_FORM";
        case ExperimentId::Exp4: return "EXP4";
    }
    return "?";
}

std::optional<ExperimentId> parse_experiment_id(std::string_view s) {
    for (auto id : kExperiments) {
        if (to_string(id) == s) return id;
    }
    return std::nullopt;
}

const std::array<ExperimentId, 4>& all_experiments() { return kExperiments; }

std::string_view to_string(TestKind kind) {
    switch (kind) {
        case TestKind::LrtMain: return "LRT_MAIN";
        case TestKind::AnovaType3Main: return "ANOVA_TYPE3_MAIN";
        case TestKind::LrtInteraction: return "LRT_INTERACTION";
    }
    return "?";
}

std::optional<TestKind> parse_test_kind(std::string_view s) {
    for (auto k : {TestKind::LrtMain, TestKind::AnovaType3Main, TestKind::LrtInteraction}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

std::string cell_label(const FactorAssignment& cell) {
    std::string out;
    for (const auto& [name, level] : cell) {
        if (!out.empty()) out.push_back(';');
        out += name;
        out.push_back('=');
        out += level;
    }
    return out;
}

FactorAssignment parse_factor_assignment(std::string_view s) {
    FactorAssignment out;
    while (!s.empty()) {
        auto semi = s.find(';');
        auto item = s.substr(0, semi);
        auto eq = item.find('=');
        if (eq == std::string_view::npos || eq == 0 || eq + 1 == item.size()) {
            throw Error(ErrorKind::Parse, "malformed factor '" + std::string(item) + "', expected name=level");
        }
        std::string name(item.substr(0, eq));
        if (!out.emplace(name, std::string(item.substr(eq + 1))).second) {
            throw Error(ErrorKind::Parse, "factor '" + name + "' listed twice");
        }
        if (semi == std::string_view::npos) break;
        s.remove_prefix(semi + 1);
    }
    return out;
}

const Factor& ExperimentDesign::factor(std::string_view name) const {
    for (const auto& f : factors) {
        if (f.name == name) return f;
    }
    throw Error(ErrorKind::Validation,
                "experiment " + std::string(to_string(id)) + " has no factor '" + std::string(name) + "'");
}

std::vector<FactorAssignment> ExperimentDesign::cells() const {
    std::vector<FactorAssignment> out{FactorAssignment{}};
    for (const auto& f : factors) {
        std::vector<FactorAssignment> next;
        for (const auto& partial : out) {
            for (const auto& level : f.levels) {
                auto c = partial;
                c[f.name] = level;
                next.push_back(std::move(c));
            }
        }
        out = std::move(next);
    }
    return out;
}

const ExperimentDesign& design(ExperimentId id) {
    static const std::vector<ExperimentDesign> designs = make_designs();
    return designs[static_cast<std::size_t>(id)];
}

std::string Stimulus::level(std::string_view factor) const {
    auto it = factors.find(std::string(factor));
    if (it == factors.end()) {
        throw Error(ErrorKind::MissingCell, stimulus_id + " has no factor '" + std::string(factor) + "'");
    }
    return it->second;
}

std::string Stimulus::main_clause() const {
    auto cps = text::decode_utf8(text);
    return text::encode_utf8(std::u32string_view(cps).substr(main_clause_start));
}

bool operator==(const Stimulus& a, const Stimulus& b) {
    return a.stimulus_id == b.stimulus_id && a.experiment == b.experiment && a.frame_id == b.frame_id &&
           a.factors == b.factors && a.text == b.text && a.main_clause_start == b.main_clause_start;
}

bool operator==(const StimulusSet& a, const StimulusSet& b) { return a.stimuli_ == b.stimuli_; }

StimulusSet::StimulusSet(std::vector<Stimulus> stimuli) : stimuli_(std::move(stimuli)) {
    struct FrameInfo {
        ExperimentId experiment;
        std::set<std::string> cells;
    };
    std::map<std::string, FrameInfo> frames;

    for (std::size_t i = 0; i < stimuli_.size(); ++i) {
        auto& s = stimuli_[i];
        const std::string where = "stimulus '" + s.stimulus_id + "'";
        if (s.stimulus_id.empty()) throw Error(ErrorKind::Validation, "empty stimulus_id at row " + std::to_string(i + 1));
        if (s.frame_id.empty()) throw Error(ErrorKind::Validation, where + ": empty frame_id");
        if (!index_.emplace(s.stimulus_id, i).second) {
            throw Error(ErrorKind::Validation, where + ": duplicate stimulus_id");
        }

        const auto& d = design(s.experiment);
        if (s.factors.size() != d.factors.size()) {
            throw Error(ErrorKind::Validation, where + ": expected " + std::to_string(d.factors.size()) +
                                                   " factors for " + std::string(to_string(s.experiment)));
        }
        for (const auto& [name, level] : s.factors) {
            const Factor* f = nullptr;
            for (const auto& candidate : d.factors) {
                if (candidate.name == name) f = &candidate;
            }
            if (!f) throw Error(ErrorKind::Validation, where + ": unknown factor '" + name + "'");
            if (!f->has_level(level)) {
                throw Error(ErrorKind::Validation, where + ": unknown level '" + level + "' for factor '" + name + "'");
            }
        }

        auto cps = text::decode_utf8(s.text);
        if (s.main_clause_start == 0 || s.main_clause_start >= cps.size()) {
            throw Error(ErrorKind::Validation, where + ": main_clause_start " + std::to_string(s.main_clause_start) +
                                                   " outside (0, " + std::to_string(cps.size()) + ")");
        }
        while (s.main_clause_start < cps.size() && text::is_space(cps[s.main_clause_start])) ++s.main_clause_start;
        if (s.main_clause_start >= cps.size()) {
            throw Error(ErrorKind::Validation, where + ": main clause is only whitespace");
        }

        auto [it, inserted] = frames.try_emplace(s.frame_id, FrameInfo{s.experiment, {}});
        if (!inserted && it->second.experiment != s.experiment) {
            throw Error(ErrorKind::Validation, where + ": frame '" + s.frame_id + "' spans experiments " +
                                                   std::string(to_string(it->second.experiment)) + " and " +
                                                   std::string(to_string(s.experiment)));
        }
        if (!it->second.cells.insert(cell_label(s.factors)).second) {
            throw Error(ErrorKind::Validation,
                        where + ": duplicate condition " + cell_label(s.factors) + " in frame '" + s.frame_id + "'");
        }
    }
}

const Stimulus* StimulusSet::find(std::string_view stimulus_id) const {
    auto it = index_.find(std::string(stimulus_id));
    return it == index_.end() ? nullptr : &stimuli_[it->second];
}

std::vector<const Stimulus*> StimulusSet::experiment(ExperimentId id) const {
    std::vector<const Stimulus*> out;
    for (const auto& s : stimuli_) {
        if (s.experiment == id) out.push_back(&s);
    }
    return out;
}

std::map<std::string, std::vector<const Stimulus*>> StimulusSet::frames(ExperimentId id) const {
    std::map<std::string, std::vector<const Stimulus*>> out;
    for (const auto& s : stimuli_) {
        if (s.experiment == id) out[s.frame_id].push_back(&s);
    }
    return out;
}

std::vector<ExperimentId> StimulusSet::experiments() const {
    std::vector<ExperimentId> out;
    for (auto id : kExperiments) {
        if (std::any_of(stimuli_.begin(), stimuli_.end(), [id](const Stimulus& s) { return s.experiment == id; })) {
            out.push_back(id);
        }
    }
    return out;
}

StimulusSet parse_stimuli_csv(std::string_view csv) {
    if (csv.size() >= 3 && csv.substr(0, 3) == "\xEF\xBB\xBF") csv.remove_prefix(3);
    auto records = parse_csv_records(csv);
    if (records.empty()) throw Error(ErrorKind::Parse, "stimulus CSV has no header");

    std::array<std::size_t, 6> col{};
    const auto& header = records.front();
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
        auto it = std::find(header.begin(), header.end(), kColumns[c]);
        if (it == header.end()) throw Error(ErrorKind::Parse, "stimulus CSV header lacks column '" + std::string(kColumns[c]) + "'");
        col[c] = static_cast<std::size_t>(it - header.begin());
    }

    std::vector<Stimulus> stimuli;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& row = records[r];
        const std::string where = "row " + std::to_string(r + 1);
        if (row.size() != header.size()) {
            throw Error(ErrorKind::Parse, where + ": expected " + std::to_string(header.size()) + " fields, got " +
                                              std::to_string(row.size()));
        }
        Stimulus s;
        s.stimulus_id = row[col[0]];
        s.experiment = require_experiment(row[col[1]], where);
        s.frame_id = row[col[2]];
        s.factors = parse_factor_assignment(row[col[3]]);
        s.text = row[col[4]];
        s.main_clause_start = parse_offset(row[col[5]], where);
        stimuli.push_back(std::move(s));
    }
    return StimulusSet(std::move(stimuli));
}

StimulusSet parse_stimuli_json(std::string_view json) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::Parse, std::string("stimulus JSON: ") + e.what());
    }
    if (!doc.is_array()) throw Error(ErrorKind::Parse, "stimulus JSON must be an array");

    std::vector<Stimulus> stimuli;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& o = doc[i];
        const std::string where = "element " + std::to_string(i);
        try {
            Stimulus s;
            s.stimulus_id = o.at("stimulus_id").get<std::string>();
            s.experiment = require_experiment(o.at("experiment_id").get<std::string>(), where);
            s.frame_id = o.at("frame_id").get<std::string>();
            const auto& f = o.at("factors");
            if (f.is_string()) {
                s.factors = parse_factor_assignment(f.get<std::string>());
            } else {
                for (const auto& [name, level] : f.items()) s.factors[name] = level.get<std::string>();
            }
            s.text = o.at("text").get<std::string>();
            const auto& start = o.at("main_clause_start");
            if (!start.is_number_unsigned()) {
                throw Error(ErrorKind::Parse, where + ": main_clause_start must be a non-negative integer");
            }
            s.main_clause_start = start.get<std::size_t>();
            stimuli.push_back(std::move(s));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::Parse, where + ": " + e.what());
        }
    }
    return StimulusSet(std::move(stimuli));
}

StimulusSet load_stimuli(const std::filesystem::path& path) {
    auto contents = text::read_file(path);
    auto first = contents.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && contents[first] == '[') return parse_stimuli_json(contents);
    return parse_stimuli_csv(contents);
}

std::string to_csv(const StimulusSet& set) {
    std::string out;
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
        if (c) out.push_back(',');
        out += kColumns[c];
    }
    out.push_back('\n');
    for (const auto& s : set.stimuli()) {
        out += csv_escape(s.stimulus_id) + ',' + std::string(to_string(s.experiment)) + ',' + csv_escape(s.frame_id) +
               ',' + csv_escape(cell_label(s.factors)) + ',' + csv_escape(s.text) + ',' +
               std::to_string(s.main_clause_start) + '\n';
    }
    return out;
}

const StimulusSet& builtin_corpus() {
    static const StimulusSet corpus = parse_stimuli_csv(builtin_corpus_csv());
    return corpus;
}

bool BalanceReport::all_complete() const {
    return std::all_of(frames.begin(), frames.end(), [](const FrameBalance& f) { return f.complete; });
}

std::size_t BalanceReport::incomplete_count() const {
    return static_cast<std::size_t>(
        std::count_if(frames.begin(), frames.end(), [](const FrameBalance& f) { return !f.complete; }));
}

BalanceReport validate_balance(const StimulusSet& set, const ExperimentDesign& design) {
    BalanceReport report{design.id, {}};
    const auto cells = design.cells();
    for (const auto& [frame_id, members] : set.frames(design.id)) {
        FrameBalance fb{frame_id, {}, {}, false};
        std::map<std::string, int> counts;
        for (const auto* s : members) ++counts[cell_label(s->factors)];
        bool exact = true;
        for (const auto& cell : cells) {
            auto label = cell_label(cell);
            auto it = counts.find(label);
            if (it == counts.end()) {
                fb.missing.push_back(label);
                exact = false;
            } else {
                fb.present.push_back(label);
                if (it->second != 1) exact = false;
            }
        }
        fb.complete = exact && members.size() == cells.size();
        report.frames.push_back(std::move(fb));
    }
    return report;
}

}  // namespace zeroprobe
