#include "zeroprobe/report.hpp"

#include "zeroprobe/analysis.hpp"
#include "zeroprobe/error.hpp"
#include "zeroprobe/text.hpp"

#include <json.hpp>

#include <glob.h>

#include <algorithm>

namespace zeroprobe {

using ojson = nlohmann::ordered_json;

namespace {

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    while (!s.empty()) {
        auto comma = s.find(',');
        auto item = s.substr(0, comma);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (!item.empty()) out.emplace_back(item);
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

std::vector<std::string> string_list(const nlohmann::json& j, std::string_view field) {
    if (j.is_string()) return split_list(j.get<std::string>());
    if (!j.is_array()) throw Error(ErrorKind::Config, std::string(field) + " must be a string or an array of strings");
    std::vector<std::string> out;
    for (const auto& item : j) {
        if (!item.is_string()) throw Error(ErrorKind::Config, std::string(field) + " entries must be strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

Error tagged(const Error& e, std::string_view model_id, ExperimentId experiment) {
    return Error(e.kind(), "[" + std::string(model_id) + ", " + std::string(to_string(experiment)) + "] " + e.message());
}

ojson optional_number(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

}  // namespace

std::string_view to_string(OutputFormat f) {
    switch (f) {
        case OutputFormat::Csv: return "csv";
        case OutputFormat::Json: return "json";
        case OutputFormat::Svg: return "svg";
    }
    return "?";
}

std::string_view to_string(SurprisalUnit u) { return u == SurprisalUnit::Nats ? "nats" : "bits"; }

std::set<OutputFormat> parse_formats(std::string_view list) {
    std::set<OutputFormat> out;
    for (const auto& item : split_list(list)) {
        if (item == "csv") {
            out.insert(OutputFormat::Csv);
        } else if (item == "json") {
            out.insert(OutputFormat::Json);
        } else if (item == "svg") {
            out.insert(OutputFormat::Svg);
        } else {
            throw Error(ErrorKind::Config, "unknown output format '" + item + "'");
        }
    }
    return out;
}

std::vector<ExperimentId> parse_experiments(std::string_view list) {
    std::vector<ExperimentId> out;
    for (const auto& item : split_list(list)) {
        auto id = parse_experiment_id(item);
        if (!id) throw Error(ErrorKind::Config, "unknown experiment '" + item + "'");
        if (std::find(out.begin(), out.end(), *id) == out.end()) out.push_back(*id);
    }
    return out;
}

SurprisalUnit parse_unit(std::string_view s) {
    if (s == "nats") return SurprisalUnit::Nats;
    if (s == "bits") return SurprisalUnit::Bits;
    throw Error(ErrorKind::Config, "unit must be 'nats' or 'bits', got '" + std::string(s) + "'");
}

void RunConfig::validate() const {
    if (scores.empty()) throw Error(ErrorKind::Config, "at least one score input is required");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::Config, "alpha must lie in (0, 1)");
    if (experiments.empty()) throw Error(ErrorKind::Config, "no experiments selected");
    if (stimuli.empty()) throw Error(ErrorKind::Config, "stimuli source is empty");
}

RunConfig parse_run_config(std::string_view json) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw Error(ErrorKind::Config, "config must be a JSON object");
    RunConfig c;
    try {
        for (const auto& [key, value] : doc.items()) {
            if (key == "stimuli") {
                c.stimuli = value.get<std::string>();
            } else if (key == "scores") {
                c.scores = string_list(value, key);
            } else if (key == "experiments") {
                c.experiments = parse_experiments(join(string_list(value, key), ","));
            } else if (key == "alpha") {
                c.alpha = value.get<double>();
            } else if (key == "out") {
                c.out = value.get<std::string>();
            } else if (key == "formats") {
                c.formats = parse_formats(join(string_list(value, key), ","));
            } else if (key == "unit") {
                c.unit = parse_unit(value.get<std::string>());
            } else {
                throw Error(ErrorKind::Config, "unknown config field '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Config, e.what());
    }
    return c;
}

namespace {

ojson config_json(const RunConfig& c) {
    ojson o;
    o["stimuli"] = c.stimuli;
    o["scores"] = c.scores;
    auto exps = ojson::array();
    for (auto e : c.experiments) exps.push_back(std::string(to_string(e)));
    o["experiments"] = exps;
    o["alpha"] = c.alpha;
    o["out"] = c.out;
    auto fmts = ojson::array();
    for (auto f : c.formats) fmts.push_back(std::string(to_string(f)));
    o["formats"] = fmts;
    o["unit"] = std::string(to_string(c.unit));
    return o;
}

}  // namespace

std::string run_config_to_json(const RunConfig& config) { return config_json(config).dump(); }

std::vector<std::string> expand_score_inputs(const std::vector<std::string>& inputs) {
    std::vector<std::string> out;
    for (const auto& input : inputs) {
        if (input == kToyScores) {
            out.push_back(input);
            continue;
        }
        if (input.find_first_of("*?[") == std::string::npos) {
            out.push_back(input);
            continue;
        }
        glob_t g{};
        const int rc = ::glob(input.c_str(), 0, nullptr, &g);
        if (rc == GLOB_NOMATCH) {
            globfree(&g);
            throw Error(ErrorKind::Config, "score pattern '" + input + "' matches no files");
        }
        if (rc != 0) {
            globfree(&g);
            throw Error(ErrorKind::Io, "cannot expand '" + input + "'");
        }
        std::vector<std::string> matches(g.gl_pathv, g.gl_pathv + g.gl_pathc);
        globfree(&g);
        std::sort(matches.begin(), matches.end());
        out.insert(out.end(), matches.begin(), matches.end());
    }
    std::vector<std::string> unique;
    for (auto& s : out) {
        if (std::find(unique.begin(), unique.end(), s) == unique.end()) unique.push_back(std::move(s));
    }
    return unique;
}

StimulusSet load_configured_stimuli(const RunConfig& config) {
    if (config.stimuli == "builtin") return builtin_corpus();
    return load_stimuli(config.stimuli);
}

ScoreSet load_configured_scores(const RunConfig& config, const StimulusSet& stimuli) {
    ScoreSet all;
    for (const auto& input : expand_score_inputs(config.scores)) {
        if (input == kToyScores) {
            all.merge(toy_score(stimuli));
        } else {
            all.merge(ingest_token_scores(input, stimuli));
        }
    }
    return all;
}

Report run(const RunConfig& config) {
    config.validate();
    const auto stimuli = load_configured_stimuli(config);
    const auto scores = load_configured_scores(config, stimuli);
    return run_analysis(stimuli, scores, config);
}

Report run_analysis(const StimulusSet& stimuli, const ScoreSet& scores, const RunConfig& config) {
    Report report;
    report.config = config;
    report.config_hash = text::hex64(text::fnv1a64(run_config_to_json(config)));
    report.corpus_hash = text::hex64(text::fnv1a64(to_csv(stimuli)));
    report.scores_hash = text::hex64(text::fnv1a64(to_jsonl(scores)));

    std::vector<ExperimentId> experiments;
    for (auto id : all_experiments()) {
        if (std::find(config.experiments.begin(), config.experiments.end(), id) != config.experiments.end()) {
            experiments.push_back(id);
        }
    }

    for (const auto& model : scores.models()) {
        for (auto exp : experiments) {
            if (!model_covers(stimuli, scores, model, exp)) continue;
            try {
                const auto data = collect_experiment(stimuli, scores, model, exp);
                const auto& d = design(exp);
                for (const auto& test : d.tests) {
                    report.entries.push_back(ReportEntry{run_planned_test(data, d, test), "", false});
                    report.family.push_back(model + "|" + test.test_id);
                }
            } catch (const Error& e) {
                throw tagged(e, model, exp);
            }
        }
    }

    std::vector<double> raw;
    raw.reserve(report.entries.size());
    for (const auto& e : report.entries) raw.push_back(e.result.p_raw);
    const auto adjusted = bh_adjust(raw);
    for (std::size_t i = 0; i < report.entries.size(); ++i) {
        auto& e = report.entries[i];
        e.result.p_adjusted = adjusted[i];
        e.band = significance_band(e.result.p_adjusted);
        e.verdict = successfully_modeled(e.result, config.alpha);
    }

    for (const auto& e : report.entries) {
        if (report.summary.empty() || report.summary.back().model_id != e.result.model_id) {
            report.summary.push_back(ModelSummary{e.result.model_id, 0, 0});
        }
        auto& s = report.summary.back();
        ++s.planned;
        if (e.verdict) ++s.modeled;
    }

    report.notes = {
        "p-values are Benjamini-Hochberg adjusted over every test in this run (see family).",
        "Significance bands, including the marginal band '.', are judged on the adjusted p-value.",
        "Surprisal is in nats; figures convert to the configured unit at render time.",
        "Figure panels use each model's own surprisal scale.",
    };
    return report;
}

std::string report_to_json(const Report& report) {
    ojson root;
    root["schema_version"] = report.schema_version;
    ojson meta;
    meta["config"] = config_json(report.config);
    meta["config_hash"] = report.config_hash;
    meta["corpus_hash"] = report.corpus_hash;
    meta["scores_hash"] = report.scores_hash;
    meta["family_size"] = report.family_size();
    meta["family"] = report.family;
    meta["notes"] = report.notes;
    root["metadata"] = std::move(meta);

    auto results = ojson::array();
    for (const auto& e : report.entries) {
        const auto& r = e.result;
        ojson o;
        o["model_id"] = r.model_id;
        o["test_id"] = r.test_id;
        o["experiment_id"] = std::string(to_string(r.experiment));
        o["kind"] = std::string(to_string(r.kind));
        o["statistic"] = r.statistic;
        o["df1"] = r.df1;
        o["df2"] = optional_number(r.df2);
        o["df2_fallback"] = r.df2_fallback;
        o["p_raw"] = r.p_raw;
        o["p_adjusted"] = r.p_adjusted;
        o["band"] = e.band;
        o["direction_ok"] = r.direction_ok;
        o["verdict"] = e.verdict;
        o["boundary_fit"] = r.boundary_fit;
        auto cells = ojson::array();
        for (const auto& c : r.cells) {
            ojson jc;
            jc["label"] = c.label;
            jc["mean"] = c.mean;
            jc["se"] = c.se;
            jc["frames"] = c.frames;
            cells.push_back(std::move(jc));
        }
        o["cells"] = std::move(cells);
        results.push_back(std::move(o));
    }
    root["results"] = std::move(results);

    auto summary = ojson::array();
    for (const auto& s : report.summary) {
        ojson o;
        o["model_id"] = s.model_id;
        o["modeled"] = s.modeled;
        o["planned"] = s.planned;
        o["label"] = std::to_string(s.modeled) + "/" + std::to_string(s.planned);
        summary.push_back(std::move(o));
    }
    root["summary"] = std::move(summary);
    return root.dump(2) + "\n";
}

Report report_from_json(std::string_view json) {
    Report report;
    try {
        auto root = nlohmann::json::parse(json);
        report.schema_version = root.at("schema_version").get<int>();
        if (report.schema_version != 1) {
            throw Error(ErrorKind::Parse, "unsupported report schema_version " + std::to_string(report.schema_version));
        }
        const auto& meta = root.at("metadata");
        report.config = parse_run_config(meta.at("config").dump());
        report.config_hash = meta.at("config_hash").get<std::string>();
        report.corpus_hash = meta.at("corpus_hash").get<std::string>();
        report.scores_hash = meta.at("scores_hash").get<std::string>();
        report.family = meta.at("family").get<std::vector<std::string>>();
        report.notes = meta.at("notes").get<std::vector<std::string>>();

        for (const auto& o : root.at("results")) {
            ReportEntry e;
            auto& r = e.result;
            r.model_id = o.at("model_id").get<std::string>();
            r.test_id = o.at("test_id").get<std::string>();
            auto exp = parse_experiment_id(o.at("experiment_id").get<std::string>());
            auto kind = parse_test_kind(o.at("kind").get<std::string>());
            if (!exp || !kind) throw Error(ErrorKind::Parse, "bad experiment_id or kind in report");
            r.experiment = *exp;
            r.kind = *kind;
            r.statistic = o.at("statistic").get<double>();
            r.df1 = o.at("df1").get<int>();
            if (!o.at("df2").is_null()) r.df2 = o.at("df2").get<double>();
            r.df2_fallback = o.at("df2_fallback").get<bool>();
            r.p_raw = o.at("p_raw").get<double>();
            r.p_adjusted = o.at("p_adjusted").get<double>();
            e.band = o.at("band").get<std::string>();
            r.direction_ok = o.at("direction_ok").get<bool>();
            e.verdict = o.at("verdict").get<bool>();
            r.boundary_fit = o.at("boundary_fit").get<bool>();
            for (const auto& c : o.at("cells")) {
                CellSummary cs{c.at("label").get<std::string>(), c.at("mean").get<double>(), c.at("se").get<double>(),
                               c.at("frames").get<std::size_t>()};
                r.cell_means[cs.label] = cs.mean;
                r.cells.push_back(std::move(cs));
            }
            report.entries.push_back(std::move(e));
        }
        for (const auto& o : root.at("summary")) {
            report.summary.push_back(
                ModelSummary{o.at("model_id").get<std::string>(), o.at("modeled").get<int>(), o.at("planned").get<int>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("report JSON: ") + e.what());
    }
    if (report.family.size() != report.entries.size()) {
        throw Error(ErrorKind::Parse, "report family size does not match its results");
    }
    return report;
}

}  // namespace zeroprobe
