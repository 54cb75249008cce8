#include "zeroprobe/scoring.hpp"

#include "zeroprobe/error.hpp"
#include "zeroprobe/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace zeroprobe {

namespace {

std::u32string strip_space(std::u32string_view s) {
    std::u32string out;
    for (char32_t c : s) {
        if (!text::is_space(c)) out.push_back(c);
    }
    return out;
}

std::u32string normalize_surface(std::string_view surface) {
    auto cps = text::decode_utf8(surface);
    std::u32string_view v(cps);
    if (v.substr(0, 2) == U"##") v.remove_prefix(2);
    std::u32string out;
    for (char32_t c : v) {
        if (c == 0x2581 || c == 0x0120 || c == 0x010A) continue;  // ▁ Ġ Ċ space/newline glyphs
        if (!text::is_space(c)) out.push_back(c);
    }
    return out;
}

bool is_word_char(char32_t c) {
    return (c >= U'0' && c <= U'9') || (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z') || c >= 0x80;
}

std::string record_where(const TokenScoreRecord& r) {
    return "record (" + r.model_id + ", " + r.stimulus_id + ")";
}

}  // namespace

std::string_view to_string(ScoringMode mode) {
    return mode == ScoringMode::Autoregressive ? "autoregressive" : "masked_pll";
}

std::optional<ScoringMode> parse_scoring_mode(std::string_view s) {
    if (s == "autoregressive") return ScoringMode::Autoregressive;
    if (s == "masked_pll") return ScoringMode::MaskedPll;
    return std::nullopt;
}

std::string_view to_string(Region region) {
    return region == Region::MainClause ? "MAIN_CLAUSE" : "SUBORDINATE";
}

bool operator==(const TokenScore& a, const TokenScore& b) {
    return a.surface == b.surface && a.char_start == b.char_start && a.char_end == b.char_end && a.logprob == b.logprob;
}

bool operator==(const TokenScoreRecord& a, const TokenScoreRecord& b) {
    return a.stimulus_id == b.stimulus_id && a.model_id == b.model_id && a.mode == b.mode && a.tokens == b.tokens;
}

bool operator==(const ScoreSet& a, const ScoreSet& b) { return a.records_ == b.records_; }

void ScoreSet::insert(TokenScoreRecord record) {
    Key key{record.model_id, record.stimulus_id};
    if (records_.count(key)) throw Error(ErrorKind::DuplicateRecord, record_where(record) + " appears twice");
    records_.emplace(std::move(key), std::move(record));
}

void ScoreSet::merge(ScoreSet other) {
    for (auto& [key, record] : other.records_) insert(std::move(record));
}

const TokenScoreRecord* ScoreSet::find(std::string_view model_id, std::string_view stimulus_id) const {
    auto it = records_.find(Key{std::string(model_id), std::string(stimulus_id)});
    return it == records_.end() ? nullptr : &it->second;
}

std::vector<std::string> ScoreSet::models() const {
    std::vector<std::string> out;
    for (const auto& [key, record] : records_) {
        if (out.empty() || out.back() != key.first) out.push_back(key.first);
    }
    return out;
}

void validate_record(const TokenScoreRecord& record, const Stimulus& stimulus) {
    const auto where = record_where(record);
    if (record.tokens.empty()) throw Error(ErrorKind::SpanMismatch, where + " has no tokens");
    const auto cps = text::decode_utf8(stimulus.text);
    const std::u32string_view txt(cps);

    auto require_blank = [&](std::size_t from, std::size_t to) {
        for (std::size_t k = from; k < to; ++k) {
            if (!text::is_space(txt[k])) {
                throw Error(ErrorKind::SpanMismatch,
                            where + ": character " + std::to_string(k) + " is not covered by any token");
            }
        }
    };

    std::size_t prev_end = 0;
    for (std::size_t i = 0; i < record.tokens.size(); ++i) {
        const auto& t = record.tokens[i];
        const auto tw = where + " token " + std::to_string(i);
        if (t.char_start >= t.char_end || t.char_end > txt.size()) {
            throw Error(ErrorKind::SpanMismatch, tw + ": span [" + std::to_string(t.char_start) + ", " +
                                                     std::to_string(t.char_end) + ") invalid for text of length " +
                                                     std::to_string(txt.size()));
        }
        if (t.char_start < prev_end) throw Error(ErrorKind::SpanMismatch, tw + ": overlaps or precedes previous token");
        require_blank(prev_end, t.char_start);
        prev_end = t.char_end;

        if (normalize_surface(t.surface) != strip_space(txt.substr(t.char_start, t.char_end - t.char_start))) {
            throw Error(ErrorKind::SpanMismatch, tw + ": surface '" + t.surface + "' does not match text span '" +
                                                     text::encode_utf8(txt.substr(t.char_start, t.char_end - t.char_start)) +
                                                     "'");
        }

        if (!t.logprob) {
            if (i == 0 && record.mode == ScoringMode::Autoregressive) continue;
            throw Error(ErrorKind::NonFiniteLogprob,
                        tw + ": missing logprob (only the first autoregressive token may be unscored)");
        }
        if (!std::isfinite(*t.logprob)) throw Error(ErrorKind::NonFiniteLogprob, tw + ": logprob is not finite");
        if (*t.logprob > 0.0) {
            throw Error(ErrorKind::NonFiniteLogprob, tw + ": positive logprob " + std::to_string(*t.logprob));
        }
    }
    require_blank(prev_end, txt.size());
}

ScoreSet parse_token_scores(std::string_view jsonl, const StimulusSet& stimuli) {
    ScoreSet out;
    std::size_t line_no = 0;
    while (!jsonl.empty()) {
        ++line_no;
        auto nl = jsonl.find('\n');
        auto line = jsonl.substr(0, nl);
        jsonl.remove_prefix(nl == std::string_view::npos ? jsonl.size() : nl + 1);
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

        const std::string where = "line " + std::to_string(line_no);
        TokenScoreRecord record;
        try {
            auto o = nlohmann::json::parse(line);
            record.stimulus_id = o.at("stimulus_id").get<std::string>();
            record.model_id = o.at("model_id").get<std::string>();
            auto mode = parse_scoring_mode(o.at("scoring_mode").get<std::string>());
            if (!mode) throw Error(ErrorKind::Parse, where + ": unknown scoring_mode");
            record.mode = *mode;
            for (const auto& t : o.at("tokens")) {
                TokenScore ts;
                ts.surface = t.at("surface").get<std::string>();
                const auto& s = t.at("char_start");
                const auto& e = t.at("char_end");
                if (!s.is_number_unsigned() || !e.is_number_unsigned()) {
                    throw Error(ErrorKind::Parse, where + ": token offsets must be non-negative integers");
                }
                ts.char_start = s.get<std::size_t>();
                ts.char_end = e.get<std::size_t>();
                const auto& lp = t.at("logprob");
                if (!lp.is_null()) {
                    if (!lp.is_number()) throw Error(ErrorKind::Parse, where + ": logprob must be a number or null");
                    ts.logprob = lp.get<double>();
                }
                record.tokens.push_back(std::move(ts));
            }
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::Parse, where + ": " + e.what());
        }
        if (record.model_id.empty()) throw Error(ErrorKind::Parse, where + ": empty model_id");

        const auto* stimulus = stimuli.find(record.stimulus_id);
        if (!stimulus) throw Error(ErrorKind::UnknownStimulus, where + ": no stimulus '" + record.stimulus_id + "'");
        validate_record(record, *stimulus);
        out.insert(std::move(record));
    }
    return out;
}

ScoreSet ingest_token_scores(const std::filesystem::path& path, const StimulusSet& stimuli) {
    try {
        return parse_token_scores(text::read_file(path), stimuli);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Io) throw;
        throw Error(e.kind(), path.string() + ": " + std::string(e.what()));
    }
}

std::string to_jsonl(const ScoreSet& scores) {
    std::string out;
    for (const auto& [key, r] : scores.records()) {
        nlohmann::ordered_json o;
        o["stimulus_id"] = r.stimulus_id;
        o["model_id"] = r.model_id;
        o["scoring_mode"] = std::string(to_string(r.mode));
        auto tokens = nlohmann::ordered_json::array();
        for (const auto& t : r.tokens) {
            nlohmann::ordered_json jt;
            jt["surface"] = t.surface;
            jt["char_start"] = t.char_start;
            jt["char_end"] = t.char_end;
            jt["logprob"] = t.logprob ? nlohmann::ordered_json(*t.logprob) : nlohmann::ordered_json(nullptr);
            tokens.push_back(std::move(jt));
        }
        o["tokens"] = std::move(tokens);
        out += o.dump();
        out.push_back('\n');
    }
    return out;
}

Region classify_token(std::u32string_view text, std::size_t main_clause_start, std::size_t char_start,
                      std::size_t char_end) {
    std::size_t anchor = char_start;
    for (std::size_t k = char_start; k < char_end && k < text.size(); ++k) {
        if (!text::is_space(text[k])) {
            anchor = k;
            break;
        }
    }
    return anchor >= main_clause_start ? Region::MainClause : Region::Subordinate;
}

RegionPartition assign_regions(const Stimulus& stimulus, const TokenScoreRecord& record) {
    const auto cps = text::decode_utf8(stimulus.text);
    RegionPartition out;
    for (std::size_t i = 0; i < record.tokens.size(); ++i) {
        const auto& t = record.tokens[i];
        if (classify_token(cps, stimulus.main_clause_start, t.char_start, t.char_end) == Region::MainClause) {
            out.main_clause.push_back(i);
        } else {
            out.subordinate.push_back(i);
        }
    }
    if (out.main_clause.empty()) {
        throw Error(ErrorKind::EmptyMainClause, record_where(record) + ": no token lands in the main clause");
    }
    return out;
}

double summed_surprisal(std::span<const TokenScore> tokens) {
    if (tokens.empty()) throw Error(ErrorKind::EmptyMainClause, "surprisal of an empty token list");
    double total = 0.0;
    for (const auto& t : tokens) {
        if (!t.logprob || !std::isfinite(*t.logprob)) {
            throw Error(ErrorKind::NonFiniteLogprob, "token '" + t.surface + "' has no finite logprob");
        }
        total -= *t.logprob;
    }
    return total;
}

RegionSurprisal region_surprisal(const TokenScoreRecord& record, std::span<const std::size_t> token_indices,
                                 Region region) {
    std::vector<TokenScore> tokens;
    tokens.reserve(token_indices.size());
    for (auto i : token_indices) tokens.push_back(record.tokens.at(i));
    return RegionSurprisal{record.stimulus_id, record.model_id, region, summed_surprisal(tokens), tokens.size()};
}

RegionSurprisal main_clause_surprisal(const Stimulus& stimulus, const TokenScoreRecord& record) {
    auto part = assign_regions(stimulus, record);
    return region_surprisal(record, part.main_clause, Region::MainClause);
}

std::vector<Span> toy_tokenize(std::u32string_view text) {
    std::vector<Span> out;
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t start = i;
        while (i < text.size() && text::is_space(text[i])) ++i;
        if (i == text.size()) {
            if (out.empty()) break;
            out.back().end = text.size();
            break;
        }
        if (is_word_char(text[i])) {
            while (i < text.size() && is_word_char(text[i])) ++i;
        } else {
            ++i;
        }
        out.push_back(Span{start, i});
    }
    return out;
}

UnigramTable UnigramTable::from_corpus(const StimulusSet& corpus) {
    UnigramTable table;
    for (const auto& s : corpus.stimuli()) {
        auto cps = text::decode_utf8(s.text);
        for (const auto& span : toy_tokenize(cps)) {
            auto word = text::encode_utf8(strip_space(std::u32string_view(cps).substr(span.start, span.end - span.start)));
            ++table.counts_[word];
            ++table.total_;
        }
    }
    return table;
}

std::size_t UnigramTable::count(std::string_view word) const {
    auto it = counts_.find(word);
    return it == counts_.end() ? 0 : it->second;
}

double UnigramTable::logprob(std::string_view word) const {
    return std::log(static_cast<double>(count(word) + 1) / static_cast<double>(total_ + counts_.size()));
}

const UnigramTable& builtin_unigram_table() {
    static const UnigramTable table = UnigramTable::from_corpus(builtin_corpus());
    return table;
}

ScoreSet toy_score(const StimulusSet& stimuli) {
    const auto& table = builtin_unigram_table();
    ScoreSet out;
    for (const auto& s : stimuli.stimuli()) {
        auto cps = text::decode_utf8(s.text);
        TokenScoreRecord r{s.stimulus_id, std::string(kToyModelId), ScoringMode::Autoregressive, {}};
        for (const auto& span : toy_tokenize(cps)) {
            auto piece = std::u32string_view(cps).substr(span.start, span.end - span.start);
            auto word = text::encode_utf8(strip_space(piece));
            r.tokens.push_back(TokenScore{text::encode_utf8(piece), span.start, span.end, table.logprob(word)});
        }
        out.insert(std::move(r));
    }
    return out;
}

}  // namespace zeroprobe
