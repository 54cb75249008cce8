#pragma once

#include "zeroprobe/corpus.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace zeroprobe {

enum class ScoringMode { Autoregressive, MaskedPll };

std::string_view to_string(ScoringMode mode);  // "autoregressive" | "masked_pll"
std::optional<ScoringMode> parse_scoring_mode(std::string_view s);

struct TokenScore {
    std::string surface;
    std::size_t char_start = 0;  // scalar-value offsets into the stimulus text, [start, end)
    std::size_t char_end = 0;
    std::optional<double> logprob;  // natural log; absent only for an unscored sequence-initial token
};

struct TokenScoreRecord {
    std::string stimulus_id;
    std::string model_id;
    ScoringMode mode = ScoringMode::Autoregressive;
    std::vector<TokenScore> tokens;
};

/// Validated token scores keyed by (model_id, stimulus_id).
class ScoreSet {
public:
    using Key = std::pair<std::string, std::string>;

    /// Throws Error(DuplicateRecord) if the key is already present.
    void insert(TokenScoreRecord record);
    void merge(ScoreSet other);

    const TokenScoreRecord* find(std::string_view model_id, std::string_view stimulus_id) const;
    std::vector<std::string> models() const;
    const std::map<Key, TokenScoreRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    friend bool operator==(const ScoreSet& a, const ScoreSet& b);

private:
    std::map<Key, TokenScoreRecord> records_;
};

bool operator==(const TokenScore& a, const TokenScore& b);
bool operator==(const TokenScoreRecord& a, const TokenScoreRecord& b);

/// Checks span tiling, surface agreement and logprob rules against the
/// stimulus text. Throws SpanMismatch or NonFiniteLogprob.
///
/// Tiling: spans are non-empty, ordered and non-overlapping, and every
/// non-whitespace character of the text lies inside some span. A surface
/// matches its span when both agree after dropping whitespace, leading "##"
/// continuation markers and the U+2581 / U+0120 space glyphs.
void validate_record(const TokenScoreRecord& record, const Stimulus& stimulus);

/// Parses the JSON Lines interchange format and validates every record
/// against `stimuli`. Throws Parse, UnknownStimulus, SpanMismatch,
/// NonFiniteLogprob or DuplicateRecord.
ScoreSet parse_token_scores(std::string_view jsonl, const StimulusSet& stimuli);
ScoreSet ingest_token_scores(const std::filesystem::path& path, const StimulusSet& stimuli);

/// One JSON object per line, records in key order.
std::string to_jsonl(const ScoreSet& scores);

enum class Region { Subordinate, MainClause };

std::string_view to_string(Region region);

/// A token belongs to the main clause iff its first non-whitespace character
/// sits at or after `main_clause_start`. All-whitespace tokens are placed by
/// their start offset.
Region classify_token(std::u32string_view text, std::size_t main_clause_start, std::size_t char_start,
                      std::size_t char_end);

struct RegionPartition {
    std::vector<std::size_t> subordinate;  // token indices, ascending
    std::vector<std::size_t> main_clause;
};

/// Throws EmptyMainClause when no token lands in the main clause.
RegionPartition assign_regions(const Stimulus& stimulus, const TokenScoreRecord& record);

struct RegionSurprisal {
    std::string stimulus_id;
    std::string model_id;
    Region region = Region::MainClause;
    double surprisal = 0.0;  // nats
    std::size_t token_count = 0;
};

/// Sum of -logprob over the tokens. Requires at least one token and a
/// finite logprob on each.
double summed_surprisal(std::span<const TokenScore> tokens);

RegionSurprisal region_surprisal(const TokenScoreRecord& record, std::span<const std::size_t> token_indices,
                                 Region region);

RegionSurprisal main_clause_surprisal(const Stimulus& stimulus, const TokenScoreRecord& record);

// ---------------------------------------------------------------------------
// Toy scorer: a deterministic stand-in for a language model.

inline constexpr std::string_view kToyModelId = "toy-unigram";

struct Span {
    std::size_t start = 0;
    std::size_t end = 0;
};

/// Words are maximal runs of letters and digits (any non-ASCII scalar counts
/// as a letter); every other visible character is its own token. Whitespace
/// is folded into the following token, trailing whitespace into the last.
std::vector<Span> toy_tokenize(std::u32string_view text);

/// Add-one smoothed unigram model: logprob(w) = ln((count(w) + 1) / (N + V)).
class UnigramTable {
public:
    static UnigramTable from_corpus(const StimulusSet& corpus);

    std::size_t count(std::string_view word) const;
    double logprob(std::string_view word) const;
    std::size_t total_tokens() const { return total_; }
    std::size_t vocabulary_size() const { return counts_.size(); }
    const std::map<std::string, std::size_t, std::less<>>& counts() const { return counts_; }

private:
    std::map<std::string, std::size_t, std::less<>> counts_;
    std::size_t total_ = 0;
};

/// Count table over the bundled corpus.
const UnigramTable& builtin_unigram_table();

/// Scores every stimulus with the builtin unigram table.
ScoreSet toy_score(const StimulusSet& stimuli);

}  // namespace zeroprobe
