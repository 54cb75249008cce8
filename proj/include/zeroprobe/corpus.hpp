#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace zeroprobe {

enum class ExperimentId { Exp1, Exp2Arg, Exp2Form, Exp4 };

std::string_view to_string(ExperimentId id);
std::optional<ExperimentId> parse_experiment_id(std::string_view s);
const std::array<ExperimentId, 4>& all_experiments();

/// A two-level factor. Under deviation coding levels[0] is coded +1 and
/// levels[1] is coded -1.
struct Factor {
    std::string name;
    std::array<std::string, 2> levels;

    bool has_level(std::string_view level) const { return levels[0] == level || levels[1] == level; }
};

enum class TestKind { LrtMain, AnovaType3Main, LrtInteraction };

std::string_view to_string(TestKind kind);
std::optional<TestKind> parse_test_kind(std::string_view s);

/// Sign contract derived from the human reading-time result.
///
/// Main effects: mean surprisal at `faster_level` of `factor` must be strictly
/// below the mean at `slower_level`.
///
/// Interactions: the slower-minus-faster gap on `factor`, measured within
/// `moderator == stronger_level`, must strictly exceed the same gap within
/// `moderator == weaker_level`.
struct ExpectedDirection {
    std::string factor;
    std::string faster_level;
    std::string slower_level;
    std::string moderator;
    std::string stronger_level;
    std::string weaker_level;

    bool is_interaction() const { return !moderator.empty(); }
};

struct PlannedTest {
    std::string test_id;
    TestKind kind;
    std::vector<std::string> factors;  // 1 for main effects, 2 for the interaction
    ExpectedDirection expected;
};

/// name -> level, ordered so labels and serialization are deterministic.
using FactorAssignment = std::map<std::string, std::string>;

/// "name=level;name=level" in name order.
std::string cell_label(const FactorAssignment& cell);
FactorAssignment parse_factor_assignment(std::string_view s);

struct ExperimentDesign {
    ExperimentId id;
    std::vector<Factor> factors;
    std::vector<PlannedTest> tests;

    const Factor& factor(std::string_view name) const;
    /// Full crossing of factor levels, in declaration order.
    std::vector<FactorAssignment> cells() const;
};

const ExperimentDesign& design(ExperimentId id);

struct Stimulus {
    std::string stimulus_id;
    ExperimentId experiment;
    std::string frame_id;
    FactorAssignment factors;
    std::string text;                   // UTF-8
    std::size_t main_clause_start = 0;  // scalar-value offset of the first main-clause character

    std::string level(std::string_view factor) const;
    std::string main_clause() const;
};

/// Validated, immutable collection of stimuli.
class StimulusSet {
public:
    StimulusSet() = default;

    /// Validates every invariant and normalizes main-clause boundaries past
    /// leading whitespace. Throws Error(Validation).
    explicit StimulusSet(std::vector<Stimulus> stimuli);

    const std::vector<Stimulus>& stimuli() const { return stimuli_; }
    std::size_t size() const { return stimuli_.size(); }
    bool empty() const { return stimuli_.empty(); }

    const Stimulus* find(std::string_view stimulus_id) const;
    std::vector<const Stimulus*> experiment(ExperimentId id) const;
    /// frame_id -> stimuli of that frame, frames ordered by id.
    std::map<std::string, std::vector<const Stimulus*>> frames(ExperimentId id) const;
    /// Experiments with at least one stimulus, in enum order.
    std::vector<ExperimentId> experiments() const;

    friend bool operator==(const StimulusSet& a, const StimulusSet& b);

private:
    std::vector<Stimulus> stimuli_;
    std::unordered_map<std::string, std::size_t> index_;
};

bool operator==(const Stimulus& a, const Stimulus& b);

/// Reads the stimulus file. CSV unless the first non-blank byte is '['.
StimulusSet load_stimuli(const std::filesystem::path& path);
StimulusSet parse_stimuli_csv(std::string_view csv);
StimulusSet parse_stimuli_json(std::string_view json);

std::string to_csv(const StimulusSet& set);

/// Bundled minimal-pair corpus. Parsed once; identical across calls.
const StimulusSet& builtin_corpus();
std::string_view builtin_corpus_csv();

struct FrameBalance {
    std::string frame_id;
    std::vector<std::string> present;  // cell labels
    std::vector<std::string> missing;
    bool complete = false;
};

struct BalanceReport {
    ExperimentId experiment;
    std::vector<FrameBalance> frames;

    bool all_complete() const;
    std::size_t incomplete_count() const;
};

/// A frame is complete iff it has exactly one stimulus per cell of the crossing.
BalanceReport validate_balance(const StimulusSet& set, const ExperimentDesign& design);

}  // namespace zeroprobe
