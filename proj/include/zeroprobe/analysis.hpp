#pragma once

// Turns stimuli + token scores into model specs and planned-test results for
// one language model.

#include "zeroprobe/corpus.hpp"
#include "zeroprobe/inference.hpp"
#include "zeroprobe/lmm.hpp"
#include "zeroprobe/scoring.hpp"

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

namespace zeroprobe {

struct ExperimentData {
    ExperimentId experiment = ExperimentId::Exp1;
    std::string model_id;
    std::vector<const Stimulus*> stimuli;  // frame-major, frames ordered by id
    Eigen::VectorXd surprisal;             // main-clause surprisal per stimulus, nats
    std::vector<int> frames;               // frame index per stimulus
    std::vector<std::string> frame_ids;
};

/// True when `scores` holds at least one record for a stimulus of `experiment`.
bool model_covers(const StimulusSet& stimuli, const ScoreSet& scores, std::string_view model_id,
                  ExperimentId experiment);

/// Collects main-clause surprisal for every stimulus of the experiment.
/// Throws Validation if any frame is incomplete and IncompleteScores if the
/// model lacks a record for some stimulus.
ExperimentData collect_experiment(const StimulusSet& stimuli, const ScoreSet& scores, std::string_view model_id,
                                  ExperimentId experiment);

/// +1 for factor.levels[0], -1 for factor.levels[1].
Eigen::VectorXd deviation_column(const std::vector<const Stimulus*>& stimuli, const Factor& factor);

/// Per-cell means and standard errors over the crossing of `factors`.
std::vector<CellSummary> summarize_cells(const ExperimentData& data, const ExperimentDesign& design,
                                         const std::vector<std::string>& factors);

/// Fits the models a planned test needs and runs it. p_adjusted is left equal
/// to p_raw; correction happens over the whole family later.
TestResult run_planned_test(const ExperimentData& data, const ExperimentDesign& design, const PlannedTest& test,
                            const LmmOptions& options = {});

}  // namespace zeroprobe
