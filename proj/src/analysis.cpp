#include "zeroprobe/analysis.hpp"

#include "zeroprobe/error.hpp"

#include <cmath>

namespace zeroprobe {

namespace {

ModelSpec spec_from_columns(const ExperimentData& data, const std::vector<std::pair<std::string, Eigen::VectorXd>>& cols,
                            Criterion criterion) {
    const auto n = data.surprisal.size();
    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(cols.size()) + 1);
    std::vector<std::string> names{"(Intercept)"};
    x.col(0).setOnes();
    for (std::size_t c = 0; c < cols.size(); ++c) {
        x.col(static_cast<Eigen::Index>(c) + 1) = cols[c].second;
        names.push_back(cols[c].first);
    }
    return make_model_spec(data.surprisal, std::move(x), data.frames, criterion, std::move(names));
}

}  // namespace

bool model_covers(const StimulusSet& stimuli, const ScoreSet& scores, std::string_view model_id,
                  ExperimentId experiment) {
    for (const auto* s : stimuli.experiment(experiment)) {
        if (scores.find(model_id, s->stimulus_id)) return true;
    }
    return false;
}

ExperimentData collect_experiment(const StimulusSet& stimuli, const ScoreSet& scores, std::string_view model_id,
                                  ExperimentId experiment) {
    const auto& d = design(experiment);
    const auto balance = validate_balance(stimuli, d);
    if (balance.frames.empty()) {
        throw Error(ErrorKind::Validation, "no stimuli for " + std::string(to_string(experiment)));
    }
    if (!balance.all_complete()) {
        for (const auto& f : balance.frames) {
            if (!f.complete) {
                throw Error(ErrorKind::Validation, "frame '" + f.frame_id + "' of " + std::string(to_string(experiment)) +
                                                       " is incomplete");
            }
        }
    }

    ExperimentData data;
    data.experiment = experiment;
    data.model_id = std::string(model_id);
    std::vector<double> values;
    int frame_index = 0;
    for (const auto& [frame_id, members] : stimuli.frames(experiment)) {
        data.frame_ids.push_back(frame_id);
        for (const auto* s : members) {
            const auto* record = scores.find(model_id, s->stimulus_id);
            if (!record) {
                throw Error(ErrorKind::IncompleteScores,
                            "model '" + std::string(model_id) + "' has no scores for stimulus '" + s->stimulus_id + "'");
            }
            data.stimuli.push_back(s);
            data.frames.push_back(frame_index);
            values.push_back(main_clause_surprisal(*s, *record).surprisal);
        }
        ++frame_index;
    }
    data.surprisal = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    return data;
}

Eigen::VectorXd deviation_column(const std::vector<const Stimulus*>& stimuli, const Factor& factor) {
    Eigen::VectorXd col(static_cast<Eigen::Index>(stimuli.size()));
    for (std::size_t i = 0; i < stimuli.size(); ++i) {
        const auto level = stimuli[i]->level(factor.name);
        if (!factor.has_level(level)) {
            throw Error(ErrorKind::Validation, "level '" + level + "' not declared for factor '" + factor.name + "'");
        }
        col[static_cast<Eigen::Index>(i)] = level == factor.levels[0] ? 1.0 : -1.0;
    }
    return col;
}

std::vector<CellSummary> summarize_cells(const ExperimentData& data, const ExperimentDesign& design,
                                         const std::vector<std::string>& factors) {
    ExperimentDesign sub{design.id, {}, {}};
    for (const auto& name : factors) sub.factors.push_back(design.factor(name));

    std::vector<CellSummary> out;
    const auto n_frames = data.frame_ids.size();
    for (const auto& cell : sub.cells()) {
        std::vector<double> sum(n_frames, 0.0);
        std::vector<int> count(n_frames, 0);
        for (std::size_t i = 0; i < data.stimuli.size(); ++i) {
            bool match = true;
            for (const auto& [name, level] : cell) match = match && data.stimuli[i]->level(name) == level;
            if (!match) continue;
            sum[static_cast<std::size_t>(data.frames[i])] += data.surprisal[static_cast<Eigen::Index>(i)];
            ++count[static_cast<std::size_t>(data.frames[i])];
        }
        std::vector<double> per_frame;
        for (std::size_t f = 0; f < n_frames; ++f) {
            if (count[f]) per_frame.push_back(sum[f] / count[f]);
        }
        CellSummary cs{cell_label(cell), 0.0, 0.0, per_frame.size()};
        if (!per_frame.empty()) {
            double mean = 0.0;
            for (double v : per_frame) mean += v;
            mean /= static_cast<double>(per_frame.size());
            double ss = 0.0;
            for (double v : per_frame) ss += (v - mean) * (v - mean);
            cs.mean = mean;
            if (per_frame.size() > 1) {
                const double k = static_cast<double>(per_frame.size());
                cs.se = std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
            }
        }
        out.push_back(std::move(cs));
    }
    return out;
}

TestResult run_planned_test(const ExperimentData& data, const ExperimentDesign& design, const PlannedTest& test,
                            const LmmOptions& options) {
    TestResult result;
    switch (test.kind) {
        case TestKind::LrtMain: {
            const auto& f = design.factor(test.factors.at(0));
            auto null_fit = fit_lmm(spec_from_columns(data, {}, Criterion::ML), options);
            auto full_fit = fit_lmm(spec_from_columns(data, {{f.name, deviation_column(data.stimuli, f)}}, Criterion::ML),
                                    options);
            result = likelihood_ratio_test(null_fit, full_fit);
            break;
        }
        case TestKind::AnovaType3Main:
        case TestKind::LrtInteraction: {
            const auto& a = design.factors.at(0);
            const auto& b = design.factors.at(1);
            const auto ca = deviation_column(data.stimuli, a);
            const auto cb = deviation_column(data.stimuli, b);
            const Eigen::VectorXd cab = ca.cwiseProduct(cb);
            std::vector<std::pair<std::string, Eigen::VectorXd>> mains = {{a.name, ca}, {b.name, cb}};
            auto full_cols = mains;
            full_cols.emplace_back(a.name + ":" + b.name, cab);
            if (test.kind == TestKind::LrtInteraction) {
                auto null_fit = fit_lmm(spec_from_columns(data, mains, Criterion::ML), options);
                auto full_fit = fit_lmm(spec_from_columns(data, full_cols, Criterion::ML), options);
                result = likelihood_ratio_test(null_fit, full_fit);
            } else {
                auto fit = fit_lmm(spec_from_columns(data, full_cols, Criterion::REML), options);
                Eigen::VectorXd contrast = Eigen::VectorXd::Zero(fit.spec.p());
                const auto target = test.factors.at(0);
                for (Eigen::Index c = 0; c < fit.spec.p(); ++c) {
                    if (fit.spec.column_names[static_cast<std::size_t>(c)] == target) contrast[c] = 1.0;
                }
                result = satterthwaite_anova(fit, contrast);
            }
            break;
        }
    }

    result.test_id = test.test_id;
    result.model_id = data.model_id;
    result.experiment = data.experiment;
    result.kind = test.kind;
    result.cells = summarize_cells(data, design, test.factors);
    for (const auto& c : result.cells) result.cell_means[c.label] = c.mean;
    result.direction_ok = direction_check(result.cell_means, test.expected);
    return result;
}

}  // namespace zeroprobe
