#pragma once

#include "zeroprobe/corpus.hpp"
#include "zeroprobe/lmm.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace zeroprobe {

/// Per-condition summary of the response, used for direction checks and figures.
struct CellSummary {
    std::string label;  // cell_label(), e.g. "antecedent=subject"
    double mean = 0.0;  // nats
    double se = 0.0;    // sample SD over frames / sqrt(frames)
    std::size_t frames = 0;
};

struct TestResult {
    std::string test_id;
    std::string model_id;
    ExperimentId experiment = ExperimentId::Exp1;
    TestKind kind = TestKind::LrtMain;
    double statistic = 0.0;  // chi-square (LRT) or F
    int df1 = 1;
    std::optional<double> df2;  // Satterthwaite denominator df; absent for LRTs
    bool df2_fallback = false;  // Hessian was not positive definite, df2 = n - p
    double p_raw = 1.0;
    double p_adjusted = 1.0;
    bool direction_ok = false;
    std::map<std::string, double> cell_means;
    std::vector<CellSummary> cells;
    bool boundary_fit = false;  // some fit hit theta = 0 or theta_max
};

/// 2 * (loglik_full - loglik_null), floored at 0, against chi-square with
/// p_full - p_null degrees of freedom.
///
/// Both fits must be ML on the same response and grouping, with the null
/// design's columns inside the span of the full design.
/// Throws CriterionMismatch or NotNested.
TestResult likelihood_ratio_test(const LmmFit& null_fit, const LmmFit& full_fit);

struct SatterthwaiteOptions {
    double relative_step = 1e-4;
    double absolute_floor = 1e-8;
};

/// Single-df Type III F test of L beta = 0 on a REML fit, with denominator
/// degrees of freedom from Satterthwaite's approximation:
///
///   df2 = 2 f(v)^2 / (g' A g),   f(v) = L C(v) L',  g = grad f,  A = 2 H^-1
///
/// where v = (sigma2_b, sigma2_e), C(v) = (X' V^-1 X)^-1 and H is the Hessian
/// of the REML criterion in v. Derivatives are central finite differences.
///
/// Throws NotReml or InvalidContrast (zero or mis-sized L).
TestResult satterthwaite_anova(const LmmFit& fit, const Eigen::VectorXd& contrast,
                               const SatterthwaiteOptions& options = {});

/// Benjamini-Hochberg step-up adjustment, returned in input order.
std::vector<double> bh_adjust(std::span<const double> p_values);

/// Throws MissingCell if a cell named by the contract is absent.
bool direction_check(const std::map<std::string, double>& cell_means, const ExpectedDirection& expected);

/// "***" p<0.001, "**" p<0.01, "*" p<0.05, "." p<0.1, otherwise "ns".
std::string significance_band(double p);

/// Significant after correction and in the human direction.
bool successfully_modeled(const TestResult& result, double alpha);

}  // namespace zeroprobe
