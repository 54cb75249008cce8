#pragma once

// Linear mixed models with a single random intercept:
//
//   y = X beta + Z b + e,   b ~ N(0, sigma2_b I_q),   e ~ N(0, sigma2_e I_n)
//
// fitted by ML or REML through the deviance profiled over beta and sigma2_e,
// leaving one relative standard deviation theta = sqrt(sigma2_b / sigma2_e).

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

namespace zeroprobe {

enum class Criterion { ML, REML };

std::string_view to_string(Criterion c);

struct ModelSpec {
    Eigen::VectorXd response;              // n
    Eigen::MatrixXd design;                // n x p, first column all ones
    std::vector<int> groups;               // n, 0-based group index
    int n_groups = 0;
    Criterion criterion = Criterion::ML;
    std::vector<std::string> column_names;  // optional, p entries when present

    Eigen::Index n() const { return response.size(); }
    Eigen::Index p() const { return design.cols(); }
};

/// Builds and validates a spec. Group labels may be arbitrary non-negative
/// ids; they are compacted to 0..q-1 in order of first appearance.
///
/// Throws Validation (shape, n < p + 1, non-intercept first column) or
/// SingularDesign (X not of full column rank).
ModelSpec make_model_spec(Eigen::VectorXd response, Eigen::MatrixXd design, const std::vector<int>& groups,
                          Criterion criterion, std::vector<std::string> column_names = {});

void validate(const ModelSpec& spec);

struct LmmOptions {
    double theta_max = 1e4;
    double tolerance = 1e-8;
    int max_iterations = 200;
};

struct LmmFit {
    ModelSpec spec;
    Eigen::VectorXd beta;
    double sigma2_e = 0.0;
    double sigma2_b = 0.0;
    double theta = 0.0;
    double deviance = 0.0;  // -2 loglik (ML) or the REML criterion
    double loglik = 0.0;
    Eigen::MatrixXd vcov_beta;
    Criterion criterion = Criterion::ML;
    bool converged = false;
    bool at_lower_bound = false;  // theta == 0: random intercept variance estimated as zero
    bool at_upper_bound = false;  // theta == theta_max: residual variance driven toward zero
    int iterations = 0;
};

/// -2 * profiled log-likelihood at theta (ML), or the REML criterion.
/// Throws SingularDesign if X loses rank once the random effects are absorbed.
double profiled_deviance(double theta, const ModelSpec& spec);

/// Minimizes the profiled deviance over [0, theta_max] and recovers beta,
/// variance components and vcov(beta) at the optimum. theta = 0 is a legal
/// (converged) boundary solution.
///
/// Throws NonConvergence or SingularDesign.
LmmFit fit_lmm(const ModelSpec& spec, const LmmOptions& options = {});

/// REML criterion (-2 restricted log-likelihood) evaluated directly at the
/// variance parameters, with beta at its GLS estimate. Agrees with
/// profiled_deviance under REML when sigma2_e is at its profiled optimum.
/// sigma2_b may be slightly negative as long as V stays positive definite.
double reml_criterion(double sigma2_b, double sigma2_e, const ModelSpec& spec);

/// (X' V^-1 X)^-1 with V = sigma2_e I + sigma2_b Z Z'.
Eigen::MatrixXd beta_covariance(double sigma2_b, double sigma2_e, const ModelSpec& spec);

}  // namespace zeroprobe
