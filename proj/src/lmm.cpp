#include "zeroprobe/lmm.hpp"

#include "zeroprobe/brent.hpp"
#include "zeroprobe/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

namespace zeroprobe {

namespace {

// With one random intercept, V / sigma2_e = I + rho Z Z' is block diagonal
// and each block inverts in closed form:
//
//   (I + rho 1 1')^-1 = I - rho / (1 + rho n_j) 1 1'
//
// so for A = [X y],  A' V~^-1 A = W + sum_j n_j / (1 + rho n_j) m_j m_j',
// where W is the within-group scatter of A and m_j its group means. Working
// from W and m_j keeps the large-rho limit free of cancellation.
class Absorbed {
public:
    explicit Absorbed(const ModelSpec& spec)
        : n_(spec.n()), p_(spec.p()), counts_(spec.n_groups, 0.0), means_(spec.n_groups, spec.p() + 1) {
        Eigen::MatrixXd a(n_, p_ + 1);
        a << spec.design, spec.response;
        means_.setZero();
        for (Eigen::Index i = 0; i < n_; ++i) {
            counts_[spec.groups[i]] += 1.0;
            means_.row(spec.groups[i]) += a.row(i);
        }
        for (int j = 0; j < spec.n_groups; ++j) means_.row(j) /= counts_[j];
        Eigen::MatrixXd centered(n_, p_ + 1);
        for (Eigen::Index i = 0; i < n_; ++i) centered.row(i) = a.row(i) - means_.row(spec.groups[i]);
        within_ = centered.transpose() * centered;
    }

    struct Eval {
        Eigen::LLT<Eigen::MatrixXd> xtvx;  // Cholesky of X' V~^-1 X
        Eigen::VectorXd beta;
        double prss = 0.0;        // (y - X beta)' V~^-1 (y - X beta)
        double logdet_v = 0.0;    // log |V~|
        double logdet_xtvx = 0.0;  // log |X' V~^-1 X|
    };

    Eval evaluate(double rho) const {
        Eigen::MatrixXd s = within_;
        double logdet_v = 0.0;
        for (std::size_t j = 0; j < counts_.size(); ++j) {
            const double nj = counts_[j];
            const double denom = 1.0 + rho * nj;
            if (!(denom > 0.0)) throw Error(ErrorKind::Validation, "variance parameters give a non-positive-definite V");
            logdet_v += std::log1p(rho * nj);
            s.noalias() += (nj / denom) * means_.row(static_cast<Eigen::Index>(j)).transpose() *
                           means_.row(static_cast<Eigen::Index>(j));
        }

        Eval out;
        out.logdet_v = logdet_v;
        const Eigen::MatrixXd sxx = s.topLeftCorner(p_, p_);
        out.xtvx.compute(sxx);
        if (out.xtvx.info() != Eigen::Success) {
            throw Error(ErrorKind::SingularDesign, "X' V^-1 X is not positive definite");
        }
        Eigen::VectorXd diag = out.xtvx.matrixLLT().diagonal();
        const double scale = sxx.diagonal().cwiseAbs().maxCoeff();
        for (Eigen::Index k = 0; k < p_; ++k) {
            if (!(diag[k] * diag[k] > 1e-12 * scale)) {
                throw Error(ErrorKind::SingularDesign, "design loses rank after absorbing the random intercept");
            }
        }
        out.logdet_xtvx = 2.0 * diag.array().log().sum();
        const Eigen::VectorXd sxy = s.topRightCorner(p_, 1);
        out.beta = out.xtvx.solve(sxy);
        out.prss = s(p_, p_) - sxy.dot(out.beta);
        if (!(out.prss > 0.0)) {
            throw Error(ErrorKind::SingularDesign, "response lies in the column space of the design");
        }
        return out;
    }

    double deviance(double theta, Criterion criterion) const {
        const auto e = evaluate(theta * theta);
        const double two_pi = 2.0 * std::numbers::pi;
        if (criterion == Criterion::ML) {
            const double n = static_cast<double>(n_);
            return e.logdet_v + n * (1.0 + std::log(two_pi * e.prss / n));
        }
        const double dof = static_cast<double>(n_ - p_);
        return e.logdet_v + e.logdet_xtvx + dof * (1.0 + std::log(two_pi * e.prss / dof));
    }

    Eigen::Index n() const { return n_; }
    Eigen::Index p() const { return p_; }

private:
    Eigen::Index n_;
    Eigen::Index p_;
    std::vector<double> counts_;
    Eigen::MatrixXd means_;
    Eigen::MatrixXd within_;
};

}  // namespace

std::string_view to_string(Criterion c) { return c == Criterion::ML ? "ML" : "REML"; }

void validate(const ModelSpec& spec) {
    const auto n = spec.n();
    const auto p = spec.p();
    if (spec.design.rows() != n || static_cast<Eigen::Index>(spec.groups.size()) != n) {
        throw Error(ErrorKind::Validation, "response, design and grouping lengths differ");
    }
    if (p < 1 || n < p + 1) {
        throw Error(ErrorKind::Validation, "need n >= p + 1 (n = " + std::to_string(n) + ", p = " + std::to_string(p) + ")");
    }
    if (!spec.column_names.empty() && static_cast<Eigen::Index>(spec.column_names.size()) != p) {
        throw Error(ErrorKind::Validation, "column_names must name every design column");
    }
    if (!(spec.design.col(0).array() == 1.0).all()) {
        throw Error(ErrorKind::Validation, "first design column must be the all-ones intercept");
    }
    if (!spec.response.allFinite() || !spec.design.allFinite()) {
        throw Error(ErrorKind::Validation, "non-finite value in response or design");
    }
    std::vector<int> used(static_cast<std::size_t>(std::max(spec.n_groups, 0)), 0);
    for (int g : spec.groups) {
        if (g < 0 || g >= spec.n_groups) throw Error(ErrorKind::Validation, "group index out of range");
        used[static_cast<std::size_t>(g)] = 1;
    }
    for (int u : used) {
        if (!u) throw Error(ErrorKind::Validation, "every group index must be used at least once");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(spec.design);
    qr.setThreshold(1e-10);
    if (qr.rank() < p) throw Error(ErrorKind::SingularDesign, "design matrix is not of full column rank");
}

ModelSpec make_model_spec(Eigen::VectorXd response, Eigen::MatrixXd design, const std::vector<int>& groups,
                          Criterion criterion, std::vector<std::string> column_names) {
    ModelSpec spec;
    spec.response = std::move(response);
    spec.design = std::move(design);
    spec.criterion = criterion;
    spec.column_names = std::move(column_names);
    std::unordered_map<int, int> compact;
    spec.groups.reserve(groups.size());
    for (int g : groups) {
        if (g < 0) throw Error(ErrorKind::Validation, "group ids must be non-negative");
        auto [it, inserted] = compact.emplace(g, static_cast<int>(compact.size()));
        spec.groups.push_back(it->second);
    }
    spec.n_groups = static_cast<int>(compact.size());
    validate(spec);
    return spec;
}

double profiled_deviance(double theta, const ModelSpec& spec) {
    if (!(theta >= 0.0)) throw Error(ErrorKind::Validation, "theta must be >= 0");
    return Absorbed(spec).deviance(theta, spec.criterion);
}

LmmFit fit_lmm(const ModelSpec& spec, const LmmOptions& options) {
    validate(spec);
    const Absorbed model(spec);
    auto deviance = [&](double theta) { return model.deviance(theta, spec.criterion); };

    auto result = brent_minimize(deviance, 0.0, options.theta_max, options.tolerance, options.max_iterations);
    if (!result.converged || !std::isfinite(result.fx)) {
        throw Error(ErrorKind::NonConvergence, "profiled deviance minimization did not converge in " +
                                                   std::to_string(options.max_iterations) + " iterations");
    }

    LmmFit fit;
    fit.spec = spec;
    fit.criterion = spec.criterion;
    fit.iterations = result.iterations;
    fit.converged = true;
    fit.theta = result.x;
    fit.deviance = result.fx;

    // Brent never evaluates the endpoints. The profile is flat in theta near
    // zero, so a lower-bound deviance within rounding of the interior one wins.
    const double flat = 1e-10 * std::max(1.0, std::fabs(fit.deviance));
    if (const double d0 = deviance(0.0); d0 <= fit.deviance + flat) {
        fit.theta = 0.0;
        fit.deviance = d0;
    }
    if (const double dmax = deviance(options.theta_max); dmax < fit.deviance) {
        fit.theta = options.theta_max;
        fit.deviance = dmax;
    }
    fit.at_lower_bound = fit.theta == 0.0;
    fit.at_upper_bound = fit.theta >= options.theta_max - options.tolerance;

    const auto e = model.evaluate(fit.theta * fit.theta);
    const double dof = spec.criterion == Criterion::ML ? static_cast<double>(spec.n())
                                                        : static_cast<double>(spec.n() - spec.p());
    fit.beta = e.beta;
    fit.sigma2_e = e.prss / dof;
    fit.sigma2_b = fit.theta * fit.theta * fit.sigma2_e;
    fit.loglik = -0.5 * fit.deviance;
    fit.vcov_beta = fit.sigma2_e * e.xtvx.solve(Eigen::MatrixXd::Identity(spec.p(), spec.p()));
    fit.vcov_beta = 0.5 * (fit.vcov_beta + fit.vcov_beta.transpose()).eval();
    return fit;
}

double reml_criterion(double sigma2_b, double sigma2_e, const ModelSpec& spec) {
    if (!(sigma2_e > 0.0)) throw Error(ErrorKind::Validation, "sigma2_e must be positive");
    const Absorbed model(spec);
    const auto e = model.evaluate(sigma2_b / sigma2_e);
    const double dof = static_cast<double>(spec.n() - spec.p());
    return dof * std::log(2.0 * std::numbers::pi * sigma2_e) + e.logdet_v + e.logdet_xtvx + e.prss / sigma2_e;
}

Eigen::MatrixXd beta_covariance(double sigma2_b, double sigma2_e, const ModelSpec& spec) {
    if (!(sigma2_e > 0.0)) throw Error(ErrorKind::Validation, "sigma2_e must be positive");
    const Absorbed model(spec);
    const auto e = model.evaluate(sigma2_b / sigma2_e);
    Eigen::MatrixXd c = sigma2_e * e.xtvx.solve(Eigen::MatrixXd::Identity(spec.p(), spec.p()));
    return 0.5 * (c + c.transpose());
}

}  // namespace zeroprobe
