#include "zeroprobe/inference.hpp"

#include "zeroprobe/error.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace zeroprobe {

namespace {

double chi_squared_upper(double statistic, int df) {
    if (statistic <= 0.0) return 1.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), statistic));
}

double fisher_f_upper(double statistic, double df1, double df2) {
    if (statistic <= 0.0) return 1.0;
    return boost::math::cdf(boost::math::complement(boost::math::fisher_f(df1, df2), statistic));
}

bool in_column_space(const Eigen::VectorXd& column, const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>& qr,
                     const Eigen::MatrixXd& design) {
    Eigen::VectorXd coef = qr.solve(column);
    double residual = (design * coef - column).norm();
    return residual <= 1e-8 * std::max(1.0, column.norm());
}

}  // namespace

TestResult likelihood_ratio_test(const LmmFit& null_fit, const LmmFit& full_fit) {
    if (null_fit.criterion != Criterion::ML || full_fit.criterion != Criterion::ML) {
        throw Error(ErrorKind::CriterionMismatch, "likelihood ratio tests require ML fits");
    }
    const auto& a = null_fit.spec;
    const auto& b = full_fit.spec;
    if (a.n() != b.n() || a.response != b.response || a.groups != b.groups) {
        throw Error(ErrorKind::NotNested, "null and full models are fitted to different data");
    }
    const auto df = static_cast<int>(b.p() - a.p());
    if (df < 1) {
        throw Error(ErrorKind::NotNested, "full model must have more fixed effects than the null (df = " +
                                              std::to_string(df) + ")");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(b.design);
    for (Eigen::Index c = 0; c < a.p(); ++c) {
        if (!in_column_space(a.design.col(c), qr, b.design)) {
            throw Error(ErrorKind::NotNested, "null design column " + std::to_string(c) + " is not spanned by the full design");
        }
    }

    TestResult r;
    r.kind = df == 1 && a.p() == 1 ? TestKind::LrtMain : TestKind::LrtInteraction;
    r.statistic = std::max(0.0, 2.0 * (full_fit.loglik - null_fit.loglik));
    r.df1 = df;
    r.p_raw = chi_squared_upper(r.statistic, df);
    r.p_adjusted = r.p_raw;
    r.boundary_fit = null_fit.at_lower_bound || null_fit.at_upper_bound || full_fit.at_lower_bound ||
                     full_fit.at_upper_bound;
    return r;
}

TestResult satterthwaite_anova(const LmmFit& fit, const Eigen::VectorXd& contrast,
                               const SatterthwaiteOptions& options) {
    if (fit.criterion != Criterion::REML) throw Error(ErrorKind::NotReml, "Satterthwaite ANOVA requires a REML fit");
    const auto& spec = fit.spec;
    if (contrast.size() != spec.p()) {
        throw Error(ErrorKind::InvalidContrast, "contrast has " + std::to_string(contrast.size()) +
                                                    " entries, model has " + std::to_string(spec.p()));
    }
    if (contrast.isZero(0.0)) throw Error(ErrorKind::InvalidContrast, "contrast vector is zero");

    const double estimate = contrast.dot(fit.beta);
    const double variance = contrast.dot(fit.vcov_beta * contrast);

    TestResult r;
    r.kind = TestKind::AnovaType3Main;
    r.statistic = estimate * estimate / variance;
    r.df1 = 1;
    r.boundary_fit = fit.at_lower_bound || fit.at_upper_bound;

    const std::array<double, 2> v = {fit.sigma2_b, fit.sigma2_e};
    std::array<double, 2> h{};
    for (int i = 0; i < 2; ++i) h[i] = std::max(options.relative_step * std::fabs(v[i]), options.absolute_floor);
    // sigma2_b near zero: step on the residual variance's scale.
    h[0] = std::max(h[0], options.relative_step * v[1]);

    auto f = [&](double sb, double se) { return contrast.dot(beta_covariance(sb, se, spec) * contrast); };
    auto dev = [&](double sb, double se) { return reml_criterion(sb, se, spec); };

    Eigen::Vector2d grad;
    grad[0] = (f(v[0] + h[0], v[1]) - f(v[0] - h[0], v[1])) / (2.0 * h[0]);
    grad[1] = (f(v[0], v[1] + h[1]) - f(v[0], v[1] - h[1])) / (2.0 * h[1]);

    const double d0 = dev(v[0], v[1]);
    Eigen::Matrix2d hess;
    hess(0, 0) = (dev(v[0] + h[0], v[1]) - 2.0 * d0 + dev(v[0] - h[0], v[1])) / (h[0] * h[0]);
    hess(1, 1) = (dev(v[0], v[1] + h[1]) - 2.0 * d0 + dev(v[0], v[1] - h[1])) / (h[1] * h[1]);
    hess(0, 1) = (dev(v[0] + h[0], v[1] + h[1]) - dev(v[0] + h[0], v[1] - h[1]) - dev(v[0] - h[0], v[1] + h[1]) +
                  dev(v[0] - h[0], v[1] - h[1])) /
                 (4.0 * h[0] * h[1]);
    hess(1, 0) = hess(0, 1);

    const double fallback = static_cast<double>(spec.n() - spec.p());
    Eigen::LLT<Eigen::Matrix2d> llt(hess);
    double df2 = fallback;
    if (llt.info() == Eigen::Success && hess(0, 0) > 0.0 && hess.determinant() > 0.0) {
        const Eigen::Matrix2d a = 2.0 * llt.solve(Eigen::Matrix2d::Identity());
        const double denom = grad.dot(a * grad);
        if (denom > 0.0 && std::isfinite(denom)) {
            df2 = 2.0 * variance * variance / denom;
        } else {
            r.df2_fallback = true;
        }
    } else {
        r.df2_fallback = true;
    }
    r.df2 = df2;
    r.p_raw = fisher_f_upper(r.statistic, 1.0, df2);
    r.p_adjusted = r.p_raw;
    return r;
}

std::vector<double> bh_adjust(std::span<const double> p_values) {
    const std::size_t m = p_values.size();
    for (double p : p_values) {
        if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::Validation, "p-values must lie in [0, 1]");
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });

    std::vector<double> adjusted(m);
    double running = 1.0;
    for (std::size_t k = m; k-- > 0;) {
        const double rank = static_cast<double>(k + 1);
        // Extended precision keeps m * p / m == p exact.
        const double candidate =
            static_cast<double>(static_cast<long double>(m) * p_values[order[k]] / static_cast<long double>(rank));
        running = std::min(running, candidate);
        adjusted[order[k]] = running;
    }
    return adjusted;
}

bool direction_check(const std::map<std::string, double>& cell_means, const ExpectedDirection& expected) {
    auto mean = [&](const FactorAssignment& cell) {
        auto label = cell_label(cell);
        auto it = cell_means.find(label);
        if (it == cell_means.end()) throw Error(ErrorKind::MissingCell, "no mean for cell " + label);
        return it->second;
    };
    if (!expected.is_interaction()) {
        return mean({{expected.factor, expected.faster_level}}) < mean({{expected.factor, expected.slower_level}});
    }
    auto gap = [&](const std::string& moderator_level) {
        return mean({{expected.factor, expected.slower_level}, {expected.moderator, moderator_level}}) -
               mean({{expected.factor, expected.faster_level}, {expected.moderator, moderator_level}});
    };
    return gap(expected.stronger_level) > gap(expected.weaker_level);
}

std::string significance_band(double p) {
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    if (p < 0.1) return ".";
    return "ns";
}

bool successfully_modeled(const TestResult& result, double alpha) {
    return result.p_adjusted < alpha && result.direction_ok;
}

}  // namespace zeroprobe
