// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "oracles.hpp"

#include "zeroprobe/error.hpp"
#include "zeroprobe/inference.hpp"
#include "zeroprobe/lmm.hpp"
#include "zeroprobe/report.hpp"
#include "zeroprobe/scoring.hpp"
#include "zeroprobe/text.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

using namespace zeroprobe;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double rel_err(double got, double want) {
    if (want == 0.0) return std::fabs(got);
    return std::fabs(got - want) / std::fabs(want);
}

Outcome lmm_oracle() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(20240601);
    std::uniform_int_distribution<int> frames_d(4, 32), per_d(2, 4);
    std::normal_distribution<double> nrm(0.0, 1.0);
    double worst = 0.0;
    int boundary = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int frames = frames_d(rng), per = per_d(rng);
        const int n = frames * per;
        oracle::Data d;
        d.y.resize(n);
        d.x = Eigen::MatrixXd::Ones(n, 1);
        d.n_groups = frames;
        for (int g = 0; g < frames; ++g) {
            const double b = 5.0 * nrm(rng);
            for (int k = 0; k < per; ++k) {
                d.y[g * per + k] = 20.0 + b + nrm(rng);
                d.groups.push_back(g);
            }
        }
        const auto want = oracle::one_way(d.y, frames, per);
        const auto fit = fit_lmm(make_model_spec(d.y, d.x, d.groups, Criterion::REML));
        boundary += fit.at_lower_bound;
        worst = std::max({worst, rel_err(fit.sigma2_e, want.sigma2_e), rel_err(fit.sigma2_b, want.sigma2_b)});
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-6 && secs < 10.0, "100 datasets, max rel err " + fmt("%.2e", worst) + ", boundary fits " +
                                              std::to_string(boundary) + ", " + fmt("%.2f", secs) + " s"};
}

Outcome ols_degeneracy() {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> frames_d(4, 32);
    std::normal_distribution<double> nrm(0.0, 1.0);
    double worst = 0.0;
    bool all_zero = true;
    for (int trial = 0; trial < 50; ++trial) {
        const int frames = frames_d(rng);
        const double effect = 0.5 * nrm(rng);
        oracle::Data d;
        d.y.resize(2 * frames);
        d.x.resize(2 * frames, 2);
        d.n_groups = frames;
        // Each frame's two observations sum to the same constant.
        for (int f = 0; f < frames; ++f) {
            const double u = nrm(rng);
            d.y[2 * f] = 7.0 + effect + u;
            d.y[2 * f + 1] = 7.0 - effect - u;
            d.x.row(2 * f) << 1.0, 1.0;
            d.x.row(2 * f + 1) << 1.0, -1.0;
            d.groups.push_back(f);
            d.groups.push_back(f);
        }
        const Eigen::MatrixXd x0 = d.x.leftCols(1);
        const auto null_fit = fit_lmm(make_model_spec(d.y, x0, d.groups, Criterion::ML));
        const auto full_fit = fit_lmm(make_model_spec(d.y, d.x, d.groups, Criterion::ML));
        all_zero = all_zero && null_fit.theta == 0.0 && full_fit.theta == 0.0;
        const double n = 2.0 * frames;
        const double want = n * std::log(oracle::rss(d.y, x0) / oracle::rss(d.y, d.x));
        worst = std::max(worst, std::fabs(likelihood_ratio_test(null_fit, full_fit).statistic - want));
    }
    return {all_zero && worst <= 1e-6,
            std::string("50 datasets, theta = 0 in all fits: ") + (all_zero ? "yes" : "no") +
                ", max |LRT - n ln(RSS0/RSS1)| " + fmt("%.2e", worst)};
}

Outcome satterthwaite_exactness() {
    std::mt19937_64 rng(31);
    bool ok = true;
    double worst_df = 0.0, worst_f = 0.0;
    int datasets = 0;
    for (int frames : {8, 16, 32}) {
        for (int rep = 0; rep < 10; ++rep) {
            auto p = oracle::paired_design(frames, 0.5 * rep / 10.0, 3.0, 1.0, rng);
            const auto fit = fit_lmm(make_model_spec(p.data.y, p.data.x, p.data.groups, Criterion::REML));
            const auto r = satterthwaite_anova(fit, Eigen::Vector2d(0.0, 1.0));
            const double t = oracle::paired_t(p.plus, p.minus).t;
            const double df_err = r.df2 ? std::fabs(*r.df2 - (frames - 1)) : INFINITY;
            const double f_err = rel_err(r.statistic, t * t);
            worst_df = std::max(worst_df, df_err);
            worst_f = std::max(worst_f, f_err);
            ok = ok && df_err < 0.5 && f_err <= 1e-6 && !r.df2_fallback;
            ++datasets;
        }
    }
    return {ok, std::to_string(datasets) + " datasets over F in {8,16,32}, max |df2-(F-1)| " + fmt("%.2e", worst_df) +
                    ", max rel |F-t^2| " + fmt("%.2e", worst_f)};
}

Outcome lrt_calibration() {
    std::mt19937_64 rng(4242);
    int rejections = 0;
    const int sims = 1000;
    for (int s = 0; s < sims; ++s) {
        auto p = oracle::paired_design(16, 0.0, 1.0, 1.0, rng);
        const Eigen::MatrixXd x0 = p.data.x.leftCols(1);
        const auto null_fit = fit_lmm(make_model_spec(p.data.y, x0, p.data.groups, Criterion::ML));
        const auto full_fit = fit_lmm(make_model_spec(p.data.y, p.data.x, p.data.groups, Criterion::ML));
        rejections += likelihood_ratio_test(null_fit, full_fit).p_raw < 0.05;
    }
    const double rate = static_cast<double>(rejections) / sims;
    return {rate >= 0.03 && rate <= 0.08, "1000 null simulations, 16 frames, rejection rate " + fmt("%.3f", rate)};
}

Outcome bh_oracle() {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> len_d(1, 100);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    bool exact = true, monotone = true, capped = true;
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> p(static_cast<std::size_t>(len_d(rng)));
        for (auto& v : p) {
            switch (trial % 4) {
                case 0: v = u(rng); break;
                case 1: v = std::pow(u(rng), 4.0); break;
                case 2: v = std::round(u(rng) * 20.0) / 20.0; break;
                default: v = u(rng) < 0.3 ? 0.0 : (u(rng) < 0.2 ? 1.0 : u(rng)); break;
            }
        }
        const auto adj = bh_adjust(p);
        exact = exact && adj == oracle::bh(p);
        for (std::size_t i = 0; i < p.size(); ++i) {
            capped = capped && adj[i] <= 1.0 && adj[i] >= p[i];
            for (std::size_t j = 0; j < p.size(); ++j) monotone = monotone && (p[i] > p[j] || adj[i] <= adj[j]);
        }
    }
    return {exact && monotone && capped, std::string("500 vectors, exact: ") + (exact ? "yes" : "no") +
                                             ", monotone: " + (monotone ? "yes" : "no") +
                                             ", capped: " + (capped ? "yes" : "no")};
}

Outcome surprisal_contract() {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.001, 1.0);
    std::uniform_int_distribution<int> len_d(1, 12), words_d(2, 25);
    double worst = 0.0;
    int records = 0;
    for (int trial = 0; trial < 200; ++trial) {
        // Synthetic sentence: random words, a comma, then the main clause.
        const int sub_words = words_d(rng) / 2 + 1, main_words = words_d(rng);
        std::string text;
        std::vector<std::pair<std::size_t, std::size_t>> spans;
        auto add_word = [&](bool comma) {
            const std::size_t start = text.size();
            if (!text.empty()) text += ' ';
            const int len = len_d(rng);
            for (int i = 0; i < len; ++i) text += static_cast<char>('a' + rng() % 26);
            spans.emplace_back(start, text.size());
            if (comma) {
                spans.emplace_back(text.size(), text.size() + 1);
                text += ',';
            }
        };
        for (int w = 0; w < sub_words; ++w) add_word(w + 1 == sub_words);
        const std::size_t boundary = text.size() + 1;
        for (int w = 0; w < main_words; ++w) add_word(false);

        std::vector<Stimulus> stimuli{
            {"x", ExperimentId::Exp1, "f", {{"antecedent", "subject"}}, text, boundary}};
        StimulusSet set(std::move(stimuli));
        TokenScoreRecord r{"x", "synthetic", ScoringMode::MaskedPll, {}};
        double product = 1.0;
        for (const auto& [s, e] : spans) {
            const double prob = u(rng);
            r.tokens.push_back(TokenScore{text.substr(s, e - s), s, e, std::log(prob)});
            std::size_t first = s;
            while (text[first] == ' ') ++first;
            if (first >= boundary) product *= prob;
        }
        validate_record(r, *set.find("x"));
        const double got = main_clause_surprisal(*set.find("x"), r).surprisal;
        worst = std::max(worst, std::fabs(got - (-std::log(product))));
        ++records;
    }

    const auto fixture = nlohmann::json::parse(
        text::read_file(std::filesystem::path(ZEROPROBE_TEST_DIR) / "fixtures" / "boundary_cases.json"));
    int matched = 0;
    for (const auto& c : fixture) {
        const auto t = text::decode_utf8(c.at("text").get<std::string>());
        const auto region = classify_token(t, c.at("main_clause_start").get<std::size_t>(),
                                           c.at("char_start").get<std::size_t>(), c.at("char_end").get<std::size_t>());
        matched += std::string(to_string(region)) == c.at("region").get<std::string>();
    }
    const int cases = static_cast<int>(fixture.size());
    return {worst <= 1e-12 && matched == cases && cases == 20,
            std::to_string(records) + " records, max |S + ln prod p| " + fmt("%.2e", worst) + ", boundary fixture " +
                std::to_string(matched) + "/" + std::to_string(cases)};
}

Outcome hermetic_end_to_end() {
    const auto t0 = Clock::now();
    RunConfig c;
    c.scores = {std::string(kToyScores)};
    const auto a = run(c);
    const auto b = run(c);
    const auto ja = report_to_json(a), jb = report_to_json(b);
    const double secs = seconds_since(t0);
    const bool ok = a.entries.size() == 5 && a.family_size() == 5 && ja == jb && secs < 5.0 &&
                    ja.find("\"schema_version\": 1") != std::string::npos;
    return {ok, std::to_string(a.entries.size()) + " results, m = " + std::to_string(a.family_size()) +
                    ", identical JSON: " + (ja == jb ? "yes" : "no") + ", " + fmt("%.2f", secs) + " s for two runs"};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"lmm-oracle-equivalence", lmm_oracle},
        {"ols-degeneracy", ols_degeneracy},
        {"satterthwaite-paired-exactness", satterthwaite_exactness},
        {"lrt-calibration", lrt_calibration},
        {"bh-oracle", bh_oracle},
        {"surprisal-contract", surprisal_contract},
        {"hermetic-end-to-end", hermetic_end_to_end},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("%s  %-32s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures ? 1 : 0;
}
