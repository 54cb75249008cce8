#include "zeroprobe/analysis.hpp"
#include "zeroprobe/error.hpp"
#include "zeroprobe/report.hpp"
#include "zeroprobe/text.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
namespace zp = zeroprobe;

namespace {

zp::StimulusSet stimuli_from(const std::optional<std::string>& source) {
    if (!source || *source == "builtin") return zp::builtin_corpus();
    return zp::load_stimuli(*source);
}

zp::ModelSpec spec_from(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const std::vector<int>& groups,
                        zp::Criterion criterion) {
    return zp::make_model_spec(y, x, groups, criterion);
}

py::dict fit_dict(const zp::LmmFit& f) {
    py::dict d;
    d["beta"] = f.beta;
    d["sigma2_e"] = f.sigma2_e;
    d["sigma2_b"] = f.sigma2_b;
    d["theta"] = f.theta;
    d["deviance"] = f.deviance;
    d["loglik"] = f.loglik;
    d["vcov_beta"] = f.vcov_beta;
    d["criterion"] = std::string(zp::to_string(f.criterion));
    d["converged"] = f.converged;
    d["at_lower_bound"] = f.at_lower_bound;
    d["at_upper_bound"] = f.at_upper_bound;
    return d;
}

py::dict test_dict(const zp::TestResult& r) {
    py::dict d;
    d["statistic"] = r.statistic;
    d["df1"] = r.df1;
    d["df2"] = r.df2 ? py::cast(*r.df2) : py::none();
    d["df2_fallback"] = r.df2_fallback;
    d["p_value"] = r.p_raw;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Surprisal minimal-pair analysis core";

    static py::exception<zp::Error> error(m, "ZeroprobeError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const zp::Error& e) {
            py::set_error(error, e.what());
        }
    });

    m.def("builtin_corpus_csv", [] { return std::string(zp::builtin_corpus_csv()); });

    m.def(
        "load_stimuli",
        [](const std::optional<std::string>& source) {
            const auto set = stimuli_from(source);
            py::list out;
            for (const auto& s : set.stimuli()) {
                py::dict d;
                d["stimulus_id"] = s.stimulus_id;
                d["experiment_id"] = std::string(zp::to_string(s.experiment));
                d["frame_id"] = s.frame_id;
                d["factors"] = s.factors;
                d["text"] = s.text;
                d["main_clause_start"] = s.main_clause_start;
                out.append(std::move(d));
            }
            return out;
        },
        py::arg("source") = py::none(), "Stimuli from a csv/json path, or the builtin set.");

    m.def(
        "toy_scores", [](const std::optional<std::string>& source) { return zp::to_jsonl(zp::toy_score(stimuli_from(source))); },
        py::arg("stimuli") = py::none(), "Toy unigram token scores as interchange JSONL.");

    m.def(
        "main_clause_surprisal",
        [](const std::string& jsonl, const std::optional<std::string>& source) {
            const auto stimuli = stimuli_from(source);
            const auto scores = zp::parse_token_scores(jsonl, stimuli);
            std::map<std::pair<std::string, std::string>, double> out;
            for (const auto& [key, record] : scores.records()) {
                out[key] = zp::main_clause_surprisal(*stimuli.find(key.second), record).surprisal;
            }
            return out;
        },
        py::arg("jsonl"), py::arg("stimuli") = py::none(),
        "Main-clause surprisal in nats keyed by (model_id, stimulus_id).");

    m.def(
        "fit_lmm",
        [](const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const std::vector<int>& groups, bool reml) {
            return fit_dict(zp::fit_lmm(spec_from(y, x, groups, reml ? zp::Criterion::REML : zp::Criterion::ML)));
        },
        py::arg("y"), py::arg("x"), py::arg("groups"), py::arg("reml") = false);

    m.def(
        "likelihood_ratio_test",
        [](const Eigen::VectorXd& y, const Eigen::MatrixXd& x_null, const Eigen::MatrixXd& x_full,
           const std::vector<int>& groups) {
            auto null_fit = zp::fit_lmm(spec_from(y, x_null, groups, zp::Criterion::ML));
            auto full_fit = zp::fit_lmm(spec_from(y, x_full, groups, zp::Criterion::ML));
            return test_dict(zp::likelihood_ratio_test(null_fit, full_fit));
        },
        py::arg("y"), py::arg("x_null"), py::arg("x_full"), py::arg("groups"));

    m.def(
        "satterthwaite_anova",
        [](const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const std::vector<int>& groups,
           const Eigen::VectorXd& contrast) {
            auto fit = zp::fit_lmm(spec_from(y, x, groups, zp::Criterion::REML));
            return test_dict(zp::satterthwaite_anova(fit, contrast));
        },
        py::arg("y"), py::arg("x"), py::arg("groups"), py::arg("contrast"));

    m.def("bh_adjust", [](const std::vector<double>& p) { return zp::bh_adjust(p); }, py::arg("p_values"));

    m.def(
        "run",
        [](const std::string& config_json) { return zp::report_to_json(zp::run(zp::parse_run_config(config_json))); },
        py::arg("config_json"), "Runs the analysis for a JSON config; returns the report JSON.");

    m.def(
        "render",
        [](const std::string& report_json, const std::string& format) {
            const auto report = zp::report_from_json(report_json);
            const auto files = format == "svg" ? zp::render_figures(report)
                                               : zp::render_tables(report, *zp::parse_formats(format).begin());
            std::map<std::string, std::string> out;
            for (const auto& f : files) out[f.name] = f.contents;
            return out;
        },
        py::arg("report_json"), py::arg("format") = "csv", "Renders a report to {file name: contents}.");
}
