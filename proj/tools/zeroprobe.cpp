// zeroprobe command-line driver: validate | analyze | render | all.

#include "zeroprobe/error.hpp"
#include "zeroprobe/report.hpp"
#include "zeroprobe/text.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace zp = zeroprobe;

namespace {

struct Flags {
    std::string config;
    std::optional<std::string> stimuli;
    std::vector<std::string> scores;
    std::optional<std::string> experiments;
    std::optional<double> alpha;
    std::optional<std::string> out;
    std::optional<std::string> formats;
    std::optional<std::string> unit;
    std::string report;
};

void add_run_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "JSON run config; flags override its fields");
    cmd->add_option("--stimuli", f.stimuli, "stimulus file (csv or json) or 'builtin'");
    cmd->add_option("--scores", f.scores, "token-score JSONL files, globs, or 'toy'")->delimiter(',');
    cmd->add_option("--experiments", f.experiments, "comma list, e.g. EXP1,EXP4");
    cmd->add_option("--alpha", f.alpha, "significance level for corrected p");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--formats", f.formats, "subset of csv,json,svg");
    cmd->add_option("--unit", f.unit, "surprisal unit in figures: nats|bits");
}

zp::RunConfig resolve_config(const Flags& f) {
    zp::RunConfig c = f.config.empty() ? zp::RunConfig{} : zp::parse_run_config(zp::text::read_file(f.config));
    if (f.stimuli) c.stimuli = *f.stimuli;
    if (!f.scores.empty()) c.scores = f.scores;
    if (f.experiments) c.experiments = zp::parse_experiments(*f.experiments);
    if (f.alpha) c.alpha = *f.alpha;
    if (f.out) c.out = *f.out;
    if (f.formats) c.formats = zp::parse_formats(*f.formats);
    if (f.unit) c.unit = zp::parse_unit(*f.unit);
    return c;
}

bool is_validation_error(zp::ErrorKind k) {
    switch (k) {
        case zp::ErrorKind::Parse:
        case zp::ErrorKind::Validation:
        case zp::ErrorKind::UnknownStimulus:
        case zp::ErrorKind::SpanMismatch:
        case zp::ErrorKind::NonFiniteLogprob:
        case zp::ErrorKind::DuplicateRecord:
        case zp::ErrorKind::EmptyMainClause:
        case zp::ErrorKind::IncompleteScores:
        case zp::ErrorKind::Config: return true;
        default: return false;
    }
}

int cmd_validate(const zp::RunConfig& c) {
    const auto stimuli = zp::load_configured_stimuli(c);
    bool ok = true;
    for (auto exp : c.experiments) {
        const auto balance = zp::validate_balance(stimuli, zp::design(exp));
        std::cout << zp::to_string(exp) << ": " << balance.frames.size() << " frames";
        if (!balance.all_complete()) {
            ok = false;
            std::cout << ", " << balance.incomplete_count() << " incomplete";
        }
        std::cout << "\n";
    }
    if (!c.scores.empty()) {
        const auto scores = zp::load_configured_scores(c, stimuli);
        for (const auto& model : scores.models()) {
            std::size_t n = 0;
            for (const auto& [key, record] : scores.records()) n += key.first == model;
            std::cout << "model " << model << ": " << n << " records\n";
        }
    }
    if (!ok) {
        std::cerr << "error: stimulus set has incomplete frames\n";
        return 1;
    }
    return 0;
}

zp::Report cmd_analyze(const zp::RunConfig& c) {
    c.validate();
    auto report = zp::run(c);
    const auto path = std::filesystem::path(c.out) / "report.json";
    zp::text::write_file_atomic(path, zp::report_to_json(report));
    std::cout << "wrote " << path.string() << " (" << report.entries.size() << " tests)\n";
    return report;
}

void cmd_render(const zp::Report& report, const std::filesystem::path& dir) {
    for (const auto& p : zp::write_outputs(report, dir)) std::cout << "wrote " << p.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Zero-shot surprisal probes for implicit-causality minimal pairs"};
    app.require_subcommand(1);
    Flags flags;
    auto* validate = app.add_subcommand("validate", "check the stimulus set and score files");
    auto* analyze = app.add_subcommand("analyze", "run every planned test and write report.json");
    auto* render = app.add_subcommand("render", "render tables and figures from a report");
    auto* all = app.add_subcommand("all", "analyze, then render");
    for (auto* cmd : {validate, analyze, render, all}) add_run_flags(cmd, flags);
    render->add_option("--report", flags.report, "report JSON (default <out>/report.json)");

    CLI11_PARSE(app, argc, argv);

    try {
        auto config = resolve_config(flags);
        if (validate->parsed()) return cmd_validate(config);
        if (analyze->parsed()) {
            cmd_analyze(config);
        } else if (render->parsed()) {
            const auto path = flags.report.empty() ? std::filesystem::path(config.out) / "report.json"
                                                   : std::filesystem::path(flags.report);
            auto report = zp::report_from_json(zp::text::read_file(path));
            if (flags.unit) report.config.unit = config.unit;
            if (flags.formats) report.config.formats = config.formats;
            cmd_render(report, config.out);
        } else {
            const auto report = cmd_analyze(config);
            cmd_render(report, config.out);
        }
        return 0;
    } catch (const zp::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_validation_error(e.kind()) ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
