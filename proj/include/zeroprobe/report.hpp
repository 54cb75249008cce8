#pragma once

#include "zeroprobe/corpus.hpp"
#include "zeroprobe/inference.hpp"
#include "zeroprobe/scoring.hpp"

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace zeroprobe {

enum class OutputFormat { Csv, Json, Svg };
enum class SurprisalUnit { Nats, Bits };

std::string_view to_string(OutputFormat f);
std::string_view to_string(SurprisalUnit u);

/// Score source that selects the builtin toy scorer instead of files.
inline constexpr std::string_view kToyScores = "toy";

struct RunConfig {
    std::string stimuli = "builtin";  // "builtin" or a stimulus file path
    std::vector<std::string> scores;  // interchange files, glob patterns, or "toy"
    std::vector<ExperimentId> experiments{ExperimentId::Exp1, ExperimentId::Exp2Arg, ExperimentId::Exp2Form,
                                          ExperimentId::Exp4};
    double alpha = 0.05;
    std::string out = "out";
    std::set<OutputFormat> formats{OutputFormat::Csv, OutputFormat::Json, OutputFormat::Svg};
    SurprisalUnit unit = SurprisalUnit::Nats;

    /// Throws Error(Config).
    void validate() const;
};

/// Parses a JSON config document; absent fields keep their defaults.
RunConfig parse_run_config(std::string_view json);
std::string run_config_to_json(const RunConfig& config);

/// "csv,json" -> formats; throws Error(Config).
std::set<OutputFormat> parse_formats(std::string_view list);
std::vector<ExperimentId> parse_experiments(std::string_view list);
SurprisalUnit parse_unit(std::string_view s);

/// Expands score inputs (sorted glob matches, deduplicated). "toy" passes through.
std::vector<std::string> expand_score_inputs(const std::vector<std::string>& inputs);

struct ReportEntry {
    TestResult result;
    std::string band;  // significance band of the corrected p
    bool verdict = false;
};

struct ModelSummary {
    std::string model_id;
    int modeled = 0;
    int planned = 0;
};

struct Report {
    int schema_version = 1;
    RunConfig config;
    std::string config_hash;
    std::string corpus_hash;
    std::string scores_hash;
    std::vector<std::string> family;  // "model_id|test_id", the BH correction family
    std::vector<ReportEntry> entries;
    std::vector<ModelSummary> summary;
    std::vector<std::string> notes;

    std::size_t family_size() const { return family.size(); }
};

/// Loads inputs per the config and runs the analysis.
Report run(const RunConfig& config);

/// Every model x planned test whose experiment the model covers, then one BH
/// correction over all of them, then direction checks and verdicts.
/// Errors are re-raised tagged with (model, experiment).
Report run_analysis(const StimulusSet& stimuli, const ScoreSet& scores, const RunConfig& config);

/// Loads the configured stimulus set ("builtin" or a path).
StimulusSet load_configured_stimuli(const RunConfig& config);
/// Loads and merges every configured score input against `stimuli`.
ScoreSet load_configured_scores(const RunConfig& config, const StimulusSet& stimuli);

std::string report_to_json(const Report& report);
Report report_from_json(std::string_view json);

// ---------------------------------------------------------------------------
// Rendering. All functions are pure in the report; write_outputs does the IO.

struct RenderedFile {
    std::string name;
    std::string contents;
};

/// 1 decimal, "<0.1" below 0.1.
std::string format_statistic(double statistic);
/// 3 decimals, "<0.001" below 0.001.
std::string format_p(double p);
/// "Chisq(df=1)" or "F(1,60)".
std::string statistic_label(const TestResult& result);

/// One table per planned test plus "summary.<ext>". Throws EmptyReport.
std::vector<RenderedFile> render_tables(const Report& report, OutputFormat format);

/// One self-contained SVG bar chart per experiment. Throws EmptyReport.
std::vector<RenderedFile> render_figures(const Report& report);

/// Renders every configured format into `dir`, writing each file atomically.
std::vector<std::filesystem::path> write_outputs(const Report& report, const std::filesystem::path& dir);

}  // namespace zeroprobe
