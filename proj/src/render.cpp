#include "zeroprobe/error.hpp"
#include "zeroprobe/report.hpp"
#include "zeroprobe/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace zeroprobe {

using ojson = nlohmann::ordered_json;

namespace {

void require_entries(const Report& report) {
    if (report.entries.empty()) throw Error(ErrorKind::EmptyReport, "report has no test results to render");
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string table_stem(const TestResult& r) { return r.test_id; }

// Planned tests in first-seen order, each with its rows in report order.
std::vector<std::pair<std::string, std::vector<const ReportEntry*>>> group_by_test(const Report& report) {
    std::vector<std::pair<std::string, std::vector<const ReportEntry*>>> groups;
    for (const auto& e : report.entries) {
        auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == e.result.test_id; });
        if (it == groups.end()) {
            groups.emplace_back(e.result.test_id, std::vector<const ReportEntry*>{});
            it = std::prev(groups.end());
        }
        it->second.push_back(&e);
    }
    return groups;
}

bool significant(const ReportEntry& e, double alpha) { return e.result.p_adjusted < alpha; }

std::string summary_label(const ModelSummary& s) { return std::to_string(s.modeled) + "/" + std::to_string(s.planned); }

}  // namespace

std::string format_statistic(double statistic) {
    if (statistic < 0.1) return "<0.1";
    return text::fixed(statistic, 1);
}

std::string format_p(double p) {
    if (p < 0.001) return "<0.001";
    return text::fixed(p, 3);
}

std::string statistic_label(const TestResult& result) {
    if (result.kind == TestKind::AnovaType3Main) {
        const long df2 = result.df2 ? std::lround(*result.df2) : 0;
        return "F(" + std::to_string(result.df1) + "," + std::to_string(df2) + ")";
    }
    return "Chisq(df=" + std::to_string(result.df1) + ")";
}

std::vector<RenderedFile> render_tables(const Report& report, OutputFormat format) {
    require_entries(report);
    const double alpha = report.config.alpha;
    std::vector<RenderedFile> files;

    if (format == OutputFormat::Csv) {
        for (const auto& [test_id, rows] : group_by_test(report)) {
            std::string out = "model,statistic_label,statistic,corrected_p,band,significant,direction_ok,modeled\n";
            for (const auto* e : rows) {
                const auto& r = e->result;
                out += csv_field(r.model_id) + "," + statistic_label(r) + "," + format_statistic(r.statistic) + "," +
                       format_p(r.p_adjusted) + "," + e->band + "," + (significant(*e, alpha) ? "yes" : "no") + "," +
                       (r.direction_ok ? "yes" : "no") + "," + (e->verdict ? "yes" : "no") + "\n";
            }
            files.push_back({table_stem(rows.front()->result) + ".csv", std::move(out)});
        }
        std::string out = "model,experiments_modeled\n";
        for (const auto& s : report.summary) out += csv_field(s.model_id) + "," + summary_label(s) + "\n";
        files.push_back({"summary.csv", std::move(out)});
        return files;
    }

    if (format == OutputFormat::Json) {
        for (const auto& [test_id, rows] : group_by_test(report)) {
            ojson doc;
            doc["test_id"] = test_id;
            doc["experiment_id"] = std::string(to_string(rows.front()->result.experiment));
            auto jrows = ojson::array();
            for (const auto* e : rows) {
                const auto& r = e->result;
                ojson o;
                o["model"] = r.model_id;
                o["statistic_label"] = statistic_label(r);
                o["statistic"] = format_statistic(r.statistic);
                o["corrected_p"] = format_p(r.p_adjusted);
                o["band"] = e->band;
                o["significant"] = significant(*e, alpha);
                o["direction_ok"] = r.direction_ok;
                o["modeled"] = e->verdict;
                jrows.push_back(std::move(o));
            }
            doc["rows"] = std::move(jrows);
            files.push_back({test_id + ".json", doc.dump(2) + "\n"});
        }
        auto jsum = ojson::array();
        for (const auto& s : report.summary) {
            ojson o;
            o["model"] = s.model_id;
            o["experiments_modeled"] = summary_label(s);
            jsum.push_back(std::move(o));
        }
        ojson doc;
        doc["rows"] = std::move(jsum);
        files.push_back({"summary.json", doc.dump(2) + "\n"});
        return files;
    }

    throw Error(ErrorKind::Config, "tables are rendered as csv or json only");
}

namespace {

constexpr double kPanelHeight = 220.0;
constexpr double kPlotTop = 40.0;
constexpr double kPlotHeight = 140.0;
constexpr double kBarWidth = 28.0;
constexpr double kBarGap = 10.0;
constexpr double kPanelPad = 50.0;
const std::array<const char*, 4> kPalette = {"#4c72b0", "#dd8452", "#55a868", "#c44e52"};

struct Panel {
    std::string model_id;
    const ReportEntry* plotted = nullptr;           // test whose cells are drawn
    std::vector<const ReportEntry*> annotations;   // every test of the experiment
};

std::string svg_for_experiment(ExperimentId exp, const std::vector<Panel>& panels, SurprisalUnit unit) {
    const double scale = unit == SurprisalUnit::Bits ? 1.0 / std::numbers::ln2 : 1.0;
    const std::string unit_name(to_string(unit));

    std::size_t n_cells = 0;
    for (const auto& p : panels) n_cells = std::max(n_cells, p.plotted->result.cells.size());
    const double panel_width = kPanelPad + static_cast<double>(n_cells) * (kBarWidth + kBarGap) + 40.0;
    const double width = std::max(360.0, panel_width * static_cast<double>(panels.size()) + 20.0);
    const double legend_top = kPanelHeight + 10.0;
    const double height = legend_top + 18.0 * static_cast<double>(n_cells) + 40.0;

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + text::fixed(width, 0) + "\" height=\"" +
         text::fixed(height, 0) + "\" viewBox=\"0 0 " + text::fixed(width, 0) + " " + text::fixed(height, 0) +
         "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    s += "<title>" + std::string(to_string(exp)) + " main-clause surprisal (" + unit_name + ")</title>\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (std::size_t pi = 0; pi < panels.size(); ++pi) {
        const auto& panel = panels[pi];
        const auto& cells = panel.plotted->result.cells;
        const double x0 = 10.0 + panel_width * static_cast<double>(pi);

        double top = 0.0;
        for (const auto& c : cells) top = std::max(top, (c.mean + c.se) * scale);
        if (!(top > 0.0)) top = 1.0;
        top *= 1.1;
        auto y_of = [&](double v) { return kPlotTop + kPlotHeight * (1.0 - std::clamp(v / top, 0.0, 1.0)); };

        s += "<g class=\"panel\" data-model=\"" + xml_escape(panel.model_id) + "\">\n";
        s += "<text x=\"" + text::fixed(x0 + kPanelPad, 1) + "\" y=\"16\" font-weight=\"bold\">" +
             xml_escape(panel.model_id) + "</text>\n";
        std::string ann;
        for (const auto* e : panel.annotations) {
            if (!ann.empty()) ann += "  ";
            ann += e->result.test_id.substr(e->result.test_id.find('.') + 1) + ": " + e->band;
        }
        s += "<text class=\"band\" x=\"" + text::fixed(x0 + kPanelPad, 1) + "\" y=\"30\">" + xml_escape(ann) +
             "</text>\n";

        const double axis_x = x0 + kPanelPad - 6.0;
        s += "<line x1=\"" + text::fixed(axis_x, 1) + "\" y1=\"" + text::fixed(kPlotTop, 1) + "\" x2=\"" +
             text::fixed(axis_x, 1) + "\" y2=\"" + text::fixed(kPlotTop + kPlotHeight, 1) + "\" stroke=\"black\"/>\n";
        for (int t = 0; t <= 2; ++t) {
            const double v = top * t / 2.0;
            s += "<text x=\"" + text::fixed(axis_x - 4.0, 1) + "\" y=\"" + text::fixed(y_of(v) + 4.0, 1) +
                 "\" text-anchor=\"end\">" + text::fixed(v, 1) + "</text>\n";
        }

        for (std::size_t ci = 0; ci < cells.size(); ++ci) {
            const auto& c = cells[ci];
            const double mean = c.mean * scale;
            const double se = c.se * scale;
            const double bx = x0 + kPanelPad + static_cast<double>(ci) * (kBarWidth + kBarGap);
            const double by = y_of(mean);
            const double cx = bx + kBarWidth / 2.0;
            s += "<rect class=\"bar\" data-cell=\"" + xml_escape(c.label) + "\" data-mean=\"" + text::fixed(mean, 6) +
                 "\" x=\"" + text::fixed(bx, 1) + "\" y=\"" + text::fixed(by, 1) + "\" width=\"" +
                 text::fixed(kBarWidth, 1) + "\" height=\"" + text::fixed(kPlotTop + kPlotHeight - by, 1) +
                 "\" fill=\"" + kPalette[ci % kPalette.size()] + "\"/>\n";
            s += "<line class=\"whisker\" data-cell=\"" + xml_escape(c.label) + "\" data-mean=\"" +
                 text::fixed(mean, 6) + "\" data-low=\"" + text::fixed(mean - se, 6) + "\" data-high=\"" +
                 text::fixed(mean + se, 6) + "\" x1=\"" + text::fixed(cx, 1) + "\" y1=\"" +
                 text::fixed(y_of(mean - se), 1) + "\" x2=\"" + text::fixed(cx, 1) + "\" y2=\"" +
                 text::fixed(y_of(mean + se), 1) + "\" stroke=\"black\"/>\n";
        }
        s += "</g>\n";
    }

    if (!panels.empty()) {
        const auto& cells = panels.front().plotted->result.cells;
        for (std::size_t ci = 0; ci < cells.size(); ++ci) {
            const double y = legend_top + 18.0 * static_cast<double>(ci);
            s += "<rect x=\"10\" y=\"" + text::fixed(y, 1) + "\" width=\"12\" height=\"12\" fill=\"" +
                 kPalette[ci % kPalette.size()] + "\"/>\n";
            s += "<text x=\"28\" y=\"" + text::fixed(y + 10.0, 1) + "\">" + xml_escape(cells[ci].label) + "</text>\n";
        }
    }
    s += "<text class=\"caption\" x=\"10\" y=\"" + text::fixed(height - 10.0, 1) +
         "\">Mean main-clause surprisal (" + unit_name +
         "); bars show SE over frames. Each panel uses its own scale. Bands: corrected p.</text>\n";
    s += "</svg>\n";
    return s;
}

}  // namespace

std::vector<RenderedFile> render_figures(const Report& report) {
    require_entries(report);
    std::vector<RenderedFile> files;
    for (auto exp : all_experiments()) {
        std::vector<Panel> panels;
        for (const auto& e : report.entries) {
            if (e.result.experiment != exp) continue;
            auto it = std::find_if(panels.begin(), panels.end(),
                                   [&](const Panel& p) { return p.model_id == e.result.model_id; });
            if (it == panels.end()) {
                panels.push_back(Panel{e.result.model_id, &e, {}});
                it = std::prev(panels.end());
            }
            it->annotations.push_back(&e);
            if (e.result.cells.size() > it->plotted->result.cells.size()) it->plotted = &e;
        }
        if (panels.empty()) continue;
        files.push_back({std::string(to_string(exp)) + ".svg", svg_for_experiment(exp, panels, report.config.unit)});
    }
    return files;
}

std::vector<std::filesystem::path> write_outputs(const Report& report, const std::filesystem::path& dir) {
    require_entries(report);
    std::vector<RenderedFile> files;
    for (auto format : report.config.formats) {
        auto batch = format == OutputFormat::Svg ? render_figures(report) : render_tables(report, format);
        for (auto& f : batch) files.push_back(std::move(f));
    }
    std::vector<std::filesystem::path> written;
    for (const auto& f : files) {
        auto path = dir / f.name;
        text::write_file_atomic(path, f.contents);
        written.push_back(std::move(path));
    }
    return written;
}

}  // namespace zeroprobe
