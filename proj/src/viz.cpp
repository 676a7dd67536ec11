#include "quxai/viz.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace quxai {

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fmt(double v, const char* pattern = "%.2f") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), pattern, v);
    return buf;
}

std::string fmt_value(double v) {
    if (v == 0.0) v = 0.0; // normalize -0.0
    return fmt(v, "%.4f");
}

struct ChartLayout {
    double label_gutter = 0.0;
    double value_gutter = 0.0;
    double top = 0.0;
    double row_h = 0.0;
    double width = 0.0;
    double height = 0.0;
    double plot_w = 0.0;
    double lo = 0.0;
    double hi = 1.0;

    double x_of(double v) const { return label_gutter + (v - lo) / (hi - lo) * plot_w; }
};

ChartLayout layout_for(const ImportanceReport& report, const ChartSpec& spec,
                       const std::string& title) {
    ChartLayout l;
    std::size_t max_label = 0;
    for (const auto& s : report.feature_labels) max_label = std::max(max_label, s.size());
    l.label_gutter = std::max(60.0, static_cast<double>(max_label) * 7.5 + 16.0);
    l.value_gutter = spec.show_values ? 70.0 : 16.0;
    l.top = title.empty() ? 16.0 : 40.0;
    l.row_h = static_cast<double>(spec.bar_height_px) + 6.0;
    l.width = static_cast<double>(spec.width_px);
    l.plot_w = std::max(50.0, l.width - l.label_gutter - l.value_gutter);
    l.height = l.top + l.row_h * static_cast<double>(report.final_scores.size()) + 16.0;

    l.lo = 0.0;
    l.hi = 0.0;
    for (double s : report.final_scores) {
        l.lo = std::min(l.lo, s);
        l.hi = std::max(l.hi, s);
    }
    if (l.hi == l.lo) l.hi = l.lo + 1.0; // flat scores: bars collapse onto the baseline
    return l;
}

// Chart body as a <g> positioned at (ox, oy); shared by the single chart and
// the multipanel grid.
std::string chart_group(const ImportanceReport& report, const ChartSpec& spec, double ox,
                        double oy, const std::string& title) {
    const ChartLayout l = layout_for(report, spec, title);
    const std::vector<std::size_t> order = sorted_feature_order(report.final_scores);
    const double baseline = l.x_of(0.0);

    std::ostringstream svg;
    svg << "<g transform=\"translate(" << fmt(ox) << "," << fmt(oy) << ")\">\n";
    if (!title.empty()) {
        svg << "  <text x=\"" << fmt(l.width / 2.0)
            << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\" "
               "font-weight=\"bold\">"
            << xml_escape(title) << "</text>\n";
    }
    for (std::size_t r = 0; r < order.size(); ++r) {
        const std::size_t f = order[r];
        const double score = report.final_scores[f];
        const double y = l.top + l.row_h * static_cast<double>(r) + 3.0;
        const double x_end = l.x_of(score);
        const double bar_x = std::min(baseline, x_end);
        const double bar_w = std::fabs(x_end - baseline);
        const char* fill = score < 0.0 ? "#d1495b" : "#4f7cac";

        svg << "  <rect x=\"" << fmt(bar_x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(bar_w)
            << "\" height=\"" << spec.bar_height_px << "\" fill=\"" << fill << "\"/>\n";
        svg << "  <text x=\"" << fmt(l.label_gutter - 6.0) << "\" y=\""
            << fmt(y + spec.bar_height_px * 0.72)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">"
            << xml_escape(report.feature_labels[f]) << "</text>\n";
        if (spec.show_values) {
            const bool leftward = score < 0.0;
            const double tx = leftward ? bar_x - 4.0 : bar_x + bar_w + 4.0;
            svg << "  <text x=\"" << fmt(tx) << "\" y=\"" << fmt(y + spec.bar_height_px * 0.72)
                << "\" text-anchor=\"" << (leftward ? "end" : "start")
                << "\" font-family=\"sans-serif\" font-size=\"11\">" << fmt_value(score)
                << "</text>\n";
        }
    }
    svg << "  <line x1=\"" << fmt(baseline) << "\" y1=\"" << fmt(l.top) << "\" x2=\""
        << fmt(baseline) << "\" y2=\"" << fmt(l.height - 12.0)
        << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    svg << "</g>\n";
    return svg.str();
}

std::string svg_document(double width, double height, const std::string& body) {
    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << fmt(width)
        << "\" height=\"" << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << " " << fmt(height)
        << "\">\n"
        << body << "</svg>\n";
    return svg.str();
}

void check_report(const ImportanceReport& report) {
    if (report.final_scores.empty()) fail_invalid("render: report has no features");
    if (report.final_scores.size() != report.feature_labels.size())
        fail_invalid("render: labels and scores differ in length");
}

} // namespace

void ChartSpec::validate() const {
    if (width_px < 1 || bar_height_px < 1) fail_invalid("chart spec: dimensions must be positive");
    if (panel_rows < 0 || panel_cols < 0) fail_invalid("chart spec: grid must be nonnegative");
}

std::vector<std::size_t> sorted_feature_order(const std::vector<double>& scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    return order;
}

std::string render_bar_chart(const ImportanceReport& report, const ChartSpec& spec) {
    spec.validate();
    check_report(report);
    const std::string title = spec.title.empty() ? report.model_descriptor : spec.title;
    const ChartLayout l = layout_for(report, spec, title);
    return svg_document(l.width, l.height, chart_group(report, spec, 0.0, 0.0, title));
}

std::string render_multipanel(const std::vector<ImportanceReport>& reports,
                              const ChartSpec& spec) {
    spec.validate();
    if (reports.empty()) fail_invalid("render_multipanel: no reports");
    for (const auto& r : reports) check_report(r);

    const std::size_t n = reports.size();
    std::size_t cols = spec.panel_cols > 0 ? static_cast<std::size_t>(spec.panel_cols)
                                           : static_cast<std::size_t>(std::ceil(
                                                 std::sqrt(static_cast<double>(n))));
    cols = std::max<std::size_t>(1, std::min(cols, n));
    std::size_t rows = spec.panel_rows > 0 ? static_cast<std::size_t>(spec.panel_rows)
                                           : (n + cols - 1) / cols;
    if (rows * cols < n)
        fail_invalid("render_multipanel: grid too small for " + std::to_string(n) + " panels");

    double panel_h = 0.0;
    for (const auto& r : reports) {
        const ChartLayout l = layout_for(r, spec, r.model_descriptor);
        panel_h = std::max(panel_h, l.height);
    }
    const double panel_w = static_cast<double>(spec.width_px);
    const double pad = 12.0;

    std::ostringstream body;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = i / cols;
        const std::size_t c = i % cols;
        body << chart_group(reports[i], spec, pad + static_cast<double>(c) * (panel_w + pad),
                            pad + static_cast<double>(r) * (panel_h + pad),
                            reports[i].model_descriptor);
    }
    const double total_w = pad + static_cast<double>(cols) * (panel_w + pad);
    const double total_h = pad + static_cast<double>(rows) * (panel_h + pad);
    return svg_document(total_w, total_h, body.str());
}

std::string render_text_chart(const ImportanceReport& report) {
    check_report(report);
    constexpr int kBarColumns = 40;

    const std::vector<std::size_t> order = sorted_feature_order(report.final_scores);
    std::size_t label_w = 0;
    double max_abs = 0.0;
    for (std::size_t f = 0; f < report.final_scores.size(); ++f) {
        label_w = std::max(label_w, report.feature_labels[f].size());
        max_abs = std::max(max_abs, std::fabs(report.final_scores[f]));
    }

    std::ostringstream out;
    for (std::size_t f : order) {
        const double score = report.final_scores[f];
        const int cells =
            max_abs > 0.0
                ? static_cast<int>(std::lround(kBarColumns * std::fabs(score) / max_abs))
                : 0;
        std::string bar;
        for (int c = 0; c < cells; ++c) bar += "█";
        out << report.feature_labels[f]
            << std::string(label_w - report.feature_labels[f].size(), ' ') << " |" << bar
            << std::string(static_cast<std::size_t>(kBarColumns - cells), ' ') << "  "
            << fmt_value(score) << '\n';
    }
    return out.str();
}

} // namespace quxai
