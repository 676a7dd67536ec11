#pragma once

#include <string>
#include <vector>

#include "quxai/qmedley.hpp"

namespace quxai {

struct ChartSpec {
    std::string title;
    int width_px = 800;
    int bar_height_px = 24;
    bool show_values = true;
    // Multipanel grid; 0 rows/cols selects the ceil(sqrt(n)) auto layout.
    int panel_rows = 0;
    int panel_cols = 0;

    void validate() const;
};

/// Descending final score, ties by ascending feature index. Every renderer
/// uses this one ordering.
std::vector<std::size_t> sorted_feature_order(const std::vector<double>& scores);

/// Horizontal bar chart as an SVG 1.1 document. Negative scores extend left
/// of the zero baseline; value labels appear when spec.show_values.
std::string render_bar_chart(const ImportanceReport& report, const ChartSpec& spec = {});

/// Grid of per-model panels, one embedded bar chart each, titled by the
/// report's model descriptor.
std::string render_multipanel(const std::vector<ImportanceReport>& reports,
                              const ChartSpec& spec = {});

/// Fixed-width text chart, bars scaled to 40 columns, same ordering as the
/// SVG renderers.
std::string render_text_chart(const ImportanceReport& report);

} // namespace quxai
