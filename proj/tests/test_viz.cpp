#include "doctest.h"

#include <algorithm>
#include <set>

#include "quxai/viz.hpp"
#include "support/oracles.hpp"

using namespace quxai;

namespace {

ImportanceReport report_with(std::vector<double> scores, std::vector<std::string> labels = {}) {
    ImportanceReport r;
    r.final_scores = std::move(scores);
    if (labels.empty()) {
        for (std::size_t i = 0; i < r.final_scores.size(); ++i)
            labels.push_back("f" + std::to_string(i));
    }
    r.feature_labels = std::move(labels);
    r.dci = r.pi = r.final_scores;
    r.baseline_accuracy = 1.0;
    r.model_descriptor = "QDT (amplitude)";
    return r;
}

} // namespace

TEST_CASE("sorted order: descending scores, ties by ascending index") {
    CHECK(sorted_feature_order({0.1, 0.5, 0.3}) == std::vector<std::size_t>{1, 2, 0});
    CHECK(sorted_feature_order({0.2, 0.2, 0.2}) == std::vector<std::size_t>{0, 1, 2});
    CHECK(sorted_feature_order({-0.1, 0.0, -0.5}) == std::vector<std::size_t>{1, 0, 2});
}

TEST_CASE("bar chart: well-formed SVG with one rect per feature, sorted") {
    const ImportanceReport r = report_with({0.1, 0.5, 0.3}, {"a", "b", "c"});
    const std::string svg = render_bar_chart(r);

    std::string why;
    CHECK_MESSAGE(oracle::xml_well_formed(svg, &why), why);
    CHECK(oracle::count_occurrences(svg, "<rect ") == 3);

    // top-to-bottom label order b, c, a
    const std::size_t pos_b = svg.find(">b</text>");
    const std::size_t pos_c = svg.find(">c</text>");
    const std::size_t pos_a = svg.find(">a</text>");
    REQUIRE(pos_b != std::string::npos);
    REQUIRE(pos_c != std::string::npos);
    REQUIRE(pos_a != std::string::npos);
    CHECK(pos_b < pos_c);
    CHECK(pos_c < pos_a);
}

TEST_CASE("bar chart: all-equal scores keep the original feature order") {
    const ImportanceReport r = report_with({0.4, 0.4, 0.4}, {"first", "second", "third"});
    const std::string svg = render_bar_chart(r);
    CHECK(svg.find(">first<") < svg.find(">second<"));
    CHECK(svg.find(">second<") < svg.find(">third<"));
}

TEST_CASE("bar chart: negative scores draw leftward from the zero baseline") {
    const ImportanceReport r = report_with({0.5, -0.25}, {"pos", "neg"});
    ChartSpec spec;
    spec.show_values = true;
    const std::string svg = render_bar_chart(r, spec);
    std::string why;
    CHECK_MESSAGE(oracle::xml_well_formed(svg, &why), why);
    // negative value label rendered with its sign
    CHECK(svg.find("-0.2500") != std::string::npos);

    // the negative bar's x must sit left of the baseline; extract the two
    // rect x values and compare against the baseline line position
    const std::size_t line_pos = svg.find("<line x1=\"");
    REQUIRE(line_pos != std::string::npos);
    const double baseline = std::stod(svg.substr(line_pos + 10));
    const std::size_t rect2 = svg.find("<rect ", svg.find("<rect ") + 1);
    const std::size_t x_attr = svg.find("x=\"", rect2);
    const double neg_x = std::stod(svg.substr(x_attr + 3));
    CHECK(neg_x < baseline);
}

TEST_CASE("bar chart: labels are XML-escaped") {
    const ImportanceReport r = report_with({0.1}, {"a<b>&\"c\""});
    const std::string svg = render_bar_chart(r);
    std::string why;
    CHECK_MESSAGE(oracle::xml_well_formed(svg, &why), why);
    CHECK(svg.find("a&lt;b&gt;&amp;") != std::string::npos);
}

TEST_CASE("bar chart: empty report is rejected; rendering is pure") {
    ImportanceReport empty;
    CHECK_THROWS_AS((void)render_bar_chart(empty), Error);

    const ImportanceReport r = report_with({0.3, 0.1});
    CHECK(render_bar_chart(r) == render_bar_chart(r));
}

TEST_CASE("multipanel: 10 reports auto-layout to a 4x3 grid") {
    std::vector<ImportanceReport> reports;
    for (int i = 0; i < 10; ++i) {
        ImportanceReport r = report_with({0.5, 0.2, 0.1});
        r.model_descriptor = "model_" + std::to_string(i);
        reports.push_back(std::move(r));
    }
    const std::string svg = render_multipanel(reports);
    std::string why;
    CHECK_MESSAGE(oracle::xml_well_formed(svg, &why), why);
    CHECK(oracle::count_occurrences(svg, "<g transform=") == 10);
    for (int i = 0; i < 10; ++i)
        CHECK(svg.find("model_" + std::to_string(i)) != std::string::npos);

    // 4 columns x 3 rows: four distinct x offsets, three distinct y offsets.
    std::set<std::string> xs, ys;
    std::size_t pos = 0;
    while ((pos = svg.find("<g transform=\"translate(", pos)) != std::string::npos) {
        pos += 24;
        const std::size_t comma = svg.find(',', pos);
        const std::size_t close = svg.find(')', comma);
        xs.insert(svg.substr(pos, comma - pos));
        ys.insert(svg.substr(comma + 1, close - comma - 1));
    }
    CHECK(xs.size() == 4);
    CHECK(ys.size() == 3);
}

TEST_CASE("multipanel: single report fills one panel; titles come from descriptors") {
    ImportanceReport r = report_with({0.5, 0.2});
    r.model_descriptor = "QRF (amplitude)";
    const std::string svg = render_multipanel({r});
    std::string why;
    CHECK_MESSAGE(oracle::xml_well_formed(svg, &why), why);
    CHECK(oracle::count_occurrences(svg, "<g transform=") == 1);
    CHECK(svg.find("QRF (amplitude)") != std::string::npos);

    CHECK_THROWS_AS((void)render_multipanel({}), Error);
}

TEST_CASE("text chart: bar scaling, zero handling and shared ordering") {
    const ImportanceReport r = report_with({0.5, 0.0, 0.25}, {"big", "none", "half"});
    const std::string text = render_text_chart(r);

    // top line is the max-score feature with a full 40-cell bar
    const std::size_t first_newline = text.find('\n');
    const std::string first = text.substr(0, first_newline);
    CHECK(first.find("big") == 0);
    CHECK(oracle::count_occurrences(first, "█") == 40);
    CHECK(first.find("0.5000") != std::string::npos);

    // zero scores render an empty bar and "0.0000"
    CHECK(text.find("0.0000") != std::string::npos);

    // ordering matches the SVG renderer
    CHECK(text.find("big") < text.find("half"));
    CHECK(text.find("half") < text.find("none"));

    // half-score bar has 20 cells
    const std::size_t half_line = text.find("half");
    const std::string half_row = text.substr(half_line, text.find('\n', half_line) - half_line);
    CHECK(oracle::count_occurrences(half_row, "█") == 20);
}

TEST_CASE("chart spec validation") {
    ChartSpec spec;
    spec.width_px = 0;
    CHECK_THROWS_AS(spec.validate(), Error);
    spec = {};
    spec.bar_height_px = -2;
    CHECK_THROWS_AS(spec.validate(), Error);
}
