#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "bbr/losses.hpp"
#include "bbr/numcheck.hpp"
#include "bbr/simulation.hpp"

namespace bbr {

/// Tabular artifact. Serialized as '#'-prefixed metadata lines, a header
/// row, then data rows; LF endings; doubles in shortest round-trip form.
/// Identical tables produce byte-identical files.
struct CsvTable {
    using Cell = std::variant<std::string, double, std::int64_t>;

    std::vector<std::string> metadata;  // "key=value", emitted as "# key=value"
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;
};

/// Atomic write (temp file + rename). Throws std::runtime_error naming
/// the path on I/O failure, std::invalid_argument on ragged rows.
void write_csv(const CsvTable& table, const std::filesystem::path& path);

std::string csv_to_string(const CsvTable& table);

struct PlotSpec {
    std::string title;
    std::string x_column;
    std::string x_label;
    std::string y_column;
    std::string y_label;
    std::string series_column = "kind";
    bool log_y = false;
};

/// Fixed per-kind line style so plots are comparable across runs.
struct SeriesStyle {
    std::string color;
    std::string dash;  // SVG dash array, empty = solid
    double width = 1.5;
};

SeriesStyle kind_style(std::string_view series_name);

/// Self-contained SVG 1.1 line plot (rect/line/polyline/text only),
/// viewBox 960x600, 10% margins, ~6 ticks per axis, one polyline per
/// series. Deterministic bytes for identical inputs. Throws
/// std::invalid_argument for missing columns, std::runtime_error for an
/// empty table or a series with fewer than two points. With log_y,
/// non-positive values are dropped.
void render_svg(const CsvTable& table, const PlotSpec& spec,
                const std::filesystem::path& path);

std::string svg_to_string(const CsvTable& table, const PlotSpec& spec);

// Table adapters for the library's report types.
CsvTable sweep_table(const SweepReport& report,
                     std::vector<std::string> metadata);
CsvTable sim_table(const SimReport& report,
                   std::vector<std::string> metadata);
CsvTable gradcheck_table(const GradCheckReport& report,
                         std::vector<std::string> metadata);

}  // namespace bbr
