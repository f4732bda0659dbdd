#include "bbr/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

namespace bbr {

namespace {

std::string format_double(double v, int precision = -1) {
    char buf[64];
    std::to_chars_result r =
        precision < 0
            ? std::to_chars(buf, buf + sizeof(buf), v)
            : std::to_chars(buf, buf + sizeof(buf), v,
                            std::chars_format::general, precision);
    return std::string(buf, r.ptr);
}

std::string format_cell(const CsvTable::Cell& cell) {
    if (const auto* d = std::get_if<double>(&cell)) {
        return format_double(*d);
    }
    if (const auto* i = std::get_if<std::int64_t>(&cell)) {
        return std::to_string(*i);
    }
    const std::string& s = std::get<std::string>(cell);
    if (s.find_first_of(",\"\n") != std::string::npos) {
        std::string quoted = "\"";
        for (char c : s) {
            if (c == '"') quoted += '"';
            quoted += c;
        }
        quoted += '"';
        return quoted;
    }
    return s;
}

double cell_as_double(const CsvTable::Cell& cell, const std::string& column) {
    if (const auto* d = std::get_if<double>(&cell)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&cell)) {
        return static_cast<double>(*i);
    }
    throw std::invalid_argument("column '" + column + "' is not numeric");
}

std::string cell_as_string(const CsvTable::Cell& cell) {
    if (const auto* s = std::get_if<std::string>(&cell)) return *s;
    if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
    return std::to_string(std::get<std::int64_t>(cell));
}

std::size_t column_index(const CsvTable& table, const std::string& name) {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) {
        throw std::invalid_argument("column '" + name +
                                    "' not present in table");
    }
    return static_cast<std::size_t>(it - table.header.begin());
}

void atomic_write(const std::filesystem::path& path,
                  const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open '" + tmp.string() +
                                     "' for writing: " +
                                     std::strerror(errno));
        }
        out.write(content.data(),
                  static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out.good()) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw std::runtime_error("write failed for '" + tmp.string() +
                                     "': " + std::strerror(errno));
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw std::runtime_error("cannot rename temporary file onto '" +
                                 path.string() + "': " + ec.message());
    }
}

}  // namespace

std::string csv_to_string(const CsvTable& table) {
    std::string out;
    for (const std::string& meta : table.metadata) {
        out += "# ";
        out += meta;
        out += '\n';
    }
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out += ',';
        out += table.header[i];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size()) {
            throw std::invalid_argument(
                "row width does not match header width");
        }
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += format_cell(row[i]);
        }
        out += '\n';
    }
    return out;
}

void write_csv(const CsvTable& table, const std::filesystem::path& path) {
    atomic_write(path, csv_to_string(table));
}

SeriesStyle kind_style(std::string_view series_name) {
    static const std::map<std::string, SeriesStyle, std::less<>> styles = {
        {"iou", {"#1f77b4", "", 1.5}},
        {"giou", {"#ff7f0e", "6 3", 1.5}},
        {"diou", {"#2ca02c", "2 2", 1.5}},
        {"ciou", {"#d62728", "8 3 2 3", 1.5}},
        {"eiou", {"#9467bd", "4 2", 1.5}},
        {"niou", {"#8c564b", "10 4", 1.5}},
        {"neiou", {"#e377c2", "", 2.5}},
    };
    const auto it = styles.find(series_name);
    if (it != styles.end()) return it->second;
    return SeriesStyle{"#7f7f7f", "", 1.5};
}

namespace {

struct Series {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

// Nice linear tick step targeting ~6 ticks.
double nice_step(double span) {
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    if (norm <= 1.0) return mag;
    if (norm <= 2.0) return 2.0 * mag;
    if (norm <= 5.0) return 5.0 * mag;
    return 10.0 * mag;
}

std::string px(double v) {
    // Pixel coordinates rounded to 1/100 px keep files compact and the
    // bytes deterministic.
    return format_double(std::round(v * 100.0) / 100.0);
}

void append_text(std::string& svg, double x, double y,
                 const std::string& anchor, int size,
                 const std::string& text, const char* extra = "") {
    svg += "<text x=\"" + px(x) + "\" y=\"" + px(y) +
           "\" font-family=\"sans-serif\" font-size=\"" +
           std::to_string(size) + "\" text-anchor=\"" + anchor + "\"" +
           extra + ">" + text + "</text>\n";
}

}  // namespace

std::string svg_to_string(const CsvTable& table, const PlotSpec& spec) {
    const std::size_t xi = column_index(table, spec.x_column);
    const std::size_t yi = column_index(table, spec.y_column);
    const std::size_t si = column_index(table, spec.series_column);
    if (table.rows.empty()) {
        throw std::runtime_error("empty table, nothing to plot");
    }

    std::vector<Series> series;
    for (const auto& row : table.rows) {
        const std::string name = cell_as_string(row[si]);
        const double x = cell_as_double(row[xi], spec.x_column);
        const double y = cell_as_double(row[yi], spec.y_column);
        if (spec.log_y && !(y > 0.0)) continue;
        auto it = std::find_if(series.begin(), series.end(),
                               [&](const Series& s) { return s.name == name; });
        if (it == series.end()) {
            series.push_back(Series{name, {}});
            it = series.end() - 1;
        }
        it->points.emplace_back(x, y);
    }
    if (series.empty()) {
        throw std::runtime_error("no plottable data" +
                                 std::string(spec.log_y
                                                 ? " (log scale drops "
                                                   "non-positive values)"
                                                 : ""));
    }
    for (const Series& s : series) {
        if (s.points.size() < 2) {
            throw std::runtime_error("insufficient data for a polyline: "
                                     "series '" +
                                     s.name + "' has " +
                                     std::to_string(s.points.size()) +
                                     " point(s)");
        }
    }

    double xmin = series[0].points[0].first, xmax = xmin;
    double ymin = series[0].points[0].second, ymax = ymin;
    for (const Series& s : series) {
        for (const auto& [x, y] : s.points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (xmin == xmax) {
        xmin -= 1.0;
        xmax += 1.0;
    }
    if (ymin == ymax) {
        if (spec.log_y) {
            ymin /= 10.0;
            ymax *= 10.0;
        } else {
            ymin -= 1.0;
            ymax += 1.0;
        }
    }

    // 960x600 canvas, 10% margins.
    const double W = 960.0, H = 600.0;
    const double mx = 0.10 * W, my = 0.10 * H;
    const double x0 = mx, x1 = W - mx, y0 = my, y1 = H - my;

    const double ly_min = spec.log_y ? std::log10(ymin) : ymin;
    const double ly_max = spec.log_y ? std::log10(ymax) : ymax;
    auto sx = [&](double v) {
        return x0 + (v - xmin) / (xmax - xmin) * (x1 - x0);
    };
    auto sy = [&](double v) {
        const double t = spec.log_y ? std::log10(v) : v;
        return y1 - (t - ly_min) / (ly_max - ly_min) * (y1 - y0);
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 960 600\" "
           "width=\"960\" height=\"600\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"960\" height=\"600\" "
           "fill=\"#ffffff\"/>\n";
    svg += "<rect x=\"" + px(x0) + "\" y=\"" + px(y0) + "\" width=\"" +
           px(x1 - x0) + "\" height=\"" + px(y1 - y0) +
           "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1\"/>\n";

    append_text(svg, W / 2.0, y0 - 18.0, "middle", 18, spec.title);
    append_text(svg, W / 2.0, H - 14.0, "middle", 14,
                spec.x_label.empty() ? spec.x_column : spec.x_label);
    append_text(svg, 22.0, (y0 + y1) / 2.0, "middle", 14,
                spec.y_label.empty() ? spec.y_column : spec.y_label,
                (" transform=\"rotate(-90 22 " +
                 px((y0 + y1) / 2.0) + ")\"")
                    .c_str());

    // x ticks (linear)
    {
        const double step = nice_step(xmax - xmin);
        for (double k = std::ceil(xmin / step);
             k * step <= xmax + 1e-9 * (xmax - xmin); k += 1.0) {
            const double v = k * step;
            const double gx = sx(v);
            svg += "<line x1=\"" + px(gx) + "\" y1=\"" + px(y1) +
                   "\" x2=\"" + px(gx) + "\" y2=\"" + px(y1 + 6.0) +
                   "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
            append_text(svg, gx, y1 + 22.0, "middle", 12,
                        format_double(v, 6));
        }
    }
    // y ticks
    if (spec.log_y) {
        const int d0 = static_cast<int>(std::ceil(ly_min - 1e-9));
        const int d1 = static_cast<int>(std::floor(ly_max + 1e-9));
        const int every =
            std::max(1, static_cast<int>((d1 - d0) / 6) + ((d1 - d0) % 6 ? 1 : 0));
        for (int d = d0; d <= d1; d += every) {
            const double v = std::pow(10.0, d);
            const double gy = sy(v);
            svg += "<line x1=\"" + px(x0 - 6.0) + "\" y1=\"" + px(gy) +
                   "\" x2=\"" + px(x0) + "\" y2=\"" + px(gy) +
                   "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
            append_text(svg, x0 - 10.0, gy + 4.0, "end", 12,
                        "1e" + std::to_string(d));
        }
    } else {
        const double step = nice_step(ymax - ymin);
        for (double k = std::ceil(ymin / step);
             k * step <= ymax + 1e-9 * (ymax - ymin); k += 1.0) {
            const double v = k * step;
            const double gy = sy(v);
            svg += "<line x1=\"" + px(x0 - 6.0) + "\" y1=\"" + px(gy) +
                   "\" x2=\"" + px(x0) + "\" y2=\"" + px(gy) +
                   "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
            append_text(svg, x0 - 10.0, gy + 4.0, "end", 12,
                        format_double(v, 6));
        }
    }

    for (const Series& s : series) {
        const SeriesStyle style = kind_style(s.name);
        svg += "<polyline fill=\"none\" stroke=\"" + style.color +
               "\" stroke-width=\"" + format_double(style.width) + "\"";
        if (!style.dash.empty()) {
            svg += " stroke-dasharray=\"" + style.dash + "\"";
        }
        svg += " points=\"";
        for (std::size_t i = 0; i < s.points.size(); ++i) {
            if (i) svg += ' ';
            svg += px(sx(s.points[i].first)) + "," +
                   px(sy(s.points[i].second));
        }
        svg += "\"/>\n";
    }

    // legend, top-right inside the plot
    {
        double ly = y0 + 18.0;
        const double lx = x1 - 150.0;
        for (const Series& s : series) {
            const SeriesStyle style = kind_style(s.name);
            svg += "<line x1=\"" + px(lx) + "\" y1=\"" + px(ly - 4.0) +
                   "\" x2=\"" + px(lx + 28.0) + "\" y2=\"" + px(ly - 4.0) +
                   "\" stroke=\"" + style.color + "\" stroke-width=\"" +
                   format_double(style.width) + "\"";
            if (!style.dash.empty()) {
                svg += " stroke-dasharray=\"" + style.dash + "\"";
            }
            svg += "/>\n";
            std::string label = s.name;
            try {
                label = kind_display(parse_loss_tag(s.name));
            } catch (const std::invalid_argument&) {
            }
            append_text(svg, lx + 34.0, ly, "start", 12, label);
            ly += 18.0;
        }
    }

    svg += "</svg>\n";
    return svg;
}

void render_svg(const CsvTable& table, const PlotSpec& spec,
                const std::filesystem::path& path) {
    atomic_write(path, svg_to_string(table, spec));
}

CsvTable sweep_table(const SweepReport& report,
                     std::vector<std::string> metadata) {
    CsvTable t;
    t.metadata = std::move(metadata);
    t.header = {"kind",  "offset", "iou", "loss",     "d_cx",
                "d_cy",  "d_w",    "d_h", "grad_norm"};
    t.rows.reserve(report.rows.size());
    for (const SweepRow& row : report.rows) {
        t.rows.push_back({std::string(kind_name(row.kind)), row.offset,
                          row.iou, row.value, row.grad[0], row.grad[1],
                          row.grad[2], row.grad[3], row.grad_norm});
    }
    return t;
}

CsvTable sim_table(const SimReport& report,
                   std::vector<std::string> metadata) {
    CsvTable t;
    t.metadata = std::move(metadata);
    t.header = {"kind", "iteration", "total_error"};
    for (const SimSeries& s : report.series) {
        for (std::size_t it = 0; it < s.total_error.size(); ++it) {
            t.rows.push_back({std::string(kind_name(s.kind)),
                              static_cast<std::int64_t>(it),
                              s.total_error[it]});
        }
    }
    return t;
}

CsvTable gradcheck_table(const GradCheckReport& report,
                         std::vector<std::string> metadata) {
    CsvTable t;
    t.metadata = std::move(metadata);
    t.header = {"pairs_tested",  "pairs_skipped", "max_rel_err",
                "passed",        "worst_kind",    "worst_component",
                "worst_pred_cx", "worst_pred_cy", "worst_pred_w",
                "worst_pred_h",  "worst_gt_cx",   "worst_gt_cy",
                "worst_gt_w",    "worst_gt_h"};
    const WorstCase& w = report.worst;
    t.rows.push_back({static_cast<std::int64_t>(report.pairs_tested),
                      static_cast<std::int64_t>(report.pairs_skipped),
                      report.max_rel_err,
                      static_cast<std::int64_t>(report.passed ? 1 : 0),
                      std::string(w.component < 0 ? ""
                                                  : kind_name(w.kind.tag)),
                      static_cast<std::int64_t>(w.component), w.pred.cx,
                      w.pred.cy, w.pred.w, w.pred.h, w.gt.cx, w.gt.cy,
                      w.gt.w, w.gt.h});
    return t;
}

}  // namespace bbr
