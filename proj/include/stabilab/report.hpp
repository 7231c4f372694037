#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace stabilab {

// %.17g round-trips doubles exactly, keeping reports byte-deterministic
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct CsvReport {
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void set(const std::string& key, const std::string& value) { config.emplace_back(key, value); }
    void set(const std::string& key, double value) { config.emplace_back(key, format_double(value)); }
    void set(const std::string& key, int value) { config.emplace_back(key, std::to_string(value)); }

    void add_row(const std::vector<double>& vals) {
        std::vector<std::string> row;
        row.reserve(vals.size());
        for (double v : vals) row.push_back(format_double(v));
        rows.push_back(std::move(row));
    }
    void add_row_strings(std::vector<std::string> row) { rows.push_back(std::move(row)); }

    void write(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + path);
        for (const auto& [k, val] : config) out << "# " << k << " = " << val << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i)
            out << columns[i] << (i + 1 < columns.size() ? "," : "");
        out << "\n";
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i)
                out << row[i] << (i + 1 < row.size() ? "," : "");
            out << "\n";
        }
        if (!out) throw std::runtime_error("write failed for " + path);
    }
};

// Minimal SVG line chart: one polyline per series over a shared x grid.
struct SvgPlot {
    std::string title;
    std::string x_label, y_label;
    bool log_y = false;
    std::vector<double> x;
    std::vector<std::pair<std::string, std::vector<double>>> series;

    void add_series(const std::string& name, std::vector<double> y) {
        series.emplace_back(name, std::move(y));
    }

    void write(const std::string& path) const {
        const int W = 760, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
        double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
        bool first = true;
        for (double v : x) {
            if (first) { x_min = x_max = v; first = false; }
            x_min = std::min(x_min, v);
            x_max = std::max(x_max, v);
        }
        first = true;
        for (const auto& [name, ys] : series)
            for (double v : ys) {
                const double t = log_y ? (v > 0.0 ? std::log10(v) : -300.0) : v;
                if (first) { y_min = y_max = t; first = false; }
                y_min = std::min(y_min, t);
                y_max = std::max(y_max, t);
            }
        if (x_max == x_min) x_max = x_min + 1.0;
        if (y_max == y_min) y_max = y_min + 1.0;
        const auto px = [&](double v) {
            return ml + (W - ml - mr) * (v - x_min) / (x_max - x_min);
        };
        const auto py = [&](double v) {
            const double t = log_y ? (v > 0.0 ? std::log10(v) : -300.0) : v;
            return H - mb - (H - mt - mb) * (t - y_min) / (y_max - y_min);
        };
        static const char* palette[] = {"#1f6fb2", "#c23b22", "#2e8b57", "#8a2be2",
                                        "#d2691e", "#008b8b", "#b22222", "#556b2f"};
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + path);
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
            << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
            << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
            << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
            << title << "</text>\n"
            << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
            << H - mb << "\" stroke=\"black\"/>\n"
            << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
            << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
            << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n"
            << "<text x=\"16\" y=\"" << H / 2 << "\" font-size=\"12\" transform=\"rotate(-90 16 "
            << H / 2 << ")\" text-anchor=\"middle\">" << y_label
            << (log_y ? " (log10)" : "") << "</text>\n";
        int ci = 0;
        for (const auto& [name, ys] : series) {
            const char* color = palette[ci % 8];
            out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < x.size() && i < ys.size(); ++i)
                out << px(x[i]) << "," << py(ys[i]) << " ";
            out << "\"/>\n"
                << "<text x=\"" << W - mr - 150 << "\" y=\"" << mt + 16 * ci + 12
                << "\" font-size=\"12\" fill=\"" << color << "\">" << name << "</text>\n";
            ++ci;
        }
        out << "</svg>\n";
        if (!out) throw std::runtime_error("write failed for " + path);
    }
};

}  // namespace stabilab
