#include "icd/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <vector>

#include "icd/csvio.hpp"

namespace icd {

namespace {

constexpr double kW = 640, kH = 480;
constexpr double kML = 56, kMR = 20, kMT = 36, kMB = 44;  // margins

const char* kPalette[10] = {"#4269d0", "#efb118", "#ff725c", "#6cc5b0", "#3ca951",
                            "#ff8ab7", "#a463f2", "#97bbf5", "#9c6b4e", "#9498a0"};

std::string f6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct Box {
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;

    void grow(double x, double y, bool first) {
        if (first) {
            x0 = x1 = x;
            y0 = y1 = y;
            return;
        }
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
    }
    void pad() {
        const double dx = x1 - x0, dy = y1 - y0;
        const double px = (dx == 0.0 ? 1.0 : dx) * 0.05, py = (dy == 0.0 ? 1.0 : dy) * 0.05;
        x0 -= px;
        x1 += px;
        y0 -= py;
        y1 += py;
    }
};

struct Canvas {
    std::string body;
    Box box;

    double sx(double x) const { return kML + (x - box.x0) / (box.x1 - box.x0) * (kW - kML - kMR); }
    double sy(double y) const { return kH - kMB - (y - box.y0) / (box.y1 - box.y0) * (kH - kMT - kMB); }

    void circle(double x, double y, double r, const std::string& fill, double opacity = 1.0) {
        body += "<circle cx=\"" + f6(sx(x)) + "\" cy=\"" + f6(sy(y)) + "\" r=\"" + f6(r) +
                "\" fill=\"" + fill + "\"";
        if (opacity < 1.0) body += " fill-opacity=\"" + f6(opacity) + "\"";
        body += "/>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                  double width, double opacity = 1.0) {
        if (pts.size() < 2) return;
        body += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + f6(width) +
                "\"";
        if (opacity < 1.0) body += " stroke-opacity=\"" + f6(opacity) + "\"";
        body += " points=\"";
        for (const auto& [x, y] : pts) body += f6(sx(x)) + "," + f6(sy(y)) + " ";
        body += "\"/>\n";
    }

    void text(double px, double py, const std::string& s, int size, const std::string& anchor,
              const std::string& fill = "#333333") {
        body += "<text x=\"" + f6(px) + "\" y=\"" + f6(py) + "\" font-size=\"" +
                std::to_string(size) + "\" font-family=\"sans-serif\" text-anchor=\"" + anchor +
                "\" fill=\"" + fill + "\">" + s + "</text>\n";
    }

    void frame(const std::string& title) {
        body += "<rect x=\"" + f6(kML) + "\" y=\"" + f6(kMT) + "\" width=\"" +
                f6(kW - kML - kMR) + "\" height=\"" + f6(kH - kMT - kMB) +
                "\" fill=\"none\" stroke=\"#888888\"/>\n";
        // min / mid / max ticks on both axes
        for (int i = 0; i < 3; ++i) {
            const double fx = box.x0 + (box.x1 - box.x0) * i / 2.0;
            const double fy = box.y0 + (box.y1 - box.y0) * i / 2.0;
            text(sx(fx), kH - kMB + 16, f6(fx), 11, "middle");
            text(kML - 6, sy(fy) + 4, f6(fy), 11, "end");
        }
        text(kW / 2, 20, title, 14, "middle", "#111111");
    }
};

std::string esc(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '&')
            o += "&amp;";
        else if (c == '<')
            o += "&lt;";
        else if (c == '>')
            o += "&gt;";
        else
            o += c;
    }
    return o;
}

void write_svg(const std::string& path, const Canvas& c) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("svg: cannot open " + path + " for writing");
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
       << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n"
       << c.body << "</svg>\n";
    if (!os.flush()) throw std::runtime_error("svg: write failed for " + path);
}

int need(const CsvTable& t, const std::string& name) {
    const int c = t.column(name);
    if (c < 0) throw std::runtime_error("svg: input is missing column '" + name + "'");
    return c;
}

void plot_scatter(const CsvTable& t, Canvas& c) {
    const int cx = need(t, "x"), cy = need(t, "y");
    const int cl = t.column("label");
    for (size_t r = 0; r < t.rows.size(); ++r)
        c.box.grow(t.num(r, cx), t.num(r, cy), r == 0);
    c.box.pad();
    for (size_t r = 0; r < t.rows.size(); ++r) {
        const int lab = cl >= 0 ? static_cast<int>(t.num(r, cl)) : 0;
        c.circle(t.num(r, cx), t.num(r, cy), 2.2, kPalette[((lab % 10) + 10) % 10], 0.75);
    }
}

void plot_edit(const CsvTable& t, Canvas& c) {
    const int cx = need(t, "x"), cy = need(t, "y");
    const int ex = need(t, "ex"), ey = need(t, "ey");
    const int ct = t.column("tgt");
    for (size_t r = 0; r < t.rows.size(); ++r) {
        c.box.grow(t.num(r, cx), t.num(r, cy), r == 0);
        c.box.grow(t.num(r, ex), t.num(r, ey), false);
    }
    c.box.pad();
    for (size_t r = 0; r < t.rows.size(); ++r) {
        const double x = t.num(r, cx), y = t.num(r, cy);
        const double u = t.num(r, ex), v = t.num(r, ey);
        c.polyline({{x, y}, {u, v}}, "#bbbbbb", 0.6, 0.6);
        c.circle(x, y, 2.0, "#9498a0", 0.6);
        const int lab = ct >= 0 ? static_cast<int>(t.num(r, ct)) : 2;
        c.circle(u, v, 2.4, kPalette[((lab % 10) + 10) % 10], 0.9);
    }
}

void plot_trajectory(const CsvTable& t, Canvas& c) {
    const int cs = need(t, "sample"), cx = need(t, "x"), cy = need(t, "y");
    std::map<int, std::vector<std::pair<double, double>>> lines;
    for (size_t r = 0; r < t.rows.size(); ++r) {
        c.box.grow(t.num(r, cx), t.num(r, cy), r == 0);
        lines[static_cast<int>(t.num(r, cs))].push_back({t.num(r, cx), t.num(r, cy)});
    }
    c.box.pad();
    int i = 0;
    for (const auto& [id, pts] : lines) {
        const char* col = kPalette[i++ % 10];
        c.polyline(pts, col, 1.0, 0.8);
        if (!pts.empty()) c.circle(pts.back().first, pts.back().second, 2.6, col);
    }
}

void plot_lines(const CsvTable& t, Canvas& c) {
    if (t.header.size() < 2) throw std::runtime_error("svg: lines plot needs >= 2 columns");
    for (size_t r = 0; r < t.rows.size(); ++r)
        for (size_t j = 1; j < t.header.size(); ++j)
            c.box.grow(t.num(r, 0), t.num(r, static_cast<int>(j)), r == 0 && j == 1);
    c.box.pad();
    for (size_t j = 1; j < t.header.size(); ++j) {
        std::vector<std::pair<double, double>> pts;
        for (size_t r = 0; r < t.rows.size(); ++r)
            pts.push_back({t.num(r, 0), t.num(r, static_cast<int>(j))});
        const char* col = kPalette[(j - 1) % 10];
        c.polyline(pts, col, 1.4);
        c.text(kW - kMR - 8, kMT + 16 * static_cast<double>(j), esc(t.header[j]), 11, "end", col);
    }
}

}  // namespace

void emit_plot(const PlotSpec& spec) {
    const CsvTable t = read_csv(spec.input);
    if (t.rows.empty()) throw std::runtime_error("svg: " + spec.input + " has no data rows");
    Canvas c;
    if (spec.kind == "scatter")
        plot_scatter(t, c);
    else if (spec.kind == "edit")
        plot_edit(t, c);
    else if (spec.kind == "trajectory")
        plot_trajectory(t, c);
    else if (spec.kind == "lines")
        plot_lines(t, c);
    else
        throw std::invalid_argument("svg: unknown plot kind '" + spec.kind + "'");
    c.frame(esc(spec.title.empty() ? spec.kind : spec.title));
    write_svg(spec.output, c);
}

}  // namespace icd
