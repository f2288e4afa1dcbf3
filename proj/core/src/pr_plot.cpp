#include "nucleo/pr_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "nucleo/errors.hpp"
#include "nucleo/image_io.hpp"

namespace nucleo {

std::string pr_table_to_text(const std::vector<PrPoint>& points) {
    std::string out = "threshold precision recall\n";
    char line[96];
    for (const PrPoint& p : points) {
        std::snprintf(line, sizeof(line), "%.6f %.6f %.6f\n", p.threshold, p.precision, p.recall);
        out += line;
    }
    return out;
}

std::vector<PrPoint> pr_table_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string header;
    if (!std::getline(in, header) || header.rfind("threshold precision recall", 0) != 0)
        throw ValidationError("P-R table: missing header line");
    std::vector<PrPoint> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        PrPoint p;
        if (std::sscanf(line.c_str(), "%lf %lf %lf", &p.threshold, &p.precision, &p.recall) != 3)
            throw ValidationError("P-R table: malformed record: " + line);
        out.push_back(p);
    }
    return out;
}

std::vector<PrPoint> resample_pr(const std::vector<PrPoint>& points, int n) {
    std::vector<PrPoint> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        double r = static_cast<double>(i) / (n - 1);
        PrPoint pt;
        pt.recall = r;
        pt.precision = 0.0;
        pt.threshold = 0.0;
        bool any = false;
        for (const PrPoint& p : points) {
            if (p.recall >= r - 1e-12) {
                if (!any || p.precision > pt.precision) {
                    pt.precision = p.precision;
                    pt.threshold = p.threshold;
                }
                any = true;
            }
        }
        if (!any && r == 0.0) pt.precision = 1.0;
        out.push_back(pt);
    }
    return out;
}

double f1_of(const PrPoint& p) {
    if (p.precision + p.recall == 0.0) return 0.0;
    return 2.0 * p.precision * p.recall / (p.precision + p.recall);
}

std::size_t best_f1_index(const std::vector<PrPoint>& points) {
    if (points.empty()) throw ValidationError("best_f1_index: empty curve");
    std::size_t best = 0;
    for (std::size_t i = 1; i < points.size(); ++i)
        if (f1_of(points[i]) > f1_of(points[best])) best = i;
    return best;
}

namespace {

struct Canvas {
    int size;
    std::vector<std::uint8_t> rgb;

    explicit Canvas(int s) : size(s), rgb(static_cast<std::size_t>(s) * s * 3, 255) {}

    void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        if (x < 0 || y < 0 || x >= size || y >= size) return;
        std::size_t i = (static_cast<std::size_t>(y) * size + x) * 3;
        rgb[i] = r;
        rgb[i + 1] = g;
        rgb[i + 2] = b;
    }

    void line(int x0, int y0, int x1, int y1, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
        int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
        int err = dx + dy;
        for (;;) {
            set(x0, y0, r, g, b);
            if (x0 == x1 && y0 == y1) break;
            int e2 = 2 * err;
            if (e2 >= dy) {
                err += dy;
                x0 += sx;
            }
            if (e2 <= dx) {
                err += dx;
                y0 += sy;
            }
        }
    }
};

} // namespace

void render_pr_curve_png(const std::string& path, const std::vector<PrPoint>& points, int size) {
    Canvas canvas(size);
    int margin = size / 10;
    int plot = size - 2 * margin;
    auto px = [&](double recall) { return margin + static_cast<int>(std::lround(recall * plot)); };
    auto py = [&](double precision) {
        return size - margin - static_cast<int>(std::lround(precision * plot));
    };

    for (int g = 0; g <= 5; ++g) {
        double v = g / 5.0;
        canvas.line(px(v), py(0), px(v), py(1), 225, 225, 225);
        canvas.line(px(0), py(v), px(1), py(v), 225, 225, 225);
    }
    canvas.line(px(0), py(0), px(1), py(0), 0, 0, 0);
    canvas.line(px(0), py(0), px(0), py(1), 0, 0, 0);

    std::vector<PrPoint> sorted = points;
    std::sort(sorted.begin(), sorted.end(),
              [](const PrPoint& a, const PrPoint& b) { return a.recall < b.recall; });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        canvas.line(px(sorted[i - 1].recall), py(sorted[i - 1].precision), px(sorted[i].recall),
                    py(sorted[i].precision), 30, 80, 200);
    for (const PrPoint& p : sorted) {
        int x = px(p.recall), y = py(p.precision);
        canvas.set(x, y, 10, 40, 160);
        canvas.set(x + 1, y, 10, 40, 160);
        canvas.set(x, y + 1, 10, 40, 160);
    }

    save_png_rgb8(path, size, size, canvas.rgb);
}

} // namespace nucleo
