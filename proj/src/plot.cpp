#include "gsemtmo/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "gsemtmo/errors.hpp"

namespace gsemtmo {

namespace {

struct Color {
    float r, g, b;
};

constexpr Color kSeriesColors[] = {
    {0.85f, 0.25f, 0.20f}, {0.20f, 0.45f, 0.85f}, {0.20f, 0.65f, 0.30f},
    {0.75f, 0.55f, 0.10f}, {0.55f, 0.30f, 0.70f}, {0.15f, 0.60f, 0.60f},
};
constexpr Color kAxis{0.25f, 0.25f, 0.25f};
constexpr Color kGrid{0.88f, 0.88f, 0.88f};

void put_pixel(ImageF& img, int x, int y, Color c) {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
    img.at(x, y, 0) = c.r;
    img.at(x, y, 1) = c.g;
    img.at(x, y, 2) = c.b;
}

void draw_line(ImageF& img, int x0, int y0, int x1, int y1, Color c) {
    const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
        put_pixel(img, x0, y0, c);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
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

// 3x5 glyphs for "0123456789.-e+", one row per bitmask line.
constexpr std::uint8_t kGlyphs[14][5] = {
    {0b111, 0b101, 0b101, 0b101, 0b111},  // 0
    {0b010, 0b110, 0b010, 0b010, 0b111},  // 1
    {0b111, 0b001, 0b111, 0b100, 0b111},  // 2
    {0b111, 0b001, 0b111, 0b001, 0b111},  // 3
    {0b101, 0b101, 0b111, 0b001, 0b001},  // 4
    {0b111, 0b100, 0b111, 0b001, 0b111},  // 5
    {0b111, 0b100, 0b111, 0b101, 0b111},  // 6
    {0b111, 0b001, 0b010, 0b010, 0b010},  // 7
    {0b111, 0b101, 0b111, 0b101, 0b111},  // 8
    {0b111, 0b101, 0b111, 0b001, 0b111},  // 9
    {0b000, 0b000, 0b000, 0b000, 0b010},  // .
    {0b000, 0b000, 0b111, 0b000, 0b000},  // -
    {0b111, 0b101, 0b110, 0b100, 0b111},  // e (E shape)
    {0b000, 0b010, 0b111, 0b010, 0b000},  // +
};

int glyph_index(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    switch (c) {
        case '.': return 10;
        case '-': return 11;
        case 'e': case 'E': return 12;
        case '+': return 13;
    }
    return -1;
}

void draw_text(ImageF& img, int x, int y, const std::string& text, Color c) {
    for (char ch : text) {
        const int gi = glyph_index(ch);
        if (gi >= 0)
            for (int r = 0; r < 5; ++r)
                for (int col = 0; col < 3; ++col)
                    if (kGlyphs[gi][r] & (1 << (2 - col))) put_pixel(img, x + col, y + r, c);
        x += 4;
    }
}

std::string format_tick(double v) {
    char buf[32];
    const double mag = std::fabs(v);
    if (v == 0.0)
        std::snprintf(buf, sizeof(buf), "0");
    else if (mag >= 0.01 && mag < 10000.0)
        std::snprintf(buf, sizeof(buf), "%.3g", v);
    else
        std::snprintf(buf, sizeof(buf), "%.1e", v);
    return buf;
}

struct Frame {
    int x0, y0, x1, y1;  // plot rectangle, y grows downward
    double vx0, vx1, vy0, vy1;
    bool log_x;

    int px(double v) const {
        double t;
        if (log_x)
            t = (std::log10(v) - std::log10(vx0)) / (std::log10(vx1) - std::log10(vx0));
        else
            t = (v - vx0) / (vx1 - vx0);
        return x0 + static_cast<int>(t * (x1 - x0));
    }
    int py(double v) const {
        const double t = (v - vy0) / (vy1 - vy0);
        return y1 - static_cast<int>(t * (y1 - y0));
    }
};

ImageF blank(int width, int height) {
    ImageF img(width, height, 3);
    std::fill(img.data.begin(), img.data.end(), 1.0f);
    return img;
}

void draw_frame(ImageF& img, const Frame& f) {
    for (int i = 0; i <= 4; ++i) {
        const int gx = f.x0 + (f.x1 - f.x0) * i / 4;
        const int gy = f.y0 + (f.y1 - f.y0) * i / 4;
        draw_line(img, gx, f.y0, gx, f.y1, kGrid);
        draw_line(img, f.x0, gy, f.x1, gy, kGrid);
    }
    draw_line(img, f.x0, f.y0, f.x0, f.y1, kAxis);
    draw_line(img, f.x0, f.y1, f.x1, f.y1, kAxis);
    // Endpoint labels only; enough to read scales off the plot.
    draw_text(img, f.x0 - 2, f.y1 + 6, format_tick(f.vx0), kAxis);
    const std::string xmax = format_tick(f.vx1);
    draw_text(img, f.x1 - static_cast<int>(xmax.size()) * 4 + 2, f.y1 + 6, xmax, kAxis);
    draw_text(img, 4, f.y1 - 5, format_tick(f.vy0), kAxis);
    draw_text(img, 4, f.y0, format_tick(f.vy1), kAxis);
}

}  // namespace

ImageF plot_lines(const std::vector<PlotSeries>& series, int width, int height, bool log_x) {
    if (series.empty()) throw ValidationError("plot_lines: no series");
    double vx0 = std::numeric_limits<double>::max(), vx1 = std::numeric_limits<double>::lowest();
    double vy0 = vx0, vy1 = vx1;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size())
            throw ValidationError("plot_lines: series '" + s.label + "' x/y length mismatch");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            vx0 = std::min(vx0, s.x[i]);
            vx1 = std::max(vx1, s.x[i]);
            vy0 = std::min(vy0, s.y[i]);
            vy1 = std::max(vy1, s.y[i]);
        }
    }
    if (vx0 > vx1) throw ValidationError("plot_lines: no finite points");
    if (vx0 == vx1) vx1 = vx0 + 1.0;
    if (vy0 == vy1) vy1 = vy0 + 1.0;
    if (log_x && vx0 <= 0.0) throw ValidationError("plot_lines: log axis needs positive x");

    ImageF img = blank(width, height);
    Frame f{48, 16, width - 16, height - 28, vx0, vx1, vy0, vy1, log_x};
    draw_frame(img, f);

    for (std::size_t si = 0; si < series.size(); ++si) {
        const Color c = kSeriesColors[si % std::size(kSeriesColors)];
        const auto& s = series[si];
        for (std::size_t i = 1; i < s.x.size(); ++i)
            draw_line(img, f.px(s.x[i - 1]), f.py(s.y[i - 1]), f.px(s.x[i]), f.py(s.y[i]), c);
        // Legend swatch, top-left corner, one row per series.
        const int ly = f.y0 + 6 + static_cast<int>(si) * 8;
        draw_line(img, f.x0 + 6, ly, f.x0 + 22, ly, c);
    }
    return img;
}

ImageF plot_histogram(const std::vector<double>& values, int bins, double median, double ci_lo,
                      double ci_hi, int width, int height) {
    if (values.empty()) throw ValidationError("plot_histogram: no values");
    if (bins < 1) throw ValidationError("plot_histogram: bins must be >= 1");

    double lo = *std::min_element(values.begin(), values.end());
    double hi = *std::max_element(values.begin(), values.end());
    if (lo == hi) {
        lo -= 0.5;
        hi += 0.5;
    }
    std::vector<int> counts(bins, 0);
    for (double v : values) {
        int b = static_cast<int>((v - lo) / (hi - lo) * bins);
        b = std::clamp(b, 0, bins - 1);
        counts[b] += 1;
    }
    const int peak = *std::max_element(counts.begin(), counts.end());

    ImageF img = blank(width, height);
    Frame f{48, 16, width - 16, height - 28, lo, hi, 0.0, static_cast<double>(peak), false};
    draw_frame(img, f);

    const Color bar{0.55f, 0.65f, 0.85f};
    for (int b = 0; b < bins; ++b) {
        const int x0 = f.px(lo + (hi - lo) * b / bins) + 1;
        const int x1 = f.px(lo + (hi - lo) * (b + 1) / bins) - 1;
        const int top = f.py(counts[b]);
        for (int x = x0; x <= x1; ++x) draw_line(img, x, top, x, f.y1 - 1, bar);
    }
    const Color marker{0.80f, 0.15f, 0.15f};
    const int mx = f.px(median);
    draw_line(img, mx, f.y0, mx, f.y1, marker);
    const int wy = (f.y0 + f.y1) / 2;
    draw_line(img, f.px(ci_lo), wy, f.px(ci_hi), wy, marker);
    draw_line(img, f.px(ci_lo), wy - 4, f.px(ci_lo), wy + 4, marker);
    draw_line(img, f.px(ci_hi), wy - 4, f.px(ci_hi), wy + 4, marker);
    return img;
}

}  // namespace gsemtmo
