#include "gsemtmo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>

#include "gsemtmo/dataset.hpp"
#include "gsemtmo/errors.hpp"
#include "gsemtmo/rng.hpp"

namespace gsemtmo {

namespace {

// Rec.709 primaries, D65 white.
constexpr double kM[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};
constexpr double kXn = 0.4124564 + 0.3575761 + 0.1804375;
constexpr double kYn = 0.2126729 + 0.7151522 + 0.0721750;
constexpr double kZn = 0.0193339 + 0.1191920 + 0.9503041;

double lab_f(double t) {
    constexpr double kDelta = 6.0 / 29.0;
    if (t > kDelta * kDelta * kDelta) return std::cbrt(t);
    return t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

void require_same_size(const ImageF& a, const ImageF& b, const char* op) {
    if (!a.same_size(b))
        throw ValidationError(std::string(op) + ": image sizes differ, " +
                              std::to_string(a.width) + "x" + std::to_string(a.height) + "x" +
                              std::to_string(a.channels) + " vs " + std::to_string(b.width) +
                              "x" + std::to_string(b.height) + "x" +
                              std::to_string(b.channels));
}

}  // namespace

Lab rgb_to_lab(double r, double g, double b, TransferFn fn) {
    const double lr = decode_to_linear(r, fn);
    const double lg = decode_to_linear(g, fn);
    const double lb = decode_to_linear(b, fn);
    const double x = (kM[0][0] * lr + kM[0][1] * lg + kM[0][2] * lb) / kXn;
    const double y = (kM[1][0] * lr + kM[1][1] * lg + kM[1][2] * lb) / kYn;
    const double z = (kM[2][0] * lr + kM[2][1] * lg + kM[2][2] * lb) / kZn;
    const double fx = lab_f(x), fy = lab_f(y), fz = lab_f(z);
    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

double hyab(const ImageF& pred, const ImageF& ref, TransferFn fn) {
    require_same_size(pred, ref, "hyab");
    if (pred.pixel_count() == 0) throw ValidationError("hyab: empty images");
    double acc = 0.0;
    for (std::size_t p = 0; p < pred.pixel_count(); ++p) {
        const std::size_t base = p * 3;
        const Lab lp = rgb_to_lab(pred.data[base], pred.data[base + 1], pred.data[base + 2], fn);
        const Lab lr = rgb_to_lab(ref.data[base], ref.data[base + 1], ref.data[base + 2], fn);
        const double da = lp.a - lr.a;
        const double db = lp.b - lr.b;
        acc += std::fabs(lp.L - lr.L) + std::sqrt(da * da + db * db);
    }
    return acc / static_cast<double>(pred.pixel_count());
}

double psnr(const ImageF& pred, const ImageF& ref, double peak) {
    require_same_size(pred, ref, "psnr");
    if (pred.data.empty()) throw ValidationError("psnr: empty images");
    double se = 0.0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        const double d = static_cast<double>(pred.data[i]) - ref.data[i];
        se += d * d;
    }
    const double mse = se / static_cast<double>(pred.data.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

namespace {

struct DPlane {
    int w = 0, h = 0;
    std::vector<double> v;
    DPlane(int w_, int h_) : w(w_), h(h_), v(static_cast<std::size_t>(w_) * h_, 0.0) {}
    double at(int x, int y) const { return v[static_cast<std::size_t>(y) * w + x]; }
    double& at(int x, int y) { return v[static_cast<std::size_t>(y) * w + x]; }
};

DPlane luma_dplane(const ImageF& img) {
    DPlane out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            out.at(x, y) = luma709(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2));
    return out;
}

std::vector<double> gaussian_kernel(int size, double sigma) {
    std::vector<double> k(size);
    const int half = size / 2;
    double total = 0.0;
    for (int i = 0; i < size; ++i) {
        const double d = i - half;
        k[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        total += k[i];
    }
    for (auto& x : k) x /= total;
    return k;
}

// Separable valid-region convolution.
DPlane convolve_valid(const DPlane& p, const std::vector<double>& k) {
    const int n = static_cast<int>(k.size());
    DPlane horiz(p.w - n + 1, p.h);
    for (int y = 0; y < p.h; ++y)
        for (int x = 0; x < horiz.w; ++x) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += k[i] * p.at(x + i, y);
            horiz.at(x, y) = acc;
        }
    DPlane out(horiz.w, p.h - n + 1);
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += k[i] * horiz.at(x, y + i);
            out.at(x, y) = acc;
        }
    return out;
}

DPlane downsample2(const DPlane& p) {
    DPlane out(p.w / 2, p.h / 2);
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x)
            out.at(x, y) = 0.25 * (p.at(2 * x, 2 * y) + p.at(2 * x + 1, 2 * y) +
                                   p.at(2 * x, 2 * y + 1) + p.at(2 * x + 1, 2 * y + 1));
    return out;
}

struct SsimTerms {
    double luminance = 0.0;  // mean of l map
    double cs = 0.0;         // mean of contrast-structure map
};

SsimTerms ssim_terms(const DPlane& a, const DPlane& b, const std::vector<double>& k) {
    constexpr double kC1 = 0.01 * 0.01;
    constexpr double kC2 = 0.03 * 0.03;

    DPlane a2(a.w, a.h), b2(a.w, a.h), ab(a.w, a.h);
    for (std::size_t i = 0; i < a.v.size(); ++i) {
        a2.v[i] = a.v[i] * a.v[i];
        b2.v[i] = b.v[i] * b.v[i];
        ab.v[i] = a.v[i] * b.v[i];
    }
    const DPlane mu_a = convolve_valid(a, k);
    const DPlane mu_b = convolve_valid(b, k);
    const DPlane m_a2 = convolve_valid(a2, k);
    const DPlane m_b2 = convolve_valid(b2, k);
    const DPlane m_ab = convolve_valid(ab, k);

    double l_acc = 0.0, cs_acc = 0.0;
    for (std::size_t i = 0; i < mu_a.v.size(); ++i) {
        const double ma = mu_a.v[i], mb = mu_b.v[i];
        const double va = m_a2.v[i] - ma * ma;
        const double vb = m_b2.v[i] - mb * mb;
        const double cov = m_ab.v[i] - ma * mb;
        l_acc += (2.0 * ma * mb + kC1) / (ma * ma + mb * mb + kC1);
        cs_acc += (2.0 * cov + kC2) / (va + vb + kC2);
    }
    const double n = static_cast<double>(mu_a.v.size());
    return {l_acc / n, cs_acc / n};
}

}  // namespace

double ms_ssim(const ImageF& pred, const ImageF& ref) {
    require_same_size(pred, ref, "ms_ssim");
    constexpr int kWindow = 11;
    constexpr double kSigma = 1.5;
    constexpr int kMaxScales = 5;
    constexpr double kWeights[kMaxScales] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

    const int min_dim = std::min(pred.width, pred.height);
    int scales = 0;
    for (int s = 1; s <= kMaxScales; ++s) {
        if (min_dim / (1 << (s - 1)) >= kWindow) scales = s;
    }
    if (scales == 0)
        throw ValidationError("ms_ssim: image too small for an 11x11 window");
    if (scales < kMaxScales)
        std::cerr << "ms_ssim: reducing to " << scales << " scales for " << pred.width << "x"
                  << pred.height << " input\n";

    double weight_total = 0.0;
    for (int s = 0; s < scales; ++s) weight_total += kWeights[s];

    const std::vector<double> kernel = gaussian_kernel(kWindow, kSigma);
    DPlane a = luma_dplane(pred);
    DPlane b = luma_dplane(ref);

    double score = 1.0;
    for (int s = 0; s < scales; ++s) {
        const SsimTerms terms = ssim_terms(a, b, kernel);
        const double w = kWeights[s] / weight_total;
        // Contrast-structure at every scale, luminance only at the coarsest.
        double factor = std::max(terms.cs, 0.0);
        if (s == scales - 1) factor *= std::max(terms.luminance, 0.0);
        score *= std::pow(factor, w);
        if (s + 1 < scales) {
            a = downsample2(a);
            b = downsample2(b);
        }
    }
    return score;
}

double multi_level_contrast(const PlaneF& luminance, int levels) {
    if (levels < 1) throw ValidationError("multi_level_contrast: levels must be >= 1");
    if (luminance.size() == 0) throw ValidationError("multi_level_contrast: empty plane");

    double level_sum = 0.0;
    for (int level = 1; level <= levels; ++level) {
        double var_sum = 0.0;
        int patches = 0;
        const int bw = luminance.width / level;
        const int bh = luminance.height / level;
        for (int py = 0; py < level; ++py) {
            const int y0 = py * bh;
            const int y1 = py == level - 1 ? luminance.height : (py + 1) * bh;
            for (int px = 0; px < level; ++px) {
                const int x0 = px * bw;
                const int x1 = px == level - 1 ? luminance.width : (px + 1) * bw;
                const long count = static_cast<long>(x1 - x0) * (y1 - y0);
                if (count <= 0) continue;  // grid finer than the image
                double mean = 0.0;
                for (int y = y0; y < y1; ++y)
                    for (int x = x0; x < x1; ++x) mean += luminance.at(x, y);
                mean /= static_cast<double>(count);
                double var = 0.0;
                for (int y = y0; y < y1; ++y)
                    for (int x = x0; x < x1; ++x) {
                        const double d = luminance.at(x, y) - mean;
                        var += d * d;
                    }
                var_sum += var / static_cast<double>(count);
                ++patches;
            }
        }
        level_sum += std::sqrt(var_sum / static_cast<double>(patches));
    }
    return level_sum / static_cast<double>(levels);
}

double multi_level_contrast(const ImageF& img, int levels) {
    return multi_level_contrast(luma_plane(img), levels);
}

double median(std::vector<double> values) {
    if (values.empty()) throw ValidationError("median: empty input");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

MedianCi median_ci(const std::vector<double>& scores, double level, int resamples,
                   std::uint64_t seed) {
    if (scores.empty()) throw ValidationError("median_ci: empty scores");
    if (level <= 0.0 || level >= 1.0) throw ValidationError("median_ci: level must be in (0,1)");

    MedianCi out;
    out.median = median(scores);
    if (scores.size() == 1 || resamples < 1) {
        out.lo = out.hi = out.median;
        return out;
    }

    Rng rng = derive_stream(seed, "median_ci");
    std::vector<double> medians(resamples);
    std::vector<double> sample(scores.size());
    for (int r = 0; r < resamples; ++r) {
        for (auto& s : sample) s = scores[rng.next_below(scores.size())];
        medians[r] = median(sample);
    }
    const double tail = (1.0 - level) / 2.0 * 100.0;
    out.lo = percentile(medians, tail);
    out.hi = percentile(std::move(medians), 100.0 - tail);
    return out;
}

std::vector<std::size_t> hc_select_indices(const std::vector<double>& c_ml, std::size_t count) {
    std::vector<std::size_t> order(c_ml.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return c_ml[a] > c_ml[b]; });
    if (count >= order.size()) {
        if (count > order.size())
            std::cerr << "hc_select: asked for " << count << " of " << order.size()
                      << " entries, returning all\n";
        return order;
    }
    order.resize(count);
    return order;
}

}  // namespace gsemtmo
