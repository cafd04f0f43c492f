#include "gsemtmo/blending.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <set>

#include "gsemtmo/errors.hpp"
#include "gsemtmo/parallel.hpp"

namespace gsemtmo {

std::vector<PlaneF> binary_maps(const SegMap& seg) {
    if (seg.size() == 0) throw ValidationError("binary_maps: empty map");
    std::set<std::uint8_t> present(seg.labels.begin(), seg.labels.end());
    std::vector<std::uint8_t> order(present.begin(), present.end());
    std::vector<PlaneF> masks;
    masks.reserve(order.size());
    for (std::uint8_t label : order) {
        PlaneF m(seg.width, seg.height);
        for (std::size_t p = 0; p < seg.size(); ++p)
            m.data[p] = seg.labels[p] == label ? 1.0f : 0.0f;
        masks.push_back(std::move(m));
    }
    return masks;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Felzenszwalb-Huttenlocher 1D squared distance transform (lower envelope
// of parabolas), restricted to the sites with finite height so that columns
// without any seed stay at +inf.
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
            std::vector<double>& z, std::vector<int>& sites) {
    const int n = static_cast<int>(f.size());
    sites.clear();
    for (int q = 0; q < n; ++q)
        if (f[q] != kInf) sites.push_back(q);
    if (sites.empty()) {
        std::fill(d.begin(), d.begin() + n, kInf);
        return;
    }

    int k = 0;
    v[0] = sites[0];
    z[0] = -kInf;
    z[1] = kInf;
    for (std::size_t si = 1; si < sites.size(); ++si) {
        const int q = sites[si];
        double s;
        while (true) {
            const int p = v[k];
            s = ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) /
                (2.0 * (q - p));
            if (s > z[k]) break;
            --k;
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const int p = v[k];
        d[q] = (static_cast<double>(q) - p) * (q - p) + f[p];
    }
}

}  // namespace

PlaneF euclidean_distance_transform(const PlaneF& mask) {
    const int w = mask.width, h = mask.height;
    if (w < 1 || h < 1) throw ValidationError("edt: empty plane");

    std::vector<double> grid(static_cast<std::size_t>(w) * h);
    for (std::size_t p = 0; p < grid.size(); ++p)
        grid[p] = mask.data[p] > 0.0f ? 0.0 : kInf;

    // Columns, then rows; each pass needs scratch sized to its length.
    {
        std::vector<double> f(h), d(h), z(h + 1);
        std::vector<int> v(h), sites;
        for (int x = 0; x < w; ++x) {
            for (int y = 0; y < h; ++y) f[y] = grid[static_cast<std::size_t>(y) * w + x];
            edt_1d(f, d, v, z, sites);
            for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = d[y];
        }
    }
    {
        std::vector<double> f(w), d(w), z(w + 1);
        std::vector<int> v(w), sites;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) f[x] = grid[static_cast<std::size_t>(y) * w + x];
            edt_1d(f, d, v, z, sites);
            for (int x = 0; x < w; ++x) grid[static_cast<std::size_t>(y) * w + x] = d[x];
        }
    }

    PlaneF out(w, h);
    for (std::size_t p = 0; p < grid.size(); ++p)
        out.data[p] = grid[p] == kInf ? std::numeric_limits<float>::infinity()
                                      : static_cast<float>(std::sqrt(grid[p]));
    return out;
}

PlaneF erode_disk(const PlaneF& mask, int radius) {
    if (radius < 1) throw ValidationError("erode_disk: radius must be >= 1");
    PlaneF complement(mask.width, mask.height);
    for (std::size_t p = 0; p < mask.size(); ++p)
        complement.data[p] = mask.data[p] > 0.0f ? 0.0f : 1.0f;
    const PlaneF dist = euclidean_distance_transform(complement);
    PlaneF out(mask.width, mask.height);
    for (std::size_t p = 0; p < mask.size(); ++p)
        out.data[p] = dist.data[p] > static_cast<float>(radius) ? 1.0f : 0.0f;
    return out;
}

PlaneF dilate_disk(const PlaneF& mask, int radius) {
    if (radius < 1) throw ValidationError("dilate_disk: radius must be >= 1");
    const PlaneF dist = euclidean_distance_transform(mask);
    PlaneF out(mask.width, mask.height);
    for (std::size_t p = 0; p < mask.size(); ++p)
        out.data[p] = dist.data[p] <= static_cast<float>(radius) ? 1.0f : 0.0f;
    return out;
}

PlaneF feather_alpha(const PlaneF& mask, int radius, bool* fell_back) {
    if (radius < 1) throw ValidationError("feather_alpha: radius must be >= 1");
    if (fell_back) *fell_back = false;

    const PlaneF inside = erode_disk(mask, radius);
    bool inside_nonempty = false;
    for (float v : inside.data)
        if (v > 0.0f) {
            inside_nonempty = true;
            break;
        }
    if (!inside_nonempty) {
        if (fell_back) *fell_back = true;
        std::cerr << "feather_alpha: segment vanished under erosion, using raw mask\n";
        return mask;
    }

    const PlaneF dilated = dilate_disk(mask, radius);
    PlaneF outside(mask.width, mask.height);
    for (std::size_t p = 0; p < mask.size(); ++p)
        outside.data[p] = dilated.data[p] > 0.0f ? 0.0f : 1.0f;

    const PlaneF d_in = euclidean_distance_transform(inside);
    const PlaneF d_out = euclidean_distance_transform(outside);

    PlaneF alpha(mask.width, mask.height);
    for (std::size_t p = 0; p < mask.size(); ++p) {
        if (inside.data[p] > 0.0f) {
            alpha.data[p] = 1.0f;
        } else if (outside.data[p] > 0.0f) {
            alpha.data[p] = 0.0f;
        } else {
            const double din = d_in.data[p];
            const double dout = d_out.data[p];
            if (std::isinf(dout))
                alpha.data[p] = 1.0f;  // no definite outside anywhere
            else
                alpha.data[p] = static_cast<float>(dout / (din + dout));
        }
    }
    return alpha;
}

PlaneF bilateral_smooth(const PlaneF& alpha, int diameter, double sigma_color,
                        double sigma_space, int threads) {
    if (diameter < 1) throw ValidationError("bilateral_smooth: diameter must be >= 1");
    if (sigma_color <= 0.0 || sigma_space <= 0.0)
        throw ValidationError("bilateral_smooth: sigmas must be > 0");

    const int radius = diameter / 2;
    const double inv2ss = 1.0 / (2.0 * sigma_space * sigma_space);
    const double inv2sc = 1.0 / (2.0 * sigma_color * sigma_color);

    // Spatial kernel is fixed; precompute over the window.
    const int side = 2 * radius + 1;
    std::vector<double> spatial(static_cast<std::size_t>(side) * side);
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            spatial[static_cast<std::size_t>(dy + radius) * side + (dx + radius)] =
                std::exp(-(static_cast<double>(dx) * dx + static_cast<double>(dy) * dy) * inv2ss);

    PlaneF out(alpha.width, alpha.height);
    parallel_for(0, alpha.height, threads, [&](int y) {
        for (int x = 0; x < alpha.width; ++x) {
            const double center = alpha.at(x, y) * 255.0;
            double num = 0.0, den = 0.0;
            const int y0 = std::max(0, y - radius), y1 = std::min(alpha.height - 1, y + radius);
            const int x0 = std::max(0, x - radius), x1 = std::min(alpha.width - 1, x + radius);
            for (int yy = y0; yy <= y1; ++yy) {
                for (int xx = x0; xx <= x1; ++xx) {
                    const double v = alpha.at(xx, yy) * 255.0;
                    const double dc = v - center;
                    const double wgt =
                        spatial[static_cast<std::size_t>(yy - y + radius) * side +
                                (xx - x + radius)] *
                        std::exp(-dc * dc * inv2sc);
                    num += wgt * v;
                    den += wgt;
                }
            }
            out.at(x, y) = static_cast<float>(num / den / 255.0);
        }
    });
    return out;
}

AlphaStack normalize_stack(const std::vector<PlaneF>& alphas, std::size_t* zero_pixels) {
    if (alphas.empty()) throw ValidationError("normalize_stack: empty stack");
    const int w = alphas[0].width, h = alphas[0].height;
    for (const auto& a : alphas)
        if (a.width != w || a.height != h)
            throw ValidationError("normalize_stack: alpha map sizes differ");

    AlphaStack stack;
    stack.maps.assign(alphas.begin(), alphas.end());
    const double uniform = 1.0 / static_cast<double>(alphas.size());
    std::size_t zeros = 0;
    for (std::size_t p = 0; p < stack.maps[0].size(); ++p) {
        double total = 0.0;
        for (const auto& a : stack.maps) total += a.data[p];
        if (total <= 0.0) {
            ++zeros;
            for (auto& a : stack.maps) a.data[p] = static_cast<float>(uniform);
        } else {
            for (auto& a : stack.maps)
                a.data[p] = static_cast<float>(a.data[p] / total);
        }
    }
    if (zeros > 0) {
        std::cerr << "normalize_stack: " << zeros << " all-zero pixels got uniform weights\n";
        if (zero_pixels) *zero_pixels = zeros;
    } else if (zero_pixels) {
        *zero_pixels = 0;
    }
    return stack;
}

std::vector<ImageF> per_hint_frames(const ImageF& img, int node_count,
                                    const Tensor2& conditioning, const FcParams& fc,
                                    double leaky_slope, int threads) {
    if (fc.conditioning_dim() > 0 && conditioning.rows != node_count)
        throw ValidationError("per_hint_frames: conditioning rows " +
                              std::to_string(conditioning.rows) + " vs " +
                              std::to_string(node_count) + " nodes");
    std::vector<ImageF> frames;
    frames.reserve(node_count);
    // Same hint for every pixel: a constant pixel->node map per frame.
    const std::vector<int> constant_node(img.pixel_count(), 0);
    for (int i = 0; i < node_count; ++i) {
        Tensor2 row(1, conditioning.cols);
        for (int j = 0; j < conditioning.cols; ++j) row.v[j] = conditioning.at(i, j);
        frames.push_back(
            infer_image_conditioned(img, constant_node, row, fc, leaky_slope, threads));
    }
    return frames;
}

std::vector<ImageF> per_hint_frames(const ImageF& img, const SemanticGraph& graph,
                                    const HintMatrix& hints, const FcParams& fc,
                                    double leaky_slope, int threads) {
    return per_hint_frames(img, graph.node_count(), hints.hhat, fc, leaky_slope, threads);
}

ImageF blend(const AlphaStack& stack, const std::vector<ImageF>& frames) {
    if (stack.maps.size() != frames.size())
        throw ValidationError("blend: " + std::to_string(stack.maps.size()) + " alphas vs " +
                              std::to_string(frames.size()) + " frames");
    if (frames.empty()) throw ValidationError("blend: empty stacks");
    const int w = frames[0].width, h = frames[0].height;
    for (std::size_t i = 0; i < frames.size(); ++i)
        if (frames[i].width != w || frames[i].height != h || stack.maps[i].width != w ||
            stack.maps[i].height != h)
            throw ValidationError("blend: stack/frame dimensions differ");

    // Double accumulation with a per-pixel weight-sum division: the stored
    // float weights sum to 1 only within ~1e-7, and that dust would flip
    // 16-bit rounding when every frame is identical.
    ImageF out(w, h, 3);
    for (std::size_t p = 0; p < stack.maps[0].size(); ++p) {
        double num[3] = {0.0, 0.0, 0.0};
        double den = 0.0;
        for (std::size_t i = 0; i < frames.size(); ++i) {
            const double wgt = stack.maps[i].data[p];
            den += wgt;
            num[0] += wgt * frames[i].data[p * 3 + 0];
            num[1] += wgt * frames[i].data[p * 3 + 1];
            num[2] += wgt * frames[i].data[p * 3 + 2];
        }
        for (int c = 0; c < 3; ++c)
            out.data[p * 3 + c] = den > 0.0 ? static_cast<float>(num[c] / den) : 0.0f;
    }
    return out;
}

ImageF blend_pipeline(const ImageF& img, const SegMap& seg, const SemanticGraph& graph,
                      const Tensor2& conditioning, const FcParams& fc, double leaky_slope,
                      const BlendConfig& cfg, BlendDebug* debug) {
    auto masks = binary_maps(seg);
    if (static_cast<int>(masks.size()) != graph.node_count())
        throw ValidationError("blend_pipeline: segmentation labels do not match graph nodes");

    std::vector<PlaneF> alphas;
    alphas.reserve(masks.size());
    for (const auto& mask : masks) {
        PlaneF a = feather_alpha(mask, cfg.feather_radius);
        a = bilateral_smooth(a, cfg.bilateral_diameter, cfg.bilateral_sigma_color,
                             cfg.bilateral_sigma_space, cfg.threads);
        alphas.push_back(std::move(a));
    }
    AlphaStack stack = normalize_stack(alphas);
    auto frames =
        per_hint_frames(img, graph.node_count(), conditioning, fc, leaky_slope, cfg.threads);
    if (debug) {
        debug->alphas = stack.maps;
        debug->frames = frames;
    }
    return blend(stack, frames);
}

ImageF blend_pipeline(const ImageF& img, const SegMap& seg, const SemanticGraph& graph,
                      const HintMatrix& hints, const FcParams& fc, double leaky_slope,
                      const BlendConfig& cfg, BlendDebug* debug) {
    return blend_pipeline(img, seg, graph, hints.hhat, fc, leaky_slope, cfg, debug);
}

}  // namespace gsemtmo
