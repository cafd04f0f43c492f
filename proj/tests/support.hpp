#pragma once

// Shared fixtures and independent oracles for the test suites. Everything
// here recomputes expectations from first principles; nothing calls back
// into the implementation path under test.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "gsemtmo/image.hpp"
#include "gsemtmo/rng.hpp"
#include "gsemtmo/tensor.hpp"

namespace testsupport {

inline double rel_err(double a, double b, double floor_mag = 1e-4) {
    return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), floor_mag});
}

// Central finite difference of f() with respect to *slot.
template <typename F>
double central_diff(F&& f, double* slot, double h = 1e-5) {
    const double orig = *slot;
    *slot = orig + h;
    const double fp = f();
    *slot = orig - h;
    const double fm = f();
    *slot = orig;
    return (fp - fm) / (2.0 * h);
}

inline gsemtmo::Tensor2 random_tensor(int rows, int cols, gsemtmo::Rng& rng,
                                      double lo = -1.0, double hi = 1.0) {
    gsemtmo::Tensor2 t(rows, cols);
    for (auto& x : t.v) x = rng.next_uniform(lo, hi);
    return t;
}

inline gsemtmo::ImageF random_image(int w, int h, gsemtmo::Rng& rng) {
    gsemtmo::ImageF img(w, h, 3);
    for (auto& v : img.data) v = static_cast<float>(rng.next_unit());
    return img;
}

inline gsemtmo::ImageF constant_image(int w, int h, float r, float g, float b) {
    gsemtmo::ImageF img(w, h, 3);
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        img.data[p * 3 + 0] = r;
        img.data[p * 3 + 1] = g;
        img.data[p * 3 + 2] = b;
    }
    return img;
}

// Vertical stripes of near-equal width, one label per stripe.
inline gsemtmo::SegMap stripes_seg(int w, int h, const std::vector<std::uint8_t>& labels) {
    gsemtmo::SegMap seg(w, h);
    const int n = static_cast<int>(labels.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            seg.at(x, y) = labels[std::min(x * n / w, n - 1)];
    return seg;
}

// Random Voronoi-style segmentation: `count` seeded sites with the given
// labels, each pixel takes the label of its nearest site.
inline gsemtmo::SegMap voronoi_seg(int w, int h, const std::vector<std::uint8_t>& labels,
                                   gsemtmo::Rng& rng) {
    struct Site {
        double x, y;
        std::uint8_t label;
    };
    std::vector<Site> sites;
    for (std::uint8_t label : labels)
        sites.push_back({rng.next_uniform(0, w), rng.next_uniform(0, h), label});
    gsemtmo::SegMap seg(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double best = 1e300;
            std::uint8_t best_label = sites[0].label;
            for (const auto& s : sites) {
                const double d = (x - s.x) * (x - s.x) + (y - s.y) * (y - s.y);
                if (d < best) {
                    best = d;
                    best_label = s.label;
                }
            }
            seg.at(x, y) = best_label;
        }
    return seg;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("gsemtmo_test_" + tag + "_" + std::to_string(++counter) + "_" +
                 std::to_string(reinterpret_cast<std::uintptr_t>(this) & 0xFFFF));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace testsupport
