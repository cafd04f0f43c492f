#pragma once

#include <cstdint>
#include <vector>

namespace gsemtmo {

// Interleaved float image, values in [0,1] by convention. Linear-light or
// display-encoded depending on where it came from; functions say which they
// expect.
struct ImageF {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<float> data;  // row-major, interleaved

    ImageF() = default;
    ImageF(int w, int h, int c)
        : width(w), height(h), channels(c),
          data(static_cast<std::size_t>(w) * h * c, 0.0f) {}

    float& at(int x, int y, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    float at(int x, int y, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    bool same_size(const ImageF& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }
};

// Single-channel float plane (alpha maps, luminance, distance fields).
struct PlaneF {
    int width = 0;
    int height = 0;
    std::vector<float> data;

    PlaneF() = default;
    PlaneF(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0.0f) {}
    PlaneF(int w, int h, float fill)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    float& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::size_t size() const { return data.size(); }
};

// Per-pixel coarse semantic labels, valid range 0..8.
struct SegMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> labels;

    SegMap() = default;
    SegMap(int w, int h) : width(w), height(h), labels(static_cast<std::size_t>(w) * h, 0) {}

    std::uint8_t& at(int x, int y) { return labels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
    std::size_t size() const { return labels.size(); }
};

constexpr int kCoarseLabelCount = 9;
// Coarse classes in fixed order; "others" is the fallback bucket.
extern const char* const kCoarseLabelNames[kCoarseLabelCount];
constexpr std::uint8_t kLabelOthers = 8;

// Rec.709 luma weights, used for every luminance statistic in the project.
constexpr double kLumaR = 0.2126;
constexpr double kLumaG = 0.7152;
constexpr double kLumaB = 0.0722;

inline double luma709(double r, double g, double b) {
    return kLumaR * r + kLumaG * g + kLumaB * b;
}

PlaneF luma_plane(const ImageF& img);

// Bilinear resample with half-pixel centers; output stays inside the input
// value range.
ImageF resize_bilinear(const ImageF& img, int out_w, int out_h);
// Nearest-neighbor resample; never fabricates labels.
SegMap resize_nearest(const SegMap& seg, int out_w, int out_h);

// Display encoding transfer functions (sRGB piecewise curve or pure 2.2).
enum class TransferFn { srgb, gamma22 };
double decode_to_linear(double v, TransferFn fn);
double encode_from_linear(double v, TransferFn fn);

}  // namespace gsemtmo
