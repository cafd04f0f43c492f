#pragma once

#include <cstdint>
#include <vector>

#include "gsemtmo/image.hpp"

namespace gsemtmo {

struct Lab {
    double L = 0.0;
    double a = 0.0;
    double b = 0.0;
};

// Display-encoded RGB -> CIELAB (D65, Rec.709 primaries). The decode curve
// defaults to sRGB; pure 2.2 is selectable.
Lab rgb_to_lab(double r, double g, double b, TransferFn fn = TransferFn::srgb);

// Mean over pixels of |dL*| + sqrt(da*^2 + db*^2).
double hyab(const ImageF& pred, const ImageF& ref, TransferFn fn = TransferFn::srgb);

// 10 log10(peak^2 / MSE) over all pixels and channels; +inf for identical
// images.
double psnr(const ImageF& pred, const ImageF& ref, double peak = 1.0);

// Multi-scale SSIM on Rec.709 luma: 11x11 Gaussian window (sigma 1.5),
// dyadic pyramid, canonical five scale weights. Scales shrink (with a
// warning) when the image is too small; throws if even one scale does not
// fit.
double ms_ssim(const ImageF& pred, const ImageF& ref);

// Multi-level contrast: at level i the luminance plane splits into an i x i
// patch grid (remainders into the last patch per axis); the level score is
// sqrt(mean per-patch population variance) and the result is the mean over
// levels.
double multi_level_contrast(const PlaneF& luminance, int levels = 5);
// Convenience overload on display-encoded RGB (Rec.709 luma).
double multi_level_contrast(const ImageF& img, int levels = 5);

struct MedianCi {
    double median = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

// Sample median plus a seeded bootstrap percentile confidence interval.
MedianCi median_ci(const std::vector<double>& scores, double level = 0.95,
                   int resamples = 10000, std::uint64_t seed = 0);

// Indices of the `count` highest-contrast entries, ties broken by original
// order; returns everything (with a warning) when count exceeds the input.
std::vector<std::size_t> hc_select_indices(const std::vector<double>& c_ml,
                                           std::size_t count);

double median(std::vector<double> values);

}  // namespace gsemtmo
