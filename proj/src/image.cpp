#include "gsemtmo/image.hpp"

#include <algorithm>
#include <cmath>

#include "gsemtmo/errors.hpp"

namespace gsemtmo {

const char* const kCoarseLabelNames[kCoarseLabelCount] = {
    "sky",    "mountain", "vegetation", "water",       "human",
    "object", "city",     "indoor",     "others",
};

PlaneF luma_plane(const ImageF& img) {
    if (img.channels != 3) throw ValidationError("luma_plane: need 3 channels");
    PlaneF out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            out.at(x, y) = static_cast<float>(
                luma709(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)));
    return out;
}

ImageF resize_bilinear(const ImageF& img, int out_w, int out_h) {
    if (img.width < 1 || img.height < 1) throw ValidationError("resize_bilinear: empty image");
    if (out_w < 1 || out_h < 1) throw ValidationError("resize_bilinear: bad target size");
    ImageF out(out_w, out_h, img.channels);
    const double sx = static_cast<double>(img.width) / out_w;
    const double sy = static_cast<double>(img.height) / out_h;
    for (int y = 0; y < out_h; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(img.height - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < out_w; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            fx = std::clamp(fx, 0.0, static_cast<double>(img.width - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double wx = fx - x0;
            for (int c = 0; c < img.channels; ++c) {
                const double top = (1.0 - wx) * img.at(x0, y0, c) + wx * img.at(x1, y0, c);
                const double bot = (1.0 - wx) * img.at(x0, y1, c) + wx * img.at(x1, y1, c);
                out.at(x, y, c) = static_cast<float>((1.0 - wy) * top + wy * bot);
            }
        }
    }
    return out;
}

SegMap resize_nearest(const SegMap& seg, int out_w, int out_h) {
    if (seg.width < 1 || seg.height < 1) throw ValidationError("resize_nearest: empty map");
    if (out_w < 1 || out_h < 1) throw ValidationError("resize_nearest: bad target size");
    SegMap out(out_w, out_h);
    const double sx = static_cast<double>(seg.width) / out_w;
    const double sy = static_cast<double>(seg.height) / out_h;
    for (int y = 0; y < out_h; ++y) {
        int sy_i = std::min(static_cast<int>((y + 0.5) * sy), seg.height - 1);
        for (int x = 0; x < out_w; ++x) {
            int sx_i = std::min(static_cast<int>((x + 0.5) * sx), seg.width - 1);
            out.at(x, y) = seg.at(sx_i, sy_i);
        }
    }
    return out;
}

double decode_to_linear(double v, TransferFn fn) {
    if (fn == TransferFn::gamma22) return v <= 0.0 ? 0.0 : std::pow(v, 2.2);
    if (v <= 0.04045) return v / 12.92;
    return std::pow((v + 0.055) / 1.055, 2.4);
}

double encode_from_linear(double v, TransferFn fn) {
    if (fn == TransferFn::gamma22) return v <= 0.0 ? 0.0 : std::pow(v, 1.0 / 2.2);
    if (v <= 0.0031308) return v * 12.92;
    return 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

}  // namespace gsemtmo
