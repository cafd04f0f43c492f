#pragma once

#include <filesystem>

#include "gsemtmo/image.hpp"

namespace gsemtmo {

// Linear input: 16-bit 3-channel PNG/TIFF, normalized by 65535. Any other
// bit depth or channel count is rejected.
ImageF load_linear_image(const std::filesystem::path& path);

// Display-encoded reference: 8- or 16-bit 3-channel PNG (TIFF accepted too).
ImageF load_display_image(const std::filesystem::path& path);

// Single-channel 8-bit PNG of label indices (coarse 0..8 or fine 0..149).
SegMap load_segmentation(const std::filesystem::path& path);

// Writers. Images are clamped to [0,1] before quantization.
void save_png16(const std::filesystem::path& path, const ImageF& img);
void save_png8(const std::filesystem::path& path, const ImageF& img);
void save_gray8(const std::filesystem::path& path, const SegMap& seg);
// Alpha/luminance plane as 8-bit grayscale (debug dumps).
void save_plane_png(const std::filesystem::path& path, const PlaneF& plane);

}  // namespace gsemtmo
