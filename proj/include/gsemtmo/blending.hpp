#pragma once

#include <cstdint>
#include <vector>

#include "gsemtmo/gcn.hpp"
#include "gsemtmo/graph.hpp"
#include "gsemtmo/image.hpp"
#include "gsemtmo/tonemap.hpp"

namespace gsemtmo {

// n alpha maps, one per node/label, normalized to a per-pixel partition of
// unity by normalize_stack.
struct AlphaStack {
    std::vector<PlaneF> maps;
};

// One binary mask per distinct label, in node order (ascending label).
std::vector<PlaneF> binary_maps(const SegMap& seg);

// Exact Euclidean distance (in pixels) to the nearest pixel with mask > 0.
// Pixels inside the set get 0; an empty set yields +inf everywhere.
PlaneF euclidean_distance_transform(const PlaneF& mask);

// Morphology with an exact Euclidean disk, realized through the EDT.
PlaneF erode_disk(const PlaneF& mask, int radius);
PlaneF dilate_disk(const PlaneF& mask, int radius);

// Distance-ratio feathering inside a symmetric trimap band: erode/dilate by
// `radius` fix the definite regions, the band gets d_out/(d_in + d_out).
// Falls back to the raw mask (and sets *fell_back) when erosion empties it.
PlaneF feather_alpha(const PlaneF& mask, int radius, bool* fell_back = nullptr);

// Single-channel bilateral filter; color distance is measured on
// alpha * 255 so sigma_color keeps its 8-bit-scale meaning.
PlaneF bilateral_smooth(const PlaneF& alpha, int diameter, double sigma_color,
                        double sigma_space, int threads = 1);

// S_i(p) = a_i(p) / sum_j a_j(p); all-zero pixels get uniform 1/n weights
// and are counted in *zero_pixels.
AlphaStack normalize_stack(const std::vector<PlaneF>& alphas,
                           std::size_t* zero_pixels = nullptr);

// One full-frame inference per node, every pixel conditioned on that node's
// row. `conditioning` is n x k (hhat, node features, or k = 0 columns for
// the RGB-only mapper, which makes every frame identical).
std::vector<ImageF> per_hint_frames(const ImageF& img, int node_count,
                                    const Tensor2& conditioning, const FcParams& fc,
                                    double leaky_slope, int threads = 1);
std::vector<ImageF> per_hint_frames(const ImageF& img, const SemanticGraph& graph,
                                    const HintMatrix& hints, const FcParams& fc,
                                    double leaky_slope, int threads = 1);

// O(p) = sum_i S_i(p) * F_i(p), per channel.
ImageF blend(const AlphaStack& stack, const std::vector<ImageF>& frames);

struct BlendConfig {
    int feather_radius = 25;
    int bilateral_diameter = 50;
    double bilateral_sigma_color = 30.0;
    double bilateral_sigma_space = 12.5;  // diameter / 4
    int threads = 1;
};

struct BlendDebug {
    std::vector<PlaneF> alphas;   // after normalization
    std::vector<ImageF> frames;
};

// Feather -> smooth -> normalize -> per-hint frames -> weighted sum.
ImageF blend_pipeline(const ImageF& img, const SegMap& seg, const SemanticGraph& graph,
                      const Tensor2& conditioning, const FcParams& fc, double leaky_slope,
                      const BlendConfig& cfg, BlendDebug* debug = nullptr);
ImageF blend_pipeline(const ImageF& img, const SegMap& seg, const SemanticGraph& graph,
                      const HintMatrix& hints, const FcParams& fc, double leaky_slope,
                      const BlendConfig& cfg, BlendDebug* debug = nullptr);

}  // namespace gsemtmo
