#pragma once

#include <array>
#include <span>
#include <vector>

#include "gsemtmo/gcn.hpp"
#include "gsemtmo/graph.hpp"
#include "gsemtmo/image.hpp"
#include "gsemtmo/tape.hpp"
#include "gsemtmo/tensor.hpp"

namespace gsemtmo {

constexpr double kFcInputGamma = 1.0 / 2.2;
constexpr int kFcHiddenDim = 32;

// Per-pixel mapper: input_dim -> 32 -> LeakyReLU -> 32 -> 3 (linear).
// input_dim is 3 (RGB only), 19 (RGB + node features) or 37 (RGB + hhat).
struct FcParams {
    int input_dim = 37;
    Tensor2 w1, b1;  // input_dim x 32, 1 x 32
    Tensor2 w2, b2;  // 32 x 32, 1 x 32
    Tensor2 w3, b3;  // 32 x 3,  1 x 3

    void validate() const;
    int conditioning_dim() const { return input_dim - 3; }
};

// One pixel through the mapper. The 1/2.2 power applies to the RGB channels
// only; the conditioning vector passes through untouched. Clamps to [0,1]
// when clamp_output is set (inference); training keeps raw values.
std::array<double, 3> fc_forward(const std::array<double, 3>& rgb,
                                 std::span<const double> conditioning,
                                 const FcParams& params, double leaky_slope,
                                 bool clamp_output = true);

// Whole image through the mapper with per-node conditioning rows
// (n x conditioning_dim; pass an empty tensor for the 3-input variant).
ImageF infer_image_conditioned(const ImageF& img, const std::vector<int>& pixel_node,
                               const Tensor2& conditioning, const FcParams& params,
                               double leaky_slope, int threads = 1);

// Full pipeline convenience: eval-mode GCN hints, then per-pixel mapping.
ImageF infer_image(const ImageF& img, const SemanticGraph& graph, const GcnParams& gcn,
                   const FcParams& fc, const GcnConfig& cfg, int threads = 1);

// Taped forward over every pixel of a PxC linear RGB matrix.
// conditioning_id < 0 means the 3-input variant; otherwise rows are gathered
// by pixel_node and concatenated after the gamma-lifted RGB.
struct FcTapeOut {
    GradTape::Id output = -1;                // P x 3, unclamped
    std::vector<GradTape::Id> param_ids;     // w1,b1,w2,b2,w3,b3
};
FcTapeOut fc_pipeline(GradTape& tape, const Tensor2& pixel_rgb, GradTape::Id conditioning_id,
                      const std::vector<int>& pixel_node, const FcParams& params,
                      double leaky_slope);

// Gray-ramp response of the mapper under one fixed conditioning vector:
// log-spaced inputs g in [1/65535, 1], Rec.709 luma of the mapped output.
struct ToneCurve {
    int node_id = -1;
    std::vector<double> input_gray;
    std::vector<double> output_luma;
};
ToneCurve per_segment_tonecurve(const FcParams& params, std::span<const double> conditioning,
                                int samples, double leaky_slope, int node_id = -1);

}  // namespace gsemtmo
