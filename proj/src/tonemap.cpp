#include "gsemtmo/tonemap.hpp"

#include <algorithm>
#include <cmath>

#include "gsemtmo/errors.hpp"
#include "gsemtmo/parallel.hpp"

namespace gsemtmo {

void FcParams::validate() const {
    if (input_dim < 3 || input_dim > 64)
        throw ValidationError("FcParams: input_dim out of range: " + std::to_string(input_dim));
    auto check = [](const Tensor2& t, int r, int c, const char* name) {
        if (t.rows != r || t.cols != c)
            throw ValidationError(std::string("FcParams: ") + name + " is " + t.shape_str() +
                                  ", expected " + std::to_string(r) + "x" + std::to_string(c));
    };
    check(w1, input_dim, kFcHiddenDim, "w1");
    check(b1, 1, kFcHiddenDim, "b1");
    check(w2, kFcHiddenDim, kFcHiddenDim, "w2");
    check(b2, 1, kFcHiddenDim, "b2");
    check(w3, kFcHiddenDim, 3, "w3");
    check(b3, 1, 3, "b3");
}

std::array<double, 3> fc_forward(const std::array<double, 3>& rgb,
                                 std::span<const double> conditioning,
                                 const FcParams& params, double leaky_slope,
                                 bool clamp_output) {
    if (static_cast<int>(conditioning.size()) != params.conditioning_dim())
        throw ValidationError("fc_forward: conditioning length " +
                              std::to_string(conditioning.size()) + ", expected " +
                              std::to_string(params.conditioning_dim()));

    double input[64];
    for (int c = 0; c < 3; ++c)
        input[c] = rgb[c] > 0.0 ? std::pow(rgb[c], kFcInputGamma) : 0.0;
    for (std::size_t i = 0; i < conditioning.size(); ++i) input[3 + i] = conditioning[i];

    double h1[kFcHiddenDim];
    for (int j = 0; j < kFcHiddenDim; ++j) {
        double acc = params.b1.v[j];
        for (int i = 0; i < params.input_dim; ++i) acc += input[i] * params.w1.at(i, j);
        h1[j] = acc >= 0.0 ? acc : acc * leaky_slope;
    }
    double h2[kFcHiddenDim];
    for (int j = 0; j < kFcHiddenDim; ++j) {
        double acc = params.b2.v[j];
        for (int i = 0; i < kFcHiddenDim; ++i) acc += h1[i] * params.w2.at(i, j);
        h2[j] = acc;
    }
    std::array<double, 3> out;
    for (int j = 0; j < 3; ++j) {
        double acc = params.b3.v[j];
        for (int i = 0; i < kFcHiddenDim; ++i) acc += h2[i] * params.w3.at(i, j);
        out[j] = clamp_output ? std::clamp(acc, 0.0, 1.0) : acc;
    }
    return out;
}

ImageF infer_image_conditioned(const ImageF& img, const std::vector<int>& pixel_node,
                               const Tensor2& conditioning, const FcParams& params,
                               double leaky_slope, int threads) {
    params.validate();
    const int cond_dim = params.conditioning_dim();
    if (cond_dim > 0 && conditioning.cols != cond_dim)
        throw ValidationError("infer_image: conditioning is " + conditioning.shape_str() +
                              ", expected n x " + std::to_string(cond_dim));
    if (img.pixel_count() != pixel_node.size())
        throw ValidationError("infer_image: image " + std::to_string(img.pixel_count()) +
                              " pixels vs pixel index " + std::to_string(pixel_node.size()));

    ImageF out(img.width, img.height, 3);
    parallel_for(0, img.height, threads, [&](int y) {
        for (int x = 0; x < img.width; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * img.width + x;
            std::span<const double> cond;
            if (cond_dim > 0) {
                const int node = pixel_node[p];
                cond = std::span<const double>(
                    &conditioning.v[static_cast<std::size_t>(node) * conditioning.cols],
                    static_cast<std::size_t>(cond_dim));
            }
            const auto mapped = fc_forward({img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)},
                                           cond, params, leaky_slope, true);
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = static_cast<float>(mapped[c]);
        }
    });
    return out;
}

ImageF infer_image(const ImageF& img, const SemanticGraph& graph, const GcnParams& gcn,
                   const FcParams& fc, const GcnConfig& cfg, int threads) {
    const HintMatrix hints = gcn_eval(graph, gcn, cfg);
    return infer_image_conditioned(img, graph.pixel_node, hints.hhat, fc, cfg.leaky_slope,
                                   threads);
}

FcTapeOut fc_pipeline(GradTape& tape, const Tensor2& pixel_rgb, GradTape::Id conditioning_id,
                      const std::vector<int>& pixel_node, const FcParams& params,
                      double leaky_slope) {
    params.validate();
    if (pixel_rgb.cols != 3)
        throw ValidationError("fc_pipeline: pixel matrix must be P x 3");

    FcTapeOut out;
    const GradTape::Id w1 = tape.leaf(params.w1);
    const GradTape::Id b1 = tape.leaf(params.b1);
    const GradTape::Id w2 = tape.leaf(params.w2);
    const GradTape::Id b2 = tape.leaf(params.b2);
    const GradTape::Id w3 = tape.leaf(params.w3);
    const GradTape::Id b3 = tape.leaf(params.b3);
    out.param_ids = {w1, b1, w2, b2, w3, b3};

    GradTape::Id input = tape.pow_const(tape.leaf(pixel_rgb), kFcInputGamma);
    if (params.conditioning_dim() > 0) {
        if (conditioning_id < 0)
            throw ValidationError("fc_pipeline: conditioning required for input_dim " +
                                  std::to_string(params.input_dim));
        input = tape.concat_cols(input, tape.gather_rows(conditioning_id, pixel_node));
    }

    GradTape::Id h1 = tape.leaky_relu(tape.add_rowvec(tape.matmul(input, w1), b1), leaky_slope);
    GradTape::Id h2 = tape.add_rowvec(tape.matmul(h1, w2), b2);
    out.output = tape.add_rowvec(tape.matmul(h2, w3), b3);
    return out;
}

ToneCurve per_segment_tonecurve(const FcParams& params, std::span<const double> conditioning,
                                int samples, double leaky_slope, int node_id) {
    if (samples < 2) throw ValidationError("per_segment_tonecurve: samples must be >= 2");
    ToneCurve curve;
    curve.node_id = node_id;
    const double lo = 1.0 / 65535.0;
    const double log_lo = std::log(lo);
    const double log_hi = std::log(1.0);
    for (int i = 0; i < samples; ++i) {
        const double t = static_cast<double>(i) / (samples - 1);
        const double g = std::exp(log_lo + t * (log_hi - log_lo));
        const auto mapped = fc_forward({g, g, g}, conditioning, params, leaky_slope, true);
        curve.input_gray.push_back(g);
        curve.output_luma.push_back(luma709(mapped[0], mapped[1], mapped[2]));
    }
    return curve;
}

}  // namespace gsemtmo
