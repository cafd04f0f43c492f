#pragma once

#include <array>
#include <utility>
#include <vector>

#include "gsemtmo/graph.hpp"
#include "gsemtmo/rng.hpp"
#include "gsemtmo/tape.hpp"
#include "gsemtmo/tensor.hpp"

namespace gsemtmo {

enum class RunMode { train, eval };
enum class AdjacencyMode { normalized, raw };

constexpr int kHintDim = 18;
constexpr int kHhatDim = kNodeFeatureDim + kHintDim;  // 34

// Layer widths: six convolutions 16->128->128->256->256->128->64 plus a
// final 64->18 projection (linear, no activation).
constexpr std::array<int, 8> kGcnDims = {16, 128, 128, 256, 256, 128, 64, 18};
constexpr int kGcnLayerCount = 7;

struct GcnConfig {
    double leaky_slope = 0.01;
    double dropedge_p = 0.2;
    double dropout_in = 0.2;
    double dropout_out = 0.5;
    AdjacencyMode adjacency = AdjacencyMode::normalized;
    bool conv_bias = false;
};

struct GcnParams {
    std::vector<Tensor2> weights;  // 7 matrices, kGcnDims[l] x kGcnDims[l+1]
    std::vector<Tensor2> biases;   // empty, or 7 row vectors when conv_bias

    void validate() const;
};

struct HintMatrix {
    Tensor2 hints;  // n x 18
    Tensor2 hhat;   // n x 34, row i = [X_i | H_i]
};

// Drops each undirected edge independently with probability p; both
// directions vanish together. Eval mode keeps every edge.
std::vector<std::pair<int, int>> dropedge(const std::vector<std::pair<int, int>>& edges,
                                          double p, Rng& rng, RunMode mode);

// Inverted dropout over full feature rows: zero a row with probability p,
// scale survivors by 1/(1-p). Identity in eval mode.
Tensor2 node_dropout(const Tensor2& x, double p, Rng& rng, RunMode mode);
// The row factors behind node_dropout, for taped forwards.
std::vector<double> node_dropout_factors(int n, double p, Rng& rng, RunMode mode);

// Deterministic eval-mode forward (pure function of graph and params).
HintMatrix gcn_eval(const SemanticGraph& graph, const GcnParams& params, const GcnConfig& cfg);

// Taped forward for training. weight_ids/bias_ids are the leaves registered
// for the parameters, in layer order.
struct GcnTapeOut {
    GradTape::Id hints = -1;
    GradTape::Id hhat = -1;
    std::vector<GradTape::Id> weight_ids;
    std::vector<GradTape::Id> bias_ids;
};
GcnTapeOut gcn_forward(GradTape& tape, const SemanticGraph& graph, const GcnParams& params,
                       const GcnConfig& cfg, RunMode mode, Rng& rng);

// Per-pixel broadcast of hhat rows: H*W*34 doubles, pixel-major.
std::vector<double> broadcast_hints(const SemanticGraph& graph, const HintMatrix& hints);

}  // namespace gsemtmo
