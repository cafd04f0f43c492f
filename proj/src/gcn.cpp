#include "gsemtmo/gcn.hpp"

#include <string>

#include "gsemtmo/errors.hpp"

namespace gsemtmo {

void GcnParams::validate() const {
    if (weights.size() != kGcnLayerCount)
        throw ValidationError("GcnParams: expected " + std::to_string(kGcnLayerCount) +
                              " weight matrices, got " + std::to_string(weights.size()));
    for (int l = 0; l < kGcnLayerCount; ++l) {
        if (weights[l].rows != kGcnDims[l] || weights[l].cols != kGcnDims[l + 1])
            throw ValidationError("GcnParams: layer " + std::to_string(l) + " is " +
                                  weights[l].shape_str() + ", expected " +
                                  std::to_string(kGcnDims[l]) + "x" +
                                  std::to_string(kGcnDims[l + 1]));
    }
    if (!biases.empty() && biases.size() != kGcnLayerCount)
        throw ValidationError("GcnParams: biases must be absent or one per layer");
}

std::vector<std::pair<int, int>> dropedge(const std::vector<std::pair<int, int>>& edges,
                                          double p, Rng& rng, RunMode mode) {
    if (p < 0.0 || p >= 1.0) throw ValidationError("dropedge: p must be in [0,1)");
    if (mode == RunMode::eval || p == 0.0) return edges;
    std::vector<std::pair<int, int>> kept;
    kept.reserve(edges.size());
    for (const auto& e : edges)
        if (!rng.next_bernoulli(p)) kept.push_back(e);
    return kept;
}

std::vector<double> node_dropout_factors(int n, double p, Rng& rng, RunMode mode) {
    if (p < 0.0 || p >= 1.0) throw ValidationError("node_dropout: p must be in [0,1)");
    std::vector<double> factors(n, 1.0);
    if (mode == RunMode::eval || p == 0.0) return factors;
    const double keep_scale = 1.0 / (1.0 - p);
    for (int i = 0; i < n; ++i) factors[i] = rng.next_bernoulli(p) ? 0.0 : keep_scale;
    return factors;
}

Tensor2 node_dropout(const Tensor2& x, double p, Rng& rng, RunMode mode) {
    const auto factors = node_dropout_factors(x.rows, p, rng, mode);
    Tensor2 out = x;
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < x.cols; ++j) out.at(i, j) *= factors[i];
    return out;
}

namespace {

Tensor2 propagation_matrix(int n, const std::vector<std::pair<int, int>>& edges,
                           AdjacencyMode mode) {
    return mode == AdjacencyMode::normalized ? normalized_adjacency_from(n, edges)
                                             : raw_adjacency_from(n, edges);
}

void check_features(const SemanticGraph& graph) {
    if (graph.features.cols != kNodeFeatureDim)
        throw ValidationError("gcn: feature width " + std::to_string(graph.features.cols) +
                              ", expected " + std::to_string(kNodeFeatureDim));
}

}  // namespace

HintMatrix gcn_eval(const SemanticGraph& graph, const GcnParams& params, const GcnConfig& cfg) {
    check_features(graph);
    params.validate();
    const Tensor2 a = propagation_matrix(graph.node_count(), graph.edges, cfg.adjacency);

    Tensor2 y = graph.features;
    for (int l = 0; l < kGcnLayerCount; ++l) {
        y = matmul(matmul(a, y), params.weights[l]);
        if (!params.biases.empty()) y = add_rowvec(y, params.biases[l]);
        if (l + 1 < kGcnLayerCount) y = leaky_relu(y, cfg.leaky_slope);
    }

    HintMatrix out;
    out.hints = std::move(y);
    out.hhat = concat_cols(graph.features, out.hints);
    return out;
}

GcnTapeOut gcn_forward(GradTape& tape, const SemanticGraph& graph, const GcnParams& params,
                       const GcnConfig& cfg, RunMode mode, Rng& rng) {
    check_features(graph);
    params.validate();
    const int n = graph.node_count();

    const auto edges = dropedge(graph.edges, cfg.dropedge_p, rng, mode);
    const Tensor2 a = propagation_matrix(n, edges, cfg.adjacency);

    GcnTapeOut out;
    for (int l = 0; l < kGcnLayerCount; ++l) {
        out.weight_ids.push_back(tape.leaf(params.weights[l]));
        if (!params.biases.empty()) out.bias_ids.push_back(tape.leaf(params.biases[l]));
    }

    const GradTape::Id features = tape.leaf(graph.features);
    const GradTape::Id adj = tape.leaf(a);

    // dropedge -> dropout(0.2) -> [conv + LeakyReLU] x6 -> dropout(0.5)
    // -> linear projection to 18.
    GradTape::Id y = tape.scale_rows(
        features, node_dropout_factors(n, cfg.dropout_in, rng, mode));
    for (int l = 0; l < kGcnLayerCount - 1; ++l) {
        y = tape.matmul(tape.matmul(adj, y), out.weight_ids[l]);
        if (!out.bias_ids.empty()) y = tape.add_rowvec(y, out.bias_ids[l]);
        y = tape.leaky_relu(y, cfg.leaky_slope);
    }
    y = tape.scale_rows(y, node_dropout_factors(n, cfg.dropout_out, rng, mode));
    y = tape.matmul(tape.matmul(adj, y), out.weight_ids[kGcnLayerCount - 1]);
    if (!out.bias_ids.empty()) y = tape.add_rowvec(y, out.bias_ids[kGcnLayerCount - 1]);

    out.hints = y;
    out.hhat = tape.concat_cols(features, y);
    return out;
}

std::vector<double> broadcast_hints(const SemanticGraph& graph, const HintMatrix& hints) {
    if (hints.hhat.cols != kHhatDim)
        throw ValidationError("broadcast_hints: hhat width " +
                              std::to_string(hints.hhat.cols) + ", expected " +
                              std::to_string(kHhatDim));
    if (hints.hhat.rows != graph.node_count())
        throw std::runtime_error("broadcast_hints: node count mismatch");
    std::vector<double> out(graph.pixel_node.size() * kHhatDim);
    for (std::size_t p = 0; p < graph.pixel_node.size(); ++p) {
        const int node = graph.pixel_node[p];
        if (node < 0 || node >= hints.hhat.rows)
            throw std::runtime_error("broadcast_hints: pixel with unmapped node");
        const double* src = &hints.hhat.v[static_cast<std::size_t>(node) * kHhatDim];
        double* dst = &out[p * kHhatDim];
        for (int j = 0; j < kHhatDim; ++j) dst[j] = src[j];
    }
    return out;
}

}  // namespace gsemtmo
