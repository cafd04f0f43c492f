#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gsemtmo/image.hpp"
#include "gsemtmo/tensor.hpp"

namespace gsemtmo {

constexpr int kNodeFeatureDim = 16;

struct GraphNode {
    int id = 0;
    std::uint8_t label = 0;
    long pixel_count = 0;
};

// Semantic graph of an image: one node per distinct coarse label present,
// an undirected edge wherever two labels touch (4-adjacency), and per-node
// feature rows [one_hot(9), median RGB, std RGB, median luma].
struct SemanticGraph {
    int width = 0;
    int height = 0;
    std::vector<GraphNode> nodes;
    std::vector<std::pair<int, int>> edges;  // undirected, i < j, sorted
    Tensor2 features;                        // n x 16
    std::vector<int> pixel_node;             // per-pixel node id, row-major

    int node_count() const { return static_cast<int>(nodes.size()); }
};

struct NodeFeatures {
    std::array<double, kCoarseLabelCount> one_hot{};
    std::array<double, 3> median_rgb{};
    std::array<double, 3> std_rgb{};
    double median_luma = 0.0;

    std::array<double, kNodeFeatureDim> to_row() const;
};

SemanticGraph build_graph(const ImageF& img, const SegMap& seg);

// Statistics over the pixels mapped to node_id; medians interpolate between
// the two middle order statistics, std is the population form.
NodeFeatures node_features(const ImageF& img, const std::vector<int>& pixel_node,
                           int node_id, std::uint8_t coarse_label);

// COO edge list: both directions of every undirected edge, lexicographic.
std::vector<std::pair<int, int>> edge_list(const SemanticGraph& graph);

// A_hat = D^{-1/2} (A + I) D^{-1/2} with D the degree matrix of A + I.
Tensor2 normalized_adjacency(const SemanticGraph& graph);
// Plain 0/1 adjacency, no self-loops.
Tensor2 raw_adjacency(const SemanticGraph& graph);

// Same normalizations over an explicit undirected edge subset (DropEdge
// rebuilds the propagation matrix from the surviving edges).
Tensor2 normalized_adjacency_from(int n, const std::vector<std::pair<int, int>>& edges);
Tensor2 raw_adjacency_from(int n, const std::vector<std::pair<int, int>>& edges);

nlohmann::json graph_to_json(const SemanticGraph& graph);

}  // namespace gsemtmo
