#include "gsemtmo/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gsemtmo/errors.hpp"

namespace gsemtmo {

std::array<double, kNodeFeatureDim> NodeFeatures::to_row() const {
    std::array<double, kNodeFeatureDim> row{};
    for (int i = 0; i < kCoarseLabelCount; ++i) row[i] = one_hot[i];
    row[9] = median_rgb[0];
    row[10] = median_rgb[1];
    row[11] = median_rgb[2];
    row[12] = std_rgb[0];
    row[13] = std_rgb[1];
    row[14] = std_rgb[2];
    row[15] = median_luma;
    return row;
}

namespace {

double median_inplace(std::vector<double>& values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double population_std(const std::vector<double>& values) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double acc = 0.0;
    for (double v : values) acc += (v - mean) * (v - mean);
    return std::sqrt(acc / static_cast<double>(values.size()));
}

}  // namespace

NodeFeatures node_features(const ImageF& img, const std::vector<int>& pixel_node,
                           int node_id, std::uint8_t coarse_label) {
    std::vector<double> r, g, b, luma;
    for (std::size_t p = 0; p < pixel_node.size(); ++p) {
        if (pixel_node[p] != node_id) continue;
        const std::size_t base = p * 3;
        r.push_back(img.data[base + 0]);
        g.push_back(img.data[base + 1]);
        b.push_back(img.data[base + 2]);
        luma.push_back(luma709(img.data[base + 0], img.data[base + 1], img.data[base + 2]));
    }
    if (r.empty())
        throw std::runtime_error("node_features: node " + std::to_string(node_id) +
                                 " has no pixels");
    if (coarse_label >= kCoarseLabelCount)
        throw ValidationError("node_features: label " + std::to_string(coarse_label) +
                              " outside coarse range");

    NodeFeatures f;
    f.one_hot[coarse_label] = 1.0;
    f.std_rgb = {population_std(r), population_std(g), population_std(b)};
    f.median_rgb = {median_inplace(r), median_inplace(g), median_inplace(b)};
    f.median_luma = median_inplace(luma);
    return f;
}

SemanticGraph build_graph(const ImageF& img, const SegMap& seg) {
    if (img.width != seg.width || img.height != seg.height)
        throw ValidationError("build_graph: image " + std::to_string(img.width) + "x" +
                              std::to_string(img.height) + " vs segmentation " +
                              std::to_string(seg.width) + "x" + std::to_string(seg.height));
    if (seg.size() == 0) throw ValidationError("build_graph: empty segmentation map");
    if (img.channels != 3) throw ValidationError("build_graph: image must have 3 channels");

    SemanticGraph graph;
    graph.width = seg.width;
    graph.height = seg.height;

    // One node per distinct label, in ascending label order.
    std::array<int, 256> node_of_label;
    node_of_label.fill(-1);
    std::set<std::uint8_t> present(seg.labels.begin(), seg.labels.end());
    for (std::uint8_t label : present) {
        if (label >= kCoarseLabelCount)
            throw ValidationError("build_graph: label " + std::to_string(label) +
                                  " outside coarse range 0..8");
        GraphNode node;
        node.id = graph.node_count();
        node.label = label;
        node_of_label[label] = node.id;
        graph.nodes.push_back(node);
    }

    graph.pixel_node.resize(seg.size());
    for (std::size_t p = 0; p < seg.size(); ++p) {
        const int id = node_of_label[seg.labels[p]];
        graph.pixel_node[p] = id;
        graph.nodes[id].pixel_count += 1;
    }

    // 4-adjacency between differing labels inserts an undirected edge.
    std::set<std::pair<int, int>> edges;
    for (int y = 0; y < seg.height; ++y) {
        for (int x = 0; x < seg.width; ++x) {
            const std::uint8_t here = seg.at(x, y);
            if (x + 1 < seg.width) {
                const std::uint8_t right = seg.at(x + 1, y);
                if (right != here)
                    edges.insert(std::minmax(node_of_label[here], node_of_label[right]));
            }
            if (y + 1 < seg.height) {
                const std::uint8_t below = seg.at(x, y + 1);
                if (below != here)
                    edges.insert(std::minmax(node_of_label[here], node_of_label[below]));
            }
        }
    }
    graph.edges.assign(edges.begin(), edges.end());

    graph.features = Tensor2(graph.node_count(), kNodeFeatureDim);
    for (const GraphNode& node : graph.nodes) {
        const auto row = node_features(img, graph.pixel_node, node.id, node.label).to_row();
        for (int j = 0; j < kNodeFeatureDim; ++j) graph.features.at(node.id, j) = row[j];
    }
    return graph;
}

std::vector<std::pair<int, int>> edge_list(const SemanticGraph& graph) {
    std::vector<std::pair<int, int>> coo;
    coo.reserve(graph.edges.size() * 2);
    for (const auto& [i, j] : graph.edges) {
        coo.emplace_back(i, j);
        coo.emplace_back(j, i);
    }
    std::sort(coo.begin(), coo.end());
    return coo;
}

Tensor2 normalized_adjacency_from(int n, const std::vector<std::pair<int, int>>& edges) {
    Tensor2 a(n, n);
    for (const auto& [i, j] : edges) {
        a.at(i, j) = 1.0;
        a.at(j, i) = 1.0;
    }
    for (int i = 0; i < n; ++i) a.at(i, i) = 1.0;  // self-loops
    std::vector<double> inv_sqrt_deg(n);
    for (int i = 0; i < n; ++i) {
        double deg = 0.0;
        for (int j = 0; j < n; ++j) deg += a.at(i, j);
        inv_sqrt_deg[i] = 1.0 / std::sqrt(deg);
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a.at(i, j) *= inv_sqrt_deg[i] * inv_sqrt_deg[j];
    return a;
}

Tensor2 raw_adjacency_from(int n, const std::vector<std::pair<int, int>>& edges) {
    Tensor2 a(n, n);
    for (const auto& [i, j] : edges) {
        a.at(i, j) = 1.0;
        a.at(j, i) = 1.0;
    }
    return a;
}

Tensor2 normalized_adjacency(const SemanticGraph& graph) {
    return normalized_adjacency_from(graph.node_count(), graph.edges);
}

Tensor2 raw_adjacency(const SemanticGraph& graph) {
    return raw_adjacency_from(graph.node_count(), graph.edges);
}

nlohmann::json graph_to_json(const SemanticGraph& graph) {
    nlohmann::json j;
    j["width"] = graph.width;
    j["height"] = graph.height;
    j["nodes"] = nlohmann::json::array();
    for (const GraphNode& node : graph.nodes) {
        nlohmann::json nj;
        nj["id"] = node.id;
        nj["label"] = node.label;
        nj["label_name"] = kCoarseLabelNames[node.label];
        nj["pixel_count"] = node.pixel_count;
        std::vector<double> feat(kNodeFeatureDim);
        for (int k = 0; k < kNodeFeatureDim; ++k) feat[k] = graph.features.at(node.id, k);
        nj["features"] = feat;
        j["nodes"].push_back(nj);
    }
    j["edges"] = nlohmann::json::array();
    for (const auto& [a, b] : edge_list(graph)) j["edges"].push_back({a, b});
    return j;
}

}  // namespace gsemtmo
