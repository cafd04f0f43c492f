#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "gsemtmo/errors.hpp"
#include "gsemtmo/graph.hpp"
#include "support.hpp"

using namespace gsemtmo;
using namespace testsupport;

TEST_SUITE_BEGIN("graph");

TEST_CASE("uniform map yields one node and no edges") {
    const ImageF img = constant_image(8, 8, 0.2f, 0.4f, 0.6f);
    SegMap seg(8, 8);  // all label 0 ("sky")
    const SemanticGraph g = build_graph(img, seg);
    CHECK(g.node_count() == 1);
    CHECK(g.edges.empty());
    CHECK(g.nodes[0].pixel_count == 64);
}

TEST_CASE("two halves produce two nodes and one edge") {
    const ImageF img = constant_image(10, 6, 0.5f, 0.5f, 0.5f);
    const SegMap seg = stripes_seg(10, 6, {3, 0});  // water | sky
    const SemanticGraph g = build_graph(img, seg);
    CHECK(g.node_count() == 2);
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0] == std::make_pair(0, 1));
}

TEST_CASE("three stripes connect only consecutive labels") {
    const ImageF img = constant_image(12, 4, 0.5f, 0.5f, 0.5f);
    const SegMap seg = stripes_seg(12, 4, {1, 4, 7});

    // Oracle: exhaustive pixel-adjacency scan over the fixture.
    std::set<std::pair<int, int>> expected;
    for (int y = 0; y < seg.height; ++y)
        for (int x = 0; x + 1 < seg.width; ++x)
            if (seg.at(x, y) != seg.at(x + 1, y)) {
                // labels 1,4,7 land on node ids 0,1,2 (ascending order)
                auto node = [](std::uint8_t l) { return l == 1 ? 0 : (l == 4 ? 1 : 2); };
                expected.insert(std::minmax(node(seg.at(x, y)), node(seg.at(x + 1, y))));
            }

    const SemanticGraph g = build_graph(img, seg);
    CHECK(g.edges == std::vector<std::pair<int, int>>(expected.begin(), expected.end()));
    CHECK(g.edges == std::vector<std::pair<int, int>>{{0, 1}, {1, 2}});
}

TEST_CASE("build_graph rejects dimension mismatches, accepts single label") {
    const ImageF img = constant_image(4, 4, 0.5f, 0.5f, 0.5f);
    CHECK_THROWS_AS(build_graph(img, SegMap(5, 4)), ValidationError);
    const SemanticGraph g = build_graph(img, SegMap(4, 4));
    CHECK(g.node_count() == 1);
}

TEST_CASE("node_features of a constant region") {
    const ImageF img = constant_image(6, 6, 0.2f, 0.4f, 0.6f);
    SegMap seg(6, 6);
    for (auto& l : seg.labels) l = 3;
    const SemanticGraph g = build_graph(img, seg);
    const NodeFeatures f = node_features(img, g.pixel_node, 0, 3);

    for (int i = 0; i < kCoarseLabelCount; ++i) CHECK(f.one_hot[i] == (i == 3 ? 1.0 : 0.0));
    CHECK(f.median_rgb[0] == doctest::Approx(0.2));
    CHECK(f.median_rgb[1] == doctest::Approx(0.4));
    CHECK(f.median_rgb[2] == doctest::Approx(0.6));
    CHECK(f.std_rgb[0] == doctest::Approx(0.0));
    CHECK(f.std_rgb[1] == doctest::Approx(0.0));
    CHECK(f.std_rgb[2] == doctest::Approx(0.0));
    CHECK(f.median_luma ==
          doctest::Approx(0.2126 * 0.2 + 0.7152 * 0.4 + 0.0722 * 0.6).epsilon(1e-6));
}

TEST_CASE("odd-count median picks the middle value") {
    ImageF img(3, 1, 3);
    img.at(0, 0, 0) = 0.1f;
    img.at(1, 0, 0) = 0.3f;
    img.at(2, 0, 0) = 0.5f;
    const std::vector<int> pixel_node = {0, 0, 0};
    const NodeFeatures f = node_features(img, pixel_node, 0, 0);
    CHECK(f.median_rgb[0] == doctest::Approx(0.3));
}

TEST_CASE("features match a brute-force pixel-list computation on random regions") {
    Rng rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const int w = 5 + static_cast<int>(rng.next_below(12));
        const int h = 5 + static_cast<int>(rng.next_below(12));
        const ImageF img = random_image(w, h, rng);
        const SegMap seg = voronoi_seg(w, h, {0, 2, 5}, rng);
        const SemanticGraph g = build_graph(img, seg);

        for (const GraphNode& node : g.nodes) {
            // Brute force directly over the pixel list.
            std::vector<double> r, gch, b, luma;
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    if (seg.at(x, y) == node.label) {
                        r.push_back(img.at(x, y, 0));
                        gch.push_back(img.at(x, y, 1));
                        b.push_back(img.at(x, y, 2));
                        luma.push_back(luma709(img.at(x, y, 0), img.at(x, y, 1),
                                               img.at(x, y, 2)));
                    }
            auto med = [](std::vector<double> v) {
                std::sort(v.begin(), v.end());
                const std::size_t n = v.size();
                return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
            };
            auto stddev = [](const std::vector<double>& v) {
                double mean = 0;
                for (double x : v) mean += x;
                mean /= v.size();
                double acc = 0;
                for (double x : v) acc += (x - mean) * (x - mean);
                return std::sqrt(acc / v.size());
            };
            CHECK(g.features.at(node.id, 9) == doctest::Approx(med(r)).epsilon(1e-9));
            CHECK(g.features.at(node.id, 10) == doctest::Approx(med(gch)).epsilon(1e-9));
            CHECK(g.features.at(node.id, 11) == doctest::Approx(med(b)).epsilon(1e-9));
            CHECK(g.features.at(node.id, 12) == doctest::Approx(stddev(r)).epsilon(1e-9));
            CHECK(g.features.at(node.id, 13) == doctest::Approx(stddev(gch)).epsilon(1e-9));
            CHECK(g.features.at(node.id, 14) == doctest::Approx(stddev(b)).epsilon(1e-9));
            CHECK(g.features.at(node.id, 15) == doctest::Approx(med(luma)).epsilon(1e-9));
        }
    }
}

TEST_CASE("edge_list emits both directions, sorted") {
    const ImageF img1 = constant_image(4, 4, 0.5f, 0.5f, 0.5f);
    const SemanticGraph lone = build_graph(img1, SegMap(4, 4));
    CHECK(edge_list(lone).empty());

    const ImageF img2 = constant_image(8, 4, 0.5f, 0.5f, 0.5f);
    const SemanticGraph pair = build_graph(img2, stripes_seg(8, 4, {0, 1}));
    CHECK(edge_list(pair) == std::vector<std::pair<int, int>>{{0, 1}, {1, 0}});

    const ImageF img3 = constant_image(12, 4, 0.5f, 0.5f, 0.5f);
    const SemanticGraph stripes = build_graph(img3, stripes_seg(12, 4, {0, 1, 2}));
    CHECK(edge_list(stripes) ==
          std::vector<std::pair<int, int>>{{0, 1}, {1, 0}, {1, 2}, {2, 1}});
}

TEST_CASE("normalized adjacency: single node, pair, and symmetry") {
    const ImageF img1 = constant_image(4, 4, 0.5f, 0.5f, 0.5f);
    const SemanticGraph lone = build_graph(img1, SegMap(4, 4));
    const Tensor2 a1 = normalized_adjacency(lone);
    CHECK(a1.rows == 1);
    CHECK(a1.v[0] == doctest::Approx(1.0));

    const ImageF img2 = constant_image(8, 4, 0.5f, 0.5f, 0.5f);
    const SemanticGraph pair = build_graph(img2, stripes_seg(8, 4, {0, 1}));
    const Tensor2 a2 = normalized_adjacency(pair);
    // Hand computation: A+I gives degree 2 everywhere, so every entry 0.5.
    for (double v : a2.v) CHECK(v == doctest::Approx(0.5));

    Rng rng(17);
    const SegMap seg = voronoi_seg(24, 24, {0, 1, 2, 3, 4}, rng);
    const ImageF img = random_image(24, 24, rng);
    const Tensor2 a = normalized_adjacency(build_graph(img, seg));
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) CHECK(a.at(i, j) == a.at(j, i));
}

TEST_CASE("feature bounds and pixel partition") {
    Rng rng(31);
    const ImageF img = random_image(30, 20, rng);
    const SegMap seg = voronoi_seg(30, 20, {1, 3, 6, 8}, rng);
    const SemanticGraph g = build_graph(img, seg);

    long pixel_total = 0;
    for (const GraphNode& node : g.nodes) pixel_total += node.pixel_count;
    CHECK(pixel_total == 30 * 20);

    for (int i = 0; i < g.node_count(); ++i) {
        double onehot_sum = 0.0;
        for (int j = 0; j < kCoarseLabelCount; ++j) onehot_sum += g.features.at(i, j);
        CHECK(onehot_sum == 1.0);
        for (int j = 9; j < 12; ++j) {
            CHECK(g.features.at(i, j) >= 0.0);
            CHECK(g.features.at(i, j) <= 1.0);
        }
        for (int j = 12; j < 15; ++j) {
            CHECK(g.features.at(i, j) >= 0.0);
            CHECK(g.features.at(i, j) <= 0.5);
        }
    }
}

TEST_CASE("node order permutation permutes adjacency and features consistently") {
    // Relabeling so node order reverses: features and adjacency rows/cols
    // must follow the same permutation.
    const ImageF img = constant_image(12, 4, 0.5f, 0.5f, 0.5f);
    ImageF varied = img;
    for (int x = 0; x < 12; ++x)
        for (int y = 0; y < 4; ++y) varied.at(x, y, 0) = static_cast<float>(x) / 12.0f;

    const SegMap seg_a = stripes_seg(12, 4, {0, 1, 2});
    const SegMap seg_b = stripes_seg(12, 4, {2, 1, 0});  // reversed labels
    const SemanticGraph ga = build_graph(varied, seg_a);
    const SemanticGraph gb = build_graph(varied, seg_b);

    const Tensor2 aa = normalized_adjacency(ga);
    const Tensor2 ab = normalized_adjacency(gb);
    // Permutation pi maps a-node i to b-node (2 - i).
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(aa.at(i, j) == doctest::Approx(ab.at(2 - i, 2 - j)));
    // Non-one-hot features permute identically.
    for (int i = 0; i < 3; ++i)
        for (int j = 9; j < kNodeFeatureDim; ++j)
            CHECK(ga.features.at(i, j) == doctest::Approx(gb.features.at(2 - i, j)));
}

TEST_CASE("graph json dump carries nodes, features and edges") {
    const ImageF img = constant_image(8, 4, 0.5f, 0.5f, 0.5f);
    const SemanticGraph g = build_graph(img, stripes_seg(8, 4, {0, 4}));
    const nlohmann::json j = graph_to_json(g);
    CHECK(j["nodes"].size() == 2);
    CHECK(j["edges"].size() == 2);
    CHECK(j["nodes"][0]["features"].size() == kNodeFeatureDim);
    CHECK(j["nodes"][1]["label_name"] == "human");
}

TEST_SUITE_END();
