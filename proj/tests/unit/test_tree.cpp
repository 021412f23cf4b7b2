#include <doctest.h>

#include <algorithm>
#include <set>

#include "entlab/tree.hpp"
#include "entlab/tree_json.hpp"
#include "oracles.hpp"

using namespace entlab;

namespace {

Tree make(const std::vector<int>& parent) { return Tree::from_parents(parent); }

std::vector<Vertex> brute_descendants(const std::vector<int>& parent, int xi, int l) {
    const auto d = oracle::depths(parent);
    std::vector<Vertex> out;
    for (std::size_t v = 0; v < parent.size(); ++v)
        if (d[v] == d[static_cast<std::size_t>(xi)] + l && oracle::is_ancestor(parent, xi, static_cast<int>(v)))
            out.push_back(static_cast<Vertex>(v));
    return out;
}

}  // namespace

TEST_CASE("build_tree examples") {
    auto one = make({0});
    CHECK(one.size() == 1);
    CHECK(one.depth(0) == 0);

    auto star = make({0, 0, 0});
    CHECK(star.root() == 0);
    CHECK(star.depth(1) == 1);
    CHECK(star.depth(2) == 1);
    CHECK(star.children(0).size() == 2);

    auto t = make({0, 0, 1, 1, 2});
    CHECK(t.depths() == std::vector<int>{0, 1, 2, 2, 3});
    CHECK(descendants_at_distance(t, 1, 1) == std::vector<Vertex>{2, 3});
}

TEST_CASE("build_tree rejects bad parent lists") {
    CHECK_THROWS_AS(make({}), InvalidArgument);
    CHECK_THROWS_AS(make({0, 1}), InvalidArgument);        // two roots
    CHECK_THROWS_AS(make({1, 0}), InvalidArgument);        // cycle, no root
    CHECK_THROWS_AS(make({0, 2, 1}), InvalidArgument);     // cycle hanging off nothing
    CHECK_THROWS_AS(make({0, 5}), InvalidArgument);        // dangling
    CHECK_THROWS_AS(make({0, -1}), InvalidArgument);
    const std::vector<Vertex> big(10, 0);
    CHECK_THROWS_AS(Tree::from_parents(big, 5), InvalidArgument);
}

TEST_CASE("ids are kept and depths match a parent walk") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto parent = oracle::random_parents(1 + s * 37, 1 + static_cast<int>(s % 4), s);
        const auto t = make(parent);
        CHECK(t.parents() == std::vector<Vertex>(parent.begin(), parent.end()));
        CHECK(t.depths() == oracle::depths(parent));
        // bfs order sorted by (depth, id)
        auto bfs = std::vector<Vertex>(t.bfs_order().begin(), t.bfs_order().end());
        CHECK(std::is_sorted(bfs.begin(), bfs.end(),
                             [&](Vertex a, Vertex b) { return std::pair(t.depth(a), a) < std::pair(t.depth(b), b); }));
    }
}

TEST_CASE("descendants_at_distance") {
    auto star = make({0, 0, 0});
    CHECK(descendants_at_distance(star, 0, 1) == std::vector<Vertex>{1, 2});
    auto bin = make(oracle::binary(4));
    CHECK(descendants_at_distance(bin, 0, 3).size() == 8);
    CHECK(descendants_at_distance(bin, 5, 0) == std::vector<Vertex>{5});
    CHECK(descendants_at_distance(bin, 5, 10).empty());
    CHECK_THROWS_AS(descendants_at_distance(bin, 99, 1), InvalidArgument);

    const auto parent = oracle::random_parents(300, 3, 7);
    const auto t = make(parent);
    for (int xi : {0, 3, 17, 120, 299})
        for (int l = 0; l < 6; ++l) CHECK(descendants_at_distance(t, xi, l) == brute_descendants(parent, xi, l));
}

TEST_CASE("descendant counts over a level add up to the next level") {
    const auto t = make(oracle::random_parents(500, 3, 11));
    for (int d = 0; d + 2 <= t.max_depth(); ++d)
        for (int l = 0; l <= 2; ++l) {
            std::size_t sum = 0;
            for (Vertex xi : t.level(d)) sum += descendants_at_distance(t, xi, l).size();
            CHECK(sum == t.level(d + l).size());
        }
}

TEST_CASE("descendant_census and subtrees") {
    const auto parent = oracle::random_parents(200, 2, 3);
    const auto t = make(parent);
    for (int xi : {0, 4, 50}) {
        const auto census = descendant_census(t, xi);
        for (std::size_t l = 0; l < census.size(); ++l)
            CHECK(census[l] == brute_descendants(parent, xi, static_cast<int>(l)).size());
        std::size_t brute = 0;
        for (std::size_t v = 0; v < parent.size(); ++v) brute += oracle::is_ancestor(parent, xi, static_cast<int>(v));
        CHECK(subtree_vertices(t, xi).size() == brute);
    }
    std::vector<Vertex> orig;
    const auto sub = extract_subtree(t, 4, 2, &orig);
    CHECK(orig.front() == 4);
    CHECK(sub.max_depth() <= 2);
    for (std::size_t v = 1; v < sub.size(); ++v)
        CHECK(t.parent(orig[v]) == orig[static_cast<std::size_t>(sub.parent(static_cast<Vertex>(v)))]);
}

TEST_CASE("layer_index follows the dyadic windows") {
    // linear: 2^{t-1} <= m j < 2^t
    CHECK(layer_index(LayerRule::linear, 1, 1) == 1);
    CHECK(layer_index(LayerRule::linear, 1, 2) == 2);
    CHECK(layer_index(LayerRule::linear, 1, 3) == 2);
    CHECK(layer_index(LayerRule::linear, 1, 4) == 3);
    CHECK(layer_index(LayerRule::linear, 1, 0) == 0);
    CHECK(layer_index(LayerRule::linear, 3, 2) == 3);  // m j = 6
    // doubly exponential: 2^{2^{t-1}} <= m j < 2^{2^t}
    CHECK(layer_index(LayerRule::doubly_exponential, 1, 2) == 1);
    CHECK(layer_index(LayerRule::doubly_exponential, 1, 3) == 1);
    CHECK(layer_index(LayerRule::doubly_exponential, 1, 4) == 2);
    CHECK(layer_index(LayerRule::doubly_exponential, 1, 15) == 2);
    CHECK(layer_index(LayerRule::doubly_exponential, 1, 16) == 3);
    CHECK(layer_index(LayerRule::doubly_exponential, 1, 255) == 3);
    CHECK(layer_index(LayerRule::doubly_exponential, 1, 256) == 4);
    CHECK_THROWS_AS(layer_index(LayerRule::linear, 0, 1), InvalidArgument);
}

TEST_CASE("layering is monotone and steps by at most one along edges") {
    for (auto rule : {LayerRule::linear, LayerRule::doubly_exponential})
        for (int m : {1, 2, 3})
            for (int j0 : {0, 1, 5}) {
                const auto t = make(oracle::path(300));
                const auto lay = Layering::build(t, rule, m, j0);
                for (std::size_t v = 1; v < t.size(); ++v) {
                    const int a = lay.layer_of(t.parent(static_cast<Vertex>(v)));
                    const int b = lay.layer_of(static_cast<Vertex>(v));
                    CHECK(b - a >= 0);
                    CHECK(b - a <= 1);
                }
            }
}

TEST_CASE("layer_components examples") {
    const auto p = make(oracle::path(7));  // depths 0..6
    const auto lay = Layering::build(p, LayerRule::linear, 1);
    const auto c2 = layer_components(p, lay, 2);
    REQUIRE(c2.parts.size() == 1);
    CHECK(c2.parts[0].vertices == std::vector<Vertex>{2, 3});
    CHECK(c2.parts[0].root == 2);

    const auto bin = make(oracle::binary(4));
    const auto bl = Layering::build(bin, LayerRule::linear, 1);
    const auto comps = layer_components(bin, bl, 2);
    CHECK(comps.parts.size() == 4);
    for (const auto& part : comps.parts) {
        CHECK(bin.depth(part.root) == 2);
        CHECK(part.vertices.size() == 3);
    }

    const auto shifted = Layering::build(bin, LayerRule::linear, 1, 4);  // t0 = 3
    CHECK(shifted.t0() == 3);
    CHECK_THROWS_AS(layer_components(bin, shifted, 2), InvalidArgument);
    CHECK(layer_components(bin, bl, 40).parts.empty());
}

TEST_CASE("layer components partition each layer and rebuild the edge set") {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto parent = oracle::random_parents(400, 3, 100 + s);
        const auto t = make(parent);
        const auto lay = Layering::build(t, LayerRule::linear, 1);
        std::set<std::pair<Vertex, Vertex>> edges;
        std::vector<Vertex> part_of(t.size(), -1);
        Vertex id = 0;
        for (int l = lay.t0(); l <= lay.max_layer(); ++l) {
            const auto comps = layer_components(t, lay, l);
            std::vector<Vertex> domain;
            for (std::size_t v = 0; v < t.size(); ++v)
                if (lay.layer_of(static_cast<Vertex>(v)) == l) domain.push_back(static_cast<Vertex>(v));
            CHECK_FALSE(check_partition(t, comps, &domain).has_value());
            for (const auto& part : comps.parts) {
                // roots are minimal in the layer: the parent lies in an earlier layer
                CHECK((part.root == t.root() || lay.layer_of(t.parent(part.root)) < l));
                for (Vertex v : part.vertices) {
                    part_of[static_cast<std::size_t>(v)] = id;
                    if (v != part.root) edges.insert({t.parent(v), v});
                }
                ++id;
            }
        }
        // cross-part edges are exactly the edges into part roots
        for (std::size_t v = 0; v < t.size(); ++v) {
            const Vertex pv = t.parent(static_cast<Vertex>(v));
            if (pv != static_cast<Vertex>(v) && part_of[v] != part_of[static_cast<std::size_t>(pv)])
                edges.insert({pv, static_cast<Vertex>(v)});
        }
        std::set<std::pair<Vertex, Vertex>> original;
        for (std::size_t v = 1; v < parent.size(); ++v) original.insert({parent[v], static_cast<Vertex>(v)});
        CHECK(edges == original);
    }
}

TEST_CASE("check_partition catches broken partitions") {
    const auto t = make({0, 0, 1, 1, 2});
    SubtreePartition ok{{Part{0, {0, 1, 2, 3, 4}}}};
    CHECK_FALSE(check_partition(t, ok).has_value());
    SubtreePartition overlap{{Part{0, {0, 1}}, Part{1, {1, 2, 3, 4}}}};
    CHECK(check_partition(t, overlap).has_value());
    SubtreePartition missing{{Part{0, {0, 1, 2, 3}}}};
    CHECK(check_partition(t, missing).has_value());
    SubtreePartition gap{{Part{0, {0, 2, 4}}, Part{1, {1, 3}}}};  // {0,2,4} skips 1
    CHECK(check_partition(t, gap).has_value());
}

TEST_CASE("tree JSON round trip") {
    TreeDocument doc;
    doc.parent = {0, 0, 1, 1};
    doc.u = std::vector<double>{1.0, 0.5, 0.25, 2.0};
    doc.extra = {{"profile", {{"theta", 1.0}}}};
    const auto j = to_json(doc);
    const auto back = tree_document_from_json(j);
    CHECK(back.parent == doc.parent);
    CHECK(back.u == doc.u);
    CHECK_FALSE(back.w.has_value());
    CHECK(to_json(back) == j);

    CHECK_THROWS(tree_document_from_json(nlohmann::json{{"u", {1.0}}}));
    CHECK_THROWS(tree_document_from_json(nlohmann::json{{"parent", {0, 0}}, {"u", {1.0}}}));

    const auto t = make({0, 0, 1, 1, 2});
    const auto lay = Layering::build(t, LayerRule::linear, 1);
    const auto comps = layer_components(t, lay, 2);
    const auto pj = partition_to_json(comps);
    const auto pb = partition_from_json(pj);
    REQUIRE(pb.parts.size() == comps.parts.size());
    CHECK(pb.parts[0].vertices == comps.parts[0].vertices);
}
