#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "entlab/common.hpp"

namespace entlab {

inline constexpr std::size_t kDefaultMaxVertices = std::size_t{1} << 22;

/// Immutable rooted tree. Vertex ids are 0..size()-1 and are kept exactly as
/// given by the parent list; a breadth-first order is stored alongside so that
/// depth levels can be sliced in O(1).
class Tree {
public:
    /// parent[v] is the parent of v; the root is the unique v with parent[v] == v.
    static Tree from_parents(std::span<const Vertex> parent,
                             std::size_t max_vertices = kDefaultMaxVertices);

    std::size_t size() const { return parent_.size(); }
    Vertex root() const { return root_; }
    Vertex parent(Vertex v) const { return parent_[static_cast<std::size_t>(v)]; }
    int depth(Vertex v) const { return depth_[static_cast<std::size_t>(v)]; }
    int max_depth() const { return static_cast<int>(level_offsets_.size()) - 2; }

    std::span<const Vertex> children(Vertex v) const {
        const auto i = static_cast<std::size_t>(v);
        return {child_list_.data() + child_offsets_[i], child_list_.data() + child_offsets_[i + 1]};
    }

    /// Vertices ordered by (depth, id).
    std::span<const Vertex> bfs_order() const { return bfs_; }

    /// All vertices at depth d (empty when d is out of range).
    std::span<const Vertex> level(int d) const;

    const std::vector<Vertex>& parents() const { return parent_; }
    const std::vector<int>& depths() const { return depth_; }

    /// True when a lies on the root path of b (a <= b in the tree order).
    bool is_ancestor_or_self(Vertex a, Vertex b) const {
        const auto ia = static_cast<std::size_t>(a), ib = static_cast<std::size_t>(b);
        return tin_[ia] <= tin_[ib] && tout_[ib] <= tout_[ia];
    }

    std::size_t max_children() const { return max_children_; }

    /// Per-depth vertex counts, index = depth.
    std::vector<std::size_t> level_sizes() const;

private:
    std::vector<Vertex> parent_;
    std::vector<int> depth_;
    std::vector<std::size_t> child_offsets_;
    std::vector<Vertex> child_list_;
    std::vector<Vertex> bfs_;
    std::vector<std::size_t> level_offsets_;
    std::vector<std::uint32_t> tin_, tout_;
    std::size_t max_children_ = 0;
    Vertex root_ = 0;
};

/// Descendants of xi at depth depth(xi) + l, ascending.
std::vector<Vertex> descendants_at_distance(const Tree& tree, Vertex xi, int l);

/// counts[l] = |descendants_at_distance(tree, xi, l)| for l = 0..(deepest offset).
std::vector<std::size_t> descendant_census(const Tree& tree, Vertex xi);

/// All vertices of the subtree rooted at xi, in breadth-first order.
std::vector<Vertex> subtree_vertices(const Tree& tree, Vertex xi);

/// Extracts the subtree rooted at xi as a standalone tree (xi becomes vertex 0).
/// `original` receives the source id of every new vertex.
Tree extract_subtree(const Tree& tree, Vertex xi, int max_relative_depth,
                     std::vector<Vertex>* original = nullptr);

enum class LayerRule {
    linear,              // 2^{t-1} <= m*j < 2^t
    doubly_exponential,  // 2^{2^{t-1}} <= m*j < 2^{2^t}
};

/// Scale index of absolute depth j. Depth m*j = 0 is put one layer above the
/// layer of m*j = m*, so consecutive depths never skip a layer.
int layer_index(LayerRule rule, int m_star, long j);

/// Scale-index metadata attached to a tree. The tree's root sits at absolute
/// depth j_min.
class Layering {
public:
    static Layering build(const Tree& tree, LayerRule rule, int m_star, int j_min = 0);

    int t0() const { return t0_; }
    int max_layer() const { return max_layer_; }
    int layer_of(Vertex v) const { return layer_[static_cast<std::size_t>(v)]; }
    LayerRule rule() const { return rule_; }
    int m_star() const { return m_star_; }
    int j_min() const { return j_min_; }
    /// Number of vertices in layer t.
    std::size_t layer_size(int t) const;

private:
    std::vector<int> layer_;
    std::vector<std::size_t> counts_;
    LayerRule rule_ = LayerRule::linear;
    int m_star_ = 1;
    int j_min_ = 0;
    int t0_ = 0;
    int max_layer_ = 0;
};

struct Part {
    Vertex root = 0;
    std::vector<Vertex> vertices;  // ascending
};

struct SubtreePartition {
    std::vector<Part> parts;
};

/// Connected components of the subgraph on layer-t vertices. Throws when t < t0.
SubtreePartition layer_components(const Tree& tree, const Layering& layering, int t);

/// Checks disjointness, connectivity, interval-closure, and (when `domain` is
/// given) that the union equals the domain; without a domain the union must
/// be the whole vertex set. Returns a description of the first violation.
std::optional<std::string> check_partition(const Tree& tree, const SubtreePartition& partition,
                                           const std::vector<Vertex>* domain = nullptr);

}  // namespace entlab
