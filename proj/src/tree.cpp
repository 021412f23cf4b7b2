#include "entlab/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace entlab {

Tree Tree::from_parents(std::span<const Vertex> parent, std::size_t max_vertices) {
    const std::size_t n = parent.size();
    if (n == 0) throw InvalidArgument("tree: parent list is empty");
    if (n > max_vertices)
        throw InvalidArgument("tree: " + std::to_string(n) + " vertices exceeds cap of " +
                              std::to_string(max_vertices));

    Tree t;
    t.parent_.assign(parent.begin(), parent.end());

    std::size_t roots = 0;
    for (std::size_t v = 0; v < n; ++v) {
        const Vertex p = parent[v];
        if (p < 0 || static_cast<std::size_t>(p) >= n)
            throw InvalidArgument("tree: dangling parent id " + std::to_string(p) + " at vertex " +
                                  std::to_string(v));
        if (static_cast<std::size_t>(p) == v) {
            ++roots;
            t.root_ = static_cast<Vertex>(v);
        }
    }
    if (roots > 1) throw InvalidArgument("tree: multiple roots");
    if (roots == 0) throw InvalidArgument("tree: cycle detected (no root)");

    // Children in CSR form, ascending ids.
    t.child_offsets_.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v)
        if (static_cast<Vertex>(v) != t.root_) ++t.child_offsets_[static_cast<std::size_t>(parent[v]) + 1];
    for (std::size_t i = 0; i < n; ++i) t.child_offsets_[i + 1] += t.child_offsets_[i];
    t.child_list_.resize(n - 1);
    {
        std::vector<std::size_t> fill(t.child_offsets_.begin(), t.child_offsets_.end() - 1);
        for (std::size_t v = 0; v < n; ++v)
            if (static_cast<Vertex>(v) != t.root_)
                t.child_list_[fill[static_cast<std::size_t>(parent[v])]++] = static_cast<Vertex>(v);
    }
    for (std::size_t v = 0; v < n; ++v)
        t.max_children_ = std::max(t.max_children_, t.child_offsets_[v + 1] - t.child_offsets_[v]);

    // Breadth-first from the root; anything unreached sits on a cycle.
    t.depth_.assign(n, -1);
    t.bfs_.reserve(n);
    t.bfs_.push_back(t.root_);
    t.depth_[static_cast<std::size_t>(t.root_)] = 0;
    for (std::size_t head = 0; head < t.bfs_.size(); ++head) {
        const Vertex v = t.bfs_[head];
        for (Vertex c : t.children(v)) {
            t.depth_[static_cast<std::size_t>(c)] = t.depth_[static_cast<std::size_t>(v)] + 1;
            t.bfs_.push_back(c);
        }
    }
    if (t.bfs_.size() != n) throw InvalidArgument("tree: cycle detected");

    // bfs_ is already sorted by depth; stable-sort by id within a level.
    const int max_depth = t.depth_[static_cast<std::size_t>(t.bfs_.back())];
    t.level_offsets_.assign(static_cast<std::size_t>(max_depth) + 2, 0);
    for (std::size_t v = 0; v < n; ++v) ++t.level_offsets_[static_cast<std::size_t>(t.depth_[v]) + 1];
    for (std::size_t d = 0; d + 1 < t.level_offsets_.size(); ++d)
        t.level_offsets_[d + 1] += t.level_offsets_[d];
    for (int d = 0; d <= max_depth; ++d)
        std::sort(t.bfs_.begin() + static_cast<std::ptrdiff_t>(t.level_offsets_[static_cast<std::size_t>(d)]),
                  t.bfs_.begin() + static_cast<std::ptrdiff_t>(t.level_offsets_[static_cast<std::size_t>(d) + 1]));

    // Euler tour for ancestor queries.
    t.tin_.assign(n, 0);
    t.tout_.assign(n, 0);
    std::uint32_t clock = 0;
    std::vector<std::pair<Vertex, std::size_t>> stack;
    stack.emplace_back(t.root_, 0);
    t.tin_[static_cast<std::size_t>(t.root_)] = clock++;
    while (!stack.empty()) {
        auto& [v, next] = stack.back();
        const auto kids = t.children(v);
        if (next < kids.size()) {
            const Vertex c = kids[next++];
            t.tin_[static_cast<std::size_t>(c)] = clock++;
            stack.emplace_back(c, 0);
        } else {
            t.tout_[static_cast<std::size_t>(v)] = clock++;
            stack.pop_back();
        }
    }
    return t;
}

std::span<const Vertex> Tree::level(int d) const {
    if (d < 0 || d > max_depth()) return {};
    const auto i = static_cast<std::size_t>(d);
    return {bfs_.data() + level_offsets_[i], bfs_.data() + level_offsets_[i + 1]};
}

std::vector<std::size_t> Tree::level_sizes() const {
    std::vector<std::size_t> out(level_offsets_.size() - 1);
    for (std::size_t d = 0; d < out.size(); ++d) out[d] = level_offsets_[d + 1] - level_offsets_[d];
    return out;
}

std::vector<Vertex> descendants_at_distance(const Tree& tree, Vertex xi, int l) {
    if (xi < 0 || static_cast<std::size_t>(xi) >= tree.size())
        throw InvalidArgument("descendants_at_distance: invalid vertex");
    if (l < 0) throw InvalidArgument("descendants_at_distance: negative distance");
    std::vector<Vertex> frontier{xi};
    for (int step = 0; step < l && !frontier.empty(); ++step) {
        std::vector<Vertex> next;
        for (Vertex v : frontier)
            for (Vertex c : tree.children(v)) next.push_back(c);
        frontier = std::move(next);
    }
    std::sort(frontier.begin(), frontier.end());
    return frontier;
}

std::vector<std::size_t> descendant_census(const Tree& tree, Vertex xi) {
    std::vector<std::size_t> counts;
    std::vector<Vertex> frontier{xi};
    while (!frontier.empty()) {
        counts.push_back(frontier.size());
        std::vector<Vertex> next;
        for (Vertex v : frontier)
            for (Vertex c : tree.children(v)) next.push_back(c);
        frontier = std::move(next);
    }
    return counts;
}

std::vector<Vertex> subtree_vertices(const Tree& tree, Vertex xi) {
    std::vector<Vertex> out{xi};
    for (std::size_t head = 0; head < out.size(); ++head)
        for (Vertex c : tree.children(out[head])) out.push_back(c);
    return out;
}

Tree extract_subtree(const Tree& tree, Vertex xi, int max_relative_depth, std::vector<Vertex>* original) {
    std::vector<Vertex> order{xi};
    std::vector<Vertex> parent_new{0};
    const int base = tree.depth(xi);
    for (std::size_t head = 0; head < order.size(); ++head) {
        const Vertex v = order[head];
        if (tree.depth(v) - base >= max_relative_depth) continue;
        for (Vertex c : tree.children(v)) {
            order.push_back(c);
            parent_new.push_back(static_cast<Vertex>(head));
        }
    }
    if (original) *original = order;
    return Tree::from_parents(parent_new, std::max(kDefaultMaxVertices, order.size()));
}

int layer_index(LayerRule rule, int m_star, long j) {
    if (m_star < 1) throw InvalidArgument("layering: m_* must be positive");
    if (j < 0) throw InvalidArgument("layering: negative depth");
    auto raw = [rule](double x) {
        // smallest t >= 0 with g(t) > x, g(t) = 2^t or 2^(2^t)
        int t = 0;
        if (rule == LayerRule::linear) {
            while (std::ldexp(1.0, t) <= x) ++t;
        } else {
            while (t < 62 && std::ldexp(1.0, t) <= std::log2(std::max(x, 1.0))) ++t;
            if (x < 1.0) t = 0;
        }
        return t;
    };
    const double x = static_cast<double>(m_star) * static_cast<double>(j);
    if (j == 0) return std::max(0, raw(static_cast<double>(m_star)) - 1);
    return raw(x);
}

Layering Layering::build(const Tree& tree, LayerRule rule, int m_star, int j_min) {
    if (j_min < 0) throw InvalidArgument("layering: negative j_min");
    Layering lay;
    lay.rule_ = rule;
    lay.m_star_ = m_star;
    lay.j_min_ = j_min;
    lay.layer_.resize(tree.size());
    // Layers depend only on depth.
    std::vector<int> by_depth(static_cast<std::size_t>(tree.max_depth()) + 1);
    for (int d = 0; d <= tree.max_depth(); ++d) by_depth[static_cast<std::size_t>(d)] = layer_index(rule, m_star, j_min + d);
    for (std::size_t v = 0; v < tree.size(); ++v)
        lay.layer_[v] = by_depth[static_cast<std::size_t>(tree.depth(static_cast<Vertex>(v)))];
    lay.t0_ = by_depth.front();
    lay.max_layer_ = by_depth.back();
    lay.counts_.assign(static_cast<std::size_t>(lay.max_layer_) + 1, 0);
    for (int t : lay.layer_) ++lay.counts_[static_cast<std::size_t>(t)];
    return lay;
}

std::size_t Layering::layer_size(int t) const {
    if (t < 0 || t > max_layer_) return 0;
    return counts_[static_cast<std::size_t>(t)];
}

SubtreePartition layer_components(const Tree& tree, const Layering& layering, int t) {
    if (t < layering.t0())
        throw InvalidArgument("layer_components: t=" + std::to_string(t) + " is below t0=" +
                              std::to_string(layering.t0()));
    SubtreePartition out;
    if (t > layering.max_layer() || layering.layer_size(t) == 0) return out;
    for (Vertex v : tree.bfs_order()) {
        if (layering.layer_of(v) != t) continue;
        const bool minimal = v == tree.root() || layering.layer_of(tree.parent(v)) != t;
        if (!minimal) continue;
        Part part;
        part.root = v;
        std::vector<Vertex> stack{v};
        while (!stack.empty()) {
            const Vertex x = stack.back();
            stack.pop_back();
            part.vertices.push_back(x);
            for (Vertex c : tree.children(x))
                if (layering.layer_of(c) == t) stack.push_back(c);
        }
        std::sort(part.vertices.begin(), part.vertices.end());
        out.parts.push_back(std::move(part));
    }
    return out;
}

std::optional<std::string> check_partition(const Tree& tree, const SubtreePartition& partition,
                                           const std::vector<Vertex>* domain) {
    const std::size_t n = tree.size();
    std::vector<std::int64_t> owner(n, -1);
    for (std::size_t i = 0; i < partition.parts.size(); ++i) {
        for (Vertex v : partition.parts[i].vertices) {
            if (v < 0 || static_cast<std::size_t>(v) >= n) return "part " + std::to_string(i) + ": invalid vertex";
            auto& o = owner[static_cast<std::size_t>(v)];
            if (o != -1) return "vertex " + std::to_string(v) + " lies in two parts";
            o = static_cast<std::int64_t>(i);
        }
    }
    for (std::size_t i = 0; i < partition.parts.size(); ++i) {
        const Part& part = partition.parts[i];
        if (part.vertices.empty()) return "part " + std::to_string(i) + " is empty";
        if (part.root < 0 || static_cast<std::size_t>(part.root) >= n ||
            owner[static_cast<std::size_t>(part.root)] != static_cast<std::int64_t>(i))
            return "part " + std::to_string(i) + ": root not in part";
        if (part.root != tree.root() &&
            owner[static_cast<std::size_t>(tree.parent(part.root))] == static_cast<std::int64_t>(i))
            return "part " + std::to_string(i) + ": root is not the minimal vertex";
        // Every non-root vertex has its parent in the same part: connected and
        // interval-closed.
        for (Vertex v : part.vertices) {
            if (v == part.root) continue;
            if (owner[static_cast<std::size_t>(tree.parent(v))] != static_cast<std::int64_t>(i))
                return "part " + std::to_string(i) + ": vertex " + std::to_string(v) + " is disconnected";
        }
    }
    if (domain) {
        std::vector<char> in(n, 0);
        for (Vertex v : *domain) in[static_cast<std::size_t>(v)] = 1;
        for (std::size_t v = 0; v < n; ++v)
            if (static_cast<bool>(in[v]) != (owner[v] != -1))
                return "vertex " + std::to_string(v) + (in[v] ? " is not covered" : " is outside the domain");
    } else {
        for (std::size_t v = 0; v < n; ++v)
            if (owner[v] == -1) return "vertex " + std::to_string(v) + " is not covered";
    }
    return std::nullopt;
}

}  // namespace entlab
