#include "entlab/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace entlab {

double VertexWeight::total() const { return std::accumulate(phi.begin(), phi.end(), 0.0); }

double VertexWeight::of(std::span<const Vertex> vertices) const {
    double s = 0.0;
    for (Vertex v : vertices) s += phi[static_cast<std::size_t>(v)];
    return s;
}

namespace {

void check_inputs(const Tree& tree, const VertexWeight& weights, long n, int k) {
    if (n < 1) throw InvalidArgument("partition: n must be positive");
    if (k < 1) throw InvalidArgument("partition: branching bound must be positive");
    if (weights.phi.size() != tree.size()) throw InvalidArgument("partition: weight vector size mismatch");
    for (double x : weights.phi)
        if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidArgument("partition: weights must be finite and nonnegative");
    if (tree.max_children() > static_cast<std::size_t>(k))
        throw InvalidArgument("partition: branching bound violated (a vertex has " +
                              std::to_string(tree.max_children()) + " children, k=" + std::to_string(k) + ")");
    if (!(weights.total() > 0.0)) throw InvalidArgument("partition: all weights are zero");
}

/// Greedy split of the marked subtree rooted at domain_root at an absolute threshold. Returns the
/// parts in root order.
std::vector<Part> greedy_split(const Tree& tree, const std::vector<double>& phi, Vertex domain_root, double threshold, std::vector<std::int32_t>& scratch_mark,
                               std::int32_t mark) {
    // scratch_mark[v] == mark  <=>  v in domain
    // Post-order via reverse breadth-first order restricted to the domain.
    std::vector<Vertex> order{domain_root};
    for (std::size_t head = 0; head < order.size(); ++head)
        for (Vertex c : tree.children(order[head]))
            if (scratch_mark[static_cast<std::size_t>(c)] == mark) order.push_back(c);

    const std::size_t m = order.size();
    // Local indices keep scratch space proportional to the domain.
    std::vector<std::size_t> local_parent(m, 0);
    std::vector<double> residual(m, 0.0);
    std::vector<char> open(m, 0), is_part_root(m, 0);
    std::vector<std::vector<std::size_t>> kids(m);
    {
        // Map vertex -> local index through a sorted lookup.
        std::vector<std::pair<Vertex, std::size_t>> idx(m);
        for (std::size_t i = 0; i < m; ++i) idx[i] = {order[i], i};
        std::sort(idx.begin(), idx.end());
        auto local = [&](Vertex v) {
            auto it = std::lower_bound(idx.begin(), idx.end(), std::make_pair(v, std::size_t{0}));
            return it->second;
        };
        for (std::size_t i = 1; i < m; ++i) {
            local_parent[i] = local(tree.parent(order[i]));
            kids[local_parent[i]].push_back(i);
        }
    }

    for (std::size_t ii = m; ii-- > 0;) {
        const double own = phi[static_cast<std::size_t>(order[ii])];
        if (own >= threshold) {
            is_part_root[ii] = 1;  // heavy singleton
            for (std::size_t c : kids[ii])
                if (open[c]) is_part_root[c] = 1;
            continue;
        }
        double acc = own;
        for (std::size_t c : kids[ii])
            if (open[c]) acc += residual[c];
        if (acc >= threshold) {
            is_part_root[ii] = 1;
        } else {
            open[ii] = 1;
            residual[ii] = acc;
        }
    }
    is_part_root[0] = 1;

    // Top-down labelling: a vertex belongs to its parent's part unless it is a
    // part root. Children of a heavy singleton are always part roots.
    std::vector<std::size_t> label(m, 0);
    std::vector<Part> parts;
    for (std::size_t i = 0; i < m; ++i) {
        if (is_part_root[i]) {
            label[i] = parts.size();
            parts.push_back(Part{order[i], {}});
        } else {
            label[i] = label[local_parent[i]];
        }
        parts[label[i]].vertices.push_back(order[i]);
    }
    for (auto& p : parts) std::sort(p.vertices.begin(), p.vertices.end());
    return parts;
}

std::vector<Vertex> all_vertices(const Tree& tree) {
    std::vector<Vertex> v(tree.size());
    std::iota(v.begin(), v.end(), Vertex{0});
    return v;
}

}  // namespace

BalancedPartition balanced_partition(const Tree& tree, const VertexWeight& weights, long n, int k) {
    check_inputs(tree, weights, n, k);
    BalancedPartition out;
    const double total = weights.total();
    out.threshold = total / static_cast<double>(n);
    out.constant = static_cast<double>(k) + 2.0;
    if (n == 1) {
        out.partition.parts.push_back(Part{tree.root(), all_vertices(tree)});
        return out;
    }
    std::vector<std::int32_t> mark(tree.size(), 1);
    out.partition.parts = greedy_split(tree, weights.phi, tree.root(), out.threshold, mark, 1);
    return out;
}

PartitionFamily dyadic_family(const Tree& tree, const VertexWeight& weights, long n0, int k) {
    check_inputs(tree, weights, n0, k);
    PartitionFamily fam;
    fam.n0 = n0;
    const double kk = static_cast<double>(k);
    fam.constant = 2.0 * (kk + 1.0) * (kk + 1.0) + 1.0;

    int top = 0;
    while ((2L << top) <= n0) ++top;  // floor(log2 n0)
    fam.levels.resize(static_cast<std::size_t>(top) + 1);
    fam.levels[static_cast<std::size_t>(top)].parts.push_back(Part{tree.root(), all_vertices(tree)});

    const double total = weights.total();
    std::vector<std::int32_t> mark(tree.size(), -1);
    std::int32_t stamp = 0;
    for (int l = top - 1; l >= 0; --l) {
        const double threshold = total * std::ldexp(1.0, l) / static_cast<double>(n0);
        auto& level = fam.levels[static_cast<std::size_t>(l)];
        for (const Part& coarse : fam.levels[static_cast<std::size_t>(l) + 1].parts) {
            ++stamp;
            for (Vertex v : coarse.vertices) mark[static_cast<std::size_t>(v)] = stamp;
            auto pieces = greedy_split(tree, weights.phi, coarse.root, threshold, mark, stamp);
            for (auto& p : pieces) level.parts.push_back(std::move(p));
        }
    }
    return fam;
}

std::size_t max_cross_intersections(const Tree& tree, const SubtreePartition& a, const SubtreePartition& b) {
    std::vector<std::size_t> owner_b(tree.size(), static_cast<std::size_t>(-1));
    for (std::size_t i = 0; i < b.parts.size(); ++i)
        for (Vertex v : b.parts[i].vertices) owner_b[static_cast<std::size_t>(v)] = i;
    std::size_t worst = 0;
    std::vector<std::size_t> seen;
    for (const Part& p : a.parts) {
        seen.clear();
        for (Vertex v : p.vertices) {
            const std::size_t o = owner_b[static_cast<std::size_t>(v)];
            if (o != static_cast<std::size_t>(-1)) seen.push_back(o);
        }
        std::sort(seen.begin(), seen.end());
        seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
        worst = std::max(worst, seen.size());
    }
    return worst;
}

bool refines(const Tree& tree, const SubtreePartition& fine, const SubtreePartition& coarse) {
    std::vector<std::size_t> owner(tree.size(), static_cast<std::size_t>(-1));
    for (std::size_t i = 0; i < coarse.parts.size(); ++i)
        for (Vertex v : coarse.parts[i].vertices) owner[static_cast<std::size_t>(v)] = i;
    for (const Part& p : fine.parts) {
        if (p.vertices.empty()) return false;
        const std::size_t o = owner[static_cast<std::size_t>(p.vertices.front())];
        if (o == static_cast<std::size_t>(-1)) return false;
        for (Vertex v : p.vertices)
            if (owner[static_cast<std::size_t>(v)] != o) return false;
    }
    return true;
}

}  // namespace entlab
