#pragma once

#include <span>
#include <vector>

#include "entlab/tree.hpp"

namespace entlab {

/// Additive vertex weight: Phi(W) = sum of phi over W.
struct VertexWeight {
    std::vector<double> phi;

    double total() const;
    double of(std::span<const Vertex> vertices) const;
};

struct BalancedPartition {
    SubtreePartition partition;
    double threshold = 0.0;  // Phi(total) / n
    double constant = 0.0;   // C(k): part count <= C(k) * n
};

/// Splits the tree into at most (k+2)n connected subtrees; every part with two
/// or more vertices has Phi(part) <= (k+2) Phi(total) / n.
///
/// Post-order sweep with threshold tau = Phi(total)/n. Each vertex collects
/// the open residuals of its children (each strictly below tau). A vertex with
/// phi(v) >= tau becomes a singleton and its children's residuals are closed
/// as parts of their own; otherwise, once the collected weight reaches tau
/// (ties close) the vertex closes a part. Whatever is left at the root is the
/// last part.
BalancedPartition balanced_partition(const Tree& tree, const VertexWeight& weights, long n, int k);

/// Laminar dyadic family: levels l = 0..floor(log2 n0), level l built for
/// granularity n0 / 2^l, each level refining the next coarser one, with the
/// top level equal to the whole tree.
struct PartitionFamily {
    std::vector<SubtreePartition> levels;
    long n0 = 1;
    /// Bounds both the part count (<= constant * n0 / 2^l) and the number of
    /// neighbouring-level parts any part meets.
    double constant = 0.0;
};

PartitionFamily dyadic_family(const Tree& tree, const VertexWeight& weights, long n0, int k);

/// Largest number of parts of `b` met by a single part of `a`.
std::size_t max_cross_intersections(const Tree& tree, const SubtreePartition& a, const SubtreePartition& b);

/// True when every part of `fine` lies inside exactly one part of `coarse`.
bool refines(const Tree& tree, const SubtreePartition& fine, const SubtreePartition& coarse);

}  // namespace entlab
