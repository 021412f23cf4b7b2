#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "entlab/bound_expr.hpp"
#include "entlab/hset.hpp"
#include "entlab/summation.hpp"
#include "entlab/tree.hpp"

namespace entlab {

struct CertificateOptions {
    double p = 2.0, q = 4.0;
    double eps = 0.1;
    int j_min = 0;  // absolute depth of the root
    /// Exponent of the log factor in the layer-size bound (doubly exponential layers).
    double nu = 0.0;
};

struct LayerBudget {
    int t = 0;
    int l = -1;  // -1 for head layers and the tail
    long k = 1;
};

struct CertificateLayer {
    int t = 0;
    std::string role;  // head, middle, tail
    std::size_t dim = 0;
    long k = 1;
    double norm = 0.0;     // certified bound for the block
    double schuett = 1.0;  // identity factor (1 for the tail)
    double value = 0.0;
};

struct Certificate {
    EntropyEstimate estimate;  // e_K <= B
    BoundExpr expr;
    Schedule schedule;
    LayerRule rule = LayerRule::linear;
    int t0 = 0;
    int max_layer = 0;
    int truncation_depth = 0;
    std::vector<LayerBudget> budgets;
    long budget_sum = 0;           // sum over budgets of (k - 1)
    double budget_constant = 0.0;  // budget_sum <= budget_constant * n
    std::vector<CertificateLayer> layers;
    std::optional<double> tail_hardy;  // power family only; reported, not folded in

    nlohmann::json to_json() const;
};

/// Upper bound for e_K of the summation operator on the (finite) tree.
///
/// Column layers t = t0..: the operator splits as S = sum_t S P_t with P_t
/// restricting to layer t. A layer below t_*(n) gets index
/// ceil(n 2^{-eps (t_* - t)}); a layer in [t_*, t_**) gets
/// 1 + sum_l (k_{t,l} - 1) with k_{t,l} = ceil(n 2^{-eps (t - t_* + l)}),
/// l = 0..floor(log2 n_t), n_t = ceil(n 2^{-t}); both are bounded by
/// ||S P_t||_{q->q} times the Schütt value for the layer dimension. Layers from
/// t_** on form the tail, bounded at index 1 by the certified p->q norm.
/// A tree inside one layer gets the whole budget n.
Certificate entropy_certificate(const Tree& tree, const WeightScheme& scheme, const HProfile& h, long n,
                                const CertificateOptions& opt = {});

/// The analytic budget constant 1/(1-2^{-eps})^2 + 1/(1-2^{-eps}).
double budget_constant(double eps);

LayerRule layer_rule_for(const WeightScheme& scheme);

CriticalParams critical_params(const WeightScheme& scheme, const HProfile& h, double p, double q, double nu);

}  // namespace entlab
