#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "entlab/hset.hpp"
#include "entlab/tree.hpp"

namespace entlab {

/// Depth-dependent weight pair (u_j, w_j); j is the absolute depth.
struct WeightScheme {
    enum class Kind { power_critical, log_critical, explicit_values };
    Kind kind = Kind::power_critical;
    double kappa = 0.0;
    int m_star = 1;
    // power_critical: u_j = 2^{kappa m j} (m j + 1)^{-alpha_u}, w_j = 2^{-kappa m j} (m j + 1)^{-alpha_w}
    double alpha_u = 0.0, alpha_w = 0.0;
    // log_critical: u_j = 2^{kappa m j} (m j + 1)^{alpha} L_j^{-lambda_u},
    //               w_j = 2^{-kappa m j} (m j + 1)^{-alpha} L_j^{-lambda_w},  L_j = max(1, log2(m j + 1))
    double alpha = 0.0, lambda_u = 0.0, lambda_w = 0.0;
    // explicit_values: index = absolute depth
    std::vector<double> u_values, w_values;

    static WeightScheme power(double kappa, int m_star, double alpha_u, double alpha_w);
    static WeightScheme log(double kappa, int m_star, double alpha, double lambda_u, double lambda_w);
    static WeightScheme explicit_arrays(std::vector<double> u, std::vector<double> w);

    double u(long j) const;
    double w(long j) const;
};

struct Weights {
    std::vector<double> u, w;
};

/// Per-depth values for relative depths 0..depth, the root sitting at absolute depth j_min.
Weights make_weights(const WeightScheme& scheme, int depth, int j_min = 0);

/// Per-vertex weights (depth values broadcast over each level).
Weights make_weights(const WeightScheme& scheme, const Tree& tree, int j_min = 0);

/// g(xi) = w(xi) * sum over xi' <= xi of u(xi') f(xi').
std::vector<double> apply(const Tree& tree, std::span<const double> u, std::span<const double> w,
                          std::span<const double> f);

/// Adjoint: (S^T y)(xi') = u(xi') * sum over xi >= xi' of w(xi) y(xi).
std::vector<double> apply_transpose(const Tree& tree, std::span<const double> u, std::span<const double> w,
                                    std::span<const double> y);

struct NormConfig {
    int restarts = 16;
    double tol = 1e-10;
    int max_iter = 10000;
    std::uint64_t seed = 0;
    std::size_t grid_vertex_limit = 12;
    std::size_t grid_budget = 200000;
};

struct NormEstimate {
    double lower = 0.0;
    double upper = 0.0;
    std::vector<double> witness;  // nonnegative, unit l_p norm
    double holder_upper = 0.0;
    double schur_upper = 0.0;
    std::optional<double> grid_upper;
    int iterations = 0;
};

/// Two-sided estimate of the l_p -> l_q norm, 1 < p <= q < infinity.
NormEstimate norm_oracle(const Tree& tree, std::span<const double> u, std::span<const double> w, double p, double q,
                         const NormConfig& cfg = {});

/// Same as norm_oracle but zero weights are accepted (used for restricted blocks).
NormEstimate norm_oracle_nonnegative(const Tree& tree, std::span<const double> u, std::span<const double> w,
                                     double p, double q, const NormConfig& cfg = {});

/// Certified upper bound alone: min of the row-Hölder and Schur bounds.
double norm_upper_bound(const Tree& tree, std::span<const double> u, std::span<const double> w, double p, double q);

double lp_norm(std::span<const double> x, double p);

/// Explicit Hardy-type bound for the operator restricted to depths >= j.
/// `depth_profile[d]` is the number of vertices at depth j + d of the truncated
/// tree; with an empty profile the untruncated formula is used.
/// Throws InvalidArgument naming the failed condition.
double hardy_bound(std::span<const std::size_t> depth_profile, const WeightScheme& scheme, const HProfile& h,
                   double p, double q, long j);

/// Checks the parameter conditions hardy_bound relies on; returns the first
/// failure, or nothing.
std::optional<std::string> hardy_conditions(const WeightScheme& scheme, const HProfile& h, double p, double q);

}  // namespace entlab
