#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "entlab/tree.hpp"

namespace entlab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class EstimateKind { certified_lower, certified_upper, heuristic };

std::string to_string(EstimateKind kind);

struct EntropyEstimate {
    long k = 1;
    double value = 0.0;
    EstimateKind kind = EstimateKind::heuristic;
    std::string method;
    std::optional<std::uint64_t> seed;
    double wall_time_ms = 0.0;
};

/// method,k,value,kind,seed,wall_time_ms
std::string csv_header_estimates();
std::string csv_row(const EntropyEstimate& e);

/// Dense row-major matrix.
struct Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}
    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> d);
    bool is_zero() const;
};

/// Matrix-free linear map R^cols -> R^rows.
struct LinearOperator {
    std::size_t rows = 0, cols = 0;
    std::function<void(std::span<const double>, std::span<double>)> apply;

    static LinearOperator from_matrix(const Matrix& m);
    /// The summation operator of a weighted tree.
    static LinearOperator from_tree(const Tree& tree, std::vector<double> u, std::vector<double> w);
};

/// l_p norm for p in [1, inf].
double norm_p(std::span<const double> x, double p);

/// Uniform (cone-measure) sample on the unit l_p sphere: |x_i| = G_i^{1/p},
/// G_i ~ Gamma(1/p), random signs, normalised. For p = inf, uniform in the
/// cube scaled to the sphere.
void sample_lp_sphere(double p, SplitMix64& rng, std::span<double> out);

/// Which domain points feed the cloud: sphere samples alone, sphere samples
/// after the +-e_i, or +-e_i followed by samples uniform in the ball (the
/// sphere is only two points when the domain is one-dimensional).
enum class Candidates { sphere_only, with_basis, ball };

/// Images A x of `samples` sphere samples, each together with -A x, in sample
/// order; with `with_basis`, the images of +-e_i come first. Row-major, one
/// image per row.
struct PointCloud {
    std::size_t dim = 0;
    std::vector<double> data;
    std::size_t size() const { return dim == 0 ? 0 : data.size() / dim; }
    std::span<const double> point(std::size_t i) const { return {data.data() + i * dim, dim}; }
};

PointCloud sample_images(const LinearOperator& op, double p, std::size_t samples, std::uint64_t seed,
                         Candidates candidates = Candidates::sphere_only);

/// Farthest-point traversal from point `first`. Entry i (i >= 1) is the
/// l_q distance from the (i+1)-th selected point to the previously selected
/// ones; entry 0 is +inf. Ties go to the lowest index. Stops after
/// `max_selected` points or when the cloud is exhausted.
std::vector<double> gonzalez_distances(const PointCloud& cloud, double q, std::size_t max_selected,
                                       std::size_t first = 0);

/// Packing lower bound from a precomputed traversal: M = 2^{k-1}+1 selected
/// points are pairwise >= s apart, so e_k >= s/2. Zero when fewer points exist.
double packing_value(std::span<const double> gonzalez, long k);

/// Greedy covering radius with 2^{k-1} centres from a precomputed traversal.
double cover_value(std::span<const double> gonzalez, long k);

inline constexpr int kMaxSampledK = 24;
inline constexpr std::size_t kDefaultSamples = std::size_t{1} << 14;

EntropyEstimate packing_lower(const LinearOperator& op, double p, double q, long k,
                              std::size_t samples = kDefaultSamples, std::uint64_t seed = 0,
                              Candidates candidates = Candidates::sphere_only);
EntropyEstimate packing_lower(const Matrix& a, double p, double q, long k, std::size_t samples = kDefaultSamples,
                              std::uint64_t seed = 0, Candidates candidates = Candidates::sphere_only);

EntropyEstimate greedy_cover_estimate(const LinearOperator& op, double p, double q, long k,
                                      std::size_t samples = kDefaultSamples, std::uint64_t seed = 0,
                                      Candidates candidates = Candidates::sphere_only);
EntropyEstimate greedy_cover_estimate(const Matrix& a, double p, double q, long k,
                                      std::size_t samples = kDefaultSamples, std::uint64_t seed = 0,
                                      Candidates candidates = Candidates::sphere_only);

struct NetOptions {
    std::size_t max_domain_dim = 6;
    std::size_t max_net_points = 2000000;
};

/// Row-Hölder bound (sum_i ||row_i||_{p'}^q)^{1/q} >= ||A||_{p->q}.
double matrix_norm_upper(const Matrix& a, double p, double q);

/// Deterministic eta-net of the l_p ball (cube grid with spacing 2 eta / m^{1/p}).
std::vector<double> lp_ball_net(std::size_t m, double p, double eta, std::size_t max_points);

EntropyEstimate net_upper(const Matrix& a, double p, double q, long k, double eta, const NetOptions& opt = {});

/// (prod |d_i|)^{1/nu} (vol B_p / vol B_q)^{1/nu} 2^{-(k-1)/nu}.
EntropyEstimate volumetric_lower(long nu, double p, double q, long k, std::span<const double> diag = {});

double log_volume_lp_ball(long nu, double p);

/// Closed-form reference for e_k(I: l_p^nu -> l_q^nu), branches glued so the
/// curve is continuous: flat at B2(ceil(log2 nu)) below that index, B2(k) =
/// (ln(1+nu/k)/k)^{1/p-1/q} up to k = nu, then c 2^{-k/nu} nu^{1/q-1/p} with c
/// matching B2 at k = nu.
double schuett(long nu, long k, double p, double q);

/// The three branches as written, no gluing: 1, B2(k), 2^{-k/nu} nu^{1/q-1/p}.
double schuett_piecewise(long nu, long k, double p, double q);

/// phi(t) = scale * (ln(shift + t))^beta.
struct LogPhi {
    double scale = 1.0;
    double shift = 2.0;
    double beta = 0.0;
    double operator()(double t) const;
};

struct PhiCheck {
    bool ok = false;
    double worst_ratio = 0.0;
    std::string detail;
};

/// Nondecreasing on [1, inf) and phi(t)/phi(s) <= c ((1+ln t)/(1+ln s))^alpha,
/// checked on a log grid up to t_max.
PhiCheck check_phi(const LogPhi& phi, double alpha, double c_max = 10.0, double t_max = 1e12, int points = 97);

/// 1 / w_phi(2^n), w_phi = 1 on [0, 1] and phi beyond.
double kuhn_value(long n, double p, double q, const LogPhi& phi);

/// e_{k+l-1}(S+T) <= e_k(S) + e_l(T).
EntropyEstimate combine_sum(const EntropyEstimate& a, const EntropyEstimate& b);
/// e_k(S T) <= ||S|| e_k(T).
EntropyEstimate combine_scale(double norm, const EntropyEstimate& e);
/// Index n + floor(log2 |N|) + 1, value per_member + approx_error.
EntropyEstimate lifshits_combine(long n, std::uint64_t family_size, double per_member, double approx_error);

}  // namespace entlab
