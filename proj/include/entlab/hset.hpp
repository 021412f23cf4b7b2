#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "entlab/tree.hpp"

namespace entlab {

/// Factor tau from a closed catalog. `power` (y^nu) is not slowly varying; it
/// is there so the checker has something to reject.
struct Tau {
    enum class Kind { constant, log_power, iterated_log, power };
    Kind kind = Kind::constant;
    double power = 0.0;  // log_power: (ln(e+y))^power; iterated_log: (ln(e+ln(e+y)))^power
    double scale = 1.0;

    double operator()(double y) const;

    static Tau one() { return {}; }
    static Tau log_pow(double nu) { return {Kind::log_power, nu, 1.0}; }
    static Tau iterated_log_pow(double nu) { return {Kind::iterated_log, nu, 1.0}; }
    static Tau pure_power(double nu) { return {Kind::power, nu, 1.0}; }
};

/// h(t) = t^theta |log t|^gamma tau(|log t|), with |log t| read as ln(e + 1/t)
/// so that h stays finite and positive on all of (0, 1].
struct HProfile {
    double theta = 0.0;
    double gamma = 0.0;
    Tau tau;
    double c3 = 4.0;  // two-sided branching-bound constant
};

double h_eval(const HProfile& h, double t);

/// Target size of V_l(xi) for xi at depth j: h(2^{-m j}) / h(2^{-m (j+l)}).
double branching_target(const HProfile& h, int m_star, long j, long l);

struct GeneratedTree {
    Tree tree;
    int j_min = 0;
    int m_star = 1;
    int depth = 0;  // truncation depth (relative to the root)
    /// Two-sided constant realised by the census: for every checked (xi, l),
    /// target / c_hat <= |V_l(xi)| <= c_hat * target.
    double c_hat = 1.0;
    std::size_t census_pairs = 0;
};

/// Builds a tree whose root sits at absolute depth j_min and whose level sizes
/// track h(2^{-m j_min}) / h(2^{-m j}). Each vertex carries a mass near 1 and
/// asks for mass * (level growth) children; rounding is carried across a level,
/// the seed fixing the carry phase.
/// Throws if the profile asks a level to shrink or if the realised constant
/// exceeds h.c3.
GeneratedTree generate_hset_tree(const HProfile& h, int m_star, int depth, std::uint64_t seed, int j_min = 0,
                                 std::size_t max_vertices = kDefaultMaxVertices);

/// Realised two-sided constant of `tree` against the profile; vertices are
/// sampled deterministically once the tree exceeds `full_census_limit`.
double census_constant(const Tree& tree, const HProfile& h, int m_star, int j_min, std::size_t* pairs = nullptr,
                       std::size_t full_census_limit = 1u << 16);

/// psi_*(y) evaluated through L = log2 y: L^log_power / tau(L).
struct PsiStar {
    double log_power = 0.0;
    std::optional<Tau> tau_inverse;

    double log2_at(double log2_y) const;  // log2 psi_*(y)
};

/// Multiscale bookkeeping: nu_bar_t = 2^{gamma_* 2^t} psi_*(2^{2^t}).
struct Schedule {
    double gamma_star = 1.0;
    PsiStar psi;
    double c3 = 1.0;
    long n = 2;
    int t_star = 0;
    int t_star_star = 0;

    double log2_nu_bar(int t) const;
    /// m_t = ceil(log2 nu_t) with nu_t <= c3 * nu_bar_t.
    int m_t(int t) const;
};

Schedule make_schedule(double gamma_star, const PsiStar& psi, double c3, long n);

/// Schedule matching a profile: linear layers give gamma_* = theta and
/// psi_*(y) = (log2 y)^{-gamma} / tau(log2 y); doubly exponential layers give
/// gamma_* = 1 - gamma and psi_*(y) = (log2 y)^{-nu}.
Schedule schedule_for_profile(const HProfile& h, LayerRule rule, double c3, long n, double nu = 0.0);

struct SlowVaryingReport {
    bool pass = false;
    double worst_ratio = 1.0;  // max over grid of the two-sided violation factor
    double tail_elasticity = 0.0;
    double allowed_constant = 0.0;
};

struct SlowVaryingGrid {
    double y_min = 1.0, y_max = 1e6;
    double t_min = 1.0, t_max = 1e6;
    int points = 61;
    double allowed_constant = 16.0;
};

/// Checks t^{-eps} <~ tau(t y)/tau(y) <~ t^{eps} on a log-spaced grid, allowing a
/// reported constant, and that the local elasticity y tau'(y)/tau(y) at the top
/// of the grid is below eps.
SlowVaryingReport slowly_varying_check(const Tau& tau, double eps, const SlowVaryingGrid& grid = {});

struct CriticalParams {
    double p = 2.0, q = 4.0;
    double theta = 0.0, gamma = 0.0;
    double kappa = 0.0;
    int m_star = 1;
    // power family
    std::optional<double> alpha_u, alpha_w;
    // log family
    std::optional<double> lambda_u, lambda_w;
    double nu = 0.0;
};

enum class CriticalLabel { critical_power, critical_log, non_critical, invalid };

std::string to_string(CriticalLabel label);

struct ConditionResult {
    std::string name;
    bool ok = false;
    std::string detail;
};

struct CriticalReport {
    CriticalLabel label = CriticalLabel::invalid;
    std::vector<ConditionResult> conditions;

    bool valid() const { return label == CriticalLabel::critical_power || label == CriticalLabel::critical_log; }
};

CriticalReport validate_critical(const CriticalParams& params);

nlohmann::json to_json(const HProfile& h);
HProfile hprofile_from_json(const nlohmann::json& j);

}  // namespace entlab
