#include "entlab/hset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace entlab {

double Tau::operator()(double y) const {
    constexpr double e = std::numbers::e;
    switch (kind) {
        case Kind::constant:
            return scale;
        case Kind::log_power:
            return scale * std::pow(std::log(e + y), power);
        case Kind::iterated_log:
            return scale * std::pow(std::log(e + std::log(e + y)), power);
        case Kind::power:
            return scale * std::pow(y, power);
    }
    return scale;
}

namespace {

// ln(e + 2^x) without overflow for large x.
double log_e_plus_pow2(double x) {
    constexpr double e = std::numbers::e;
    if (x < 60.0) return std::log(e + std::exp2(x));
    return x * std::numbers::ln2 + std::log1p(e * std::exp2(-x));
}

// log2 h(2^{-x}).
double log2_h_at_pow2(const HProfile& h, double x) {
    const double L = log_e_plus_pow2(x);
    return -h.theta * x + h.gamma * std::log2(L) + std::log2(h.tau(L));
}

void check_profile(const HProfile& h) {
    if (!std::isfinite(h.theta) || h.theta < 0.0) throw InvalidArgument("hprofile: theta must be finite and >= 0");
    if (!std::isfinite(h.gamma)) throw InvalidArgument("hprofile: gamma must be finite");
    if (!(h.tau.scale > 0.0) || !std::isfinite(h.tau.scale) || !std::isfinite(h.tau.power))
        throw InvalidArgument("hprofile: tau parameters must be finite with positive scale");
    if (!(h.c3 >= 1.0)) throw InvalidArgument("hprofile: c3 must be >= 1");
}

}  // namespace

double h_eval(const HProfile& h, double t) {
    check_profile(h);
    if (!(t > 0.0) || t > 1.0) throw InvalidArgument("h_eval: t must lie in (0, 1]");
    const double L = std::log(std::numbers::e + 1.0 / t);
    return std::pow(t, h.theta) * std::pow(L, h.gamma) * h.tau(L);
}

double branching_target(const HProfile& h, int m_star, long j, long l) {
    if (m_star < 1 || j < 0 || l < 0) throw InvalidArgument("branching_target: bad arguments");
    const double m = static_cast<double>(m_star);
    const double x0 = m * static_cast<double>(j), x1 = m * static_cast<double>(j + l);
    return std::exp2(log2_h_at_pow2(h, x0) - log2_h_at_pow2(h, x1));
}

double census_constant(const Tree& tree, const HProfile& h, int m_star, int j_min, std::size_t* pairs,
                       std::size_t full_census_limit) {
    std::vector<Vertex> picks;
    const auto order = tree.bfs_order();
    if (tree.size() <= full_census_limit) {
        picks.assign(order.begin(), order.end());
    } else {
        const std::size_t stride = (tree.size() + full_census_limit - 1) / full_census_limit;
        for (std::size_t i = 0; i < order.size(); i += stride) picks.push_back(order[i]);
    }
    double worst = 1.0;
    std::size_t count = 0;
    for (Vertex xi : picks) {
        const auto census = descendant_census(tree, xi);
        const long j = j_min + tree.depth(xi);
        for (std::size_t l = 0; l < census.size(); ++l) {
            const double target = branching_target(h, m_star, j, static_cast<long>(l));
            const double have = static_cast<double>(census[l]);
            worst = std::max({worst, have / target, target / have});
            ++count;
        }
    }
    if (pairs) *pairs = count;
    return worst;
}

GeneratedTree generate_hset_tree(const HProfile& h, int m_star, int depth, std::uint64_t seed, int j_min,
                                 std::size_t max_vertices) {
    check_profile(h);
    if (m_star < 1) throw InvalidArgument("generate_hset_tree: m_star must be positive");
    if (depth < 0) throw InvalidArgument("generate_hset_tree: depth must be >= 0");
    if (j_min < 0) throw InvalidArgument("generate_hset_tree: j_min must be >= 0");

    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto rng = stream_rng(seed, 0);
    const double phase = unif(rng);

    // Every vertex carries a mass (the root 1). A vertex of mass w at level
    // d-1 wants x = w T_d / T_{d-1} children; it gets floor(x) or ceil(x) (at
    // least one), the choice made by carrying the rounding error along the
    // level in breadth-first order, and its children share x equally. Mass is
    // conserved, each mass stays in [1/2, 2), so a level holds between half
    // and twice its target.
    std::vector<Vertex> parent{0};
    std::vector<double> mass{1.0};
    std::size_t level_start = 0, level_size = 1;
    double prev_target = 1.0;
    for (int d = 1; d <= depth; ++d) {
        const double target = branching_target(h, m_star, j_min, d);
        if (target < prev_target * (1.0 - 1e-12))
            throw InvalidArgument("generate_hset_tree: infeasible profile, level " + std::to_string(d) +
                                  " would shrink (target " + std::to_string(target) + " < " +
                                  std::to_string(prev_target) + ")");
        const double r = std::max(1.0, target / prev_target);
        prev_target = target;
        double wanted = 0.0;
        std::size_t emitted = 0;
        const std::size_t next_start = parent.size();
        for (std::size_t i = level_start; i < level_start + level_size; ++i) {
            const double x = mass[i] * r;
            wanted += x;
            const double fl = std::floor(x + 1e-9);
            auto c = static_cast<std::size_t>(std::max(1.0, fl));
            const double goal = std::floor(wanted + phase);
            if (static_cast<double>(emitted + c) < goal && static_cast<double>(c) < x - 1e-9) ++c;
            emitted += c;
            if (parent.size() + c > max_vertices)
                throw ResourceExceeded("generate_hset_tree: vertex cap of " + std::to_string(max_vertices) +
                                       " exceeded at level " + std::to_string(d));
            for (std::size_t k = 0; k < c; ++k) {
                parent.push_back(static_cast<Vertex>(i));
                mass.push_back(x / static_cast<double>(c));
            }
        }
        level_start = next_start;
        level_size = parent.size() - next_start;
    }

    GeneratedTree out{Tree::from_parents(parent, max_vertices), j_min, m_star, depth, 1.0, 0};
    out.c_hat = census_constant(out.tree, h, m_star, j_min, &out.census_pairs);
    if (out.c_hat > h.c3)
        throw InvalidArgument("generate_hset_tree: realised constant " + std::to_string(out.c_hat) +
                              " exceeds c3 = " + std::to_string(h.c3));
    return out;
}

double PsiStar::log2_at(double log2_y) const {
    if (!(log2_y > 0.0)) throw InvalidArgument("psi_star: argument must exceed 1");
    double v = log_power * std::log2(log2_y);
    if (tau_inverse) v -= std::log2((*tau_inverse)(log2_y));
    return v;
}

double Schedule::log2_nu_bar(int t) const {
    const double L = std::ldexp(1.0, t);
    return gamma_star * L + psi.log2_at(L);
}

int Schedule::m_t(int t) const { return static_cast<int>(std::ceil(std::log2(c3) + log2_nu_bar(t) - 1e-12)); }

namespace {

int first_reaching(const Schedule& s, double log2_threshold) {
    for (int t = 0; t <= 62; ++t)
        if (s.log2_nu_bar(t) >= log2_threshold - 1e-12) return t;
    throw InvalidArgument("schedule: nu_bar never reaches the threshold (check gamma_star and psi_star)");
}

}  // namespace

Schedule make_schedule(double gamma_star, const PsiStar& psi, double c3, long n) {
    if (n < 2) throw InvalidArgument("schedule: n must be >= 2");
    if (!(c3 >= 1.0)) throw InvalidArgument("schedule: c3 must be >= 1");
    Schedule s;
    s.gamma_star = gamma_star;
    s.psi = psi;
    s.c3 = c3;
    s.n = n;
    s.t_star = first_reaching(s, std::log2(static_cast<double>(n)));
    s.t_star_star = first_reaching(s, static_cast<double>(n));
    return s;
}

Schedule schedule_for_profile(const HProfile& h, LayerRule rule, double c3, long n, double nu) {
    PsiStar psi;
    if (rule == LayerRule::linear) {
        psi.log_power = -h.gamma;
        psi.tau_inverse = h.tau;
        return make_schedule(h.theta, psi, c3, n);
    }
    psi.log_power = -nu;
    return make_schedule(1.0 - h.gamma, psi, c3, n);
}

SlowVaryingReport slowly_varying_check(const Tau& tau, double eps, const SlowVaryingGrid& grid) {
    if (!(eps > 0.0)) throw InvalidArgument("slowly_varying_check: eps must be positive");
    if (grid.points < 2 || !(grid.y_min > 0.0) || !(grid.t_min > 0.0) || grid.y_max < grid.y_min ||
        grid.t_max < grid.t_min)
        throw InvalidArgument("slowly_varying_check: bad grid");
    SlowVaryingReport r;
    r.allowed_constant = grid.allowed_constant;
    auto at = [&](double lo, double hi, int i) {
        return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (grid.points - 1));
    };
    for (int a = 0; a < grid.points; ++a) {
        const double y = at(grid.y_min, grid.y_max, a);
        const double ty0 = tau(y);
        for (int b = 0; b < grid.points; ++b) {
            const double t = at(grid.t_min, grid.t_max, b);
            const double ratio = tau(t * y) / ty0;
            const double te = std::pow(t, eps);
            // t >= 1: need t^{-eps} <= ratio <= t^{eps}; t < 1 flips the roles.
            const double hi = std::max(te, 1.0 / te), lo = std::min(te, 1.0 / te);
            r.worst_ratio = std::max({r.worst_ratio, ratio / hi, lo / ratio});
        }
    }
    const double y = grid.y_max, d = 1e-4;
    r.tail_elasticity = std::abs((std::log(tau(y * (1 + d))) - std::log(tau(y * (1 - d)))) /
                                 (std::log1p(d) - std::log1p(-d)));
    r.pass = r.worst_ratio <= grid.allowed_constant && r.tail_elasticity < eps;
    return r;
}

std::string to_string(CriticalLabel label) {
    switch (label) {
        case CriticalLabel::critical_power:
            return "critical-power";
        case CriticalLabel::critical_log:
            return "critical-log";
        case CriticalLabel::non_critical:
            return "non-critical";
        case CriticalLabel::invalid:
            return "invalid";
    }
    return "invalid";
}

CriticalReport validate_critical(const CriticalParams& P) {
    constexpr double tol = 1e-12;
    CriticalReport rep;
    auto add = [&](std::string name, bool ok, std::string detail) {
        rep.conditions.push_back({std::move(name), ok, std::move(detail)});
        return ok;
    };
    const bool exps = add("1 < p < q < inf", P.p > 1.0 && P.q > P.p && std::isfinite(P.q),
                          "p=" + std::to_string(P.p) + " q=" + std::to_string(P.q));
    const bool mstar = add("m_star >= 1", P.m_star >= 1, "m_star=" + std::to_string(P.m_star));
    const double target = 1.0 / P.p - 1.0 / P.q;
    const bool power = P.alpha_u.has_value() && P.alpha_w.has_value();
    const bool logf = P.lambda_u.has_value() && P.lambda_w.has_value();
    if (power == logf) {
        add("exactly one weight family", false, "give either (alpha_u, alpha_w) or (lambda_u, lambda_w)");
        rep.label = CriticalLabel::invalid;
        return rep;
    }
    bool structural = exps && mstar;
    bool sum_ok = false;
    if (power) {
        structural &= add("theta > 0", P.theta > 0.0, "theta=" + std::to_string(P.theta));
        const double crit = P.theta / P.q;
        structural &= add("kappa >= theta/q", P.kappa >= crit - tol,
                          "kappa=" + std::to_string(P.kappa) + " theta/q=" + std::to_string(crit));
        const bool boundary = std::abs(P.kappa - crit) <= tol;
        if (boundary)
            structural &= add("alpha_w > (1-gamma)/q", *P.alpha_w > (1.0 - P.gamma) / P.q + tol,
                              "alpha_w=" + std::to_string(*P.alpha_w) +
                                  " (1-gamma)/q=" + std::to_string((1.0 - P.gamma) / P.q));
        const double tilde = *P.alpha_u + *P.alpha_w - (boundary ? 1.0 / P.q : 0.0);
        sum_ok = add("alpha_tilde = 1/p - 1/q", std::abs(tilde - target) <= tol,
                     "alpha_tilde=" + std::to_string(tilde) + " target=" + std::to_string(target));
        rep.label = !structural ? CriticalLabel::invalid
                                : (sum_ok ? CriticalLabel::critical_power : CriticalLabel::non_critical);
    } else {
        structural &= add("theta = 0", std::abs(P.theta) <= tol, "theta=" + std::to_string(P.theta));
        structural &= add("gamma <= 0", P.gamma <= tol, "gamma=" + std::to_string(P.gamma));
        structural &= add("kappa > 0", P.kappa > 0.0, "kappa=" + std::to_string(P.kappa));
        const double sum = *P.lambda_u + *P.lambda_w;
        sum_ok = add("lambda_u + lambda_w = 1/p - 1/q", std::abs(sum - target) <= tol,
                     "sum=" + std::to_string(sum) + " target=" + std::to_string(target));
        rep.label = !structural ? CriticalLabel::invalid
                                : (sum_ok ? CriticalLabel::critical_log : CriticalLabel::non_critical);
    }
    return rep;
}

nlohmann::json to_json(const HProfile& h) {
    nlohmann::json tau;
    switch (h.tau.kind) {
        case Tau::Kind::constant:
            tau["kind"] = "const";
            break;
        case Tau::Kind::log_power:
            tau["kind"] = "log_power";
            tau["nu"] = h.tau.power;
            break;
        case Tau::Kind::iterated_log:
            tau["kind"] = "iterated_log";
            tau["nu"] = h.tau.power;
            break;
        case Tau::Kind::power:
            tau["kind"] = "power";
            tau["nu"] = h.tau.power;
            break;
    }
    tau["scale"] = h.tau.scale;
    return {{"theta", h.theta}, {"gamma", h.gamma}, {"tau", tau}, {"c3", h.c3}};
}

HProfile hprofile_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw InvalidArgument("profile: expected a JSON object");
    HProfile h;
    for (const auto& [key, val] : j.items()) {
        if (key == "theta")
            h.theta = val.get<double>();
        else if (key == "gamma")
            h.gamma = val.get<double>();
        else if (key == "c3")
            h.c3 = val.get<double>();
        else if (key == "tau") {
            if (val.is_string()) {
                const auto k = val.get<std::string>();
                if (k != "const") throw InvalidArgument("profile: tau '" + k + "' needs an object form");
                continue;
            }
            for (const auto& [tk, tv] : val.items()) {
                if (tk == "kind") {
                    const auto k = tv.get<std::string>();
                    if (k == "const")
                        h.tau.kind = Tau::Kind::constant;
                    else if (k == "log_power")
                        h.tau.kind = Tau::Kind::log_power;
                    else if (k == "iterated_log")
                        h.tau.kind = Tau::Kind::iterated_log;
                    else if (k == "power")
                        h.tau.kind = Tau::Kind::power;
                    else
                        throw InvalidArgument("profile: unknown tau kind '" + k + "' (const, log_power, iterated_log, power)");
                } else if (tk == "nu") {
                    h.tau.power = tv.get<double>();
                } else if (tk == "scale") {
                    h.tau.scale = tv.get<double>();
                } else {
                    throw InvalidArgument("profile: unknown tau key '" + tk + "'");
                }
            }
        } else {
            throw InvalidArgument("profile: unknown key '" + key + "'");
        }
    }
    check_profile(h);
    return h;
}

}  // namespace entlab
