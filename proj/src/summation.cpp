#include "entlab/summation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace entlab {

WeightScheme WeightScheme::power(double kappa, int m_star, double alpha_u, double alpha_w) {
    WeightScheme s;
    s.kind = Kind::power_critical;
    s.kappa = kappa;
    s.m_star = m_star;
    s.alpha_u = alpha_u;
    s.alpha_w = alpha_w;
    return s;
}

WeightScheme WeightScheme::log(double kappa, int m_star, double alpha, double lambda_u, double lambda_w) {
    WeightScheme s;
    s.kind = Kind::log_critical;
    s.kappa = kappa;
    s.m_star = m_star;
    s.alpha = alpha;
    s.lambda_u = lambda_u;
    s.lambda_w = lambda_w;
    return s;
}

WeightScheme WeightScheme::explicit_arrays(std::vector<double> u, std::vector<double> w) {
    if (u.size() != w.size()) throw InvalidArgument("weights: explicit u and w differ in length");
    WeightScheme s;
    s.kind = Kind::explicit_values;
    s.u_values = std::move(u);
    s.w_values = std::move(w);
    return s;
}

namespace {

double log_factor(int m_star, long j) {
    return std::max(1.0, std::log2(static_cast<double>(m_star) * static_cast<double>(j) + 1.0));
}

void check_depth(const WeightScheme& s, long j) {
    if (j < 0) throw InvalidArgument("weights: negative depth");
    if (s.kind != WeightScheme::Kind::explicit_values && s.m_star < 1)
        throw InvalidArgument("weights: m_star must be positive");
    if (s.kind == WeightScheme::Kind::explicit_values && static_cast<std::size_t>(j) >= s.u_values.size())
        throw InvalidArgument("weights: depth " + std::to_string(j) + " beyond explicit arrays");
}

double checked(double v, const char* which, long j) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw InvalidArgument(std::string("weights: ") + which + " at depth " + std::to_string(j) +
                              " is not positive and finite");
    return v;
}

}  // namespace

double WeightScheme::u(long j) const {
    check_depth(*this, j);
    const double mj = static_cast<double>(m_star) * static_cast<double>(j);
    double v = 0.0;
    switch (kind) {
        case Kind::power_critical:
            v = std::exp2(kappa * mj) * std::pow(mj + 1.0, -alpha_u);
            break;
        case Kind::log_critical:
            v = std::exp2(kappa * mj) * std::pow(mj + 1.0, alpha) * std::pow(log_factor(m_star, j), -lambda_u);
            break;
        case Kind::explicit_values:
            v = u_values[static_cast<std::size_t>(j)];
            break;
    }
    return checked(v, "u", j);
}

double WeightScheme::w(long j) const {
    check_depth(*this, j);
    const double mj = static_cast<double>(m_star) * static_cast<double>(j);
    double v = 0.0;
    switch (kind) {
        case Kind::power_critical:
            v = std::exp2(-kappa * mj) * std::pow(mj + 1.0, -alpha_w);
            break;
        case Kind::log_critical:
            v = std::exp2(-kappa * mj) * std::pow(mj + 1.0, -alpha) * std::pow(log_factor(m_star, j), -lambda_w);
            break;
        case Kind::explicit_values:
            v = w_values[static_cast<std::size_t>(j)];
            break;
    }
    return checked(v, "w", j);
}

Weights make_weights(const WeightScheme& scheme, int depth, int j_min) {
    if (depth < 0) throw InvalidArgument("make_weights: negative depth");
    if (j_min < 0) throw InvalidArgument("make_weights: negative j_min");
    Weights out;
    out.u.resize(static_cast<std::size_t>(depth) + 1);
    out.w.resize(static_cast<std::size_t>(depth) + 1);
    for (int d = 0; d <= depth; ++d) {
        out.u[static_cast<std::size_t>(d)] = scheme.u(j_min + d);
        out.w[static_cast<std::size_t>(d)] = scheme.w(j_min + d);
    }
    return out;
}

Weights make_weights(const WeightScheme& scheme, const Tree& tree, int j_min) {
    const Weights per_depth = make_weights(scheme, tree.max_depth(), j_min);
    Weights out;
    out.u.resize(tree.size());
    out.w.resize(tree.size());
    for (std::size_t v = 0; v < tree.size(); ++v) {
        const auto d = static_cast<std::size_t>(tree.depths()[v]);
        out.u[v] = per_depth.u[d];
        out.w[v] = per_depth.w[d];
    }
    return out;
}

namespace {

void check_dims(const Tree& tree, std::span<const double> u, std::span<const double> w, std::span<const double> f,
                const char* what) {
    if (u.size() != tree.size() || w.size() != tree.size() || f.size() != tree.size())
        throw InvalidArgument(std::string(what) + ": dimension mismatch with tree of " +
                              std::to_string(tree.size()) + " vertices");
}

}  // namespace

std::vector<double> apply(const Tree& tree, std::span<const double> u, std::span<const double> w,
                          std::span<const double> f) {
    check_dims(tree, u, w, f, "apply");
    std::vector<double> prefix(tree.size());
    std::vector<double> g(tree.size());
    for (Vertex v : tree.bfs_order()) {
        const auto i = static_cast<std::size_t>(v);
        const double above = v == tree.root() ? 0.0 : prefix[static_cast<std::size_t>(tree.parent(v))];
        prefix[i] = above + u[i] * f[i];
        g[i] = w[i] * prefix[i];
    }
    return g;
}

std::vector<double> apply_transpose(const Tree& tree, std::span<const double> u, std::span<const double> w,
                                    std::span<const double> y) {
    check_dims(tree, u, w, y, "apply_transpose");
    std::vector<double> sub(tree.size());
    const auto order = tree.bfs_order();
    for (std::size_t k = order.size(); k-- > 0;) {
        const auto i = static_cast<std::size_t>(order[k]);
        sub[i] += w[i] * y[i];
        if (order[k] != tree.root()) sub[static_cast<std::size_t>(tree.parent(order[k]))] += sub[i];
    }
    for (std::size_t i = 0; i < sub.size(); ++i) sub[i] *= u[i];
    return sub;
}

double lp_norm(std::span<const double> x, double p) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    if (m == 0.0) return 0.0;
    double s = 0.0;
    for (double v : x) s += std::pow(std::abs(v) / m, p);
    return m * std::pow(s, 1.0 / p);
}

namespace {

void check_exponents(double p, double q) {
    if (!(p > 1.0) || !std::isfinite(p) || !(q > 1.0) || !std::isfinite(q))
        throw InvalidArgument("norm: need 1 < p, q < infinity");
    if (p > q) throw InvalidArgument("norm: p > q is not supported");
}

double holder_bound(const Tree& tree, std::span<const double> u, std::span<const double> w, double p, double q) {
    const double pp = p / (p - 1.0);
    std::vector<double> acc(tree.size());
    double s = 0.0;
    for (Vertex v : tree.bfs_order()) {
        const auto i = static_cast<std::size_t>(v);
        const double above = v == tree.root() ? 0.0 : acc[static_cast<std::size_t>(tree.parent(v))];
        acc[i] = above + std::pow(u[i], pp);
        s += std::pow(w[i] * std::pow(acc[i], 1.0 / pp), q);
    }
    return std::pow(s, 1.0 / q);
}

// ||S||_{p->q} <= ||S||_{p->p} <= ||S||_{1->1}^{1/p} ||S||_{inf->inf}^{1/p'}.
double schur_bound(const Tree& tree, std::span<const double> u, std::span<const double> w, double p) {
    std::vector<double> prefix(tree.size()), sub(tree.size());
    double row = 0.0;
    for (Vertex v : tree.bfs_order()) {
        const auto i = static_cast<std::size_t>(v);
        const double above = v == tree.root() ? 0.0 : prefix[static_cast<std::size_t>(tree.parent(v))];
        prefix[i] = above + u[i];
        row = std::max(row, w[i] * prefix[i]);
    }
    const auto order = tree.bfs_order();
    for (std::size_t k = order.size(); k-- > 0;) {
        const auto i = static_cast<std::size_t>(order[k]);
        sub[i] += w[i];
        if (order[k] != tree.root()) sub[static_cast<std::size_t>(tree.parent(order[k]))] += sub[i];
    }
    double col = 0.0;
    for (std::size_t i = 0; i < sub.size(); ++i) col = std::max(col, u[i] * sub[i]);
    if (col == 0.0 || row == 0.0) return 0.0;
    return std::pow(col, 1.0 / p) * std::pow(row, 1.0 - 1.0 / p);
}

struct Ascent {
    double ratio = 0.0;
    std::vector<double> x;
    int iterations = 0;
};

// x <- psi_{p'}(S^T psi_q(S x)), normalised in l_p.
Ascent boyd_ascent(const Tree& tree, std::span<const double> u, std::span<const double> w, double p, double q,
                   std::vector<double> x, double tol, int max_iter) {
    const double pp = p / (p - 1.0);
    Ascent best;
    double nx = lp_norm(x, p);
    if (nx == 0.0) return best;
    for (double& v : x) v /= nx;
    double prev = -1.0;
    std::vector<double> yq(x.size());
    for (int it = 0; it < max_iter; ++it) {
        const auto y = apply(tree, u, w, x);
        const double r = lp_norm(y, q);
        ++best.iterations;
        if (r > best.ratio) {
            best.ratio = r;
            best.x = x;
        }
        if (r == 0.0) break;
        if (prev >= 0.0 && std::abs(r - prev) <= tol * r) break;
        prev = r;
        const double ym = *std::max_element(y.begin(), y.end());
        for (std::size_t i = 0; i < y.size(); ++i) yq[i] = std::pow(y[i] / ym, q - 1.0);
        auto z = apply_transpose(tree, u, w, yq);
        const double zm = *std::max_element(z.begin(), z.end());
        if (!(zm > 0.0)) break;
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = std::pow(z[i] / zm, pp - 1.0);
        nx = lp_norm(z, p);
        if (!(nx > 0.0)) break;
        for (std::size_t i = 0; i < z.size(); ++i) x[i] = z[i] / nx;
    }
    return best;
}

// Sup of ||S g||_q over the lattice g_i = (a_i/N)^{1/p}, sum a = N, inflated by 1/(1 - delta).
std::optional<double> grid_bound(const Tree& tree, std::span<const double> u, std::span<const double> w, double p,
                                 double q, std::size_t budget) {
    const std::size_t d = tree.size();
    // Largest N with C(N+d-1, d-1) <= budget.
    auto count = [d](std::size_t n) {
        double c = 1.0;
        for (std::size_t i = 1; i < d; ++i) c = c * static_cast<double>(n + i) / static_cast<double>(i);
        return c;
    };
    std::size_t n = 1;
    while (n < 1000000 && count(n + 1) <= static_cast<double>(budget)) ++n;
    const double delta = std::pow(static_cast<double>(d) / static_cast<double>(n), 1.0 / p);
    if (d == 1) {
        std::vector<double> g{1.0};
        return lp_norm(apply(tree, u, w, g), q);
    }
    if (!(delta < 1.0)) return std::nullopt;

    std::vector<std::size_t> a(d, 0);
    std::vector<double> g(d);
    double best = 0.0;
    // Enumerate compositions of n into d parts.
    auto visit = [&](auto&& self, std::size_t i, std::size_t left) -> void {
        if (i + 1 == d) {
            a[i] = left;
            for (std::size_t k = 0; k < d; ++k)
                g[k] = std::pow(static_cast<double>(a[k]) / static_cast<double>(n), 1.0 / p);
            best = std::max(best, lp_norm(apply(tree, u, w, g), q));
            return;
        }
        for (std::size_t v = 0; v <= left; ++v) {
            a[i] = v;
            self(self, i + 1, left - v);
        }
    };
    visit(visit, 0, n);
    return best / (1.0 - delta);
}

NormEstimate norm_impl(const Tree& tree, std::span<const double> u_in, std::span<const double> w_in, double p,
                       double q, const NormConfig& cfg) {
    check_exponents(p, q);
    if (cfg.restarts < 0 || cfg.max_iter < 1 || !(cfg.tol > 0.0)) throw InvalidArgument("norm: bad configuration");

    // S only sees products u(xi') w(xi); moving a power of two from u to w keeps
    // the operator and avoids overflow in the powered sums.
    double umax = 0.0;
    for (double v : u_in) umax = std::max(umax, v);
    const int shift = umax > 0.0 ? std::ilogb(umax) : 0;
    std::vector<double> u(u_in.begin(), u_in.end()), w(w_in.begin(), w_in.end());
    for (double& v : u) v = std::ldexp(v, -shift);
    for (double& v : w) v = std::ldexp(v, shift);

    NormEstimate est;
    est.holder_upper = holder_bound(tree, u, w, p, q);
    est.schur_upper = schur_bound(tree, u, w, p);
    est.upper = std::min(est.holder_upper, est.schur_upper);
    if (tree.size() <= cfg.grid_vertex_limit) {
        est.grid_upper = grid_bound(tree, u, w, p, q, cfg.grid_budget);
        if (est.grid_upper) est.upper = std::min(est.upper, *est.grid_upper);
    }

    const std::size_t runs = static_cast<std::size_t>(cfg.restarts) + 1;
    std::vector<Ascent> results(runs);
    parallel_for(
        runs,
        [&](std::size_t b, std::size_t e) {
            for (std::size_t r = b; r < e; ++r) {
                std::vector<double> x0(tree.size(), 1.0);
                if (r > 0) {
                    auto rng = stream_rng(cfg.seed, r);
                    std::uniform_real_distribution<double> unif(0.0, 1.0);
                    for (double& v : x0) v = unif(rng) + 1e-3;
                }
                results[r] = boyd_ascent(tree, u, w, p, q, std::move(x0), cfg.tol, cfg.max_iter);
            }
        },
        1);
    std::size_t pick = 0;
    for (std::size_t r = 1; r < runs; ++r)
        if (results[r].ratio > results[pick].ratio) pick = r;
    for (const auto& r : results) est.iterations += r.iterations;
    est.witness = std::move(results[pick].x);
    if (est.witness.empty()) {
        est.witness.assign(tree.size(), 0.0);
        est.witness[static_cast<std::size_t>(tree.root())] = 1.0;
    }
    // Report the witness's exact ratio with the original weights.
    const double nwp = lp_norm(est.witness, p);
    est.lower = nwp > 0.0 ? lp_norm(apply(tree, u_in, w_in, est.witness), q) / nwp : 0.0;
    if (est.upper < est.lower) est.upper = est.lower;  // only reachable through rounding
    return est;
}

void check_positive(std::span<const double> u, std::span<const double> w, bool allow_zero) {
    for (std::span<const double> s : {u, w})
        for (double v : s) {
            if (!std::isfinite(v) || v < 0.0 || (!allow_zero && v == 0.0))
                throw InvalidArgument(allow_zero ? "norm: weights must be finite and nonnegative"
                                                 : "norm: weights must be finite and positive");
        }
}

}  // namespace

NormEstimate norm_oracle(const Tree& tree, std::span<const double> u, std::span<const double> w, double p, double q,
                         const NormConfig& cfg) {
    std::vector<double> zero(tree.size(), 0.0);
    check_dims(tree, u, w, zero, "norm_oracle");
    check_positive(u, w, false);
    return norm_impl(tree, u, w, p, q, cfg);
}

NormEstimate norm_oracle_nonnegative(const Tree& tree, std::span<const double> u, std::span<const double> w,
                                     double p, double q, const NormConfig& cfg) {
    std::vector<double> zero(tree.size(), 0.0);
    check_dims(tree, u, w, zero, "norm_oracle");
    check_positive(u, w, true);
    return norm_impl(tree, u, w, p, q, cfg);
}

double norm_upper_bound(const Tree& tree, std::span<const double> u, std::span<const double> w, double p, double q) {
    check_exponents(p, q);
    std::vector<double> zero(tree.size(), 0.0);
    check_dims(tree, u, w, zero, "norm_upper_bound");
    check_positive(u, w, true);
    double umax = 0.0;
    for (double v : u) umax = std::max(umax, v);
    const int shift = umax > 0.0 ? std::ilogb(umax) : 0;
    std::vector<double> us(u.begin(), u.end()), ws(w.begin(), w.end());
    for (double& v : us) v = std::ldexp(v, -shift);
    for (double& v : ws) v = std::ldexp(v, shift);
    return std::min(holder_bound(tree, us, ws, p, q), schur_bound(tree, us, ws, p));
}

std::optional<std::string> hardy_conditions(const WeightScheme& scheme, const HProfile& h, double p, double q) {
    constexpr double tol = 1e-12;
    if (!(p > 1.0) || !(q > 1.0) || !std::isfinite(p) || !std::isfinite(q) || p > q)
        return "exponents: need 1 < p <= q < infinity";
    if (scheme.kind != WeightScheme::Kind::power_critical)
        return "scheme: the Hardy bound is implemented for the power family only";
    if (scheme.m_star < 1) return "scheme: m_star must be positive";
    const double crit = h.theta / q;
    if (scheme.kappa < crit - tol) return "condition 1: kappa >= theta/q fails";
    const bool critical = std::abs(scheme.kappa - crit) <= tol;
    const double sum = scheme.alpha_u + scheme.alpha_w;
    if (critical) {
        if (!(scheme.alpha_w > (1.0 - h.gamma) / q + tol)) return "condition 1: alpha_w > (1-gamma)/q fails";
        if (std::abs(sum - 1.0 / p) > tol) return "condition 2: alpha_u + alpha_w = 1/p fails";
    } else {
        if (std::abs(sum - (1.0 / p - 1.0 / q)) > tol) return "condition 2: alpha_u + alpha_w = 1/p - 1/q fails";
    }
    return std::nullopt;
}

double hardy_bound(std::span<const std::size_t> depth_profile, const WeightScheme& scheme, const HProfile& h,
                   double p, double q, long j) {
    if (auto bad = hardy_conditions(scheme, h, p, q)) throw InvalidArgument("hardy_bound: " + *bad);
    if (j < 1) throw InvalidArgument("hardy_bound: start depth must be at least 1");
    for (std::size_t n : depth_profile)
        if (n == 0) throw InvalidArgument("hardy_bound: depth profile has an empty level");

    constexpr std::size_t cap = 1000000;
    constexpr double rel = 1e-12;
    const double m = static_cast<double>(scheme.m_star);
    const bool critical = std::abs(scheme.kappa - h.theta / q) <= 1e-12;
    const std::size_t span_len = depth_profile.empty() ? cap : depth_profile.size();

    if (!critical) {
        const double e = scheme.alpha_u + scheme.alpha_w;
        double best = 0.0;
        for (std::size_t d = 0; d < span_len; ++d) {
            const double s = static_cast<double>(j) + static_cast<double>(d);
            const double v = std::pow(m * s, -e);
            best = std::max(best, v);
            if (e >= 0.0) break;  // nonincreasing in s
        }
        return best;
    }

    const double pp = p / (p - 1.0);
    // Terms c_i = (m i)^{-alpha_w q} g_i with g_i the relative layer growth
    // divided by 2^{theta m (i - j)}; B(s) = sum_{i >= s} c_i / g_s.
    auto growth = [&](std::size_t d) {
        const double i = static_cast<double>(j) + static_cast<double>(d);
        if (!depth_profile.empty())
            return static_cast<double>(depth_profile[d]) /
                   static_cast<double>(depth_profile[0]) * std::exp2(-h.theta * m * static_cast<double>(d));
        return 1.0 / (std::pow(i, h.gamma) * h.tau(m * i));
    };
    std::vector<double> c, g;
    double running = 0.0;
    for (std::size_t d = 0; d < span_len; ++d) {
        const double i = static_cast<double>(j) + static_cast<double>(d);
        const double gi = growth(d);
        const double ci = std::pow(m * i, -scheme.alpha_w * q) * gi;
        g.push_back(gi);
        c.push_back(ci);
        running += ci;
        if (depth_profile.empty() && ci < rel * running) break;
    }
    std::vector<double> tail(c.size() + 1, 0.0);
    for (std::size_t d = c.size(); d-- > 0;) tail[d] = tail[d + 1] + c[d];

    double best = 0.0;
    double a = 0.0;
    const double decay = std::exp2(-pp * scheme.kappa * m);
    for (std::size_t d = 0; d < c.size(); ++d) {
        const double s = static_cast<double>(j) + static_cast<double>(d);
        a = a * decay + std::pow(m * s, -pp * scheme.alpha_u);
        const double b = tail[d] / g[d];
        best = std::max(best, std::pow(a, 1.0 / pp) * std::pow(b, 1.0 / q));
    }
    return best;
}

}  // namespace entlab
