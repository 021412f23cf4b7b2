#include <doctest.h>

#include <cmath>
#include <numbers>

#include "entlab/hset.hpp"
#include "oracles.hpp"

using namespace entlab;

namespace {

HProfile profile(double theta, double gamma, Tau tau = Tau::one(), double c3 = 4.0) {
    HProfile h;
    h.theta = theta;
    h.gamma = gamma;
    h.tau = tau;
    h.c3 = c3;
    return h;
}

// |V_l(xi)| by walking parents.
std::vector<std::vector<std::size_t>> brute_census(const std::vector<int>& parent, int max_l) {
    const auto d = oracle::depths(parent);
    std::vector<std::vector<std::size_t>> c(parent.size(), std::vector<std::size_t>(static_cast<std::size_t>(max_l) + 1, 0));
    for (std::size_t v = 0; v < parent.size(); ++v) {
        int x = static_cast<int>(v);
        for (int l = 0; l <= max_l; ++l) {
            ++c[static_cast<std::size_t>(x)][static_cast<std::size_t>(l)];
            if (parent[static_cast<std::size_t>(x)] == x) break;
            x = parent[static_cast<std::size_t>(x)];
        }
    }
    return c;
}

// h(2^{-m j}) / h(2^{-m (j+l)}) written out directly
double target(const HProfile& h, int m, long j, long l) {
    auto H = [&](double x) {  // h(2^{-x})
        const double L = std::log(std::numbers::e + std::exp2(x));
        return std::exp2(-h.theta * x) * std::pow(L, h.gamma) * h.tau(L);
    };
    return H(static_cast<double>(m * j)) / H(static_cast<double>(m * (j + l)));
}

}  // namespace

TEST_CASE("h_eval examples") {
    for (int k : {1, 2, 3}) CHECK(h_eval(profile(k, 0), 0.5) == doctest::Approx(std::pow(0.5, k)).epsilon(1e-14));
    const double koch = std::log(4.0) / std::log(3.0);
    CHECK(h_eval(profile(koch, 0), 1.0 / 3.0) == doctest::Approx(0.25).epsilon(1e-14));
    for (double t : {1.0, 0.5, 1e-9}) CHECK(h_eval(profile(0, 0), t) == 1.0);
    // the shifted log
    const double L = std::log(std::numbers::e + 8.0);
    CHECK(h_eval(profile(0.5, -1, Tau::log_pow(2.0)), 0.125) ==
          doctest::Approx(std::sqrt(0.125) / L * std::pow(std::log(std::numbers::e + L), 2.0)).epsilon(1e-14));
    CHECK_THROWS_AS(h_eval(profile(1, 0), 0.0), InvalidArgument);
    CHECK_THROWS_AS(h_eval(profile(1, 0), 1.5), InvalidArgument);
    CHECK_THROWS_AS(h_eval(profile(-1, 0), 0.5), InvalidArgument);
}

TEST_CASE("branching_target matches the direct quotient") {
    for (const auto& h : {profile(1, 0), profile(0, -1), profile(0.7, -0.5, Tau::log_pow(0.3)),
                          profile(0.2, 0.5, Tau::iterated_log_pow(-1.0))})
        for (int m : {1, 2})
            for (long j : {0L, 1L, 5L, 20L})
                for (long l : {0L, 1L, 3L, 9L})
                    CHECK(branching_target(h, m, j, l) == doctest::Approx(target(h, m, j, l)).epsilon(1e-10));
    // large depths stay finite
    CHECK(std::isfinite(branching_target(profile(0, -1), 1, 5000, 100)));
}

TEST_CASE("theta m = 1 gives the full binary tree") {
    const auto g = generate_hset_tree(profile(1, 0), 1, 6, 3);
    CHECK(g.tree.size() == 127);
    for (std::size_t v = 0; v < g.tree.size(); ++v) {
        const auto c = descendant_census(g.tree, static_cast<Vertex>(v));
        for (std::size_t l = 0; l < c.size(); ++l) CHECK(c[l] == (std::size_t{1} << l));
    }
    CHECK(g.c_hat == doctest::Approx(1.0));
    const auto g2 = generate_hset_tree(profile(0.5, 0), 2, 5, 0);  // theta m = 1 again
    CHECK(g2.tree.size() == 63);
}

TEST_CASE("depth 0 is a single vertex") {
    CHECK(generate_hset_tree(profile(1, 0), 1, 0, 0).tree.size() == 1);
    CHECK(generate_hset_tree(profile(0, -1), 1, 0, 9).tree.size() == 1);
}

TEST_CASE("theta = 0, gamma = -1: layer sizes grow linearly and the census constant is honest") {
    const auto h = profile(0, -1);
    const auto g = generate_hset_tree(h, 1, 120, 5);
    const auto sizes = g.tree.level_sizes();
    for (int d = 10; d <= 120; d += 10) {
        const double ratio = static_cast<double>(sizes[static_cast<std::size_t>(d)]) / d;
        CHECK(ratio > 0.3);
        CHECK(ratio < 1.5);
        const double rel = static_cast<double>(sizes[static_cast<std::size_t>(d)]) / target(h, 1, 0, d);
        CHECK(rel >= 0.5);
        CHECK(rel <= 2.0);
    }
    // independent census on every (xi, l)
    const std::vector<int> parent(g.tree.parents().begin(), g.tree.parents().end());
    const auto census = brute_census(parent, 120);
    const auto depth = oracle::depths(parent);
    double worst = 1.0;
    for (std::size_t v = 0; v < parent.size(); ++v)
        for (int l = 0; depth[v] + l <= 120; ++l) {
            const double tg = target(h, 1, depth[v], l);
            const double c = static_cast<double>(census[v][static_cast<std::size_t>(l)]);
            worst = std::max({worst, c / tg, tg / c});
        }
    CHECK(worst <= h.c3);
    CHECK(g.c_hat == doctest::Approx(worst).epsilon(1e-12));
}

TEST_CASE("layer counts telescope within c_hat squared") {
    const auto g = generate_hset_tree(profile(0.6, -0.5), 1, 14, 2);
    const double c2 = g.c_hat * g.c_hat;
    for (int xi = 0; xi < static_cast<int>(g.tree.size()); xi += 7) {
        const int j = g.tree.depth(xi);
        for (int a = 1; j + a <= 14; ++a)
            for (int b = 1; j + a + b <= 14; ++b) {
                const auto mid = descendants_at_distance(g.tree, xi, a);
                std::size_t mx = 0;
                for (Vertex eta : mid) mx = std::max(mx, descendants_at_distance(g.tree, eta, b).size());
                const double direct = static_cast<double>(descendants_at_distance(g.tree, xi, a + b).size());
                const double prod = static_cast<double>(mid.size()) * static_cast<double>(mx);
                CHECK(direct <= prod);
                CHECK(direct >= prod / c2);
            }
    }
}

TEST_CASE("generator errors and determinism") {
    CHECK_THROWS_AS(generate_hset_tree(profile(0, 1), 1, 5, 0), InvalidArgument);  // shrinking levels
    CHECK_THROWS_AS(generate_hset_tree(profile(0, -1, Tau::one(), 1.0), 1, 100, 0), InvalidArgument);  // c3 too small
    CHECK_THROWS_AS(generate_hset_tree(profile(1, 0), 0, 5, 0), InvalidArgument);
    CHECK_THROWS_AS(generate_hset_tree(profile(1, 0), 1, 30, 0, 0, 1000), ResourceExceeded);
    const auto a = generate_hset_tree(profile(0.4, -0.3), 1, 20, 17);
    const auto b = generate_hset_tree(profile(0.4, -0.3), 1, 20, 17);
    CHECK(a.tree.parents() == b.tree.parents());
}

TEST_CASE("schedule examples") {
    const PsiStar one;
    const auto s16 = make_schedule(1.0, one, 1.0, 16);
    CHECK(s16.t_star == 2);
    CHECK(s16.t_star_star == 4);
    const auto s2 = make_schedule(1.0, one, 1.0, 2);
    CHECK(s2.t_star == 0);
    CHECK(s2.t_star_star == 1);
    CHECK_THROWS_AS(make_schedule(1.0, one, 1.0, 1), InvalidArgument);

    double lo = INFINITY, hi = 0.0;
    for (long n = 2; n <= 1000000; n = n * 3 / 2 + 1) {
        const auto s = make_schedule(1.0, one, 1.0, n);
        const double r = std::ldexp(1.0, s.t_star) / std::log2(static_cast<double>(n));
        lo = std::min(lo, r);
        hi = std::max(hi, r);
        // minimality
        CHECK(s.log2_nu_bar(s.t_star) >= std::log2(static_cast<double>(n)) - 1e-12);
        if (s.t_star > 0) CHECK(s.log2_nu_bar(s.t_star - 1) < std::log2(static_cast<double>(n)));
        CHECK(s.log2_nu_bar(s.t_star_star) >= static_cast<double>(n) - 1e-12);
        if (s.t_star_star > 0) CHECK(s.log2_nu_bar(s.t_star_star - 1) < static_cast<double>(n));
    }
    CHECK(lo >= 0.5);
    CHECK(hi <= 2.0);

    // m_t = ceil(log2 nu_t) with nu_t <= c3 nu_bar_t
    const auto s = make_schedule(1.0, one, 4.0, 100);
    CHECK(s.m_t(3) == 2 + 8);
}

TEST_CASE("schedule with a log factor and from a profile") {
    PsiStar psi;
    psi.log_power = 1.0;  // psi(y) = log2 y
    const auto s = make_schedule(0.5, psi, 1.0, 1000);
    for (int t = 0; t < 8; ++t) {
        const double L = std::ldexp(1.0, t);
        CHECK(s.log2_nu_bar(t) == doctest::Approx(0.5 * L + std::log2(L)));
    }
    const auto lin = schedule_for_profile(profile(1.0, -1.0), LayerRule::linear, 4.0, 64);
    CHECK(lin.gamma_star == 1.0);
    CHECK(lin.psi.log_power == 1.0);
    const auto dexp = schedule_for_profile(profile(0.0, -1.0), LayerRule::doubly_exponential, 4.0, 64, 0.5);
    CHECK(dexp.gamma_star == 2.0);
    CHECK(dexp.psi.log_power == -0.5);
}

TEST_CASE("slowly varying check") {
    for (double eps : {1e-3, 0.1, 1.0}) {
        const auto r = slowly_varying_check(Tau::one(), eps);
        CHECK(r.pass);
        CHECK(r.worst_ratio == doctest::Approx(1.0));
    }
    CHECK(slowly_varying_check(Tau::log_pow(1.0), 0.1).pass);
    CHECK(slowly_varying_check(Tau::iterated_log_pow(2.0), 0.1).pass);
    const auto bad = slowly_varying_check(Tau::pure_power(1.0), 0.1);
    CHECK_FALSE(bad.pass);
    CHECK(bad.worst_ratio > 1e3);
    CHECK_THROWS_AS(slowly_varying_check(Tau::one(), 0.0), InvalidArgument);
}

TEST_CASE("validate_critical examples") {
    CriticalParams pw;
    pw.theta = 1.0;
    pw.kappa = 1.0;
    pw.alpha_u = 0.1;
    pw.alpha_w = 0.15;
    const auto r1 = validate_critical(pw);
    CHECK(r1.label == CriticalLabel::critical_power);
    CHECK(r1.valid());

    CriticalParams lg;
    lg.theta = 0.0;
    lg.gamma = -1.0;
    lg.kappa = 1.0;
    lg.lambda_u = 0.125;
    lg.lambda_w = 0.125;
    CHECK(validate_critical(lg).label == CriticalLabel::critical_log);

    CriticalParams edge = pw;  // kappa = theta/q, alpha_w = (1-gamma)/q exactly
    edge.kappa = 0.25;
    edge.alpha_w = 0.25;
    edge.alpha_u = 0.25;
    const auto r3 = validate_critical(edge);
    CHECK(r3.label == CriticalLabel::invalid);
    bool named = false;
    for (const auto& c : r3.conditions) named |= (!c.ok && c.name.find("alpha_w") != std::string::npos);
    CHECK(named);
    edge.alpha_w = 0.3;
    edge.alpha_u = 0.2;
    CHECK(validate_critical(edge).label == CriticalLabel::critical_power);

    CriticalParams off = pw;
    off.alpha_u = 0.3;
    CHECK(validate_critical(off).label == CriticalLabel::non_critical);
    CriticalParams both = pw;
    both.lambda_u = 0.1;
    both.lambda_w = 0.15;
    CHECK(validate_critical(both).label == CriticalLabel::invalid);
    CriticalParams pos_gamma = lg;
    pos_gamma.gamma = 0.5;
    CHECK(validate_critical(pos_gamma).label == CriticalLabel::invalid);
    CHECK(to_string(CriticalLabel::critical_log) == "critical-log");
}

TEST_CASE("profile JSON") {
    const auto h = profile(0.5, -1.0, Tau::log_pow(0.25), 3.0);
    const auto back = hprofile_from_json(to_json(h));
    CHECK(back.theta == 0.5);
    CHECK(back.gamma == -1.0);
    CHECK(back.tau.kind == Tau::Kind::log_power);
    CHECK(back.tau.power == 0.25);
    CHECK(back.c3 == 3.0);
    CHECK_THROWS_AS(hprofile_from_json(nlohmann::json{{"theta", 1.0}, {"colour", 2}}), InvalidArgument);
    CHECK_THROWS_AS(hprofile_from_json(nlohmann::json{{"tau", {{"kind", "sqrt"}}}}), InvalidArgument);
}
