#include <doctest.h>

#include <cmath>

#include "entlab/certificate.hpp"
#include "oracles.hpp"

using namespace entlab;

namespace {

HProfile binary_profile() {
    HProfile h;
    h.theta = 1.0;
    h.c3 = 4.0;
    return h;
}

WeightScheme power_pack() { return WeightScheme::power(0.5, 1, 0.125, 0.125); }

long oracle_budget(const Certificate& c) {
    long s = 0;
    for (const auto& b : c.budgets) s += b.k - 1;
    return s;
}

}  // namespace

TEST_CASE("budget constant") {
    CHECK(budget_constant(1.0) == doctest::Approx(6.0));
    const double r = 1.0 / (1.0 - std::exp2(-0.1));
    CHECK(budget_constant(0.1) == doctest::Approx(r * r + r));
    CHECK(budget_constant(0.1) > 237.0);
    CHECK(budget_constant(0.1) < 239.0);
}

TEST_CASE("a tree inside one layer takes the whole budget") {
    const auto t = Tree::from_parents(std::vector<Vertex>{0});
    for (long n : {2L, 5L, 9L}) {
        const auto c = entropy_certificate(t, power_pack(), binary_profile(), n);
        CHECK(c.estimate.k == n);
        CHECK(c.layers.size() == 1);
        CHECK(c.layers[0].role == "single");
        // the one-vertex operator is multiplication by u_0 w_0 = 1
        CHECK(c.estimate.value == doctest::Approx(std::pow(std::log(2.0), 0.25) * std::exp2(-(n - 1.0))));
        CHECK(c.estimate.kind == EstimateKind::certified_upper);
    }
}

TEST_CASE("layers and budgets on the binary tree") {
    const auto g = generate_hset_tree(binary_profile(), 1, 8, 0);
    const auto c = entropy_certificate(g.tree, power_pack(), binary_profile(), 8);
    CHECK(c.rule == LayerRule::linear);
    CHECK(c.schedule.t_star == 2);
    CHECK(c.schedule.t_star_star == 3);
    CHECK(c.t0 == 0);
    CHECK(c.max_layer == 4);
    // head layers 0 and 1, middle layer 2, tail from 3
    REQUIRE(c.layers.size() == 4);
    CHECK(c.layers[0].role == "head");
    CHECK(c.layers[0].k == static_cast<long>(std::ceil(8 * std::exp2(-0.2) - 1e-12)));
    CHECK(c.layers[1].k == static_cast<long>(std::ceil(8 * std::exp2(-0.1) - 1e-12)));
    CHECK(c.layers[2].role == "middle");
    CHECK(c.layers[2].dim == 4 + 8);
    CHECK(c.layers[3].role == "tail");
    CHECK(c.layers[3].dim == g.tree.size() - 1 - 2 - 12);
    CHECK(c.layers[3].k == 1);
    // n_2 = 2, so l = 0, 1
    long mid = 1;
    for (int l = 0; l <= 1; ++l) mid += static_cast<long>(std::ceil(8 * std::exp2(-0.1 * l) - 1e-12)) - 1;
    CHECK(c.layers[2].k == mid);
    double sum = 0.0;
    for (const auto& L : c.layers) sum += L.value;
    CHECK(c.estimate.value == doctest::Approx(sum).epsilon(1e-14));
    CHECK(c.tail_hardy.has_value());
}

TEST_CASE("budget identity and index bookkeeping") {
    const auto g = generate_hset_tree(binary_profile(), 1, 12, 0);
    for (long n = 2; n <= 512; n = n * 3 / 2 + 1) {
        for (double eps : {0.1, 0.5}) {
            CertificateOptions opt;
            opt.eps = eps;
            const auto c = entropy_certificate(g.tree, power_pack(), binary_profile(), n, opt);
            CHECK(c.budget_sum == oracle_budget(c));
            CHECK(c.estimate.k == 1 + c.budget_sum);
            CHECK(c.estimate.k >= n);
            CHECK(static_cast<double>(c.budget_sum) <= budget_constant(eps) * static_cast<double>(n));
            CHECK(c.expr.evaluate().k == c.estimate.k);
        }
    }
}

TEST_CASE("certificate dominates sampled packings") {
    const auto g = generate_hset_tree(binary_profile(), 1, 6, 0);
    const auto scheme = power_pack();
    const auto wt = make_weights(scheme, g.tree);
    const auto op = LinearOperator::from_tree(g.tree, wt.u, wt.w);
    int compared = 0;
    for (long n = 2; n <= 12; ++n) {
        const auto c = entropy_certificate(g.tree, scheme, binary_profile(), n);
        if (c.estimate.k > 20) continue;
        const double lo = packing_lower(op, 2, 4, c.estimate.k, 4096, 1, Candidates::with_basis).value;
        CHECK(lo <= c.estimate.value);
        ++compared;
    }
    CHECK(compared > 0);
}

TEST_CASE("log family uses doubly exponential layers") {
    HProfile h;
    h.theta = 0.0;
    h.gamma = -1.0;
    h.c3 = 4.0;
    const auto g = generate_hset_tree(h, 1, 40, 0);
    const auto scheme = WeightScheme::log(1.0, 1, 0.0, 0.125, 0.125);
    const auto c = entropy_certificate(g.tree, scheme, h, 16);
    CHECK(c.rule == LayerRule::doubly_exponential);
    CHECK(c.estimate.k == 1 + oracle_budget(c));
    CHECK_FALSE(c.tail_hardy.has_value());
    CHECK(std::isfinite(c.estimate.value));
}

TEST_CASE("certificate errors") {
    const auto g = generate_hset_tree(binary_profile(), 1, 5, 0);
    CHECK_THROWS_AS(entropy_certificate(g.tree, power_pack(), binary_profile(), 1), InvalidArgument);
    CertificateOptions bad;
    bad.eps = 0.0;
    CHECK_THROWS_AS(entropy_certificate(g.tree, power_pack(), binary_profile(), 4, bad), InvalidArgument);
    // off the sum rule
    CHECK_THROWS_AS(entropy_certificate(g.tree, WeightScheme::power(0.5, 1, 0.3, 0.125), binary_profile(), 4),
                    InvalidArgument);
    CHECK_THROWS_AS(layer_rule_for(WeightScheme::explicit_arrays({1.0}, {1.0})), InvalidArgument);
}

TEST_CASE("certificate JSON") {
    const auto g = generate_hset_tree(binary_profile(), 1, 8, 0);
    const auto c = entropy_certificate(g.tree, power_pack(), binary_profile(), 8);
    const auto j = c.to_json();
    CHECK(j["K"] == c.estimate.k);
    CHECK(j["rule"] == "linear");
    CHECK(j["layers"].size() == c.layers.size());
    CHECK(j["expr"]["node"] == "sum");
    CHECK(j["expr"]["children"].size() == c.layers.size());
}

TEST_CASE("bound expressions") {
    const auto e = BoundExpr::sum({BoundExpr::scale(2.0, BoundExpr::schuett(8, 8, 1, 2)), BoundExpr::norm(0.5)});
    const auto v = e.evaluate();
    CHECK(v.k == 8);
    CHECK(v.value == doctest::Approx(2.0 * std::sqrt(std::log(2.0) / 8.0) + 0.5));
    CHECK(v.kind == EstimateKind::certified_upper);

    const auto l = BoundExpr::lifshits(BoundExpr::schuett(4, 5, 1, 2), 8, 0.01);
    CHECK(l.evaluate().k == 5 + 3 + 1);
    CHECK(l.evaluate().value == doctest::Approx(schuett(4, 5, 1, 2) + 0.01));

    EntropyEstimate h{3, 0.2, EstimateKind::heuristic, "guess", {}, 0.0};
    CHECK(BoundExpr::lifshits(BoundExpr::leaf(h), 2, 0.0).evaluate().kind == EstimateKind::heuristic);
    CHECK(BoundExpr::sum({BoundExpr::leaf(h), BoundExpr::norm(1.0)}).evaluate().kind == EstimateKind::heuristic);

    const auto kv = BoundExpr::kuhn(5, 2, 4, LogPhi{1.0, 2.0, 0.25}).evaluate();
    CHECK(kv.value == doctest::Approx(std::pow(std::log(34.0), -0.25)));

    const auto j = e.to_json();
    CHECK(j["node"] == "sum");
    CHECK(j["k"] == 8);
    CHECK(j["children"][0]["node"] == "scale");
    CHECK(j["children"][0]["children"][1]["node"] == "schuett");
    CHECK(j["children"][0]["children"][1]["nu"] == 8);
    CHECK(j["children"][1]["value"] == 0.5);

    CHECK_THROWS_AS(BoundExpr::sum({}), InvalidArgument);
    CHECK_THROWS_AS(BoundExpr::norm(-1.0), InvalidArgument);
    EntropyEstimate lower{1, 0.1, EstimateKind::certified_lower, "packing", {}, 0.0};
    CHECK_THROWS_AS(BoundExpr::sum({BoundExpr::leaf(lower), BoundExpr::norm(1.0)}).evaluate(), InvalidArgument);
}
