#include "entlab/certificate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace entlab {

double budget_constant(double eps) {
    const double r = 1.0 / (1.0 - std::exp2(-eps));
    return r * r + r;
}

LayerRule layer_rule_for(const WeightScheme& scheme) {
    switch (scheme.kind) {
        case WeightScheme::Kind::power_critical:
            return LayerRule::linear;
        case WeightScheme::Kind::log_critical:
            return LayerRule::doubly_exponential;
        case WeightScheme::Kind::explicit_values:
            break;
    }
    throw InvalidArgument("certificate: explicit weight arrays carry no layer rule");
}

CriticalParams critical_params(const WeightScheme& scheme, const HProfile& h, double p, double q, double nu) {
    CriticalParams c;
    c.p = p;
    c.q = q;
    c.theta = h.theta;
    c.gamma = h.gamma;
    c.kappa = scheme.kappa;
    c.m_star = scheme.m_star;
    c.nu = nu;
    if (scheme.kind == WeightScheme::Kind::power_critical) {
        c.alpha_u = scheme.alpha_u;
        c.alpha_w = scheme.alpha_w;
    } else if (scheme.kind == WeightScheme::Kind::log_critical) {
        c.lambda_u = scheme.lambda_u;
        c.lambda_w = scheme.lambda_w;
    }
    return c;
}

namespace {

long ceil_budget(long n, double exponent) {
    return static_cast<long>(std::ceil(static_cast<double>(n) * std::exp2(-exponent) - 1e-12));
}

}  // namespace

Certificate entropy_certificate(const Tree& tree, const WeightScheme& scheme, const HProfile& h, long n,
                                const CertificateOptions& opt) {
    if (n < 2) throw InvalidArgument("certificate: n must be >= 2");
    if (!(opt.eps > 0.0)) throw InvalidArgument("certificate: eps must be positive");
    const auto report = validate_critical(critical_params(scheme, h, opt.p, opt.q, opt.nu));
    if (!report.valid()) {
        std::string failed;
        for (const auto& c : report.conditions)
            if (!c.ok) failed += (failed.empty() ? "" : "; ") + c.name + " (" + c.detail + ")";
        throw InvalidArgument("certificate: parameters are " + to_string(report.label) + ": " + failed);
    }

    Certificate cert;
    cert.rule = layer_rule_for(scheme);
    const auto layering = Layering::build(tree, cert.rule, scheme.m_star, opt.j_min);
    cert.schedule = schedule_for_profile(h, cert.rule, h.c3, n, opt.nu);
    cert.t0 = layering.t0();
    cert.max_layer = layering.max_layer();
    cert.truncation_depth = tree.max_depth();
    cert.budget_constant = budget_constant(opt.eps);
    const int ts = cert.schedule.t_star, tss = cert.schedule.t_star_star;
    if (ts < cert.t0)
        throw InvalidArgument("certificate: n = " + std::to_string(n) + " is too small (t_*(n) = " +
                              std::to_string(ts) + " < t0 = " + std::to_string(cert.t0) + ")");

    const Weights wt = make_weights(scheme, tree, opt.j_min);
    auto restricted_u = [&](auto&& keep) {
        std::vector<double> u(tree.size(), 0.0);
        for (std::size_t v = 0; v < tree.size(); ++v)
            if (keep(layering.layer_of(static_cast<Vertex>(v)))) u[v] = wt.u[v];
        return u;
    };

    std::vector<BoundExpr> terms;
    auto add_layer = [&](int t, const std::string& role, long k) {
        const std::size_t dim = layering.layer_size(t);
        const auto u = restricted_u([t](int s) { return s == t; });
        CertificateLayer L;
        L.t = t;
        L.role = role;
        L.dim = dim;
        L.k = k;
        L.norm = norm_upper_bound(tree, u, wt.w, opt.q, opt.q);
        L.schuett = schuett(static_cast<long>(dim), k, opt.p, opt.q);
        L.value = L.norm * L.schuett;
        cert.layers.push_back(L);
        terms.push_back(BoundExpr::scale(L.norm, BoundExpr::schuett(static_cast<long>(dim), k, opt.p, opt.q),
                                         role + " layer " + std::to_string(t)));
        cert.budget_sum += k - 1;
    };

    if (cert.max_layer == cert.t0) {
        cert.budgets.push_back({cert.t0, -1, n});
        add_layer(cert.t0, "single", n);
    } else {
        for (int t = cert.t0; t <= cert.max_layer && t < tss; ++t) {
            if (layering.layer_size(t) == 0) continue;
            if (t < ts) {
                const long k = ceil_budget(n, opt.eps * (ts - t));
                cert.budgets.push_back({t, -1, k});
                add_layer(t, "head", k);
            } else {
                const long nt = std::max(1L, ceil_budget(n, static_cast<double>(t)));
                const int lmax = static_cast<int>(std::bit_width(static_cast<unsigned long>(nt))) - 1;
                long k2 = 1;
                for (int l = 0; l <= lmax; ++l) {
                    const long k = ceil_budget(n, opt.eps * (t - ts + l));
                    cert.budgets.push_back({t, l, k});
                    k2 += k - 1;
                }
                add_layer(t, "middle", k2);
            }
        }
        if (cert.max_layer >= tss) {
            const auto u = restricted_u([tss](int s) { return s >= tss; });
            CertificateLayer L;
            L.t = tss;
            L.role = "tail";
            for (int t = tss; t <= cert.max_layer; ++t) L.dim += layering.layer_size(t);
            L.norm = norm_upper_bound(tree, u, wt.w, opt.p, opt.q);
            L.value = L.norm;
            cert.layers.push_back(L);
            cert.budgets.push_back({tss, -1, 1});
            terms.push_back(BoundExpr::norm(L.norm, "tail from layer " + std::to_string(tss)));

            if (scheme.kind == WeightScheme::Kind::power_critical) {
                int d0 = 0;
                while (d0 <= tree.max_depth() && layering.layer_of(tree.level(d0).front()) < tss) ++d0;
                const auto sizes = tree.level_sizes();
                const std::vector<std::size_t> profile(sizes.begin() + d0, sizes.end());
                const long j = opt.j_min + d0;
                if (j >= 1 && !hardy_conditions(scheme, h, opt.p, opt.q))
                    cert.tail_hardy = hardy_bound(profile, scheme, h, opt.p, opt.q, j);
            }
        }
    }

    cert.expr = BoundExpr::sum(std::move(terms), "certificate");
    cert.estimate = cert.expr.evaluate();
    cert.estimate.method = "certificate";
    if (cert.estimate.k != 1 + cert.budget_sum)
        throw Error("certificate: index bookkeeping mismatch (" + std::to_string(cert.estimate.k) + " vs " +
                    std::to_string(1 + cert.budget_sum) + ")");
    return cert;
}

nlohmann::json Certificate::to_json() const {
    nlohmann::json j;
    j["K"] = estimate.k;
    j["B"] = estimate.value;
    j["kind"] = entlab::to_string(estimate.kind);
    j["rule"] = rule == LayerRule::linear ? "linear" : "doubly_exponential";
    j["t0"] = t0;
    j["max_layer"] = max_layer;
    j["truncation_depth"] = truncation_depth;
    j["t_star"] = schedule.t_star;
    j["t_star_star"] = schedule.t_star_star;
    j["budget_sum"] = budget_sum;
    j["budget_constant"] = budget_constant;
    j["budgets"] = nlohmann::json::array();
    for (const auto& b : budgets) j["budgets"].push_back({{"t", b.t}, {"l", b.l}, {"k", b.k}});
    j["layers"] = nlohmann::json::array();
    for (const auto& L : layers)
        j["layers"].push_back({{"t", L.t}, {"role", L.role}, {"dim", L.dim}, {"k", L.k}, {"norm", L.norm},
                               {"schuett", L.schuett}, {"value", L.value}});
    if (tail_hardy) j["tail_hardy"] = *tail_hardy;
    j["expr"] = expr.to_json();
    return j;
}

}  // namespace entlab
