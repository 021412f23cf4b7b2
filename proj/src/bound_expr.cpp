#include "entlab/bound_expr.hpp"

namespace entlab {

std::string to_string(BoundExpr::Kind kind) {
    switch (kind) {
        case BoundExpr::Kind::sum:
            return "sum";
        case BoundExpr::Kind::scale:
            return "scale";
        case BoundExpr::Kind::lifshits:
            return "lifshits";
        case BoundExpr::Kind::schuett_leaf:
            return "schuett";
        case BoundExpr::Kind::kuhn_leaf:
            return "kuhn";
        case BoundExpr::Kind::estimate_leaf:
            return "estimate";
        case BoundExpr::Kind::norm_const:
            return "norm";
    }
    return "norm";
}

BoundExpr BoundExpr::leaf(EntropyEstimate e, std::string label) {
    BoundExpr b;
    b.kind = Kind::estimate_leaf;
    b.estimate = std::move(e);
    b.label = std::move(label);
    return b;
}

BoundExpr BoundExpr::norm(double value, std::string label) {
    if (!(value >= 0.0)) throw InvalidArgument("bound: norm constant must be >= 0");
    BoundExpr b;
    b.kind = Kind::norm_const;
    b.value = value;
    b.label = std::move(label);
    return b;
}

BoundExpr BoundExpr::schuett(long nu, long k, double p, double q, std::string label) {
    BoundExpr b;
    b.kind = Kind::schuett_leaf;
    b.nu = nu;
    b.k = k;
    b.p = p;
    b.q = q;
    b.label = std::move(label);
    return b;
}

BoundExpr BoundExpr::kuhn(long n, double p, double q, LogPhi phi, std::string label) {
    BoundExpr b;
    b.kind = Kind::kuhn_leaf;
    b.k = n;
    b.p = p;
    b.q = q;
    b.phi = phi;
    b.label = std::move(label);
    return b;
}

BoundExpr BoundExpr::sum(std::vector<BoundExpr> terms, std::string label) {
    if (terms.empty()) throw InvalidArgument("bound: empty sum");
    BoundExpr b;
    b.kind = Kind::sum;
    b.children = std::move(terms);
    b.label = std::move(label);
    return b;
}

BoundExpr BoundExpr::scale(double norm_value, BoundExpr operand, std::string label) {
    BoundExpr b;
    b.kind = Kind::scale;
    b.children.push_back(norm(norm_value));
    b.children.push_back(std::move(operand));
    b.label = std::move(label);
    return b;
}

BoundExpr BoundExpr::lifshits(BoundExpr per_member, std::uint64_t family_size, double approx_error,
                              std::string label) {
    BoundExpr b;
    b.kind = Kind::lifshits;
    b.children.push_back(std::move(per_member));
    b.family_size = family_size;
    b.value = approx_error;
    b.label = std::move(label);
    return b;
}

EntropyEstimate BoundExpr::evaluate() const {
    switch (kind) {
        case Kind::estimate_leaf:
            return estimate;
        case Kind::norm_const: {
            EntropyEstimate e;
            e.k = 1;
            e.value = value;
            e.kind = EstimateKind::certified_upper;
            e.method = "norm";
            return e;
        }
        case Kind::schuett_leaf: {
            EntropyEstimate e;
            e.k = k;
            e.value = entlab::schuett(nu, k, p, q);
            e.kind = EstimateKind::certified_upper;
            e.method = "schuett";
            return e;
        }
        case Kind::kuhn_leaf: {
            EntropyEstimate e;
            e.k = k;
            e.value = kuhn_value(k, p, q, phi);
            e.kind = EstimateKind::certified_upper;
            e.method = "kuhn";
            return e;
        }
        case Kind::sum: {
            EntropyEstimate acc = children.front().evaluate();
            for (std::size_t i = 1; i < children.size(); ++i) acc = combine_sum(acc, children[i].evaluate());
            return acc;
        }
        case Kind::scale: {
            if (children.size() != 2 || children[0].kind != Kind::norm_const)
                throw InvalidArgument("bound: scale node needs (norm, operand)");
            return combine_scale(children[0].value, children[1].evaluate());
        }
        case Kind::lifshits: {
            if (children.size() != 1) throw InvalidArgument("bound: lifshits node needs one operand");
            const auto m = children[0].evaluate();
            auto r = lifshits_combine(m.k, family_size, m.value, value);
            if (m.kind != EstimateKind::certified_upper) r.kind = EstimateKind::heuristic;
            return r;
        }
    }
    throw InvalidArgument("bound: unknown node");
}

nlohmann::json BoundExpr::to_json() const {
    const auto e = evaluate();
    nlohmann::json j = {{"node", entlab::to_string(kind)}, {"k", e.k}, {"value", e.value},
                        {"kind", entlab::to_string(e.kind)}};
    if (!label.empty()) j["label"] = label;
    switch (kind) {
        case Kind::schuett_leaf:
            j["nu"] = nu;
            j["p"] = p;
            j["q"] = q;
            break;
        case Kind::kuhn_leaf:
            j["p"] = p;
            j["q"] = q;
            j["phi"] = {{"scale", phi.scale}, {"shift", phi.shift}, {"beta", phi.beta}};
            break;
        case Kind::estimate_leaf:
            j["method"] = estimate.method;
            break;
        case Kind::lifshits:
            j["family_size"] = family_size;
            j["approx_error"] = value;
            break;
        default:
            break;
    }
    if (!children.empty()) {
        j["children"] = nlohmann::json::array();
        for (const auto& c : children) j["children"].push_back(c.to_json());
    }
    return j;
}

}  // namespace entlab
