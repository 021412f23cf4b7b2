#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "entlab/entropy.hpp"

namespace entlab {

/// Expression tree of entropy bounds. Evaluation applies the combination
/// rules bottom-up, so index bookkeeping is exactly what the tree says.
struct BoundExpr {
    enum class Kind { sum, scale, lifshits, schuett_leaf, kuhn_leaf, estimate_leaf, norm_const };

    Kind kind = Kind::norm_const;
    std::string label;
    std::vector<BoundExpr> children;

    EntropyEstimate estimate;  // estimate_leaf
    long nu = 0;               // schuett_leaf
    long k = 1;                // schuett_leaf, kuhn_leaf
    double p = 2.0, q = 2.0;   // schuett_leaf, kuhn_leaf
    LogPhi phi;                // kuhn_leaf
    double value = 0.0;        // norm_const; approximation error for lifshits
    std::uint64_t family_size = 1;

    static BoundExpr leaf(EntropyEstimate e, std::string label = {});
    static BoundExpr norm(double value, std::string label = {});
    static BoundExpr schuett(long nu, long k, double p, double q, std::string label = {});
    static BoundExpr kuhn(long n, double p, double q, LogPhi phi, std::string label = {});
    static BoundExpr sum(std::vector<BoundExpr> terms, std::string label = {});
    static BoundExpr scale(double norm, BoundExpr operand, std::string label = {});
    static BoundExpr lifshits(BoundExpr per_member, std::uint64_t family_size, double approx_error,
                              std::string label = {});

    /// A norm constant on its own evaluates as e_1(T) <= ||T||.
    EntropyEstimate evaluate() const;
    nlohmann::json to_json() const;
};

std::string to_string(BoundExpr::Kind kind);

}  // namespace entlab
