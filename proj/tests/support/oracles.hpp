#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's own evaluation code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

inline std::vector<int> depths(const std::vector<int>& parent) {
    std::vector<int> d(parent.size());
    for (std::size_t v = 0; v < parent.size(); ++v) {
        int c = 0;
        for (std::size_t x = v; parent[x] != static_cast<int>(x); x = static_cast<std::size_t>(parent[x])) ++c;
        d[v] = c;
    }
    return d;
}

inline bool is_ancestor(const std::vector<int>& parent, int a, int b) {
    for (int x = b;; x = parent[static_cast<std::size_t>(x)]) {
        if (x == a) return true;
        if (parent[static_cast<std::size_t>(x)] == x) return false;
    }
}

/// Row xi holds w(xi) u(xi') for every ancestor-or-self xi'.
inline std::vector<std::vector<double>> summation_matrix(const std::vector<int>& parent, const std::vector<double>& u,
                                                         const std::vector<double>& w) {
    const std::size_t n = parent.size();
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (is_ancestor(parent, static_cast<int>(j), static_cast<int>(i))) m[i][j] = w[i] * u[j];
    return m;
}

inline std::vector<double> matvec(const std::vector<std::vector<double>>& m, const std::vector<double>& x) {
    std::vector<double> y(m.size(), 0.0);
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j) y[i] += m[i][j] * x[j];
    return y;
}

inline double lp(const std::vector<double>& x, double p) {
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : x) m = std::max(m, std::abs(v));
        return m;
    }
    double s = 0.0;
    for (double v : x) s += std::pow(std::abs(v), p);
    return std::pow(s, 1.0 / p);
}

/// Uniformly random attachment with at most k children per vertex.
inline std::vector<int> random_parents(std::size_t n, int k, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<int> parent(n, 0), kids(n, 0);
    std::vector<int> open{0};
    for (std::size_t v = 1; v < n; ++v) {
        const std::size_t i = rng() % open.size();
        const int p = open[i];
        parent[v] = p;
        if (++kids[static_cast<std::size_t>(p)] == k) {
            open[i] = open.back();
            open.pop_back();
        }
        open.push_back(static_cast<int>(v));
    }
    return parent;
}

inline std::vector<int> path(std::size_t n) {
    std::vector<int> p(n);
    for (std::size_t v = 0; v < n; ++v) p[v] = v == 0 ? 0 : static_cast<int>(v - 1);
    return p;
}

/// Full binary tree in heap order.
inline std::vector<int> binary(int depth) {
    const std::size_t n = (std::size_t{1} << (depth + 1)) - 1;
    std::vector<int> p(n);
    for (std::size_t v = 0; v < n; ++v) p[v] = v == 0 ? 0 : static_cast<int>((v - 1) / 2);
    return p;
}

/// Volume of the unit l_p ball in R^n, p < inf.
inline double lp_ball_volume(int n, double p) {
    return std::pow(2.0 * std::tgamma(1.0 + 1.0 / p), n) / std::tgamma(1.0 + n / p);
}

}  // namespace oracle
