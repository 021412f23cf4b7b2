#include "entlab/entropy.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "entlab/summation.hpp"

namespace entlab {

std::string to_string(EstimateKind kind) {
    switch (kind) {
        case EstimateKind::certified_lower:
            return "certified_lower";
        case EstimateKind::certified_upper:
            return "certified_upper";
        case EstimateKind::heuristic:
            return "heuristic";
    }
    return "heuristic";
}

std::string csv_header_estimates() { return "method,k,value,kind,seed,wall_time_ms"; }

std::string csv_row(const EntropyEstimate& e) {
    std::ostringstream os;
    os << e.method << ',' << e.k << ',' << std::setprecision(17) << e.value << ',' << to_string(e.kind) << ',';
    if (e.seed) os << *e.seed;
    os << ',' << std::setprecision(6) << e.wall_time_ms;
    return os.str();
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

bool Matrix::is_zero() const {
    return std::all_of(a.begin(), a.end(), [](double v) { return v == 0.0; });
}

LinearOperator LinearOperator::from_matrix(const Matrix& m) {
    LinearOperator op;
    op.rows = m.rows;
    op.cols = m.cols;
    op.apply = [m](std::span<const double> x, std::span<double> y) {
        for (std::size_t i = 0; i < m.rows; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < m.cols; ++j) s += m(i, j) * x[j];
            y[i] = s;
        }
    };
    return op;
}

LinearOperator LinearOperator::from_tree(const Tree& tree, std::vector<double> u, std::vector<double> w) {
    if (u.size() != tree.size() || w.size() != tree.size())
        throw InvalidArgument("operator: weight vectors do not match the tree");
    LinearOperator op;
    op.rows = op.cols = tree.size();
    op.apply = [&tree, u = std::move(u), w = std::move(w)](std::span<const double> x, std::span<double> y) {
        const auto g = entlab::apply(tree, u, w, x);
        std::copy(g.begin(), g.end(), y.begin());
    };
    return op;
}

double norm_p(std::span<const double> x, double p) {
    if (p == kInf) {
        double m = 0.0;
        for (double v : x) m = std::max(m, std::abs(v));
        return m;
    }
    return lp_norm(x, p);
}

namespace {

void check_p(double p, const char* what) {
    if (!(p >= 1.0)) throw InvalidArgument(std::string(what) + ": exponent must be in [1, inf]");
}

void check_pq(double p, double q) {
    check_p(p, "entropy");
    check_p(q, "entropy");
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

/// sum |x_i - y_i|^q (max for q = inf), i.e. the distance raised to q.
struct PoweredDistance {
    double q;
    double operator()(const double* x, const double* y, std::size_t n) const {
        double s = 0.0;
        if (q == 2.0) {
            for (std::size_t i = 0; i < n; ++i) {
                const double d = x[i] - y[i];
                s += d * d;
            }
        } else if (q == 1.0) {
            for (std::size_t i = 0; i < n; ++i) s += std::abs(x[i] - y[i]);
        } else if (q == 4.0) {
            for (std::size_t i = 0; i < n; ++i) {
                const double d = (x[i] - y[i]) * (x[i] - y[i]);
                s += d * d;
            }
        } else if (q == kInf) {
            for (std::size_t i = 0; i < n; ++i) s = std::max(s, std::abs(x[i] - y[i]));
        } else {
            for (std::size_t i = 0; i < n; ++i) s += std::pow(std::abs(x[i] - y[i]), q);
        }
        return s;
    }
    double root(double s) const { return q == kInf || q == 1.0 ? s : std::pow(s, 1.0 / q); }
};

}  // namespace

void sample_lp_sphere(double p, SplitMix64& rng, std::span<double> out) {
    check_p(p, "sample_lp_sphere");
    if (out.empty()) return;
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (;;) {
        if (p == kInf) {
            for (double& v : out) v = unif(rng);
        } else {
            std::gamma_distribution<double> gam(1.0 / p, 1.0);
            std::bernoulli_distribution sign(0.5);
            for (double& v : out) {
                const double g = std::pow(gam(rng), 1.0 / p);
                v = sign(rng) ? g : -g;
            }
        }
        const double n = norm_p(out, p);
        if (n > 0.0 && std::isfinite(n)) {
            for (double& v : out) v /= n;
            return;
        }
    }
}

PointCloud sample_images(const LinearOperator& op, double p, std::size_t samples, std::uint64_t seed,
                         Candidates candidates) {
    check_p(p, "sample_images");
    PointCloud cloud;
    cloud.dim = op.rows;
    const std::size_t basis = candidates == Candidates::sphere_only ? 0 : 2 * op.cols;
    const bool fill_ball = candidates == Candidates::ball;
    const std::size_t total = basis + samples;
    cloud.data.assign(total * op.rows, 0.0);
    if (op.rows == 0) return cloud;
    auto img = [&](std::size_t i) { return std::span<double>(cloud.data.data() + i * op.rows, op.rows); };

    parallel_for(
        op.cols,
        [&](std::size_t b, std::size_t e) {
            std::vector<double> x(op.cols, 0.0);
            for (std::size_t j = b; j < e && basis > 0; ++j) {
                x.assign(op.cols, 0.0);
                x[j] = 1.0;
                op.apply(x, img(2 * j));
                auto neg = img(2 * j + 1);
                auto pos = img(2 * j);
                for (std::size_t r = 0; r < op.rows; ++r) neg[r] = -pos[r];
            }
        },
        64);
    // Point basis + 2i is A x_i and basis + 2i + 1 is -A x_i; stream i seeds x_i.
    const std::size_t pairs = (samples + 1) / 2;
    parallel_for(
        pairs,
        [&](std::size_t b, std::size_t e) {
            std::vector<double> x(op.cols);
            for (std::size_t i = b; i < e; ++i) {
                auto rng = stream_rng(seed, i);
                sample_lp_sphere(p, rng, x);
                if (fill_ball) {
                    // cone-measure direction times U^{1/m} is uniform in the l_p ball
                    const double r = std::pow(std::uniform_real_distribution<double>(0.0, 1.0)(rng),
                                              1.0 / static_cast<double>(op.cols));
                    for (double& v : x) v *= r;
                }
                auto pos = img(basis + 2 * i);
                op.apply(x, pos);
                if (2 * i + 1 < samples) {
                    auto neg = img(basis + 2 * i + 1);
                    for (std::size_t r = 0; r < op.rows; ++r) neg[r] = -pos[r];
                }
            }
        },
        64);
    return cloud;
}

std::vector<double> gonzalez_distances(const PointCloud& cloud, double q, std::size_t max_selected,
                                       std::size_t first) {
    check_p(q, "gonzalez");
    const std::size_t n = cloud.size();
    std::vector<double> out;
    if (n == 0 || max_selected == 0) return out;
    if (first >= n) throw InvalidArgument("gonzalez: start index out of range");
    const PoweredDistance dist{q};
    const std::size_t dim = cloud.dim;
    std::vector<double> best(n);
    std::vector<char> taken(n, 0);
    out.push_back(kInf);
    taken[first] = 1;

    constexpr std::size_t chunk = 2048;
    const std::size_t chunks = (n + chunk - 1) / chunk;
    std::vector<std::pair<double, std::size_t>> arg(chunks);
    std::size_t centre = first;
    bool initial = true;
    while (out.size() < std::min(max_selected, n)) {
        const double* c = cloud.data.data() + centre * dim;
        parallel_for(
            chunks,
            [&](std::size_t b, std::size_t e) {
                for (std::size_t ch = b; ch < e; ++ch) {
                    double m = -1.0;
                    std::size_t at = n;
                    const std::size_t lo = ch * chunk, hi = std::min(n, lo + chunk);
                    for (std::size_t i = lo; i < hi; ++i) {
                        if (taken[i]) continue;
                        const double d = dist(cloud.data.data() + i * dim, c, dim);
                        best[i] = initial ? d : std::min(best[i], d);
                        if (best[i] > m) {
                            m = best[i];
                            at = i;
                        }
                    }
                    arg[ch] = {m, at};
                }
            },
            1);
        initial = false;
        std::pair<double, std::size_t> pick{-1.0, n};
        for (const auto& a : arg)
            if (a.first > pick.first) pick = a;  // chunks are in index order, so ties keep the lowest index
        if (pick.second == n) break;
        out.push_back(dist.root(pick.first));
        taken[pick.second] = 1;
        centre = pick.second;
    }
    return out;
}

namespace {

std::size_t centres_for(long k) {
    if (k < 1) throw InvalidArgument("entropy: k must be >= 1");
    if (k > 62) return static_cast<std::size_t>(-1) / 4;
    return std::size_t{1} << (k - 1);
}

void check_sampled_k(long k) {
    if (k < 1) throw InvalidArgument("entropy: k must be >= 1");
    if (k > kMaxSampledK)
        throw InvalidArgument("entropy: sampled estimators are capped at k <= " + std::to_string(kMaxSampledK));
}

}  // namespace

double packing_value(std::span<const double> g, long k) {
    const std::size_t m = centres_for(k) + 1;
    if (g.size() < m) return 0.0;
    return g[m - 1] / 2.0;
}

double cover_value(std::span<const double> g, long k) {
    const std::size_t kk = centres_for(k);
    if (g.size() <= kk) return 0.0;
    return g[kk];
}

EntropyEstimate packing_lower(const LinearOperator& op, double p, double q, long k, std::size_t samples,
                              std::uint64_t seed, Candidates candidates) {
    check_pq(p, q);
    check_sampled_k(k);
    const auto t0 = std::chrono::steady_clock::now();
    const auto cloud = sample_images(op, p, samples, seed, candidates);
    const auto g = gonzalez_distances(cloud, q, centres_for(k) + 1);
    EntropyEstimate e;
    e.k = k;
    e.value = packing_value(g, k);
    e.kind = EstimateKind::certified_lower;
    e.method = "packing";
    e.seed = seed;
    e.wall_time_ms = elapsed_ms(t0);
    return e;
}

EntropyEstimate packing_lower(const Matrix& a, double p, double q, long k, std::size_t samples, std::uint64_t seed,
                              Candidates candidates) {
    return packing_lower(LinearOperator::from_matrix(a), p, q, k, samples, seed, candidates);
}

EntropyEstimate greedy_cover_estimate(const LinearOperator& op, double p, double q, long k, std::size_t samples,
                                      std::uint64_t seed, Candidates candidates) {
    check_pq(p, q);
    check_sampled_k(k);
    const auto t0 = std::chrono::steady_clock::now();
    const auto cloud = sample_images(op, p, samples, seed, candidates);
    const auto g = gonzalez_distances(cloud, q, centres_for(k) + 1);
    EntropyEstimate e;
    e.k = k;
    e.value = cover_value(g, k);
    e.kind = EstimateKind::heuristic;
    e.method = "greedy_cover";
    e.seed = seed;
    e.wall_time_ms = elapsed_ms(t0);
    return e;
}

EntropyEstimate greedy_cover_estimate(const Matrix& a, double p, double q, long k, std::size_t samples,
                                      std::uint64_t seed, Candidates candidates) {
    return greedy_cover_estimate(LinearOperator::from_matrix(a), p, q, k, samples, seed, candidates);
}

double matrix_norm_upper(const Matrix& a, double p, double q) {
    check_pq(p, q);
    const double pp = p == 1.0 ? kInf : (p == kInf ? 1.0 : p / (p - 1.0));
    std::vector<double> rn(a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        rn[i] = norm_p(std::span<const double>(a.a.data() + i * a.cols, a.cols), pp);
    return norm_p(rn, q);
}

std::vector<double> lp_ball_net(std::size_t m, double p, double eta, std::size_t max_points) {
    check_p(p, "net");
    if (!(eta > 0.0) || !(eta < 1.0)) throw InvalidArgument("net: eta must lie in (0, 1)");
    const double h = p == kInf ? 2.0 * eta : 2.0 * eta / std::pow(static_cast<double>(m), 1.0 / p);
    const long zmax = static_cast<long>(std::ceil((1.0 + h / 2.0) / h));
    std::vector<double> pts;
    std::vector<double> g(m, 0.0);
    std::size_t count = 0;
    // Keep grid point z h when the nearest point of its cell lies in the ball;
    // `acc` carries the powered norm (max for p = inf) of that nearest point.
    auto rec = [&](auto&& self, std::size_t i, double acc) -> void {
        if (i == m) {
            if (++count > max_points)
                throw ResourceExceeded("net: more than " + std::to_string(max_points) + " points");
            pts.insert(pts.end(), g.begin(), g.end());
            return;
        }
        for (long z = -zmax; z <= zmax; ++z) {
            const double c = std::max(0.0, static_cast<double>(std::labs(z)) * h - h / 2.0);
            const double next = p == kInf ? std::max(acc, c) : acc + std::pow(c, p);
            if (next > 1.0 + 1e-12) continue;
            g[i] = static_cast<double>(z) * h;
            self(self, i + 1, next);
        }
    };
    rec(rec, 0, 0.0);
    return pts;
}

EntropyEstimate net_upper(const Matrix& a, double p, double q, long k, double eta, const NetOptions& opt) {
    check_pq(p, q);
    if (k < 1) throw InvalidArgument("net_upper: k must be >= 1");
    if (a.cols > opt.max_domain_dim)
        throw InvalidArgument("net_upper: domain dimension " + std::to_string(a.cols) + " exceeds the gate of " +
                              std::to_string(opt.max_domain_dim));
    const auto t0 = std::chrono::steady_clock::now();
    EntropyEstimate e;
    e.k = k;
    e.kind = EstimateKind::certified_upper;
    e.method = "net";
    if (a.cols == 0 || a.rows == 0 || a.is_zero()) {
        e.wall_time_ms = elapsed_ms(t0);
        return e;
    }
    const auto net = lp_ball_net(a.cols, p, eta, opt.max_net_points);
    const std::size_t n = net.size() / a.cols;
    PointCloud cloud;
    cloud.dim = a.rows;
    cloud.data.resize(n * a.rows);
    std::size_t origin = 0;
    double img_max = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double* x = net.data() + t * a.cols;
        bool zero = true;
        for (std::size_t j = 0; j < a.cols; ++j) zero = zero && x[j] == 0.0;
        if (zero) origin = t;
        double* y = cloud.data.data() + t * a.rows;
        for (std::size_t i = 0; i < a.rows; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < a.cols; ++j) s += a(i, j) * x[j];
            y[i] = s;
        }
        img_max = std::max(img_max, norm_p(std::span<const double>(y, a.rows), q));
    }
    const double op_norm = std::min(matrix_norm_upper(a, p, q), img_max / (1.0 - eta));
    const std::size_t centres = centres_for(k);
    double radius = 0.0;
    if (centres < n) {
        const auto g = gonzalez_distances(cloud, q, centres + 1, origin);
        radius = cover_value(g, k);
    }
    e.value = radius + eta * op_norm;
    e.wall_time_ms = elapsed_ms(t0);
    return e;
}

double log_volume_lp_ball(long nu, double p) {
    check_p(p, "volume");
    const double n = static_cast<double>(nu);
    if (p == kInf) return n * std::log(2.0);
    return n * (std::log(2.0) + std::lgamma(1.0 + 1.0 / p)) - std::lgamma(1.0 + n / p);
}

EntropyEstimate volumetric_lower(long nu, double p, double q, long k, std::span<const double> diag) {
    check_pq(p, q);
    if (nu < 1 || k < 1) throw InvalidArgument("volumetric_lower: need nu >= 1 and k >= 1");
    if (!diag.empty() && diag.size() != static_cast<std::size_t>(nu))
        throw InvalidArgument("volumetric_lower: only square (nu x nu diagonal) operators are supported");
    const double n = static_cast<double>(nu);
    double log_det = 0.0;
    for (double d : diag) {
        if (d == 0.0) {
            log_det = -kInf;
            break;
        }
        log_det += std::log(std::abs(d));
    }
    EntropyEstimate e;
    e.k = k;
    e.kind = EstimateKind::certified_lower;
    e.method = "volumetric";
    if (log_det == -kInf) return e;
    const double lv = p == q ? 0.0 : log_volume_lp_ball(nu, p) - log_volume_lp_ball(nu, q);
    e.value = std::exp((log_det + lv) / n) * std::exp2(-static_cast<double>(k - 1) / n);
    return e;
}

namespace {

double exponent(double p, double q) { return (p == kInf ? 0.0 : 1.0 / p) - (q == kInf ? 0.0 : 1.0 / q); }

void check_schuett(long nu, long k, double p, double q) {
    check_pq(p, q);
    if (p > q) throw InvalidArgument("schuett: p > q is not supported");
    if (nu < 1 || k < 1) throw InvalidArgument("schuett: need nu >= 1 and k >= 1");
}

double branch2(double nu, double k, double a) { return std::pow(std::log1p(nu / k) / k, a); }

}  // namespace

double schuett(long nu, long k, double p, double q) {
    check_schuett(nu, k, p, q);
    const double a = exponent(p, q);
    const double n = static_cast<double>(nu);
    const long k1 = static_cast<long>(std::ceil(std::log2(n) - 1e-12));
    if (k >= nu) return branch2(n, n, a) * std::exp2(-static_cast<double>(k - nu) / n);
    if (k <= k1) return branch2(n, static_cast<double>(std::max(1L, k1)), a);
    return branch2(n, static_cast<double>(k), a);
}

double schuett_piecewise(long nu, long k, double p, double q) {
    check_schuett(nu, k, p, q);
    const double a = exponent(p, q);
    const double n = static_cast<double>(nu), kk = static_cast<double>(k);
    if (kk <= std::log2(n) + 1e-12) return 1.0;
    if (k <= nu) return branch2(n, kk, a);
    return std::exp2(-kk / n) * std::pow(n, -a);
}

double LogPhi::operator()(double t) const { return scale * std::pow(std::log(shift + t), beta); }

PhiCheck check_phi(const LogPhi& phi, double alpha, double c_max, double t_max, int points) {
    PhiCheck r;
    if (!(alpha > 0.0)) {
        r.detail = "alpha must be positive (p = q is degenerate)";
        return r;
    }
    if (!(phi.scale > 0.0) || !(std::log(phi.shift + 1.0) > 0.0)) {
        r.detail = "phi must be positive on [1, inf)";
        return r;
    }
    std::vector<double> t(static_cast<std::size_t>(points)), v(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = std::exp(std::log(t_max) * static_cast<double>(i) / static_cast<double>(points - 1));
        v[i] = phi(t[i]);
        if (!(v[i] > 0.0) || !std::isfinite(v[i])) {
            r.detail = "phi not positive and finite at t=" + std::to_string(t[i]);
            return r;
        }
        if (i > 0 && v[i] < v[i - 1]) {
            r.detail = "phi decreases near t=" + std::to_string(t[i]);
            return r;
        }
    }
    for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t j = i; j < t.size(); ++j) {
            const double bound = std::pow((1.0 + std::log(t[j])) / (1.0 + std::log(t[i])), alpha);
            r.worst_ratio = std::max(r.worst_ratio, (v[j] / v[i]) / bound);
        }
    r.ok = r.worst_ratio <= c_max;
    if (!r.ok) r.detail = "growth condition needs c = " + std::to_string(r.worst_ratio) + " > " + std::to_string(c_max);
    return r;
}

double kuhn_value(long n, double p, double q, const LogPhi& phi) {
    check_pq(p, q);
    if (n < 0) throw InvalidArgument("kuhn_value: n must be >= 0");
    if (p >= q) throw InvalidArgument("kuhn_value: need p < q");
    const auto chk = check_phi(phi, exponent(p, q));
    if (!chk.ok) throw InvalidArgument("kuhn_value: " + chk.detail);
    const double t = std::ldexp(1.0, static_cast<int>(n));
    return t <= 1.0 ? 1.0 : 1.0 / phi(t);
}

EntropyEstimate combine_sum(const EntropyEstimate& a, const EntropyEstimate& b) {
    if (a.kind == EstimateKind::certified_lower || b.kind == EstimateKind::certified_lower)
        throw InvalidArgument("combine_sum: lower bounds cannot be added");
    if (a.k < 1 || b.k < 1) throw InvalidArgument("combine_sum: indices must be >= 1");
    EntropyEstimate r;
    r.k = a.k + b.k - 1;
    r.value = a.value + b.value;
    r.kind = a.kind == EstimateKind::certified_upper && b.kind == EstimateKind::certified_upper
                 ? EstimateKind::certified_upper
                 : EstimateKind::heuristic;
    r.method = "sum";
    return r;
}

EntropyEstimate combine_scale(double norm, const EntropyEstimate& e) {
    if (!(norm >= 0.0) || !std::isfinite(norm)) throw InvalidArgument("combine_scale: norm must be finite and >= 0");
    if (e.kind == EstimateKind::certified_lower) throw InvalidArgument("combine_scale: expects an upper bound");
    EntropyEstimate r = e;
    r.value = norm * e.value;
    r.method = "scale";
    return r;
}

EntropyEstimate lifshits_combine(long n, std::uint64_t family_size, double per_member, double approx_error) {
    if (family_size == 0) throw InvalidArgument("lifshits_combine: family must be nonempty");
    if (n < 1) throw InvalidArgument("lifshits_combine: n must be >= 1");
    EntropyEstimate r;
    r.k = n + static_cast<long>(std::bit_width(family_size)) - 1 + 1;
    r.value = per_member + approx_error;
    r.kind = EstimateKind::certified_upper;
    r.method = "lifshits";
    return r;
}

}  // namespace entlab
