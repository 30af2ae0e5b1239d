#include "reachcert/switching.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>

#include "reachcert/linalg.hpp"

namespace reachcert::switching {

namespace {

constexpr double kZeroTimeTol = 1e-10;
constexpr double kMinIntervalLength = 1e-9;

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

SwitchingFunction::SwitchingFunction(Mat a, Vec b_col, Vec zeta_dir, double horizon)
    : A(std::move(a)), b(std::move(b_col)), zeta(std::move(zeta_dir)), T(horizon) {
    if (A.rows() != A.cols() || A.rows() != b.size() || b.size() != zeta.size())
        throw std::invalid_argument("SwitchingFunction: dimension mismatch");
    if (!(T > 0.0)) throw std::invalid_argument("SwitchingFunction: horizon must be positive");
    n = static_cast<int>(A.rows());
    const double nz = zeta.norm();
    if (nz > 0.0) zeta /= nz;
    const Mat k = linalg::controllability_matrix(A, b);
    L_const = linalg::min_singular_value(k);
    norm_A = linalg::operator_norm(A);
    normal = linalg::rank_with_threshold(k) == n;
}

double SwitchingFunction::threshold(double s) const {
    return L_const * std::exp(-norm_A * s) / n;
}

double SwitchingProfile::threshold(double s) const {
    return L_const * std::exp(-norm_A * s) / n;
}

double eval_g(const SwitchingFunction& sf, int order, double s) {
    if (order < 0 || order >= sf.n) throw std::out_of_range("eval_g: derivative order out of range");
    if (s < 0.0 || s > sf.T + 1.0) throw std::out_of_range("eval_g: time out of range");
    Vec v = sf.b;
    for (int i = 0; i < order; ++i) v = sf.A * v;
    return sf.zeta.dot(linalg::expm(sf.A, s) * v);
}

LowerBoundCheck sum_derivative_lower_bound(const SwitchingFunction& sf, double s) {
    LowerBoundCheck out;
    out.applicable = sf.normal;
    if (!sf.normal) return out;
    const Mat e = linalg::expm(sf.A, s);
    Vec v = sf.b;
    double lhs = 0.0;
    for (int i = 0; i < sf.n; ++i) {
        lhs += std::abs(sf.zeta.dot(e * v));
        v = sf.A * v;
    }
    out.lhs = lhs;
    out.rhs = sf.L_const * std::exp(-sf.norm_A * s);
    out.ok = lhs >= out.rhs - 1e-9;
    return out;
}

DenseGrid::DenseGrid(const Mat& a, const Vec& b, double horizon, int steps)
    : steps_(steps), h_(horizon / steps), T_(horizon), n_(static_cast<int>(a.rows())) {
    const Mat e_step = linalg::expm(a, h_);
    std::vector<Vec> current(static_cast<size_t>(n_));
    current[0] = b;
    for (int i = 1; i < n_; ++i) current[static_cast<size_t>(i)] = a * current[static_cast<size_t>(i - 1)];
    samples_.reserve(static_cast<size_t>((steps_ + 1) * n_));
    for (int k = 0; k <= steps_; ++k) {
        for (int i = 0; i < n_; ++i) samples_.push_back(current[static_cast<size_t>(i)]);
        if (k < steps_)
            for (int i = 0; i < n_; ++i)
                current[static_cast<size_t>(i)] = e_step * current[static_cast<size_t>(i)];
    }
}

double DenseGrid::value(const Vec& zeta, int order, int k) const {
    return zeta.dot(samples_[static_cast<size_t>(k * n_ + order)]);
}

namespace {

// Bisection on a sign change of f over [lo, hi] to kZeroTimeTol.
template <typename F>
double bisect(F&& f, double lo, double hi, double flo) {
    for (int iter = 0; iter < 200 && hi - lo > kZeroTimeTol; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<Zero> find_zeros_impl(const SwitchingFunction& sf, const DenseGrid& grid) {
    if (!sf.normal) throw std::invalid_argument("find_zeros: (A, b) is not normal");
    const int steps = grid.steps();
    const double h = grid.h();
    std::vector<double> g(static_cast<size_t>(steps + 1));
    double scale = 0.0;
    for (int k = 0; k <= steps; ++k) {
        g[static_cast<size_t>(k)] = grid.value(sf.zeta, 0, k);
        scale = std::max(scale, std::abs(g[static_cast<size_t>(k)]));
    }
    auto eval = [&](double s) { return eval_g(sf, 0, s); };

    std::vector<Zero> zeros;
    auto push_zero = [&](double t, int before, int after) {
        if (t <= kZeroTimeTol || t >= sf.T - kZeroTimeTol) return;  // open interval (0, T)
        if (!zeros.empty() && std::abs(zeros.back().time - t) < 10 * kZeroTimeTol) return;
        zeros.push_back(Zero{t, before, after});
    };

    for (int k = 0; k < steps; ++k) {
        const double a = g[static_cast<size_t>(k)];
        const double b = g[static_cast<size_t>(k + 1)];
        const int sa = sign_of(a);
        const int sb = sign_of(b);
        if (sa == 0) {
            if (k > 0) push_zero(k * h, sign_of(g[static_cast<size_t>(k - 1)]), sb);
            continue;
        }
        if (sb == 0) continue;  // handled at the next node
        if (sa != sb) {
            const double t = bisect(eval, k * h, (k + 1) * h, a);
            push_zero(t, sa, sb);
        }
    }

    // Touch zeros: grid-local minima of |g| that dip to numerically zero
    // without a sign change. They do not flip the control.
    const double touch_tol = std::max(1e-12, 1e-11 * scale);
    for (int k = 1; k < steps; ++k) {
        const double am = std::abs(g[static_cast<size_t>(k - 1)]);
        const double a0 = std::abs(g[static_cast<size_t>(k)]);
        const double ap = std::abs(g[static_cast<size_t>(k + 1)]);
        const int s0 = sign_of(g[static_cast<size_t>(k)]);
        if (s0 == 0 || a0 > am || a0 > ap) continue;
        if (a0 > std::max(1e-9, 1e-7 * scale)) continue;
        // Golden-section refine the minimum of |g|.
        double lo = (k - 1) * h, hi = (k + 1) * h;
        const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
        double f1 = std::abs(eval(x1)), f2 = std::abs(eval(x2));
        while (hi - lo > kZeroTimeTol) {
            if (f1 < f2) {
                hi = x2; x2 = x1; f2 = f1;
                x1 = hi - phi * (hi - lo); f1 = std::abs(eval(x1));
            } else {
                lo = x1; x1 = x2; f1 = f2;
                x2 = lo + phi * (hi - lo); f2 = std::abs(eval(x2));
            }
        }
        const double t = 0.5 * (lo + hi);
        if (std::abs(eval(t)) <= touch_tol) push_zero(t, s0, s0);
    }

    std::sort(zeros.begin(), zeros.end(), [](const Zero& a, const Zero& b) { return a.time < b.time; });
    return zeros;
}

}  // namespace

std::vector<Zero> find_zeros(const SwitchingFunction& sf, const DenseGrid& grid) {
    return find_zeros_impl(sf, grid);
}

std::vector<Zero> find_zeros(const SwitchingFunction& sf) {
    const DenseGrid grid(sf.A, sf.b, sf.T);
    return find_zeros_impl(sf, grid);
}

namespace {

// Splits [a, b] into the parts where phi >= 0 (keep) and phi < 0 (carve),
// scanning grid nodes inside and refining crossings by bisection.
void split_by_sign(const std::function<double(double)>& phi, const DenseGrid& grid, double a, double b,
                   std::vector<Interval>& keep, std::vector<Interval>& carve) {
    std::vector<double> nodes;
    nodes.push_back(a);
    const int k_lo = static_cast<int>(std::ceil(a / grid.h()));
    const int k_hi = static_cast<int>(std::floor(b / grid.h()));
    for (int k = k_lo; k <= k_hi; ++k) {
        const double s = k * grid.h();
        if (s > a + 1e-15 && s < b - 1e-15) nodes.push_back(s);
    }
    nodes.push_back(b);

    std::vector<double> cuts;
    std::vector<double> vals(nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i) vals[i] = phi(nodes[i]);
    for (size_t i = 0; i + 1 < nodes.size(); ++i) {
        if (vals[i] == 0.0) continue;
        if ((vals[i] > 0.0) != (vals[i + 1] > 0.0) && vals[i + 1] != 0.0)
            cuts.push_back(bisect(phi, nodes[i], nodes[i + 1], vals[i]));
        else if (vals[i + 1] == 0.0 && i + 2 < nodes.size() &&
                 (vals[i] > 0.0) != (vals[i + 2] > 0.0))
            cuts.push_back(nodes[i + 1]);
    }

    std::vector<double> edges;
    edges.push_back(a);
    for (double c : cuts) edges.push_back(c);
    edges.push_back(b);

    // Classify each segment by its midpoint; merge segments below the
    // minimum length into the previous one.
    struct Seg { Interval iv; bool keep; };
    std::vector<Seg> segs;
    for (size_t i = 0; i + 1 < edges.size(); ++i) {
        const Interval iv{edges[i], edges[i + 1]};
        if (iv.length() < kMinIntervalLength && !segs.empty()) {
            segs.back().iv.hi = iv.hi;
            continue;
        }
        const bool k = phi(0.5 * (iv.lo + iv.hi)) >= 0.0;
        if (!segs.empty() && segs.back().keep == k) {
            segs.back().iv.hi = iv.hi;
            continue;
        }
        segs.push_back(Seg{iv, k});
    }
    for (const Seg& s : segs) (s.keep ? keep : carve).push_back(s.iv);
}

}  // namespace

SwitchingProfile decompose_intervals(const SwitchingFunction& sf, int steps) {
    if (!sf.normal) throw std::invalid_argument("decompose_intervals: (A, b) is not normal");
    const DenseGrid grid(sf.A, sf.b, sf.T, steps);

    SwitchingProfile profile;
    profile.L_const = sf.L_const;
    profile.norm_A = sf.norm_A;
    profile.T = sf.T;
    profile.n = sf.n;
    profile.zeros = find_zeros(sf, grid);
    profile.intervals.assign(static_cast<size_t>(sf.n), {});

    const CountBounds bounds = switch_count_bounds(sf.A, sf.b, sf.T);
    profile.counts = bounds.interval_counts;

    std::vector<Interval> pending{Interval{0.0, sf.T}};
    for (int order = 0; order < sf.n - 1; ++order) {
        auto phi = [&](double s) {
            return std::abs(eval_g(sf, order, s)) - sf.threshold(s);
        };
        std::vector<Interval> keep, carve;
        for (const Interval& iv : pending) split_by_sign(phi, grid, iv.lo, iv.hi, keep, carve);
        profile.intervals[static_cast<size_t>(order)] = std::move(keep);
        pending = std::move(carve);
    }
    profile.intervals[static_cast<size_t>(sf.n - 1)] = std::move(pending);
    return profile;
}

CountBounds switch_count_bounds(const Mat& a, const Vec& b, double horizon) {
    const int n = static_cast<int>(a.rows());
    const Mat k = linalg::controllability_matrix(a, b);
    if (linalg::rank_with_threshold(k) != n)
        throw std::invalid_argument("switch_count_bounds: (A, b) is not normal");
    const double l = linalg::min_singular_value(k);
    const double norm_a = linalg::operator_norm(a);
    const double expfactor = std::exp(2.0 * norm_a * horizon);

    // tails[i] = sum_{m=i+1}^{n-1} ||A^{m+1} b||
    std::vector<double> power_norms(static_cast<size_t>(n + 1));
    Vec v = b;
    for (int p = 0; p <= n; ++p) {
        power_norms[static_cast<size_t>(p)] = v.norm();
        v = a * v;
    }
    std::vector<double> tails(static_cast<size_t>(n), 0.0);
    for (int i = n - 2; i >= 0; --i)
        tails[static_cast<size_t>(i)] =
            tails[static_cast<size_t>(i + 1)] + power_norms[static_cast<size_t>(std::min(i + 2, n))];
    // power_norms has entries up to A^n b; indices i+2 <= n reachable for i <= n-2.

    auto saturate = [](double x) {
        return static_cast<std::int64_t>(std::min(x, 4.0e18));
    };

    CountBounds out;
    out.interval_counts.resize(static_cast<size_t>(n), 0);
    const double t_over_l = horizon / l;
    {
        const double sum0 = tails[0];
        const double term = sum0 > 0.0
            ? static_cast<double>(n) * n / (n - 1) * t_over_l * expfactor * sum0
            : 0.0;
        out.interval_counts[0] = saturate(std::ceil(term)) + (n - 1);
    }
    for (int i = 1; i <= n - 2; ++i) {
        const double sum_i = tails[static_cast<size_t>(i)];
        const double term = sum_i > 0.0
            ? static_cast<double>(n) * (n - i) / (n - i - 1) * t_over_l * expfactor * sum_i
            : 0.0;
        const double carry =
            static_cast<double>(out.interval_counts[static_cast<size_t>(i - 1)]) * (n - i - 1);
        out.interval_counts[static_cast<size_t>(i)] = saturate(std::ceil(term) + carry);
    }
    if (n >= 2)
        out.interval_counts[static_cast<size_t>(n - 1)] = out.interval_counts[static_cast<size_t>(n - 2)];

    // Zero capacity: none in I_0; at most i per connected interval of I_i.
    // I_i (1 <= i <= n-2) has at most N_i + N_{i-1} intervals; I_{n-1} at most N_{n-2}.
    double zero_bound = 0.0;
    for (int i = 1; i <= n - 2; ++i)
        zero_bound += static_cast<double>(i) *
                      (static_cast<double>(out.interval_counts[static_cast<size_t>(i)]) +
                       static_cast<double>(out.interval_counts[static_cast<size_t>(i - 1)]));
    zero_bound += static_cast<double>(n - 1) *
                  static_cast<double>(out.interval_counts[static_cast<size_t>(n - 2)]);
    out.zero_bound = saturate(zero_bound);
    return out;
}

std::int64_t switch_count_bound(const Mat& a, const Vec& b, double horizon) {
    return switch_count_bounds(a, b, horizon).zero_bound;
}

namespace {

struct PiecewiseConstant {
    std::vector<double> edges;   // size p+1
    std::vector<double> values;  // size p

    double integral() const {
        double acc = 0.0;
        for (size_t i = 0; i < values.size(); ++i) acc += values[i] * (edges[i + 1] - edges[i]);
        return acc;
    }
    // integral of (t - a)^k K(t) dt, exact per piece
    double weighted_integral_left(double a, int k) const {
        double acc = 0.0;
        for (size_t i = 0; i < values.size(); ++i) {
            const double hi = edges[i + 1] - a, lo = edges[i] - a;
            acc += values[i] * (std::pow(hi, k + 1) - std::pow(lo, k + 1)) / (k + 1);
        }
        return acc;
    }
    double weighted_integral_right(double b, int k) const {
        double acc = 0.0;
        for (size_t i = 0; i < values.size(); ++i) {
            const double hi = b - edges[i], lo = b - edges[i + 1];
            acc += values[i] * (std::pow(hi, k + 1) - std::pow(lo, k + 1)) / (k + 1);
        }
        return acc;
    }
};

}  // namespace

AppendixReport appendix_bounds_selftest(std::int64_t trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> pieces_dist(1, 20);
    std::uniform_int_distribution<int> k_dist(0, 3);

    AppendixReport report;
    report.trials = trials;

    for (std::int64_t trial = 0; trial < trials; ++trial) {
        const double a = -1.0 + 2.0 * unit(rng);
        const double b = a + 0.2 + 2.0 * unit(rng);
        const int k = k_dist(rng);

        // Iterated-integral inequality for piecewise-constant K in [0, 1].
        {
            const int pieces = pieces_dist(rng);
            PiecewiseConstant pc;
            pc.edges.push_back(a);
            std::vector<double> cuts;
            for (int i = 1; i < pieces; ++i) cuts.push_back(a + (b - a) * unit(rng));
            std::sort(cuts.begin(), cuts.end());
            for (double c : cuts) pc.edges.push_back(c);
            pc.edges.push_back(b);
            for (int i = 0; i < pieces; ++i) pc.values.push_back(unit(rng));

            const double total = pc.integral();
            const double rhs = std::pow(total, k + 1) / (k + 1);
            const double tol = 1e-12 * (1.0 + std::abs(rhs));
            report.integral_checks += 2;
            if (pc.weighted_integral_left(a, k) < rhs - tol) ++report.integral_violations;
            if (pc.weighted_integral_right(b, k) < rhs - tol) ++report.integral_violations;
        }

        // Growth bound for monotone f with |f'(s)| >= C (s - a)^k.
        {
            const double c_const = 0.1 + 2.0 * unit(rng);
            const int extra_terms = pieces_dist(rng) % 4;
            std::vector<double> alpha(static_cast<size_t>(extra_terms));
            for (double& al : alpha) al = unit(rng);
            const double sigma = unit(rng) < 0.5 ? 1.0 : -1.0;
            const double f_a = -1.0 + 2.0 * unit(rng);

            auto f = [&](double s) {
                const double u = s - a;
                double val = c_const * std::pow(u, k + 1) / (k + 1);
                for (int j = 0; j < extra_terms; ++j)
                    val += alpha[static_cast<size_t>(j)] * std::pow(u, k + j + 2) / (k + j + 2);
                return f_a + sigma * val;
            };

            const int grid = 10000;
            const double fb = f(b);
            const double lead = c_const / (k + 1);
            const double tol = 1e-9;
            ++report.growth_checks;
            if (f_a * fb > 0.0) {
                // No zero: one of the two endpoint-anchored bounds holds throughout.
                bool left_ok = true, right_ok = true;
                for (int i = 0; i <= grid; ++i) {
                    const double s = a + (b - a) * i / grid;
                    const double av = std::abs(f(s));
                    if (av < lead * std::pow(s - a, k + 1) - tol) left_ok = false;
                    if (av < lead * std::pow(b - s, k + 1) - tol) right_ok = false;
                }
                if (!left_ok && !right_ok) ++report.growth_violations;
            } else {
                double lo = a, hi = b, flo = f_a;
                for (int iter = 0; iter < 100; ++iter) {
                    const double mid = 0.5 * (lo + hi);
                    const double fm = f(mid);
                    if ((fm > 0.0) == (flo > 0.0)) { lo = mid; flo = fm; } else { hi = mid; }
                }
                const double c_zero = 0.5 * (lo + hi);
                bool ok = true;
                for (int i = 0; i <= grid; ++i) {
                    const double s = a + (b - a) * i / grid;
                    if (std::abs(f(s)) < lead * std::pow(std::abs(c_zero - s), k + 1) - tol) ok = false;
                }
                if (!ok) ++report.growth_violations;
            }
        }
    }
    return report;
}

}  // namespace reachcert::switching
