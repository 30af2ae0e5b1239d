#include "reachcert/bangbang.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

#include "reachcert/linalg.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace reachcert::bangbang {

namespace {

constexpr double kExtremalityTol = 1e-7;

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

int BangBangControl::value(int channel, double t) const {
    const Channel& ch = channels[static_cast<size_t>(channel)];
    int flips = 0;
    for (double s : ch.switch_times) {
        if (s <= t) ++flips;
        else break;
    }
    return (flips % 2 == 0) ? ch.initial_sign : -ch.initial_sign;
}

namespace {

// Zeros of s -> <zeta, e^{As} b> in (0, T) found by a dense sign scan plus
// bisection; no normality requirement (identically-zero channels simply
// report no sign changes).
struct ChannelScan {
    std::vector<double> sign_change_times;  // ascending in s
    int terminal_sign = 0;                  // sign of g on the last segment before T
    double max_abs = 0.0;
};

ChannelScan scan_channel(const Mat& a, const Vec& b, const switching::DenseGrid& grid,
                         const Vec& zeta) {
    ChannelScan scan;
    const int steps = grid.steps();
    const double h = grid.h();
    std::vector<double> g(static_cast<size_t>(steps + 1));
    int argmax = 0;
    for (int k = 0; k <= steps; ++k) {
        g[static_cast<size_t>(k)] = grid.value(zeta, 0, k);
        if (std::abs(g[static_cast<size_t>(k)]) > scan.max_abs) {
            scan.max_abs = std::abs(g[static_cast<size_t>(k)]);
            argmax = k;
        }
    }
    auto eval = [&](double s) { return zeta.dot(linalg::expm(a, s) * b); };
    for (int k = 0; k < steps; ++k) {
        const double lo = g[static_cast<size_t>(k)];
        const double hi = g[static_cast<size_t>(k + 1)];
        if (lo == 0.0) {
            // Zero exactly on a grid node: record it if the neighbors flip sign.
            if (k > 0 && sign_of(g[static_cast<size_t>(k - 1)]) * sign_of(hi) < 0) {
                const double t = k * h;
                if (t > 1e-12 && t < grid.T() - 1e-12) scan.sign_change_times.push_back(t);
            }
            continue;
        }
        if (sign_of(lo) == sign_of(hi) || hi == 0.0) continue;
        double slo = k * h, shi = (k + 1) * h, flo = lo;
        for (int iter = 0; iter < 200 && shi - slo > 1e-12; ++iter) {
            const double mid = 0.5 * (slo + shi);
            const double fm = eval(mid);
            if (fm == 0.0) { slo = shi = mid; break; }
            if ((fm > 0.0) == (flo > 0.0)) { slo = mid; flo = fm; } else { shi = mid; }
        }
        const double t = 0.5 * (slo + shi);
        if (t > 1e-12 && t < grid.T() - 1e-12) scan.sign_change_times.push_back(t);
    }
    const double last = scan.sign_change_times.empty() ? 0.0 : scan.sign_change_times.back();
    if (argmax * h > last) {
        scan.terminal_sign = sign_of(g[static_cast<size_t>(argmax)]);
    } else {
        // Probe the tail segment at its midpoint and near T.
        const double m1 = eval(0.5 * (last + grid.T()));
        const double m2 = eval(last + 0.999 * (grid.T() - last));
        scan.terminal_sign = std::abs(m1) >= std::abs(m2) ? sign_of(m1) : sign_of(m2);
    }
    return scan;
}

struct SupportContext {
    const sysdef::LinearSystem* sys = nullptr;
    double T = 0.0;
    std::vector<switching::DenseGrid> grids;  // one per control column

    SupportContext(const sysdef::LinearSystem& s, double horizon) : sys(&s), T(horizon) {
        grids.reserve(static_cast<size_t>(s.m));
        for (int i = 0; i < s.m; ++i) grids.emplace_back(s.A, Vec(s.B.col(i)), horizon);
    }
};

double support_with_context(const SupportContext& ctx, const Vec& zeta) {
    if (zeta.norm() == 0.0) return 0.0;
    const sysdef::LinearSystem& sys = *ctx.sys;
    double total = 0.0;
    for (int i = 0; i < sys.m; ++i) {
        const Vec b = sys.B.col(i);
        const ChannelScan scan = scan_channel(sys.A, b, ctx.grids[static_cast<size_t>(i)], zeta);
        std::vector<double> edges;
        edges.push_back(0.0);
        for (double t : scan.sign_change_times) edges.push_back(t);
        edges.push_back(ctx.T);
        for (size_t k = 0; k + 1 < edges.size(); ++k) {
            const double s0 = edges[k];
            const double len = edges[k + 1] - edges[k];
            if (len <= 0.0) continue;
            // integral_{s0}^{s1} e^{As} b ds = e^{A s0} Psi(len) b
            const Vec seg = linalg::expm(sys.A, s0) * (linalg::integral_expm(sys.A, len) * b);
            total += std::abs(zeta.dot(seg));
        }
    }
    return total;
}

BangBangControl synthesize_with_context(const SupportContext& ctx, const Vec& zeta) {
    const sysdef::LinearSystem& sys = *ctx.sys;
    BangBangControl control;
    control.T = ctx.T;
    control.channels.resize(static_cast<size_t>(sys.m));
    for (int i = 0; i < sys.m; ++i) {
        const ChannelScan scan =
            scan_channel(sys.A, sys.B.col(i), ctx.grids[static_cast<size_t>(i)], zeta);
        if (scan.max_abs < 1e-12)
            throw std::logic_error(
                "synthesize_control: switching function numerically zero on a channel "
                "(inconsistent with normality)");
        BangBangControl::Channel& ch = control.channels[static_cast<size_t>(i)];
        // u_i(t) = sign g_i(T - t): the terminal sign of g is the initial control sign.
        ch.initial_sign = scan.terminal_sign;
        for (auto it = scan.sign_change_times.rbegin(); it != scan.sign_change_times.rend(); ++it)
            ch.switch_times.push_back(ctx.T - *it);
    }
    return control;
}

}  // namespace

BangBangControl synthesize_control(const sysdef::LinearSystem& sys, const Vec& zeta, double T) {
    if (!sysdef::is_normal(sys)) throw std::invalid_argument("synthesize_control: system is not normal");
    if (!(T > 0.0)) throw std::invalid_argument("synthesize_control: horizon must be positive");
    const SupportContext ctx(sys, T);
    return synthesize_with_context(ctx, zeta);
}

Vec integrate_linear_from(const sysdef::LinearSystem& sys, const BangBangControl& u, const Vec& x0) {
    std::vector<double> edges{0.0, u.T};
    for (const auto& ch : u.channels)
        for (double t : ch.switch_times) edges.push_back(t);
    std::sort(edges.begin(), edges.end());

    Vec x = x0;
    const int n = sys.n;
    for (size_t k = 0; k + 1 < edges.size(); ++k) {
        const double len = edges[k + 1] - edges[k];
        if (len <= 0.0) continue;
        const double mid = 0.5 * (edges[k] + edges[k + 1]);
        Vec uvec(sys.m);
        for (int i = 0; i < sys.m; ++i) uvec(i) = u.value(i, mid);
        // exp of [[A, B u], [0, 0]] advances (x, 1) across the segment.
        Mat aug = Mat::Zero(n + 1, n + 1);
        aug.topLeftCorner(n, n) = sys.A;
        aug.topRightCorner(n, 1) = sys.B * uvec;
        const Mat e = linalg::expm(aug, len);
        x = e.topLeftCorner(n, n) * x + e.topRightCorner(n, 1);
    }
    return x;
}

Vec integrate_linear(const sysdef::LinearSystem& sys, const BangBangControl& u) {
    return integrate_linear_from(sys, u, Vec::Zero(sys.n));
}

double support_function(const sysdef::LinearSystem& sys, const Vec& zeta, double T) {
    if (!(T > 0.0)) throw std::invalid_argument("support_function: horizon must be positive");
    const SupportContext ctx(sys, T);
    return support_with_context(ctx, zeta);
}

namespace {

std::vector<Vec> icosphere_directions(int min_count) {
    const double phi = 0.5 * (1.0 + std::sqrt(5.0));
    std::vector<Eigen::Vector3d> verts = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
    for (auto& v : verts) v.normalize();
    std::vector<std::array<int, 3>> faces = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
        {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
        {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};

    while (static_cast<int>(verts.size()) < min_count) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const std::pair<int, int> key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            Eigen::Vector3d v = (verts[static_cast<size_t>(a)] + verts[static_cast<size_t>(b)]).normalized();
            verts.push_back(v);
            const int idx = static_cast<int>(verts.size()) - 1;
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            const int a = mid(f[0], f[1]), b = mid(f[1], f[2]), c = mid(f[2], f[0]);
            next.push_back({f[0], a, c});
            next.push_back({f[1], b, a});
            next.push_back({f[2], c, b});
            next.push_back({a, b, c});
        }
        faces = std::move(next);
    }
    std::vector<Vec> out;
    out.reserve(verts.size());
    for (const auto& v : verts) {
        Vec d(3);
        d << v(0), v(1), v(2);
        out.push_back(d);
    }
    return out;
}

}  // namespace

std::vector<Vec> direction_grid(int dim, int count, std::uint64_t seed) {
    std::vector<Vec> dirs;
    dirs.reserve(static_cast<size_t>(count));
    if (dim == 2) {
        for (int k = 0; k < count; ++k) {
            const double th = 2.0 * M_PI * k / count;
            Vec d(2);
            d << std::cos(th), std::sin(th);
            dirs.push_back(d);
        }
        return dirs;
    }
    if (dim == 3) {
        // Fibonacci sphere: quasi-uniform for arbitrary counts.
        const double ga = M_PI * (3.0 - std::sqrt(5.0));
        for (int k = 0; k < count; ++k) {
            const double z = 1.0 - 2.0 * (k + 0.5) / count;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double th = ga * k;
            Vec d(3);
            d << r * std::cos(th), r * std::sin(th), z;
            dirs.push_back(d);
        }
        return dirs;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int k = 0; k < count; ++k) {
        Vec d(dim);
        do {
            for (int i = 0; i < dim; ++i) d(i) = gauss(rng);
        } while (d.norm() < 1e-12);
        dirs.push_back(d.normalized());
    }
    return dirs;
}

Membership membership(const sysdef::LinearSystem& sys, const Vec& x, double T,
                      const MembershipOptions& opts) {
    if (!(T > 0.0)) throw std::invalid_argument("membership: horizon must be positive");
    const SupportContext ctx(sys, T);
    auto objective = [&](const Vec& zeta) { return zeta.dot(x) - support_with_context(ctx, zeta); };

    std::vector<Vec> dirs;
    if (sys.n == 2) dirs = direction_grid(2, opts.dirs_2d, opts.seed);
    else if (sys.n == 3) dirs = icosphere_directions(opts.dirs_3d);
    else dirs = direction_grid(sys.n, opts.dirs_high, opts.seed);

    double best = -std::numeric_limits<double>::infinity();
    Vec best_dir;
    for (const Vec& d : dirs) {
        const double val = objective(d);
        if (val > best) {
            best = val;
            best_dir = d;
        }
    }

    // Local polish: tangent-step hill climb with shrinking step.
    double step = std::sqrt(2.0 * M_PI / dirs.size());
    for (int round = 0; round < opts.polish_rounds && step > 1e-10; ++round) {
        bool improved = false;
        for (int axis = 0; axis < sys.n && !improved; ++axis) {
            Vec t = Vec::Zero(sys.n);
            t(axis) = 1.0;
            t -= t.dot(best_dir) * best_dir;
            if (t.norm() < 1e-12) continue;
            t.normalize();
            for (double s : {step, -step}) {
                const Vec cand = (best_dir + s * t).normalized();
                const double val = objective(cand);
                if (val > best) {
                    best = val;
                    best_dir = cand;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) step *= 0.5;
    }

    Membership out;
    out.margin = best;
    out.argmax = best_dir;
    const double tol = 1e-7 * (1.0 + x.norm());
    if (best < -tol) out.status = Region::inside;
    else if (best <= tol) out.status = Region::boundary;
    else out.status = Region::outside;
    return out;
}

std::vector<BoundaryPoint> sample_boundary(const sysdef::LinearSystem& sys, double T, int n_dirs,
                                           ExecPolicy policy) {
    if (n_dirs < 8) throw std::invalid_argument("sample_boundary: need at least 8 directions");
    if (!sysdef::is_normal(sys)) throw std::invalid_argument("sample_boundary: system is not normal");
    const SupportContext ctx(sys, T);
    const std::vector<Vec> dirs = direction_grid(sys.n, n_dirs);

    std::vector<BoundaryPoint> points(static_cast<size_t>(n_dirs));
    std::vector<int> failed(static_cast<size_t>(n_dirs), 0);

    auto work = [&](int k) {
        const Vec& zeta = dirs[static_cast<size_t>(k)];
        BoundaryPoint bp;
        bp.zeta = zeta;
        bp.T = T;
        bp.control = synthesize_with_context(ctx, zeta);
        bp.x = integrate_linear(sys, bp.control);
        const double h = support_with_context(ctx, zeta);
        if (std::abs(zeta.dot(bp.x) - h) > kExtremalityTol) failed[static_cast<size_t>(k)] = 1;
        points[static_cast<size_t>(k)] = std::move(bp);
    };

    if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int k = 0; k < n_dirs; ++k) work(k);
    } else {
        for (int k = 0; k < n_dirs; ++k) work(k);
    }
    for (int k = 0; k < n_dirs; ++k)
        if (failed[static_cast<size_t>(k)])
            throw std::logic_error("sample_boundary: extremality certificate failed for a direction");
    return points;
}

}  // namespace reachcert::bangbang
