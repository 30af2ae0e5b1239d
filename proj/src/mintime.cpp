#include "reachcert/mintime.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "reachcert/linalg.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace reachcert::mintime {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bangbang::BangBangControl time_reverse(const bangbang::BangBangControl& u) {
    bangbang::BangBangControl out;
    out.T = u.T;
    out.channels.resize(u.channels.size());
    for (size_t i = 0; i < u.channels.size(); ++i) {
        const auto& ch = u.channels[i];
        auto& rev = out.channels[i];
        const int n_sw = static_cast<int>(ch.switch_times.size());
        rev.initial_sign = (n_sw % 2 == 0) ? ch.initial_sign : -ch.initial_sign;
        for (auto it = ch.switch_times.rbegin(); it != ch.switch_times.rend(); ++it)
            rev.switch_times.push_back(u.T - *it);
    }
    return out;
}

}  // namespace

MinTimeResult min_time_linear(const sysdef::LinearSystem& sys, const Vec& x, double tol,
                              const MinTimeOptions& opts) {
    if (tol < 1e-9) throw std::invalid_argument("min_time_linear: tol must be >= 1e-9");
    if (!sysdef::is_normal(sys)) throw std::invalid_argument("min_time_linear: system is not normal");

    MinTimeResult res;
    res.tol = tol;
    if (x.norm() < 1e-14) return res;  // T(0) = 0

    const sysdef::LinearSystem rev = sysdef::reversed(sys);
    auto outside = [&](double tau) {
        return bangbang::membership(rev, x, tau, opts.membership).status ==
               bangbang::Region::outside;
    };

    double hi = std::max(tol, 1e-6);
    double lo = 0.0;
    while (outside(hi)) {
        ++res.iterations;
        lo = hi;
        hi *= 2.0;
        if (hi > opts.horizon_cap) {
            res.infinite = true;
            res.T = kInf;
            return res;
        }
    }
    while (hi - lo > tol) {
        ++res.iterations;
        const double mid = 0.5 * (lo + hi);
        if (outside(mid)) lo = mid;
        else hi = mid;
    }
    res.T = hi;

    const bangbang::Membership mb = bangbang::membership(rev, x, hi, opts.membership);
    const bangbang::BangBangControl rev_control = bangbang::synthesize_control(rev, mb.argmax, hi);
    res.control = time_reverse(rev_control);
    return res;
}

double TimeGrid::value_at(const Vec2& x) const {
    const int n = nodes();
    const double hx = (hi(0) - lo(0)) / resolution;
    const double hy = (hi(1) - lo(1)) / resolution;
    const double fx = (x(0) - lo(0)) / hx;
    const double fy = (x(1) - lo(1)) / hy;
    if (fx < 0.0 || fy < 0.0 || fx > resolution || fy > resolution) return kInf;
    int ix = std::min(static_cast<int>(fx), resolution - 1);
    int iy = std::min(static_cast<int>(fy), resolution - 1);
    const double ax = fx - ix, ay = fy - iy;
    const double w[4] = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
    const double v[4] = {values[static_cast<size_t>(iy * n + ix)],
                         values[static_cast<size_t>(iy * n + ix + 1)],
                         values[static_cast<size_t>((iy + 1) * n + ix)],
                         values[static_cast<size_t>((iy + 1) * n + ix + 1)]};
    double out = 0.0;
    for (int k = 0; k < 4; ++k)
        if (w[k] > 0.0) out += w[k] * v[k];  // 0 * inf guard
    return out;
}

namespace {

struct Stepper {
    // One exact (linear) or RK4 (polynomial) step of length dt along F + Gu.
    std::vector<Mat2> lin_e;       // per control: e^{A dt}
    std::vector<Vec2> lin_offset;  // per control: Psi(dt) B u
    const sysdef::NonlinearSystem2D* nl = nullptr;
    std::vector<Vec> controls;
    double dt = 0.0;

    Vec2 advance(const Vec2& x, int control_idx) const {
        if (nl == nullptr)
            return lin_e[static_cast<size_t>(control_idx)] * x +
                   lin_offset[static_cast<size_t>(control_idx)];
        const Vec& u = controls[static_cast<size_t>(control_idx)];
        auto f = [&](const Vec2& y) {
            Vec2 v = nl->drift(y);
            for (int i = 0; i < nl->m(); ++i) v += u(i) * nl->control_column(i, y);
            return v;
        };
        const Vec2 k1 = f(x);
        const Vec2 k2 = f(x + 0.5 * dt * k1);
        const Vec2 k3 = f(x + 0.5 * dt * k2);
        const Vec2 k4 = f(x + dt * k3);
        return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
};

std::vector<Vec> vertex_controls(int m) {
    std::vector<Vec> out;
    for (int mask = 0; mask < (1 << m); ++mask) {
        Vec u(m);
        for (int i = 0; i < m; ++i) u(i) = (mask >> i) & 1 ? 1.0 : -1.0;
        out.push_back(u);
    }
    return out;
}

}  // namespace

TimeGrid grid_value_iteration(const sysdef::SystemVariant& sys, const GridSpec& spec,
                              ExecPolicy policy) {
    if (spec.resolution < 64) throw std::invalid_argument("grid_value_iteration: resolution must be >= 64");
    if (!(spec.lo(0) < 0.0 && spec.lo(1) < 0.0 && spec.hi(0) > 0.0 && spec.hi(1) > 0.0))
        throw std::invalid_argument("grid_value_iteration: origin must be inside the bounds");

    const bool is_linear = std::holds_alternative<sysdef::LinearSystem>(sys);
    int m = 0;
    if (is_linear) {
        const auto& lin = std::get<sysdef::LinearSystem>(sys);
        if (lin.n != 2) throw std::invalid_argument("grid_value_iteration: grid oracle is 2-D only");
        m = lin.m;
    } else {
        m = std::get<sysdef::NonlinearSystem2D>(sys).m();
    }
    const std::vector<Vec> controls = vertex_controls(m);

    const int res = spec.resolution;
    const int n = res + 1;
    const double hx = (spec.hi(0) - spec.lo(0)) / res;
    const double hy = (spec.hi(1) - spec.lo(1)) / res;
    const double cell = std::min(hx, hy);

    auto field = [&](const Vec2& x, const Vec& u) {
        if (is_linear) {
            const auto& lin = std::get<sysdef::LinearSystem>(sys);
            return Vec2(lin.A * x + lin.B * u);
        }
        const auto& nl = std::get<sysdef::NonlinearSystem2D>(sys);
        Vec2 v = nl.drift(x);
        for (int i = 0; i < nl.m(); ++i) v += u(i) * nl.control_column(i, x);
        return v;
    };

    double vmax = 0.0;
    for (int i = 0; i <= 32; ++i)
        for (int j = 0; j <= 32; ++j) {
            const Vec2 x(spec.lo(0) + (spec.hi(0) - spec.lo(0)) * i / 32.0,
                         spec.lo(1) + (spec.hi(1) - spec.lo(1)) * j / 32.0);
            for (const Vec& u : controls) vmax = std::max(vmax, field(x, u).norm());
        }
    vmax = std::max(vmax, 1e-12);

    double dt = spec.dt;
    if (dt <= 0.0) dt = 0.4 * cell / vmax;
    else if (dt * vmax > cell)
        throw std::invalid_argument("grid_value_iteration: CFL violation (dt * max speed > cell size)");

    Stepper stepper;
    stepper.dt = dt;
    stepper.controls = controls;
    if (is_linear) {
        const auto& lin = std::get<sysdef::LinearSystem>(sys);
        const Mat e = linalg::expm(lin.A, dt);
        const Mat psi = linalg::integral_expm(lin.A, dt);
        for (const Vec& u : controls) {
            stepper.lin_e.push_back(Mat2(e));
            stepper.lin_offset.push_back(Vec2(psi * (lin.B * u)));
        }
    } else {
        stepper.nl = &std::get<sysdef::NonlinearSystem2D>(sys);
    }

    // Precompute target cell + bilinear weights per node and control; the
    // dynamics do not change between sweeps.
    const int nc = static_cast<int>(controls.size());
    struct Target {
        int base = -1;  // index of the lower-left node, -1 = leaves the box
        double w00 = 0, w10 = 0, w01 = 0, w11 = 0;
    };
    std::vector<Target> targets(static_cast<size_t>(n) * n * nc);
    auto precompute_row = [&](int iy) {
        for (int ix = 0; ix < n; ++ix) {
            const Vec2 x(spec.lo(0) + ix * hx, spec.lo(1) + iy * hy);
            for (int c = 0; c < nc; ++c) {
                const Vec2 y = stepper.advance(x, c);
                Target t;
                const double fx = (y(0) - spec.lo(0)) / hx;
                const double fy = (y(1) - spec.lo(1)) / hy;
                if (fx >= 0.0 && fy >= 0.0 && fx <= res && fy <= res) {
                    int cx = std::min(static_cast<int>(fx), res - 1);
                    int cy = std::min(static_cast<int>(fy), res - 1);
                    const double ax = fx - cx, ay = fy - cy;
                    t.base = cy * n + cx;
                    t.w00 = (1 - ax) * (1 - ay);
                    t.w10 = ax * (1 - ay);
                    t.w01 = (1 - ax) * ay;
                    t.w11 = ax * ay;
                }
                targets[(static_cast<size_t>(iy) * n + ix) * nc + c] = t;
            }
        }
    };
    if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(static)
        for (int iy = 0; iy < n; ++iy) precompute_row(iy);
    } else {
        for (int iy = 0; iy < n; ++iy) precompute_row(iy);
    }

    // Target ball: the cell containing the origin is pinned to 0 together
    // with its immediate node neighborhood. Bilinear interpolation needs a
    // full finite cell before the front can ignite, so a lone zero node
    // would never propagate; the induced bias is below the cell-crossing
    // tolerance of the oracle.
    std::vector<char> pinned(static_cast<size_t>(n) * n, 0);
    const double pin_radius = 1.5 * std::max(hx, hy);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            const Vec2 x(spec.lo(0) + ix * hx, spec.lo(1) + iy * hy);
            if (x.norm() <= pin_radius) pinned[static_cast<size_t>(iy) * n + ix] = 1;
        }

    // Initialize unreached nodes at a large finite cap instead of +inf:
    // bilinear interpolation against literal infinities can never ignite the
    // front when dt < cell. The update operator is unchanged; nodes the
    // relaxation never improves stay at the cap and export as +inf.
    constexpr double kBig = 1e9;
    TimeGrid grid;
    grid.lo = spec.lo;
    grid.hi = spec.hi;
    grid.resolution = res;
    grid.dt = dt;
    grid.values.assign(static_cast<size_t>(n) * n, kBig);
    for (size_t i = 0; i < pinned.size(); ++i)
        if (pinned[i]) grid.values[i] = 0.0;

    std::vector<double> next(grid.values.size());
    std::vector<double> row_change(static_cast<size_t>(n), 0.0);
    const int max_sweeps = 200000;
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        auto sweep_row = [&](int iy) {
            double change = 0.0;
            for (int ix = 0; ix < n; ++ix) {
                const size_t idx = static_cast<size_t>(iy) * n + ix;
                if (pinned[idx]) {
                    next[idx] = 0.0;
                    continue;
                }
                double best = kInf;
                for (int c = 0; c < nc; ++c) {
                    const Target& t = targets[idx * nc + c];
                    if (t.base < 0) continue;
                    const double* v = grid.values.data();
                    double interp = 0.0;  // 0 * inf guard per corner
                    if (t.w00 > 0.0) interp += t.w00 * v[t.base];
                    if (t.w10 > 0.0) interp += t.w10 * v[t.base + 1];
                    if (t.w01 > 0.0) interp += t.w01 * v[t.base + n];
                    if (t.w11 > 0.0) interp += t.w11 * v[t.base + n + 1];
                    best = std::min(best, dt + interp);
                }
                next[idx] = std::min(grid.values[idx], best);
                change = std::max(change, grid.values[idx] - next[idx]);
            }
            row_change[static_cast<size_t>(iy)] = change;
        };
        if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(static)
            for (int iy = 0; iy < n; ++iy) sweep_row(iy);
        } else {
            for (int iy = 0; iy < n; ++iy) sweep_row(iy);
        }
        grid.values.swap(next);
        double change = 0.0;
        for (int iy = 0; iy < n; ++iy) change = std::max(change, row_change[static_cast<size_t>(iy)]);
        if (change < 1e-9) break;
    }
    grid.iterations = sweep + 1;
    for (double& v : grid.values)
        if (v > 0.5 * kBig) v = kInf;
    return grid;
}

OracleComparison compare_oracle(const sysdef::LinearSystem& sys, const std::vector<Vec>& points,
                                double tol, const TimeGrid& grid, const MinTimeOptions& opts) {
    OracleComparison out;
    out.rows.resize(points.size());
    const int np = static_cast<int>(points.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < np; ++i) {
        const Vec& x = points[static_cast<size_t>(i)];
        OracleRow row;
        row.x = x;
        const MinTimeResult r = min_time_linear(sys, x, tol, opts);
        row.t_bisect = r.infinite ? kInf : r.T;
        row.t_grid = grid.value_at(Vec2(x(0), x(1)));
        row.gap = std::abs(row.t_bisect - row.t_grid);
        out.rows[static_cast<size_t>(i)] = row;
    }
    for (const OracleRow& row : out.rows) out.max_abs_gap = std::max(out.max_abs_gap, row.gap);
    return out;
}

}  // namespace reachcert::mintime
