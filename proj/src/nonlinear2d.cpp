#include "reachcert/nonlinear2d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "reachcert/fixtures.hpp"
#include "reachcert/linalg.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace reachcert::nonlinear2d {

namespace {

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

// Integration state: (y, p, W) with W the fundamental solution of the
// adjoint variational equation.
struct PmpState {
    Vec2 y = Vec2::Zero();
    Vec2 p = Vec2::Zero();
    Mat2 w = Mat2::Identity();
};

PmpState axpy(const PmpState& a, double c, const PmpState& b) {
    PmpState out;
    out.y = a.y + c * b.y;
    out.p = a.p + c * b.p;
    out.w = a.w + c * b.w;
    return out;
}

struct Dynamics {
    const sysdef::NonlinearSystem2D* sys;

    PmpState rate(const PmpState& s, const std::vector<int>& u) const {
        PmpState d;
        d.y = sys->drift(s.y);
        Mat2 a = sys->F.jacobian(s.y);
        for (int i = 0; i < sys->m(); ++i) {
            d.y += static_cast<double>(u[static_cast<size_t>(i)]) * sys->control_column(i, s.y);
            a += static_cast<double>(u[static_cast<size_t>(i)]) *
                 sys->G[static_cast<size_t>(i)].jacobian(s.y);
        }
        d.p = -a.transpose() * s.p;
        d.w = -a.transpose() * s.w;
        return d;
    }

    PmpState rk4(const PmpState& s, const std::vector<int>& u, double h) const {
        const PmpState k1 = rate(s, u);
        const PmpState k2 = rate(axpy(s, 0.5 * h, k1), u);
        const PmpState k3 = rate(axpy(s, 0.5 * h, k2), u);
        const PmpState k4 = rate(axpy(s, h, k3), u);
        PmpState out = s;
        out.y += h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
        out.p += h / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
        out.w += h / 6.0 * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w);
        return out;
    }

    double event(const PmpState& s, int channel) const {
        return s.p.dot(sys->control_column(channel, s.y));
    }

    // d/dt <p, G_i(y)> along the flow, including the multi-input cross terms.
    double event_rate(const PmpState& s, const std::vector<int>& u, int channel) const {
        const Vec2 f = sys->drift(s.y);
        const Mat2 df = sys->F.jacobian(s.y);
        const Mat2 dgi = sys->G[static_cast<size_t>(channel)].jacobian(s.y);
        const Vec2 gi = sys->control_column(channel, s.y);
        Vec2 bracket = dgi * f - df * gi;
        for (int j = 0; j < sys->m(); ++j) {
            const Mat2 dgj = sys->G[static_cast<size_t>(j)].jacobian(s.y);
            const Vec2 gj = sys->control_column(j, s.y);
            bracket += static_cast<double>(u[static_cast<size_t>(j)]) * (dgi * gj - dgj * gi);
        }
        return s.p.dot(bracket);
    }
};

// Cubic Hermite interpolation of the state across one RK4 step.
PmpState hermite(const PmpState& s0, const PmpState& d0, const PmpState& s1, const PmpState& d1,
                 double h, double theta) {
    const double t = theta;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
    const double h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t);
    const double h11 = t * t * (t - 1);
    PmpState out;
    out.y = h00 * s0.y + h10 * h * d0.y + h01 * s1.y + h11 * h * d1.y;
    out.p = h00 * s0.p + h10 * h * d0.p + h01 * s1.p + h11 * h * d1.p;
    out.w = h00 * s0.w + h10 * h * d0.w + h01 * s1.w + h11 * h * d1.w;
    return out;
}

struct IntegrationResult {
    std::vector<double> times;
    std::vector<PmpState> samples;
    std::vector<std::vector<double>> switch_times;  // per channel
    std::vector<int> initial_signs;
    bool singular_flag = false;
};

IntegrationResult integrate_pmp(const sysdef::NonlinearSystem2D& sys, const PmpState& start,
                                double t0, double t1, double dt,
                                const std::vector<int>& start_signs, const ExtremalOptions& opts) {
    const Dynamics dyn{&sys};
    const int m = sys.m();
    const int n_steps = std::max(1, static_cast<int>(std::ceil((t1 - t0) / dt - 1e-9)));
    const double h_grid = (t1 - t0) / n_steps;

    IntegrationResult result;
    result.switch_times.resize(static_cast<size_t>(m));
    result.initial_signs = start_signs;
    result.times.reserve(static_cast<size_t>(n_steps + 1));
    result.samples.reserve(static_cast<size_t>(n_steps + 1));
    result.times.push_back(t0);
    result.samples.push_back(start);

    std::vector<int> signs = start_signs;
    PmpState state = start;
    double t = t0;
    int grid_next = 1;
    double last_switch = -1.0;

    while (grid_next <= n_steps) {
        const double target = t0 + grid_next * h_grid;
        const double h = target - t;
        const PmpState d0 = dyn.rate(state, signs);
        PmpState next = dyn.rk4(state, signs, h);
        const PmpState d1 = dyn.rate(next, signs);

        // Flat-event guard: singular arc suspicion.
        for (int i = 0; i < m; ++i) {
            const double e0 = dyn.event(state, i);
            const double em = dyn.event(hermite(state, d0, next, d1, h, 0.5), i);
            const double e1 = dyn.event(next, i);
            if (std::abs(e0) < opts.flat_event_tol && std::abs(em) < opts.flat_event_tol &&
                std::abs(e1) < opts.flat_event_tol)
                result.singular_flag = true;
        }

        // Earliest sign-change event across channels.
        int hit_channel = -1;
        double hit_theta = 2.0;
        for (int i = 0; i < m; ++i) {
            const double e1 = dyn.event(next, i);
            // Integrator roundoff keeps |e| within ~1e-14 of zero at a grazing
            // endpoint; require a clearly resolved flip before switching.
            if (sign_of(e1) == -signs[static_cast<size_t>(i)] && std::abs(e1) > 1e-13) {
                // Bisect the Hermite interpolant for the crossing.
                double lo = 0.0, hi = 1.0;
                double elo = dyn.event(state, i);
                if (sign_of(elo) != signs[static_cast<size_t>(i)]) elo = signs[static_cast<size_t>(i)] * 1e-30;
                for (int iter = 0; iter < 100 && (hi - lo) * h > opts.event_time_tol; ++iter) {
                    const double mid = 0.5 * (lo + hi);
                    const double em = dyn.event(hermite(state, d0, next, d1, h, mid), i);
                    if (em == 0.0) { lo = hi = mid; break; }
                    if ((em > 0.0) == (elo > 0.0)) { lo = mid; elo = em; } else { hi = mid; }
                }
                const double theta = 0.5 * (lo + hi);
                if (theta < hit_theta) {
                    hit_theta = theta;
                    hit_channel = i;
                }
            }
        }

        if (hit_channel >= 0 && hit_theta > 0.0 && hit_theta < 1.0) {
            const double t_star = t + hit_theta * h;
            if (t_star - t > 1e-15) state = dyn.rk4(state, signs, t_star - t);
            t = t_star;
            signs[static_cast<size_t>(hit_channel)] = -signs[static_cast<size_t>(hit_channel)];
            result.switch_times[static_cast<size_t>(hit_channel)].push_back(t_star);
            last_switch = t_star;
            continue;
        }

        state = next;
        t = target;
        result.times.push_back(t);
        result.samples.push_back(state);
        ++grid_next;
    }
    (void)last_switch;
    return result;
}

std::vector<int> initial_signs_at(const sysdef::NonlinearSystem2D& sys, const PmpState& s,
                                  bool* singular) {
    const Dynamics dyn{&sys};
    std::vector<int> signs(static_cast<size_t>(sys.m()), 1);
    std::vector<int> probe(static_cast<size_t>(sys.m()), 1);
    for (int i = 0; i < sys.m(); ++i) {
        const double e = dyn.event(s, i);
        if (std::abs(e) > 1e-12) {
            signs[static_cast<size_t>(i)] = sign_of(e);
        } else {
            const double er = dyn.event_rate(s, probe, i);
            if (std::abs(er) > 1e-12) signs[static_cast<size_t>(i)] = sign_of(er);
            else if (singular) *singular = true;
        }
    }
    return signs;
}

}  // namespace

double maximized_hamiltonian(const sysdef::NonlinearSystem2D& sys, const Vec2& x, const Vec2& p) {
    double h = p.dot(sys.drift(x));
    for (int i = 0; i < sys.m(); ++i) h += std::abs(p.dot(sys.control_column(i, x)));
    return h;
}

double minimized_hamiltonian(const sysdef::NonlinearSystem2D& sys, const Vec2& x, const Vec2& zeta) {
    double h = zeta.dot(sys.drift(x));
    for (int i = 0; i < sys.m(); ++i) h -= std::abs(zeta.dot(sys.control_column(i, x)));
    return h;
}

ExtremalTrajectory integrate_extremal(const sysdef::NonlinearSystem2D& sys, const Vec2& lambda0,
                                      double tau, double dt, const ExtremalOptions& opts) {
    if (!(tau > 0.0) || tau > opts.tau_cap)
        throw std::invalid_argument("integrate_extremal: tau outside (0, tau_cap]");
    if (dt > tau / 256.0) throw std::invalid_argument("integrate_extremal: dt must be <= tau/256");
    if (lambda0.norm() < 1e-14) throw std::invalid_argument("integrate_extremal: lambda0 must be nonzero");

    ExtremalTrajectory traj;
    traj.sys = sys;
    traj.lambda0 = lambda0.normalized();
    traj.tau = tau;

    PmpState start;
    start.p = traj.lambda0;
    bool singular = false;
    const std::vector<int> signs = initial_signs_at(sys, start, &singular);

    IntegrationResult run = integrate_pmp(sys, start, 0.0, tau, dt, signs, opts);
    traj.singular_flag = run.singular_flag || singular;
    traj.dt = run.times.size() > 1 ? run.times[1] - run.times[0] : dt;
    traj.times = std::move(run.times);
    traj.states.reserve(traj.times.size());
    traj.adjoints.reserve(traj.times.size());
    traj.fundamentals.reserve(traj.times.size());
    traj.hamiltonians.reserve(traj.times.size());
    for (const PmpState& s : run.samples) {
        traj.states.push_back(s.y);
        traj.adjoints.push_back(s.p);
        traj.fundamentals.push_back(s.w);
        traj.hamiltonians.push_back(maximized_hamiltonian(sys, s.y, s.p));
    }
    traj.control.T = tau;
    traj.control.channels.resize(static_cast<size_t>(sys.m()));
    for (int i = 0; i < sys.m(); ++i) {
        traj.control.channels[static_cast<size_t>(i)].initial_sign = signs[static_cast<size_t>(i)];
        traj.control.channels[static_cast<size_t>(i)].switch_times =
            run.switch_times[static_cast<size_t>(i)];
    }
    traj.certified = sys.flags.all() && !traj.singular_flag;
    return traj;
}

HamiltonianConstancy hamiltonian_constancy(const ExtremalTrajectory& traj) {
    std::vector<double> h = traj.hamiltonians;
    std::sort(h.begin(), h.end());
    HamiltonianConstancy out;
    out.C = h[h.size() / 2];
    for (double v : traj.hamiltonians) out.max_dev = std::max(out.max_dev, std::abs(v - out.C));
    return out;
}

namespace {

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    auto cross = [](const Vec2& u, const Vec2& v) { return u(0) * v(1) - u(1) * v(0); };
    const double d1 = cross(Vec2(d - c), Vec2(a - c));
    const double d2 = cross(Vec2(d - c), Vec2(b - c));
    const double d3 = cross(Vec2(b - a), Vec2(c - a));
    const double d4 = cross(Vec2(b - a), Vec2(d - a));
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

}  // namespace

NonlinearBoundary sample_nonlinear_boundary(const sysdef::NonlinearSystem2D& sys, double tau,
                                            int n_dirs, double dt, ExecPolicy policy,
                                            const ExtremalOptions& opts) {
    if (n_dirs < 8) throw std::invalid_argument("sample_nonlinear_boundary: need at least 8 directions");
    if (dt <= 0.0) dt = tau / 2048.0;

    NonlinearBoundary out;
    out.tau = tau;
    out.samples.resize(static_cast<size_t>(n_dirs));

    auto work = [&](int k) {
        const double th = 2.0 * M_PI * k / n_dirs;
        const Vec2 lambda0(std::cos(th), std::sin(th));
        const ExtremalTrajectory traj = integrate_extremal(sys, lambda0, tau, dt, opts);
        BoundarySample s;
        s.lambda0 = lambda0;
        s.endpoint = traj.states.back();
        s.terminal_adjoint = traj.adjoints.back();
        s.singular = traj.singular_flag;
        s.n_switches = 0;
        for (int i = 0; i < sys.m(); ++i) s.n_switches += traj.control.n_switches(i);
        s.min_adjoint_norm = std::numeric_limits<double>::infinity();
        for (const Vec2& p : traj.adjoints) s.min_adjoint_norm = std::min(s.min_adjoint_norm, p.norm());
        out.samples[static_cast<size_t>(k)] = s;
    };

    if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int k = 0; k < n_dirs; ++k) work(k);
    } else {
        for (int k = 0; k < n_dirs; ++k) work(k);
    }

    for (const BoundarySample& s : out.samples)
        if (s.singular || s.min_adjoint_norm < 1e-8) ++out.uncertified_count;
    out.certified_mode = sys.flags.all() && out.uncertified_count == 0;

    // Simple closed curve at sampling resolution: no proper intersection
    // between non-adjacent polyline segments. Corner fans map whole ranges
    // of covectors to one endpoint, so coincident consecutive samples are
    // merged first (their roundoff-length segments carry no geometry).
    std::vector<Vec2> poly;
    double scale = 0.0;
    for (const BoundarySample& s : out.samples) scale = std::max(scale, s.endpoint.norm());
    for (const BoundarySample& s : out.samples) {
        if (!poly.empty() && (s.endpoint - poly.back()).norm() <= 1e-10 * (1.0 + scale)) continue;
        poly.push_back(s.endpoint);
    }
    while (poly.size() > 1 && (poly.front() - poly.back()).norm() <= 1e-10 * (1.0 + scale))
        poly.pop_back();
    out.closed_simple = true;
    const int n = static_cast<int>(poly.size());
    for (int i = 0; i < n && out.closed_simple; ++i) {
        const Vec2& a = poly[static_cast<size_t>(i)];
        const Vec2& b = poly[static_cast<size_t>((i + 1) % n)];
        for (int j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;  // adjacent through the wrap
            const Vec2& c = poly[static_cast<size_t>(j)];
            const Vec2& d = poly[static_cast<size_t>((j + 1) % n)];
            if (segments_intersect(a, b, c, d)) {
                out.closed_simple = false;
                break;
            }
        }
    }
    return out;
}

namespace {

double comparison_khat(const ExtremalTrajectory& traj, double t_min, double switch_guard) {
    const sysdef::NonlinearSystem2D& sys = traj.sys;
    const Dynamics dyn{&sys};
    const Mat2 a0 = sys.F.linear_term();
    const Vec2 zeta = traj.adjoints.back();
    const double tau = traj.tau;
    double khat = 0.0;

    std::vector<double> all_switches;
    for (const auto& ch : traj.control.channels)
        for (double s : ch.switch_times) all_switches.push_back(s);

    for (size_t k = 0; k < traj.times.size(); ++k) {
        const double t = traj.times[k];
        if (t < t_min) continue;  // 0/0 guard
        bool near_switch = false;
        for (double s : all_switches)
            if (std::abs(t - s) < switch_guard) near_switch = true;
        if (near_switch) continue;

        PmpState state;
        state.y = traj.states[k];
        state.p = traj.adjoints[k];
        const Vec2 p0 = linalg::expm(a0.transpose(), tau - t) * zeta;

        std::vector<int> u(static_cast<size_t>(sys.m()));
        for (int i = 0; i < sys.m(); ++i) u[static_cast<size_t>(i)] = traj.control.value(i, t);

        for (int i = 0; i < sys.m(); ++i) {
            const Vec2 g0col = sys.G[static_cast<size_t>(i)].constant_term();
            const double g = dyn.event(state, i);
            const double g0 = p0.dot(g0col);
            khat = std::max(khat, std::abs(g - g0) / t);
            const double gdot = dyn.event_rate(state, u, i);
            const double g0dot = -p0.dot(a0 * g0col);
            khat = std::max(khat, std::abs(gdot - g0dot) / t);
        }
    }
    return khat;
}

}  // namespace

SwitchingComparison switching_comparison(const ExtremalTrajectory& traj) {
    SwitchingComparison out;
    // Identical probe window for both resolutions, anchored at the coarse dt.
    const double t_min = 10.0 * traj.dt;
    const double guard = 2.0 * traj.dt;
    out.K_hat = comparison_khat(traj, t_min, guard);
    const ExtremalTrajectory refined =
        integrate_extremal(traj.sys, traj.lambda0, traj.tau, 0.5 * traj.dt);
    out.K_hat_refined = comparison_khat(refined, t_min, guard);
    const double scale = std::max(out.K_hat_refined, 1e-9);
    out.ok = std::isfinite(out.K_hat) && std::isfinite(out.K_hat_refined) &&
             std::abs(out.K_hat - out.K_hat_refined) <= 0.25 * scale;
    return out;
}

ExtremalTrajectory extend_optimal(const ExtremalTrajectory& traj, double delta,
                                  const ExtremalOptions& opts) {
    if (!traj.certified) throw std::invalid_argument("extend_optimal: trajectory is not certified");
    if (!(delta > 0.0) || delta > traj.tau / 4.0)
        throw std::invalid_argument("extend_optimal: delta outside (0, tau/4]");

    const sysdef::NonlinearSystem2D& sys = traj.sys;
    const Dynamics dyn{&sys};
    PmpState terminal;
    terminal.y = traj.states.back();
    terminal.p = traj.adjoints.back();
    terminal.w = traj.fundamentals.back();

    std::vector<int> terminal_signs(static_cast<size_t>(sys.m()));
    std::vector<int> u_now(static_cast<size_t>(sys.m()));
    for (int i = 0; i < sys.m(); ++i)
        u_now[static_cast<size_t>(i)] = traj.control.value(i, traj.tau - 1e-12);
    for (int i = 0; i < sys.m(); ++i) {
        const double g = dyn.event(terminal, i);
        if (g > 1e-9) {
            terminal_signs[static_cast<size_t>(i)] = 1;
        } else if (g < -1e-9) {
            terminal_signs[static_cast<size_t>(i)] = -1;
        } else {
            const double gdot = dyn.event_rate(terminal, u_now, i);
            if (std::abs(gdot) <= 1e-9)
                throw std::runtime_error(
                    "extend_optimal: g(tau) and g'(tau) both vanish; extension refused");
            terminal_signs[static_cast<size_t>(i)] = sign_of(gdot);
        }
    }

    IntegrationResult ext =
        integrate_pmp(sys, terminal, traj.tau, traj.tau + delta, traj.dt, terminal_signs, opts);

    ExtremalTrajectory out = traj;
    out.tau = traj.tau + delta;
    out.singular_flag = traj.singular_flag || ext.singular_flag;
    for (size_t k = 1; k < ext.times.size(); ++k) {
        out.times.push_back(ext.times[k]);
        out.states.push_back(ext.samples[k].y);
        out.adjoints.push_back(ext.samples[k].p);
        out.fundamentals.push_back(ext.samples[k].w);
        out.hamiltonians.push_back(maximized_hamiltonian(sys, ext.samples[k].y, ext.samples[k].p));
    }
    out.control.T = out.tau;
    for (int i = 0; i < sys.m(); ++i) {
        auto& ch = out.control.channels[static_cast<size_t>(i)];
        if (terminal_signs[static_cast<size_t>(i)] != u_now[static_cast<size_t>(i)])
            ch.switch_times.push_back(traj.tau);
        for (double s : ext.switch_times[static_cast<size_t>(i)]) ch.switch_times.push_back(s);
    }
    out.certified = sys.flags.all() && !out.singular_flag;
    return out;
}

Vec2 integrate_controlled(const sysdef::NonlinearSystem2D& sys,
                          const bangbang::BangBangControl& control, double dt) {
    if (dt <= 0.0) dt = control.T / 4096.0;
    std::vector<double> edges{0.0, control.T};
    for (const auto& ch : control.channels)
        for (double t : ch.switch_times) edges.push_back(t);
    std::sort(edges.begin(), edges.end());

    auto field = [&](const Vec2& y, const Vec& u) {
        Vec2 v = sys.drift(y);
        for (int i = 0; i < sys.m(); ++i) v += u(i) * sys.control_column(i, y);
        return v;
    };

    Vec2 y = Vec2::Zero();
    for (size_t k = 0; k + 1 < edges.size(); ++k) {
        const double len = edges[k + 1] - edges[k];
        if (len <= 0.0) continue;
        const double mid = 0.5 * (edges[k] + edges[k + 1]);
        Vec u(sys.m());
        for (int i = 0; i < sys.m(); ++i) u(i) = control.value(i, mid);
        const int steps = std::max(1, static_cast<int>(std::ceil(len / dt - 1e-12)));
        const double h = len / steps;
        for (int s = 0; s < steps; ++s) {
            const Vec2 k1 = field(y, u);
            const Vec2 k2 = field(y + 0.5 * h * k1, u);
            const Vec2 k3 = field(y + 0.5 * h * k2, u);
            const Vec2 k4 = field(y + h * k3, u);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }
    return y;
}

CounterexampleTable reproduce_counterexample(double tau, const std::vector<double>& s_grid) {
    if (!(tau > 0.0)) throw std::invalid_argument("reproduce_counterexample: tau must be positive");
    const sysdef::NonlinearSystem2D sys = fixtures::corner_example();
    const double root = std::sqrt(4.0 + tau * tau);
    const Vec2 zeta(2.0 / root, -tau / root);
    const Vec2 base(tau * tau / 4.0, 0.0);

    CounterexampleTable table;
    table.tau = tau;
    table.reach_bound = 8.0 / ((16.0 + std::pow(tau, 4)) * root);

    for (double s : s_grid) {
        bangbang::BangBangControl u;
        u.T = tau;
        u.channels.resize(1);
        u.channels[0].initial_sign = 1;
        if (s > 0.0 && s < 1.0) u.channels[0].switch_times.push_back(s * tau);
        CounterexampleRow row;
        row.s = s;
        row.endpoint = integrate_controlled(sys, u);
        const Vec2 expected(s * s * tau * tau, tau * (2.0 * s - 1.0));
        row.endpoint_err = (row.endpoint - expected).norm();
        row.inner = zeta.dot(Vec2(row.endpoint - base));
        row.inner_closed = 2.0 * tau * tau * (s - 0.5) * (s - 0.5) / root;
        const double dist2 = (row.endpoint - base).squaredNorm();
        row.reach_ratio = dist2 > 1e-18 ? row.inner / dist2 : 0.0;
        table.rows.push_back(row);
        table.max_endpoint_err = std::max(table.max_endpoint_err, row.endpoint_err);
        table.max_inner_err = std::max(table.max_inner_err, std::abs(row.inner - row.inner_closed));
        table.max_reach_ratio = std::max(table.max_reach_ratio, row.reach_ratio);
    }
    return table;
}

}  // namespace reachcert::nonlinear2d
