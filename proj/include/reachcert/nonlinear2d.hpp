#pragma once

#include <vector>

#include "reachcert/bangbang.hpp"
#include "reachcert/sysdef.hpp"
#include "reachcert/types.hpp"

namespace reachcert::nonlinear2d {

// State-adjoint extremal of the 2-D control-affine system, integrated from
// y(0) = 0, lambda(0) = lambda0 with u_i = sign <lambda, G_i(y)> and switch
// events refined to 1e-10. Also carries the fundamental solution W(t) of
// Wdot = -A(t)^T W (so M(tau, t) = W(t) W(tau)^{-1}).
struct ExtremalTrajectory {
    sysdef::NonlinearSystem2D sys;
    Vec2 lambda0;
    double tau = 0.0;
    double dt = 0.0;
    std::vector<double> times;
    std::vector<Vec2> states;
    std::vector<Vec2> adjoints;
    std::vector<Mat2> fundamentals;
    std::vector<double> hamiltonians;
    bangbang::BangBangControl control;
    bool singular_flag = false;  // event function flat below 1e-12 over a full step
    bool certified = false;      // hypothesis flags hold and no singular suspicion
};

struct ExtremalOptions {
    double tau_cap = 1.0;
    double event_time_tol = 1e-10;
    double flat_event_tol = 1e-12;
};

ExtremalTrajectory integrate_extremal(const sysdef::NonlinearSystem2D& sys, const Vec2& lambda0,
                                      double tau, double dt, const ExtremalOptions& opts = {});

// H(x, p) = <p, F(x)> + sum_i |<p, G_i(x)>|.
double maximized_hamiltonian(const sysdef::NonlinearSystem2D& sys, const Vec2& x, const Vec2& p);

// h(x, zeta) = <zeta, F(x)> - sum_i |<zeta, G_i(x)>|.
double minimized_hamiltonian(const sysdef::NonlinearSystem2D& sys, const Vec2& x, const Vec2& zeta);

struct HamiltonianConstancy {
    double C = 0.0;        // median of the sampled H values
    double max_dev = 0.0;  // max |H(t) - C|
};
HamiltonianConstancy hamiltonian_constancy(const ExtremalTrajectory& traj);

struct BoundarySample {
    Vec2 lambda0;
    Vec2 endpoint;
    Vec2 terminal_adjoint;
    int n_switches = 0;
    bool singular = false;
    double min_adjoint_norm = 0.0;
};

struct NonlinearBoundary {
    double tau = 0.0;
    std::vector<BoundarySample> samples;
    bool certified_mode = false;  // hypothesis flags held and every trajectory clean
    bool closed_simple = false;   // endpoint polyline is a simple closed curve
    int uncertified_count = 0;
};

NonlinearBoundary sample_nonlinear_boundary(const sysdef::NonlinearSystem2D& sys, double tau,
                                            int n_dirs, double dt = 0.0,
                                            ExecPolicy policy = ExecPolicy::Parallel,
                                            const ExtremalOptions& opts = {});

struct SwitchingComparison {
    double K_hat = 0.0;  // max over probes of |g^{(i)}(t) - g0^{(i)}(t)| / t, i in {0, 1}
    bool ok = false;     // finite and stable under dt refinement
    double K_hat_refined = 0.0;
};

SwitchingComparison switching_comparison(const ExtremalTrajectory& traj);

// Extends the control past tau by the optimal-point case rule
// (sign g(tau), falling back to sign g'(tau) at a terminal zero) and
// re-integrates to tau + delta.
ExtremalTrajectory extend_optimal(const ExtremalTrajectory& traj, double delta,
                                  const ExtremalOptions& opts = {});

// Integrates dx = F + Gu under a prescribed bang-bang control, splitting
// RK4 segments exactly at the switch times.
Vec2 integrate_controlled(const sysdef::NonlinearSystem2D& sys,
                          const bangbang::BangBangControl& control, double dt = 0.0);

struct CounterexampleRow {
    double s = 0.0;
    Vec2 endpoint;
    double endpoint_err = 0.0;   // vs (s^2 tau^2, tau (2s - 1))
    double inner = 0.0;          // <zeta, gamma(s) - gamma(1/2)>
    double inner_closed = 0.0;   // 2 tau^2 (s - 1/2)^2 / sqrt(4 + tau^2)
    double reach_ratio = 0.0;    // inner / ||gamma(s) - gamma(1/2)||^2
};

struct CounterexampleTable {
    double tau = 0.0;
    double reach_bound = 0.0;  // 8 / ((16 + tau^4) sqrt(4 + tau^2))
    std::vector<CounterexampleRow> rows;
    double max_endpoint_err = 0.0;
    double max_inner_err = 0.0;
    double max_reach_ratio = 0.0;
};

CounterexampleTable reproduce_counterexample(double tau, const std::vector<double>& s_grid);

}  // namespace reachcert::nonlinear2d
