#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

// The OpenMP kernels must reproduce the serial reference bit for bit:
// outputs go to index slots and reductions run serially over them.

#include "reachcert/bangbang.hpp"
#include "reachcert/fixtures.hpp"
#include "reachcert/geometry.hpp"
#include "reachcert/mintime.hpp"
#include "reachcert/nonlinear2d.hpp"

using namespace reachcert;

TEST_CASE("boundary sampling: serial and parallel agree bitwise") {
    const auto sys = fixtures::double_integrator();
    const auto par = bangbang::sample_boundary(sys, 1.0, 128, ExecPolicy::Parallel);
    const auto ser = bangbang::sample_boundary(sys, 1.0, 128, ExecPolicy::Serial);
    REQUIRE(par.size() == ser.size());
    for (size_t k = 0; k < par.size(); ++k) {
        CHECK(par[k].x == ser[k].x);
        CHECK(par[k].zeta == ser[k].zeta);
        CHECK(par[k].control.channels[0].switch_times == ser[k].control.channels[0].switch_times);
    }
}

TEST_CASE("convexity pair sweep: serial and parallel agree bitwise") {
    const auto sys = fixtures::double_integrator();
    const auto boundary = bangbang::sample_boundary(sys, 1.0, 180);
    std::vector<geometry::SupportSample> samples;
    std::vector<Vec> others;
    for (const auto& p : boundary) {
        samples.push_back({p.x, p.zeta});
        others.push_back(p.x);
    }
    const auto par = geometry::fit_convexity_constant(samples, others, 2.0, ExecPolicy::Parallel);
    const auto ser = geometry::fit_convexity_constant(samples, others, 2.0, ExecPolicy::Serial);
    CHECK(par.gamma_hat == ser.gamma_hat);
    CHECK(par.worst_pair == ser.worst_pair);
    CHECK(par.n_pairs == ser.n_pairs);

    const auto rpar = geometry::positive_reach_estimate(samples, others, ExecPolicy::Parallel);
    const auto rser = geometry::positive_reach_estimate(samples, others, ExecPolicy::Serial);
    CHECK(rpar.phi_hat == rser.phi_hat);
    CHECK(rpar.worst_pair == rser.worst_pair);
}

TEST_CASE("grid value iteration: serial and parallel agree bitwise") {
    mintime::GridSpec spec;
    spec.lo = Vec2(-0.9, -0.9);
    spec.hi = Vec2(0.9, 0.9);
    spec.resolution = 96;
    const sysdef::SystemVariant sys = fixtures::double_integrator();
    const auto par = mintime::grid_value_iteration(sys, spec, ExecPolicy::Parallel);
    const auto ser = mintime::grid_value_iteration(sys, spec, ExecPolicy::Serial);
    CHECK(par.iterations == ser.iterations);
    CHECK(par.values == ser.values);
}

TEST_CASE("nonlinear boundary sweep: serial and parallel agree bitwise") {
    const auto sys = fixtures::cubic_perturbed_double_integrator();
    const auto par = nonlinear2d::sample_nonlinear_boundary(sys, 0.1, 48, 0.1 / 512,
                                                            ExecPolicy::Parallel);
    const auto ser = nonlinear2d::sample_nonlinear_boundary(sys, 0.1, 48, 0.1 / 512,
                                                            ExecPolicy::Serial);
    REQUIRE(par.samples.size() == ser.samples.size());
    for (size_t k = 0; k < par.samples.size(); ++k) {
        CHECK(par.samples[k].endpoint == ser.samples[k].endpoint);
        CHECK(par.samples[k].terminal_adjoint == ser.samples[k].terminal_adjoint);
        CHECK(par.samples[k].n_switches == ser.samples[k].n_switches);
    }
    CHECK(par.closed_simple == ser.closed_simple);
}

TEST_CASE("epigraph pair sweep: serial and parallel agree bitwise") {
    std::vector<geometry::EpigraphSample> points;
    std::vector<geometry::EpigraphOther> others;
    for (int i = 0; i < 50; ++i) {
        const double th = 0.13 * i;
        Vec x(2), z(2);
        x << std::cos(th), std::sin(th);
        z << std::cos(th + 0.01), std::sin(th + 0.01);
        points.push_back({x, 0.1 * i, z, -0.5});
        others.push_back({x, 0.1 * i + 0.05});
    }
    const auto par = geometry::epigraph_proximal_check(points, others, 1e6, ExecPolicy::Parallel);
    const auto ser = geometry::epigraph_proximal_check(points, others, 1e6, ExecPolicy::Serial);
    CHECK(par.sigma_hat == ser.sigma_hat);
    CHECK(par.worst_pair == ser.worst_pair);
    CHECK(par.skipped == ser.skipped);
}
