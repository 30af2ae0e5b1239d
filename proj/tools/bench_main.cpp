#include <chrono>
#include <cstdio>

#include "reachcert/bangbang.hpp"
#include "reachcert/fixtures.hpp"
#include "reachcert/geometry.hpp"
#include "reachcert/mintime.hpp"
#include "reachcert/nonlinear2d.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

// Times each OpenMP kernel against its serial reference and reports the
// speedup. The parallel path must also match the serial output exactly;
// any mismatch is flagged here as well as in the test suite.

using namespace reachcert;

namespace {

template <typename F>
double time_of(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

void row(const char* name, double serial, double parallel, bool match) {
    std::printf("%-28s %9.3fs %9.3fs %7.2fx %s\n", name, serial, parallel, serial / parallel,
                match ? "outputs match" : "OUTPUT MISMATCH");
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP not enabled; both columns run serially\n");
#endif
    std::printf("%-28s %10s %10s %8s\n", "kernel", "serial", "parallel", "speedup");

    {
        const auto sys = fixtures::triple_integrator();
        std::vector<bangbang::BoundaryPoint> a, b;
        const double ts = time_of([&] { a = bangbang::sample_boundary(sys, 1.0, 2048, ExecPolicy::Serial); });
        const double tp = time_of([&] { b = bangbang::sample_boundary(sys, 1.0, 2048, ExecPolicy::Parallel); });
        bool match = a.size() == b.size();
        for (size_t i = 0; match && i < a.size(); ++i) match = a[i].x == b[i].x;
        row("boundary sampling (n=3)", ts, tp, match);
    }
    {
        const auto sys = fixtures::double_integrator();
        const auto boundary = bangbang::sample_boundary(sys, 1.0, 2048);
        std::vector<geometry::SupportSample> samples;
        std::vector<Vec> others;
        for (const auto& p : boundary) {
            samples.push_back({p.x, p.zeta});
            others.push_back(p.x);
        }
        geometry::ConvexityCertificate a, b;
        const double ts =
            time_of([&] { a = geometry::fit_convexity_constant(samples, others, 2.0, ExecPolicy::Serial); });
        const double tp = time_of(
            [&] { b = geometry::fit_convexity_constant(samples, others, 2.0, ExecPolicy::Parallel); });
        row("convexity pair sweep", ts, tp, a.gamma_hat == b.gamma_hat && a.worst_pair == b.worst_pair);
    }
    {
        mintime::GridSpec spec;
        spec.lo = Vec2(-0.9, -0.9);
        spec.hi = Vec2(0.9, 0.9);
        spec.resolution = 192;
        const sysdef::SystemVariant sys = fixtures::double_integrator();
        mintime::TimeGrid a, b;
        const double ts = time_of([&] { a = mintime::grid_value_iteration(sys, spec, ExecPolicy::Serial); });
        const double tp = time_of([&] { b = mintime::grid_value_iteration(sys, spec, ExecPolicy::Parallel); });
        row("grid value iteration", ts, tp, a.values == b.values);
    }
    {
        const auto sys = fixtures::cubic_perturbed_double_integrator();
        nonlinear2d::NonlinearBoundary a, b;
        const double ts = time_of(
            [&] { a = nonlinear2d::sample_nonlinear_boundary(sys, 0.2, 512, 0.2 / 2048, ExecPolicy::Serial); });
        const double tp = time_of(
            [&] { b = nonlinear2d::sample_nonlinear_boundary(sys, 0.2, 512, 0.2 / 2048, ExecPolicy::Parallel); });
        bool match = a.samples.size() == b.samples.size();
        for (size_t i = 0; match && i < a.samples.size(); ++i)
            match = a.samples[i].endpoint == b.samples[i].endpoint;
        row("nonlinear extremal sweep", ts, tp, match);
    }
    return 0;
}
