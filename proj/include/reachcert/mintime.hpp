#pragma once

#include <optional>
#include <vector>

#include "reachcert/bangbang.hpp"
#include "reachcert/sysdef.hpp"
#include "reachcert/types.hpp"

namespace reachcert::mintime {

struct MinTimeResult {
    double T = 0.0;
    bool infinite = false;
    std::optional<bangbang::BangBangControl> control;  // steers x to the origin in time T
    int iterations = 0;
    double tol = 0.0;
};

struct MinTimeOptions {
    double horizon_cap = 1e3;
    bangbang::MembershipOptions membership;
};

// T(x) for the origin target: bisection on reachable-set membership for the
// reversed system (A -> -A, B -> -B). The sign flip is centralized here.
MinTimeResult min_time_linear(const sysdef::LinearSystem& sys, const Vec& x, double tol,
                              const MinTimeOptions& opts = {});

struct GridSpec {
    Vec2 lo{-1.0, -1.0};
    Vec2 hi{1.0, 1.0};
    int resolution = 256;  // cells per axis
    double dt = 0.0;       // 0 = apply the CFL rule 0.4 * cell / max speed
};

struct TimeGrid {
    Vec2 lo, hi;
    int resolution = 0;
    double dt = 0.0;
    int iterations = 0;
    std::vector<double> values;  // (resolution+1)^2 node values, row-major in x2

    int nodes() const { return resolution + 1; }
    double value_at(const Vec2& x) const;  // bilinear; +inf outside the box
};

// Semi-Lagrangian value iteration for the origin-targeting minimum time:
// T(x) = min over vertex controls of dt + T(x advanced by dt along F + Gu),
// so the sublevel sets coincide with the reachable sets of the reversed
// dynamics from the origin.
TimeGrid grid_value_iteration(const sysdef::SystemVariant& sys, const GridSpec& spec,
                              ExecPolicy policy = ExecPolicy::Parallel);

struct OracleRow {
    Vec x;
    double t_bisect = 0.0;
    double t_grid = 0.0;
    double gap = 0.0;
};

struct OracleComparison {
    double max_abs_gap = 0.0;
    std::vector<OracleRow> rows;
};

OracleComparison compare_oracle(const sysdef::LinearSystem& sys, const std::vector<Vec>& points,
                                double tol, const TimeGrid& grid,
                                const MinTimeOptions& opts = {});

}  // namespace reachcert::mintime
