#pragma once

#include <Eigen/Dense>

namespace reachcert {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

// Execution policy for the data-parallel kernels. Every kernel keeps a
// serial reference path; the parallel path must produce identical output
// (slot-indexed writes, serial reductions over slots).
enum class ExecPolicy { Serial, Parallel };

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
    bool contains(double s) const { return s >= lo && s <= hi; }
};

}  // namespace reachcert
