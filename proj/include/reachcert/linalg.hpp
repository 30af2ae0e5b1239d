#pragma once

#include "reachcert/types.hpp"

namespace reachcert::linalg {

// Operator 2-norm (largest singular value).
double operator_norm(const Mat& a);

// Smallest singular value. Absolute error <= 1e-10 * (largest singular value).
double min_singular_value(const Mat& m);

// e^{A t} by scaling-and-squaring with a fixed-order truncated series.
// Requires |t| * ||A|| <= 1e4; throws std::domain_error beyond that.
Mat expm(const Mat& a, double t);

// Psi(dt) = integral_0^dt e^{A s} ds, computed from the augmented
// exponential of [[A, I], [0, 0]].
Mat integral_expm(const Mat& a, double dt);

// K = (b, Ab, ..., A^{n-1} b).
Mat controllability_matrix(const Mat& a, const Vec& b);

// Rank with the scale-invariant threshold: a singular value counts as
// nonzero iff it exceeds 1e-10 times the largest one.
int rank_with_threshold(const Mat& m, double rel_tol = 1e-10);

}  // namespace reachcert::linalg
