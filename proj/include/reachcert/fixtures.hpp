#pragma once

#include "reachcert/sysdef.hpp"

namespace reachcert::fixtures {

// x^{(n)} = u written as a chain of integrators.
inline sysdef::LinearSystem integrator_chain(int n) {
    sysdef::LinearSystem sys;
    sys.n = n;
    sys.m = 1;
    sys.A = Mat::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) sys.A(i, i + 1) = 1.0;
    sys.B = Mat::Zero(n, 1);
    sys.B(n - 1, 0) = 1.0;
    return sys;
}

inline sysdef::LinearSystem double_integrator() { return integrator_chain(2); }
inline sysdef::LinearSystem triple_integrator() { return integrator_chain(3); }

inline sysdef::LinearSystem rotation_system() {
    sysdef::LinearSystem sys;
    sys.n = 2;
    sys.m = 1;
    sys.A = Mat(2, 2);
    sys.A << 0, 1, -1, 0;
    sys.B = Mat(2, 1);
    sys.B << 0, 1;
    return sys;
}

// dx1 = x2 (1 + u), dx2 = u: strict convexity fails while positive reach
// holds at the corner of the boundary curve.
inline sysdef::NonlinearSystem2D corner_example() {
    using sysdef::Monomial;
    sysdef::NonlinearSystem2D sys;
    sys.F = sysdef::PolyVectorField({{Monomial{0, 1, 1.0}}, {}});
    sys.G.push_back(sysdef::PolyVectorField({{Monomial{0, 1, 1.0}}, {Monomial{0, 0, 1.0}}}));
    sys.flags = sysdef::compute_hypothesis_flags(sys.F, sys.G);
    return sys;
}

// dy1 = -y2^2 + u1, dy2 = u2: the linearization at the origin is not normal.
inline sysdef::NonlinearSystem2D squared_drift_example() {
    using sysdef::Monomial;
    sysdef::NonlinearSystem2D sys;
    sys.F = sysdef::PolyVectorField({{Monomial{0, 2, -1.0}}, {}});
    sys.G.push_back(sysdef::PolyVectorField({{Monomial{0, 0, 1.0}}, {}}));
    sys.G.push_back(sysdef::PolyVectorField({{}, {Monomial{0, 0, 1.0}}}));
    sys.flags = sysdef::compute_hypothesis_flags(sys.F, sys.G);
    return sys;
}

// Double integrator drift plus degree-3 terms (coefficients <= 0.5),
// constant control column: satisfies all certified-mode hypotheses.
inline sysdef::NonlinearSystem2D cubic_perturbed_double_integrator() {
    using sysdef::Monomial;
    sysdef::NonlinearSystem2D sys;
    sys.F = sysdef::PolyVectorField({{Monomial{0, 1, 1.0}, Monomial{3, 0, 0.3}, Monomial{1, 2, -0.2}},
                                     {Monomial{2, 1, -0.25}, Monomial{0, 3, 0.1}}});
    sys.G.push_back(sysdef::PolyVectorField({{}, {Monomial{0, 0, 1.0}}}));
    sys.flags = sysdef::compute_hypothesis_flags(sys.F, sys.G);
    return sys;
}

}  // namespace reachcert::fixtures
