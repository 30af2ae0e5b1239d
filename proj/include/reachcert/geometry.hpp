#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "reachcert/sysdef.hpp"
#include "reachcert/types.hpp"

namespace reachcert::geometry {

struct SupportSample {
    Vec x;
    Vec zeta;  // nonzero covector at x
};

struct ConvexityCertificate {
    double exponent = 2.0;
    double gamma_hat = 0.0;  // min over pairs of -<zeta, y-x> / (||zeta|| ||y-x||^p); negative = failed
    std::pair<int, int> worst_pair{-1, -1};
    std::int64_t n_pairs = 0;
    std::int64_t excluded = 0;  // pairs below the coincidence radius
};

ConvexityCertificate fit_convexity_constant(const std::vector<SupportSample>& samples,
                                            const std::vector<Vec>& others, double exponent,
                                            ExecPolicy policy = ExecPolicy::Parallel);

struct ExponentFit {
    double slope = 0.0;
    int used = 0;
    int excluded = 0;  // pairs with -<zeta, y-x> <= 1e-12, outside the log domain
};

// Least-squares slope of log(-<zeta, y-x>/||zeta||) against log ||y-x|| for
// neighbors y accumulating to x. Requires >= 10 admissible pairs spanning
// at least two decades in ||y-x||.
ExponentFit fit_exponent(const SupportSample& at, const std::vector<Vec>& neighbors);

double inscribed_ball_radius(const sysdef::LinearSystem& sys, double T, int n_dirs);

struct ReachCertificate {
    double phi_hat = 0.0;  // max over pairs of <v, y-x> / (||v|| ||y-x||^2), clamped at 0
    std::pair<int, int> worst_pair{-1, -1};
    std::int64_t n_pairs = 0;
};

ReachCertificate positive_reach_estimate(const std::vector<SupportSample>& samples,
                                         const std::vector<Vec>& others,
                                         ExecPolicy policy = ExecPolicy::Parallel);

struct EpigraphSample {
    Vec x;
    double t = 0.0;      // T(x)
    Vec zeta;            // covector at x
    double theta = 0.0;  // minimized Hamiltonian h(x, zeta)
};

struct EpigraphOther {
    Vec y;
    double beta = 0.0;  // any value >= T(y)
};

struct EpigraphCheck {
    double sigma_hat = 0.0;
    std::int64_t violations = 0;  // pairs whose ratio exceeds the configured cap
    std::int64_t skipped = 0;     // degenerate denominators
    std::pair<int, int> worst_pair{-1, -1};
};

EpigraphCheck epigraph_proximal_check(const std::vector<EpigraphSample>& points,
                                      const std::vector<EpigraphOther>& others,
                                      double sigma_cap = std::numeric_limits<double>::infinity(),
                                      ExecPolicy policy = ExecPolicy::Parallel);

std::string certificate_to_json(const ConvexityCertificate& cert, double refinement_ratio);

}  // namespace reachcert::geometry
