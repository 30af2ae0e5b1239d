#pragma once

#include <cstdint>
#include <vector>

#include "reachcert/switching.hpp"
#include "reachcert/sysdef.hpp"
#include "reachcert/types.hpp"

namespace reachcert::bangbang {

// Piecewise-constant control with values in {-1, +1} per channel.
struct BangBangControl {
    struct Channel {
        int initial_sign = 1;
        std::vector<double> switch_times;  // strictly increasing, in (0, T)
    };
    double T = 0.0;
    std::vector<Channel> channels;

    int value(int channel, double t) const;
    int n_switches(int channel) const {
        return static_cast<int>(channels[static_cast<size_t>(channel)].switch_times.size());
    }
};

struct BoundaryPoint {
    Vec zeta;
    Vec x;
    BangBangControl control;
    double T = 0.0;
};

// u_i(t) = sign <zeta, e^{A(T-t)} b_i>; switch times are the time-reversed
// sign-change zeros of the per-column switching functions.
BangBangControl synthesize_control(const sysdef::LinearSystem& sys, const Vec& zeta, double T);

// Endpoint of dx = Ax + Bu from x0 (default 0), segment-exact via the
// augmented matrix exponential.
Vec integrate_linear(const sysdef::LinearSystem& sys, const BangBangControl& u);
Vec integrate_linear_from(const sysdef::LinearSystem& sys, const BangBangControl& u, const Vec& x0);

// h(zeta) = integral_0^T sum_i |<zeta, e^{As} b_i>| ds, split at the zeros
// of each channel and integrated in closed form per segment.
double support_function(const sysdef::LinearSystem& sys, const Vec& zeta, double T);

enum class Region { inside, boundary, outside };

struct Membership {
    Region status = Region::inside;
    double margin = 0.0;  // max over unit zeta of <zeta, x> - h(zeta)
    Vec argmax;
};

struct MembershipOptions {
    int dirs_2d = 720;
    int dirs_3d = 2562;     // icosphere subdivision
    int dirs_high = 4096;   // randomized, n in {4, 5}
    std::uint64_t seed = 202406;
    int polish_rounds = 60;
};

Membership membership(const sysdef::LinearSystem& sys, const Vec& x, double T,
                      const MembershipOptions& opts = {});

// Quasi-uniform unit covectors: uniform angles (n = 2), Fibonacci sphere
// (n = 3), seeded uniform draws (n >= 4).
std::vector<Vec> direction_grid(int dim, int count, std::uint64_t seed = 202406);

std::vector<BoundaryPoint> sample_boundary(const sysdef::LinearSystem& sys, double T, int n_dirs,
                                           ExecPolicy policy = ExecPolicy::Parallel);

}  // namespace reachcert::bangbang
