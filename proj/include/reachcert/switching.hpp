#pragma once

#include <cstdint>
#include <vector>

#include "reachcert/sysdef.hpp"
#include "reachcert/types.hpp"

namespace reachcert::switching {

// g(s) = <e^{As} b, zeta> for a single control column. The terminal covector
// is normalized at construction; the normality data of (A, b) is recorded.
struct SwitchingFunction {
    Mat A;
    Vec b;
    Vec zeta;    // unit
    double T = 0.0;
    int n = 0;
    double L_const = 0.0;  // smallest singular value of (b, Ab, ..., A^{n-1} b)
    double norm_A = 0.0;   // operator 2-norm
    bool normal = false;

    SwitchingFunction(Mat a, Vec b_col, Vec zeta_dir, double horizon);

    // c(s) = L e^{-||A|| s} / n, the Lemma threshold.
    double threshold(double s) const;
};

struct Zero {
    double time = 0.0;
    int sign_before = 0;
    int sign_after = 0;
    bool sign_change() const { return sign_before * sign_after < 0; }
};

struct SwitchingProfile {
    std::vector<Zero> zeros;
    std::vector<std::vector<Interval>> intervals;  // I_0 .. I_{n-1}
    std::vector<std::int64_t> counts;              // interval-count bounds per level
    double L_const = 0.0;
    double norm_A = 0.0;
    double T = 0.0;
    int n = 0;
    double threshold(double s) const;
};

// g^{(i)}(s) = <e^{As} A^i b, zeta>, 0 <= i <= n-1, 0 <= s <= T + 1.
double eval_g(const SwitchingFunction& sf, int order, double s);

struct LowerBoundCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool ok = false;
    bool applicable = false;  // false when (A, b) is not normal
};

// sum_i |g^{(i)}(s)| >= L e^{-||A|| s}, with slack 1e-9.
LowerBoundCheck sum_derivative_lower_bound(const SwitchingFunction& sf, double s);

// Dense-sample grid shared across covectors for one (A, b, T) triple.
// Holds e^{A s_k} A^i b for every grid node and derivative order.
class DenseGrid {
public:
    DenseGrid(const Mat& a, const Vec& b, double horizon, int steps = 4096);

    int steps() const { return steps_; }
    double h() const { return h_; }
    double T() const { return T_; }
    int n() const { return n_; }
    // g^{(order)}(s_k) for the given covector.
    double value(const Vec& zeta, int order, int k) const;

private:
    int steps_;
    double h_;
    double T_;
    int n_;
    std::vector<Vec> samples_;  // samples_[k * n + order]
};

std::vector<Zero> find_zeros(const SwitchingFunction& sf);
std::vector<Zero> find_zeros(const SwitchingFunction& sf, const DenseGrid& grid);

SwitchingProfile decompose_intervals(const SwitchingFunction& sf, int steps = 4096);

// Explicit interval-count bounds N_0..N_{n-1} evaluated from the paper's
// closed forms; returns them and the induced global zero-count bound.
struct CountBounds {
    std::vector<std::int64_t> interval_counts;  // N_i
    std::int64_t zero_bound = 0;
};
CountBounds switch_count_bounds(const Mat& a, const Vec& b, double horizon);
std::int64_t switch_count_bound(const Mat& a, const Vec& b, double horizon);

struct AppendixReport {
    std::int64_t trials = 0;
    std::int64_t integral_checks = 0;
    std::int64_t integral_violations = 0;
    std::int64_t growth_checks = 0;
    std::int64_t growth_violations = 0;
};

// Randomized self-test of the two appendix inequalities: the iterated
// integral bound for measurable K with values in [0,1], and the derivative
// growth bound |f(s)| >= C/(k+1) |c-s|^{k+1} for monotone f.
AppendixReport appendix_bounds_selftest(std::int64_t trials, std::uint64_t seed = 12345);

}  // namespace reachcert::switching
