#pragma once

#include <random>

#include "reachcert/linalg.hpp"
#include "reachcert/sysdef.hpp"
#include "reachcert/types.hpp"

namespace testutil {

using reachcert::Mat;
using reachcert::Vec;

inline Vec random_unit(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec v(n);
    do {
        for (int i = 0; i < n; ++i) v(i) = gauss(rng);
    } while (v.norm() < 1e-12);
    return v.normalized();
}

// Random normal pair (A, b) with ||A|| <= max_norm and ||b|| = 1.
inline reachcert::sysdef::LinearSystem random_normal_system(std::mt19937_64& rng, int n,
                                                            double max_norm = 2.0) {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    while (true) {
        Mat a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = uni(rng);
        const double norm = reachcert::linalg::operator_norm(a);
        if (norm > 1e-9) a *= (0.1 + 0.9 * std::abs(uni(rng))) * max_norm / norm;
        Vec b = random_unit(rng, n);
        reachcert::sysdef::LinearSystem sys;
        sys.n = n;
        sys.m = 1;
        sys.A = a;
        sys.B = b;
        if (reachcert::sysdef::is_normal(sys)) {
            // Keep the conditioning reasonable so tolerance checks stay meaningful.
            const auto rec = reachcert::sysdef::normality_check(sys);
            if (rec[0].L_const > 1e-3) return sys;
        }
    }
}

inline Mat random_orthogonal(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = gauss(rng);
    const Eigen::HouseholderQR<Mat> qr(m);
    Mat q = qr.householderQ();
    return q;
}

}  // namespace testutil
