#include "reachcert/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace reachcert::linalg {

double operator_norm(const Mat& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(a);
    return svd.singularValues()(0);
}

double min_singular_value(const Mat& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("min_singular_value: matrix must be square");
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(m.rows() - 1);
}

Mat expm(const Mat& a, double t) {
    if (a.rows() != a.cols()) throw std::invalid_argument("expm: matrix must be square");
    const auto n = a.rows();
    const double norm_at = operator_norm(a) * std::abs(t);
    if (norm_at > 1e4) throw std::domain_error("expm: ||A t|| exceeds 1e4");

    // Scale so that ||M|| <= 1/2, run a 16-term series, square back.
    int squarings = 0;
    double scaled = norm_at;
    while (scaled > 0.5) {
        scaled *= 0.5;
        ++squarings;
    }
    const Mat m = a * (t / std::ldexp(1.0, squarings));

    Mat result = Mat::Identity(n, n);
    Mat term = Mat::Identity(n, n);
    for (int k = 1; k <= 16; ++k) {
        term = (term * m) / static_cast<double>(k);
        result += term;
    }
    for (int i = 0; i < squarings; ++i) result = result * result;
    return result;
}

Mat integral_expm(const Mat& a, double dt) {
    const auto n = a.rows();
    Mat aug = Mat::Zero(2 * n, 2 * n);
    aug.topLeftCorner(n, n) = a;
    aug.topRightCorner(n, n) = Mat::Identity(n, n);
    return expm(aug, dt).topRightCorner(n, n);
}

Mat controllability_matrix(const Mat& a, const Vec& b) {
    if (a.rows() != a.cols() || a.rows() != b.size())
        throw std::invalid_argument("controllability_matrix: dimension mismatch");
    const auto n = a.rows();
    Mat k(n, n);
    Vec col = b;
    for (Eigen::Index j = 0; j < n; ++j) {
        k.col(j) = col;
        col = a * col;
    }
    return k;
}

int rank_with_threshold(const Mat& m, double rel_tol) {
    Eigen::JacobiSVD<Mat> svd(m);
    const Vec& sv = svd.singularValues();
    if (sv.size() == 0) return 0;
    const double cutoff = rel_tol * sv(0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) ++rank;
    return rank;
}

}  // namespace reachcert::linalg
