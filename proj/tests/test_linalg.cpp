#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "reachcert/linalg.hpp"

using namespace reachcert;
using linalg::controllability_matrix;
using linalg::expm;
using linalg::min_singular_value;

TEST_CASE("expm of the zero matrix is the identity") {
    const Mat a = Mat::Zero(3, 3);
    CHECK((expm(a, 2.5) - Mat::Identity(3, 3)).norm() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("expm of the nilpotent shift terminates exactly") {
    Mat a(2, 2);
    a << 0, 1, 0, 0;
    for (double t : {0.1, 1.0, 7.0}) {
        const Mat e = expm(a, t);
        CHECK(e(0, 0) == doctest::Approx(1.0));
        CHECK(e(0, 1) == doctest::Approx(t));
        CHECK(e(1, 0) == doctest::Approx(0.0));
        CHECK(e(1, 1) == doctest::Approx(1.0));
    }
}

TEST_CASE("expm of the rotation generator gives cos/sin") {
    Mat a(2, 2);
    a << 0, 1, -1, 0;
    for (double t : {0.3, 2.0, 9.0}) {
        const Mat e = expm(a, t);
        CHECK(e(0, 0) == doctest::Approx(std::cos(t)).epsilon(1e-12));
        CHECK(e(0, 1) == doctest::Approx(std::sin(t)).epsilon(1e-12));
        CHECK(e(1, 0) == doctest::Approx(-std::sin(t)).epsilon(1e-12));
        CHECK(e(1, 1) == doctest::Approx(std::cos(t)).epsilon(1e-12));
    }
}

TEST_CASE("expm rejects overflow-scale arguments") {
    Mat a(2, 2);
    a << 0, 1, -1, 0;
    CHECK_THROWS_AS(expm(a, 2e4), std::domain_error);
}

TEST_CASE("integral_expm matches the nilpotent closed form") {
    Mat a(2, 2);
    a << 0, 1, 0, 0;
    const double h = 0.7;
    const Mat psi = linalg::integral_expm(a, h);
    CHECK(psi(0, 0) == doctest::Approx(h).epsilon(1e-13));
    CHECK(psi(0, 1) == doctest::Approx(h * h / 2).epsilon(1e-13));
    CHECK(psi(1, 1) == doctest::Approx(h).epsilon(1e-13));
}

TEST_CASE("controllability matrix columns are A^j b") {
    Mat a(2, 2);
    Vec b(2);

    a << 0, 1, 0, 0;
    b << 0, 1;
    Mat k = controllability_matrix(a, b);
    CHECK(k(0, 0) == 0.0);
    CHECK(k(1, 0) == 1.0);
    CHECK(k(0, 1) == 1.0);
    CHECK(k(1, 1) == 0.0);

    a.setZero();
    b << 1, 0;
    k = controllability_matrix(a, b);
    CHECK(k(0, 0) == 1.0);
    CHECK(k(1, 0) == 0.0);
    CHECK(k(0, 1) == 0.0);
    CHECK(k(1, 1) == 0.0);

    a << 0, 1, -1, 0;
    b << 1, 0;
    k = controllability_matrix(a, b);
    CHECK(k(0, 1) == 0.0);
    CHECK(k(1, 1) == -1.0);
}

TEST_CASE("min singular value on diagonal examples") {
    CHECK(min_singular_value(Mat::Identity(3, 3)) == doctest::Approx(1.0));
    Mat m(2, 2);
    m << 1, 0, 0, 0;
    CHECK(min_singular_value(m) == doctest::Approx(0.0));
    m << 2, 0, 0, 3;
    CHECK(min_singular_value(m) == doctest::Approx(2.0));
}

TEST_CASE("expm semigroup property on random matrices") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + trial % 3;
        Mat a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = uni(rng) / n;
        const double s = uni(rng), t = uni(rng);
        const Mat lhs = expm(a, s) * expm(a, t);
        const Mat rhs = expm(a, s + t);
        CHECK((lhs - rhs).norm() < 1e-10);
    }
}

TEST_CASE("d/dt expm = A expm by finite differences") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Mat a(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) = uni(rng);
    const double t = 0.4, h = 1e-6;
    const Mat fd = (expm(a, t + h) - expm(a, t - h)) / (2 * h);
    CHECK((fd - a * expm(a, t)).norm() < 1e-5);
}

TEST_CASE("||K zeta|| >= min singular value for random unit covectors") {
    std::mt19937_64 rng(13);
    Mat a(3, 3);
    a << 0, 1, 0, 0, 0, 1, 0.2, -0.3, 0.1;
    Vec b(3);
    b << 0, 0, 1;
    const Mat k = controllability_matrix(a, b);
    const double sv = min_singular_value(k);
    for (int i = 0; i < 1000; ++i) {
        const Vec zeta = testutil::random_unit(rng, 3);
        CHECK((k * zeta).norm() >= sv - 1e-12);
    }
}
