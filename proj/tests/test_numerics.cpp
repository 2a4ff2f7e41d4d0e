#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "obr/numerics.hpp"
#include "obr/rng.hpp"
#include "oracles.hpp"

using namespace obr;
using Catch::Approx;

TEST_CASE("erf matches the defining integral") {
  CHECK(numerics::erf(0.0) == 0.0);
  CHECK(numerics::erf(1.0) == Approx(0.8427007929497149).epsilon(1e-12));
  CHECK(std::abs(numerics::erf(1.0) - oracles::erf_integral(1.0)) < 1e-12);
  SplitMix64 rng(11);
  for (int i = 0; i < 50; ++i) {
    double x = rng.uniform(-4.0, 4.0);
    CHECK(numerics::erf(-x) == Approx(-numerics::erf(x)).margin(1e-15));
    CHECK(std::abs(numerics::erf(x) - oracles::erf_integral(x)) < 1e-12);
  }
}

TEST_CASE("sinc fills the removable singularity") {
  CHECK(numerics::sinc(0.0) == 1.0);
  CHECK(numerics::sinc(1.0) == Approx(0.0).margin(1e-15));
  CHECK(numerics::sinc(0.5) == Approx(2.0 / numerics::kPi).epsilon(1e-14));
  // series patch agrees with the direct formula near the switch point
  for (double x : {1e-5, 3e-5, 9.9e-5, 1.01e-4, 2e-4})
    CHECK(numerics::sinc(x) == Approx(std::sin(numerics::kPi * x) / (numerics::kPi * x))
                                   .epsilon(1e-13));
}

TEST_CASE("marcum_q1 special values and frozen point") {
  for (double b : {0.1, 0.5, 1.0, 3.0})
    CHECK(numerics::marcum_q1(0.0, b) == Approx(std::exp(-b * b / 2.0)).epsilon(1e-12));
  for (double a : {0.0, 0.5, 2.0, 10.0})
    CHECK(numerics::marcum_q1(a, 0.0) == 1.0);
  CHECK(numerics::marcum_q1(1.0, 2.0) == Approx(0.2690120600359100).epsilon(1e-10));
  CHECK_THROWS_AS(numerics::marcum_q1(-1.0, 2.0), std::domain_error);
}

TEST_CASE("marcum_q1 tracks the quadrature oracle") {
  for (double a : {0.25, 1.0, 2.5, 5.0, 10.0, 20.0, 50.0})
    for (double b : {0.1, 1.0, 2.0, 6.0, 15.0, 40.0}) {
      double ref = oracles::marcum_q1_integral(a, b);
      double got = numerics::marcum_q1(a, b);
      if (ref > 1e-12)
        CHECK(got == Approx(ref).epsilon(1e-8));
      else
        CHECK(got <= 2e-12);  // below the quadrature oracle's resolution
    }
}

TEST_CASE("marcum_q1 monotonicity") {
  for (double a : {0.0, 0.5, 1.5, 4.0, 12.0}) {
    double prev = 2.0;
    for (double b = 0.0; b <= 8.0; b += 0.25) {
      double v = numerics::marcum_q1(a, b);
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
  }
  for (double b : {0.5, 1.5, 4.0, 8.0}) {
    double prev = -1.0;
    for (double a = 0.0; a <= 12.0; a += 0.25) {
      double v = numerics::marcum_q1(a, b);
      CHECK(v >= prev - 1e-12);
      prev = v;
    }
  }
}

TEST_CASE("quartic_real_roots on constructed cases") {
  SECTION("x^4 - 2x^3") {
    auto roots = numerics::quartic_real_roots(1.0, -2.0, 0.0, 0.0, 0.0);
    REQUIRE_FALSE(roots.empty());
    bool has0 = false, has2 = false;
    for (double r : roots) {
      if (std::abs(r) < 1e-6) has0 = true;
      if (std::abs(r - 2.0) < 1e-8) has2 = true;
    }
    CHECK(has0);
    CHECK(has2);
  }
  SECTION("x^4 - x^3 - 1 vs bisection oracle") {
    auto roots = numerics::quartic_real_roots(1.0, -1.0, 0.0, 0.0, -1.0);
    auto ref = oracles::quartic_roots_by_bisection(1.0, -1.0, 0.0, 0.0, -1.0, -10.0, 10.0, 40000);
    REQUIRE(ref.size() == 2);
    REQUIRE(roots.size() == 2);
    CHECK(roots[0] == Approx(ref[0]).margin(1e-9));
    CHECK(roots[1] == Approx(ref[1]).margin(1e-9));
    CHECK(roots[1] == Approx(1.3802775690976141).margin(1e-8));
    CHECK(roots[0] == Approx(-0.8191725133961643).margin(1e-8));
  }
  SECTION("constructed double root (x-1)^2 (x^2+1)") {
    auto roots = numerics::quartic_real_roots(1.0, -2.0, 2.0, -2.0, 1.0);
    REQUIRE(roots.size() >= 1);
    for (double r : roots) CHECK(r == Approx(1.0).margin(1e-5));
  }
  SECTION("degenerate leading coefficient") {
    CHECK_THROWS_AS(numerics::quartic_real_roots(0.0, 1.0, 1.0, 1.0, 1.0),
                    std::invalid_argument);
  }
}

TEST_CASE("quartic roots recovered for 1000 random constructions") {
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    // (x - r1)(x - r2)(x^2 + bx + c) with the quadratic kept rootless
    double r1 = rng.uniform(-5.0, 5.0);
    double r2 = rng.uniform(-5.0, 5.0);
    double b = rng.uniform(-3.0, 3.0);
    double c = b * b / 4.0 + rng.uniform(0.1, 4.0);
    double c4 = 1.0;
    double c3 = b - r1 - r2;
    double c2 = c - b * (r1 + r2) + r1 * r2;
    double c1 = b * r1 * r2 - c * (r1 + r2);
    double c0 = c * r1 * r2;
    auto roots = numerics::quartic_real_roots(c4, c3, c2, c1, c0);
    for (double expect : {r1, r2}) {
      double best = 1e9;
      for (double r : roots) best = std::min(best, std::abs(r - expect));
      CHECK(best < 1e-6);
    }
  }
}

TEST_CASE("quartic residual contract holds on random coefficients") {
  SplitMix64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    double c4 = rng.uniform(-2.0, 2.0);
    if (std::abs(c4) < 0.1) c4 = 0.5;
    double c3 = rng.uniform(-5.0, 5.0), c2 = rng.uniform(-5.0, 5.0);
    double c1 = rng.uniform(-5.0, 5.0), c0 = rng.uniform(-5.0, 5.0);
    double coeff_inf = std::max({std::abs(c4), std::abs(c3), std::abs(c2), std::abs(c1),
                                 std::abs(c0)});
    for (double r : numerics::quartic_real_roots(c4, c3, c2, c1, c0)) {
      double p = (((c4 * r + c3) * r + c2) * r + c1) * r + c0;
      CHECK(std::abs(p) <= 1e-8 * std::max(1.0, coeff_inf));
    }
  }
}

TEST_CASE("bisection_root") {
  auto linear = [](double x) { return x - 3.0; };
  CHECK(numerics::bisection_root(linear, 0.0, 10.0, 1e-12) == Approx(3.0).margin(1e-10));
  auto sq = [](double x) { return x * x - 2.0; };
  CHECK(numerics::bisection_root(sq, 0.0, 2.0, 1e-12) ==
        Approx(1.4142135623730951).margin(1e-9));
  auto ex = [](double x) { return std::exp(x) - 1.0; };
  CHECK(numerics::bisection_root(ex, -1.0, 1.0, 1e-12) == Approx(0.0).margin(1e-10));
  auto pos = [](double x) { return x * x + 1.0; };
  CHECK_THROWS_AS(numerics::bisection_root(pos, -1.0, 1.0, 1e-12), std::invalid_argument);
}

TEST_CASE("hermitian_solve") {
  SplitMix64 rng(5);
  Eigen::VectorXcd b(4);
  for (int i = 0; i < 4; ++i) b(i) = rng.complex_gaussian(1.0);

  Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(4, 4);
  CHECK((numerics::hermitian_solve(I, b) - b).norm() < 1e-12);
  CHECK((numerics::hermitian_solve(2.0 * I, b) - 0.5 * b).norm() < 1e-12);

  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXcd G(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) G(i, j) = rng.complex_gaussian(1.0);
    Eigen::MatrixXcd A = G * G.adjoint() + I;
    Eigen::VectorXcd x = numerics::hermitian_solve(A, b);
    CHECK((A * x - b).norm() <= 1e-8 * b.norm());
  }

  CHECK_THROWS_AS(numerics::hermitian_solve(-I, b), std::runtime_error);
  Eigen::MatrixXcd skew = I;
  skew(0, 1) = {0.0, 1.0};  // not mirrored, breaks Hermitian symmetry
  CHECK_THROWS_AS(numerics::hermitian_solve(skew, b), std::invalid_argument);
}

TEST_CASE("real_symmetric_evd basics") {
  {
    auto evd = numerics::real_symmetric_evd(Eigen::Matrix3d::Identity());
    CHECK(evd.eigenvalues(0) == Approx(1.0));
    CHECK(evd.eigenvalues(2) == Approx(1.0));
    CHECK((evd.eigenvectors.transpose() * evd.eigenvectors -
           Eigen::Matrix3d::Identity()).norm() < 1e-12);
  }
  {
    Eigen::Matrix3d d = Eigen::Vector3d(3.0, 1.0, 2.0).asDiagonal();
    auto evd = numerics::real_symmetric_evd(d);
    CHECK(evd.eigenvalues(0) == Approx(3.0));
    CHECK(evd.eigenvalues(1) == Approx(2.0));
    CHECK(evd.eigenvalues(2) == Approx(1.0));
  }
  {
    // rank-2 structure u u^T + v v^T with orthonormal u, v
    Eigen::VectorXd u = Eigen::VectorXd::Zero(6), v = Eigen::VectorXd::Zero(6);
    u(0) = 1.0;
    v(3) = 1.0;
    Eigen::MatrixXd M = u * u.transpose() + v * v.transpose();
    auto evd = numerics::real_symmetric_evd(M);
    CHECK(evd.eigenvalues(0) == Approx(1.0));
    CHECK(evd.eigenvalues(1) == Approx(1.0));
    for (int k = 2; k < 6; ++k) CHECK(std::abs(evd.eigenvalues(k)) < 1e-12);
  }
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 0.0, 1.0;
  CHECK_THROWS_AS(numerics::real_symmetric_evd(bad), std::invalid_argument);
}

TEST_CASE("evd reconstruction and orthogonality on random matrices") {
  SplitMix64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    int n = 4 + static_cast<int>(rng.uniform01() * 253.0);  // up to 256 = 2 Nt L
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = rng.gaussian();
    Eigen::MatrixXd M = 0.5 * (A + A.transpose());
    auto evd = numerics::real_symmetric_evd(M);
    for (int k = 0; k + 1 < n; ++k) CHECK(evd.eigenvalues(k) >= evd.eigenvalues(k + 1));
    Eigen::MatrixXd R = evd.eigenvectors * evd.eigenvalues.asDiagonal() *
                        evd.eigenvectors.transpose();
    CHECK((R - M).norm() <= 1e-9 * std::max(1.0, M.norm()));
    CHECK((evd.eigenvectors.transpose() * evd.eigenvectors -
           Eigen::MatrixXd::Identity(n, n)).norm() <= 1e-9);
  }
}
