#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "obr/radar_model.hpp"
#include "obr/rng.hpp"

using namespace obr;
using Catch::Approx;
using cd = std::complex<double>;

namespace {

RadarScene desk_scene(int nt, int nr, int L, double theta0_deg) {
  RadarScene scene;
  scene.geometry = ArrayGeometry::uniform_linear(nt, nr);
  scene.target = TargetModel::nonfluctuating(theta0_deg * kPi / 180.0, {10.0, 0.0});
  scene.noise_power = 1.0;
  scene.code_length = L;
  return scene;
}

}  // namespace

TEST_CASE("steering vectors") {
  auto g = ArrayGeometry::uniform_linear(4, 3);
  SECTION("theta = 0 gives the constant vector") {
    Eigen::VectorXcd at = tx_steering(g, 0.0);
    for (int k = 0; k < 4; ++k) CHECK(at(k) == cd(0.5, 0.0));
    Eigen::VectorXcd ar = rx_steering(g, 0.0);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(ar(k) - 1.0 / std::sqrt(3.0)) < 1e-15);
  }
  SECTION("two-element half-wavelength array at broadside-limit angle") {
    auto g2 = ArrayGeometry::uniform_linear(2, 2);
    Eigen::VectorXcd at = tx_steering(g2, kPi / 2.0);
    CHECK(std::abs(at(0) - 1.0 / std::sqrt(2.0)) < 1e-12);
    CHECK(std::abs(at(1) + 1.0 / std::sqrt(2.0)) < 1e-12);  // phase step e^{-j pi}
  }
  SECTION("unit norm across a 181-point angle grid") {
    for (int i = 0; i <= 180; ++i) {
      double theta = -kPi / 2.0 + kPi * i / 180.0;
      CHECK(std::abs(tx_steering(g, theta).norm() - 1.0) < 1e-12);
      CHECK(std::abs(rx_steering(g, theta).norm() - 1.0) < 1e-12);
    }
  }
  CHECK_THROWS_AS(tx_steering(g, 2.0), std::invalid_argument);
}

TEST_CASE("channel matrix structure") {
  auto g = ArrayGeometry::uniform_linear(3, 4);
  double theta = 0.35;
  SECTION("L = 1 is the rank-one outer product") {
    Eigen::MatrixXcd A = channel_matrix(g, theta, 1);
    Eigen::MatrixXcd expect = rx_steering(g, theta) * tx_steering(g, theta).transpose();
    CHECK((A - expect).norm() < 1e-14);
  }
  SECTION("theta = 0 blocks are all-ones scaled") {
    Eigen::MatrixXcd A = channel_matrix(g, 0.0, 2);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK(std::abs(A(i, j) - 1.0 / std::sqrt(12.0)) < 1e-14);
  }
  SECTION("identical diagonal blocks, zeros elsewhere") {
    int L = 5;
    Eigen::MatrixXcd A = channel_matrix(g, theta, L);
    Eigen::MatrixXcd block = A.block(0, 0, 4, 3);
    for (int l = 0; l < L; ++l)
      CHECK((A.block(4 * l, 3 * l, 4, 3) - block).norm() == 0.0);
    Eigen::MatrixXcd off = A;
    for (int l = 0; l < L; ++l) off.block(4 * l, 3 * l, 4, 3).setZero();
    CHECK(off.norm() == 0.0);
  }
  SECTION("contraction: ||A s|| <= ||s||") {
    SplitMix64 rng(3);
    int L = 4;
    Eigen::MatrixXcd A = channel_matrix(g, theta, L);
    for (int trial = 0; trial < 30; ++trial) {
      Eigen::VectorXcd s(3 * L);
      for (int i = 0; i < s.size(); ++i) s(i) = rng.complex_gaussian(1.0);
      CHECK((A * s).norm() <= s.norm() * (1.0 + 1e-12));
    }
  }
  SECTION("channel_apply agrees with the dense matrix") {
    SplitMix64 rng(4);
    int L = 3;
    double omega = 0.4;
    Eigen::MatrixXcd A = channel_matrix_normalized(g, omega, L);
    Eigen::VectorXcd s(3 * L);
    for (int i = 0; i < s.size(); ++i) s(i) = rng.complex_gaussian(1.0);
    CHECK((channel_apply_normalized(g, omega, L, s) - A * s).norm() < 1e-13);
  }
}

TEST_CASE("one-bit quantizer") {
  Eigen::VectorXcd x(3);
  x << cd(0.3, -0.7), cd(-2.0, 0.01), cd(0.0, 0.0);
  Eigen::VectorXcd y = one_bit_quantize(x);
  CHECK(y(0) == cd(1.0, -1.0));
  CHECK(y(1) == cd(-1.0, 1.0));
  CHECK(y(2) == cd(1.0, 1.0));  // sign(0) = +1 on both parts
  CHECK((one_bit_quantize(y) - y).norm() == 0.0);

  SplitMix64 rng(8);
  Eigen::VectorXcd z(64);
  for (int i = 0; i < 64; ++i) z(i) = rng.complex_gaussian(2.0);
  Eigen::VectorXcd q = one_bit_quantize(z);
  for (int i = 0; i < 64; ++i) {
    CHECK(std::abs(q(i).real()) == 1.0);
    CHECK(std::abs(q(i).imag()) == 1.0);
  }
  Waveform w = Waveform::one_bit_nearest(z);
  double scale = w.alphabet_scale();
  for (int i = 0; i < 64; ++i) {
    CHECK(std::abs(std::abs(w.vector()(i).real()) - scale) == 0.0);
    CHECK(std::abs(std::abs(w.vector()(i).imag()) - scale) == 0.0);
  }
  CHECK(std::abs(w.vector().squaredNorm() - 1.0) <= 1e-10);
}

TEST_CASE("noise-free returns") {
  RadarScene scene = desk_scene(4, 3, 5, 10.0);
  Waveform s = matched_phase_onebit_waveform(scene.geometry, scene.target.angle, 5);

  SECTION("noise-only scene") {
    auto [h1, h0] = noise_free_returns(scene, s.vector(), Eigen::VectorXcd(0),
                                       scene.target.amplitude, Eigen::VectorXd(0));
    CHECK(h0.norm() == 0.0);
    Eigen::MatrixXcd A0 = channel_matrix(scene.geometry, scene.target.angle, 5);
    CHECK((h1 - scene.target.amplitude * (A0 * s.vector())).norm() < 1e-12);
    // per-sample power for LIS reporting
    double max_power = h1.cwiseAbs2().maxCoeff();
    CHECK(max_power == Approx((A0 * s.vector()).cwiseAbs2().maxCoeff() * 100.0));
  }
  SECTION("zero target amplitude collapses the hypotheses") {
    scene.interferences.push_back({0.5, 0.0, 4.0});
    Eigen::VectorXcd xi(1);
    xi << cd(1.0, -2.0);
    Eigen::VectorXd omega(1);
    omega << 0.5;
    auto [h1, h0] = noise_free_returns(scene, s.vector(), xi, cd(0.0, 0.0), omega);
    CHECK((h1 - h0).norm() == 0.0);
    CHECK(h0.norm() > 0.0);
  }
  SECTION("difference is exactly the target term") {
    scene.interferences.push_back({0.2, 0.1, 2.0});
    scene.interferences.push_back({-0.6, 0.0, 1.0});
    Eigen::VectorXcd xi(2);
    xi << cd(0.3, 0.4), cd(-1.0, 0.2);
    Eigen::VectorXd omega(2);
    omega << 0.25, -0.6;
    cd xi0(2.0, -1.0);
    auto [h1, h0] = noise_free_returns(scene, s.vector(), xi, xi0, omega);
    Eigen::VectorXcd target_term = xi0 * channel_apply_normalized(
        scene.geometry, std::sin(scene.target.angle), 5, s.vector());
    CHECK((h1 - h0 - target_term).norm() <= 1e-13 * h0.norm());
  }
  SECTION("rejects draws outside the uncertainty interval") {
    scene.interferences.push_back({0.2, 0.05, 2.0});
    Eigen::VectorXcd xi(1);
    xi << cd(1.0, 0.0);
    Eigen::VectorXd omega(1);
    omega << 0.4;
    CHECK_THROWS_AS(noise_free_returns(scene, s.vector(), xi, cd(1.0, 0.0), omega),
                    std::invalid_argument);
  }
}

TEST_CASE("matched-phase one-bit waveform") {
  SECTION("theta0 = 0 takes the pi/4 cell everywhere") {
    auto g = ArrayGeometry::uniform_linear(8, 1);
    Waveform w = matched_phase_onebit_waveform(g, 0.0, 4);
    double scale = w.alphabet_scale();
    for (int i = 0; i < w.size(); ++i) CHECK(w.vector()(i) == cd(scale, scale));
    CHECK(transmit_beampattern(g, w, 0.0) == Approx(1.0).epsilon(1e-12));
  }
  SECTION("known loss at 22 degrees, 8 transmitters") {
    auto g = ArrayGeometry::uniform_linear(8, 1);
    Waveform w = matched_phase_onebit_waveform(g, 22.0 * kPi / 180.0, 16);
    double loss_db = 10.0 * std::log10(transmit_beampattern(g, w, 22.0 * kPi / 180.0));
    CHECK(loss_db == Approx(-0.8528713741954828).margin(1e-9));
  }
  SECTION("residual phases stay in (0, pi/2]") {
    auto g = ArrayGeometry::uniform_linear(8, 1);
    for (int i = 0; i <= 720; ++i) {
      double theta0 = -kPi / 2.0 + kPi * i / 720.0;
      Waveform w = matched_phase_onebit_waveform(g, theta0, 1);
      for (int k = 0; k < 8; ++k) {
        double psi = 2.0 * kPi * g.tx_positions(k) * std::sin(theta0) / g.wavelength;
        double varphi = std::arg(w.vector()(k));
        double residual = std::fmod(varphi - psi, 2.0 * kPi);
        if (residual <= 0.0) residual += 2.0 * kPi;
        CHECK(residual > 0.0);
        CHECK(residual <= kPi / 2.0 + 1e-12);
      }
    }
  }
  SECTION("beampattern at the design angle stays above one half") {
    auto g = ArrayGeometry::uniform_linear(8, 1);
    for (int i = 0; i <= 720; ++i) {
      double theta0 = -kPi / 2.0 + kPi * i / 720.0;
      Waveform w = matched_phase_onebit_waveform(g, theta0, 2);
      CHECK(transmit_beampattern(g, w, theta0) >= 0.5);
    }
  }
}

TEST_CASE("transmit beampattern") {
  auto g = ArrayGeometry::uniform_linear(6, 2);
  int L = 8;
  SECTION("infinite-bit phase match attains one") {
    double theta0 = 0.42;
    Eigen::VectorXcd s(6 * L);
    for (int k = 0; k < 6; ++k) {
      double psi = 2.0 * kPi * g.tx_positions(k) * std::sin(theta0) / g.wavelength;
      for (int l = 0; l < L; ++l)
        s(l * 6 + k) = std::polar(1.0 / std::sqrt(6.0 * L), psi);
    }
    Waveform w = Waveform::unit_energy(s);
    CHECK(transmit_beampattern(g, w, theta0) == Approx(1.0).epsilon(1e-12));
  }
  SECTION("agrees with the direct column sum") {
    SplitMix64 rng(21);
    Eigen::VectorXcd s(6 * L);
    for (int i = 0; i < s.size(); ++i) s(i) = rng.complex_gaussian(1.0 / (6.0 * L));
    double theta = -0.25;
    Eigen::VectorXcd at = tx_steering(g, theta);
    double direct = 0.0;
    for (int l = 0; l < L; ++l) {
      cd dot = 0.0;
      for (int k = 0; k < 6; ++k) dot += at(k) * s(l * 6 + k);
      direct += std::norm(dot);
    }
    CHECK(transmit_beampattern(g, s, theta) == Approx(direct).epsilon(1e-13));
  }
  SECTION("bounded by Nt for unit-energy waveforms") {
    SplitMix64 rng(22);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXcd raw(6 * L);
      for (int i = 0; i < raw.size(); ++i) raw(i) = rng.complex_gaussian(1.0);
      raw /= raw.norm();
      Waveform w = Waveform::unit_energy(raw);
      double theta = rng.uniform(-kPi / 2.0, kPi / 2.0);
      CHECK(transmit_beampattern(g, w, theta) <= 6.0 + 1e-9);
    }
  }
}

TEST_CASE("waveform and scene validation") {
  CHECK_THROWS_AS(Waveform::unit_energy(Eigen::VectorXcd::Ones(4)), std::invalid_argument);
  CHECK_THROWS_AS(ArrayGeometry::uniform_linear(0, 2), std::invalid_argument);
  RadarScene scene = desk_scene(2, 2, 2, 0.0);
  scene.noise_power = -1.0;
  CHECK_THROWS_AS(scene.validate(), std::invalid_argument);
  scene.noise_power = 1.0;
  scene.interferences.push_back({0.95, 0.2, 1.0});  // interval leaves [-1, 1]
  CHECK_THROWS_AS(scene.validate(), std::invalid_argument);
}
