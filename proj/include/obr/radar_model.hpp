#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "obr/numerics.hpp"

namespace obr {

using numerics::kPi;

// Transmit/receive element positions in the same length unit as the
// wavelength. uniform_linear() builds the usual half-wavelength arrays.
struct ArrayGeometry {
  Eigen::VectorXd tx_positions;
  Eigen::VectorXd rx_positions;
  double wavelength = 1.0;

  int nt() const { return static_cast<int>(tx_positions.size()); }
  int nr() const { return static_cast<int>(rx_positions.size()); }

  static ArrayGeometry uniform_linear(int nt, int nr, double wavelength = 1.0) {
    if (nt < 1 || nr < 1 || !(wavelength > 0.0))
      throw std::invalid_argument("ArrayGeometry: need nt,nr >= 1 and wavelength > 0");
    ArrayGeometry g;
    g.wavelength = wavelength;
    g.tx_positions = Eigen::VectorXd::LinSpaced(nt, 0.0, (nt - 1) * wavelength / 2.0);
    if (nt == 1) g.tx_positions.setZero();
    g.rx_positions = Eigen::VectorXd::LinSpaced(nr, 0.0, (nr - 1) * wavelength / 2.0);
    if (nr == 1) g.rx_positions.setZero();
    g.validate();
    return g;
  }

  void validate() const {
    if (nt() < 1 || nr() < 1)
      throw std::invalid_argument("ArrayGeometry: empty array");
    if (!(wavelength > 0.0) || !std::isfinite(wavelength))
      throw std::invalid_argument("ArrayGeometry: bad wavelength");
    if (!tx_positions.allFinite() || !rx_positions.allFinite())
      throw std::invalid_argument("ArrayGeometry: nonfinite positions");
  }
};

struct TargetModel {
  enum class Kind { Nonfluctuating, Rayleigh };

  double angle = 0.0;  // radians
  Kind kind = Kind::Nonfluctuating;
  std::complex<double> amplitude{1.0, 0.0};  // alpha_0 for NFT
  double variance = 1.0;                     // sigma_0^2 for RFT

  static TargetModel nonfluctuating(double angle, std::complex<double> alpha0) {
    TargetModel t;
    t.angle = angle;
    t.kind = Kind::Nonfluctuating;
    t.amplitude = alpha0;
    t.validate();
    return t;
  }

  static TargetModel rayleigh(double angle, double sigma0_sq) {
    TargetModel t;
    t.angle = angle;
    t.kind = Kind::Rayleigh;
    t.variance = sigma0_sq;
    t.validate();
    return t;
  }

  // |alpha_0|^2 or sigma_0^2, whichever multiplies rho in the QSINR.
  double power() const {
    return kind == Kind::Nonfluctuating ? std::norm(amplitude) : variance;
  }

  void validate() const {
    if (std::abs(angle) > kPi / 2.0 + 1e-12)
      throw std::invalid_argument("TargetModel: |angle| must be <= pi/2");
    if (kind == Kind::Rayleigh && !(variance > 0.0))
      throw std::invalid_argument("TargetModel: RFT variance must be positive");
  }
};

// One interference source with uniformly distributed normalized angle
// omega ~ U(mean - delta, mean + delta) and power sigma_k^2.
struct InterferenceSource {
  double mean_normalized_angle = 0.0;  // varpi_k = sin(theta_k)
  double uncertainty = 0.0;            // delta_k >= 0
  double power = 1.0;                  // sigma_k^2 (linear)

  void validate() const {
    if (!(uncertainty >= 0.0))
      throw std::invalid_argument("InterferenceSource: uncertainty must be >= 0");
    if (!(power > 0.0))
      throw std::invalid_argument("InterferenceSource: power must be positive");
    if (std::abs(mean_normalized_angle) - uncertainty < -1.0 - 1e-12 ||
        std::abs(mean_normalized_angle) + uncertainty > 1.0 + 1e-12)
      throw std::invalid_argument(
          "InterferenceSource: angle interval must stay inside [-1, 1]");
  }
};

struct RadarScene {
  ArrayGeometry geometry;
  TargetModel target;
  std::vector<InterferenceSource> interferences;
  double noise_power = 1.0;  // sigma^2
  int code_length = 1;       // L

  int snapshot_dim() const { return geometry.nr() * code_length; }
  int waveform_dim() const { return geometry.nt() * code_length; }
  int num_interferences() const { return static_cast<int>(interferences.size()); }

  bool has_angle_uncertainty() const {
    for (const auto& s : interferences)
      if (s.uncertainty > 0.0) return true;
    return false;
  }

  void validate() const {
    geometry.validate();
    target.validate();
    for (const auto& s : interferences) s.validate();
    if (!(noise_power > 0.0))
      throw std::invalid_argument("RadarScene: noise power must be positive");
    if (code_length < 1)
      throw std::invalid_argument("RadarScene: code length must be >= 1");
  }
};

// Entrywise sign(Re) + j sign(Im), with sign(0) := +1.
inline Eigen::VectorXcd one_bit_quantize(const Eigen::VectorXcd& x) {
  Eigen::VectorXcd y(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    y(i) = {x(i).real() >= 0.0 ? 1.0 : -1.0, x(i).imag() >= 0.0 ? 1.0 : -1.0};
  return y;
}

// Unit-energy transmit code of length Nt*L. One-bit waveforms carry entries
// exactly in (1/sqrt(2*Nt*L)) {1+j, 1-j, -1+j, -1-j}.
class Waveform {
public:
  static Waveform unit_energy(Eigen::VectorXcd s) {
    if (std::abs(s.squaredNorm() - 1.0) > 1e-10)
      throw std::invalid_argument("Waveform: energy must equal 1");
    return Waveform(std::move(s), false);
  }

  // Builds the one-bit waveform whose k-th entry has the signs of signs(k).
  static Waveform one_bit_from_signs(const Eigen::VectorXcd& signs) {
    const double scale = 1.0 / std::sqrt(2.0 * static_cast<double>(signs.size()));
    Eigen::VectorXcd s(signs.size());
    for (Eigen::Index i = 0; i < signs.size(); ++i)
      s(i) = {signs(i).real() >= 0.0 ? scale : -scale,
              signs(i).imag() >= 0.0 ? scale : -scale};
    return Waveform(std::move(s), true);
  }

  // Nearest alphabet point of an arbitrary vector (entrywise sign map).
  static Waveform one_bit_nearest(const Eigen::VectorXcd& raw) {
    return one_bit_from_signs(raw);
  }

  const Eigen::VectorXcd& vector() const { return s_; }
  Eigen::Index size() const { return s_.size(); }
  bool is_one_bit() const { return one_bit_; }

  double alphabet_scale() const {
    return 1.0 / std::sqrt(2.0 * static_cast<double>(s_.size()));
  }

private:
  Waveform(Eigen::VectorXcd s, bool one_bit) : s_(std::move(s)), one_bit_(one_bit) {}
  Eigen::VectorXcd s_;
  bool one_bit_;
};

namespace detail {

inline Eigen::VectorXcd steering_from_normalized(const Eigen::VectorXd& positions,
                                                 double omega, double wavelength) {
  const auto n = positions.size();
  Eigen::VectorXcd a(n);
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    double phase = -2.0 * kPi * positions(k) * omega / wavelength;
    a(k) = std::polar(norm, phase);
  }
  return a;
}

inline void check_angle(double theta) {
  if (!(std::abs(theta) <= kPi / 2.0 + 1e-12))
    throw std::invalid_argument("steering: |theta| must be <= pi/2");
}

}  // namespace detail

inline Eigen::VectorXcd tx_steering(const ArrayGeometry& g, double theta) {
  detail::check_angle(theta);
  return detail::steering_from_normalized(g.tx_positions, std::sin(theta), g.wavelength);
}

inline Eigen::VectorXcd rx_steering(const ArrayGeometry& g, double theta) {
  detail::check_angle(theta);
  return detail::steering_from_normalized(g.rx_positions, std::sin(theta), g.wavelength);
}

// Same steering vectors parameterized by the normalized angle omega = sin(theta).
inline Eigen::VectorXcd tx_steering_normalized(const ArrayGeometry& g, double omega) {
  return detail::steering_from_normalized(g.tx_positions, omega, g.wavelength);
}

inline Eigen::VectorXcd rx_steering_normalized(const ArrayGeometry& g, double omega) {
  return detail::steering_from_normalized(g.rx_positions, omega, g.wavelength);
}

// A(theta) = I_L kron a_r(theta) a_t^T(theta), size (Nr L) x (Nt L).
inline Eigen::MatrixXcd channel_matrix_normalized(const ArrayGeometry& g,
                                                  double omega, int L) {
  if (L < 1) throw std::invalid_argument("channel_matrix: L must be >= 1");
  Eigen::VectorXcd ar = rx_steering_normalized(g, omega);
  Eigen::VectorXcd at = tx_steering_normalized(g, omega);
  Eigen::MatrixXcd block = ar * at.transpose();  // rank one, a_r a_t^T
  const int nr = g.nr(), nt = g.nt();
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(nr) * L,
                                              static_cast<Eigen::Index>(nt) * L);
  for (int l = 0; l < L; ++l)
    A.block(static_cast<Eigen::Index>(l) * nr, static_cast<Eigen::Index>(l) * nt, nr, nt) = block;
  return A;
}

inline Eigen::MatrixXcd channel_matrix(const ArrayGeometry& g, double theta, int L) {
  detail::check_angle(theta);
  return channel_matrix_normalized(g, std::sin(theta), L);
}

// A(omega) s without materializing A: vec(a_r a_t^T S) = (S^T a_t) kron a_r.
inline Eigen::VectorXcd channel_apply_normalized(const ArrayGeometry& g, double omega,
                                                 int L, const Eigen::VectorXcd& s) {
  const int nt = g.nt(), nr = g.nr();
  if (s.size() != static_cast<Eigen::Index>(nt) * L)
    throw std::invalid_argument("channel_apply: waveform dimension mismatch");
  Eigen::VectorXcd at = tx_steering_normalized(g, omega);
  Eigen::VectorXcd ar = rx_steering_normalized(g, omega);
  Eigen::VectorXcd out(static_cast<Eigen::Index>(nr) * L);
  for (int l = 0; l < L; ++l) {
    std::complex<double> cl = 0.0;
    for (int k = 0; k < nt; ++k) cl += at(k) * s(static_cast<Eigen::Index>(l) * nt + k);
    for (int p = 0; p < nr; ++p) out(static_cast<Eigen::Index>(l) * nr + p) = cl * ar(p);
  }
  return out;
}

// Noise-free returns under both hypotheses for one draw of the reflection
// coefficients: h1 = xi0 A(theta0) s + sum_k xi_k A(omega_k) s, h0 drops the
// target term.
inline std::pair<Eigen::VectorXcd, Eigen::VectorXcd> noise_free_returns(
    const RadarScene& scene, const Eigen::VectorXcd& s,
    const Eigen::VectorXcd& interference_draw, std::complex<double> target_draw,
    const Eigen::VectorXd& angle_draw) {
  const int K = scene.num_interferences();
  if (interference_draw.size() != K || angle_draw.size() != K)
    throw std::invalid_argument("noise_free_returns: draw sizes must match K");
  if (s.size() != scene.waveform_dim())
    throw std::invalid_argument("noise_free_returns: waveform dimension mismatch");
  for (int k = 0; k < K; ++k) {
    const auto& src = scene.interferences[k];
    if (angle_draw(k) < src.mean_normalized_angle - src.uncertainty - 1e-12 ||
        angle_draw(k) > src.mean_normalized_angle + src.uncertainty + 1e-12)
      throw std::invalid_argument("noise_free_returns: angle draw outside its interval");
  }

  Eigen::VectorXcd h0 = Eigen::VectorXcd::Zero(scene.snapshot_dim());
  for (int k = 0; k < K; ++k)
    h0 += interference_draw(k) *
          channel_apply_normalized(scene.geometry, angle_draw(k), scene.code_length, s);
  Eigen::VectorXcd h1 =
      h0 + target_draw * channel_apply_normalized(scene.geometry,
                                                  std::sin(scene.target.angle),
                                                  scene.code_length, s);
  return {h1, h0};
}

// F(theta) = || a_t^T(theta) S ||_2^2 with S the Nt x L reshape of s.
inline double transmit_beampattern(const ArrayGeometry& g, const Eigen::VectorXcd& s,
                                   double theta) {
  const int nt = g.nt();
  if (s.size() % nt != 0)
    throw std::invalid_argument("transmit_beampattern: waveform length not a multiple of Nt");
  const int L = static_cast<int>(s.size()) / nt;
  Eigen::VectorXcd at = tx_steering(g, theta);
  double F = 0.0;
  for (int l = 0; l < L; ++l) {
    std::complex<double> dot = 0.0;
    for (int k = 0; k < nt; ++k) dot += at(k) * s(static_cast<Eigen::Index>(l) * nt + k);
    F += std::norm(dot);
  }
  return F;
}

inline double transmit_beampattern(const ArrayGeometry& g, const Waveform& s,
                                   double theta) {
  return transmit_beampattern(g, s.vector(), theta);
}

// One-bit waveform whose per-antenna phase cell is chosen so that every
// residual phase against the target steering phase lies in (0, pi/2]. The
// resulting beampattern loss at theta0 stays below 3 dB.
inline Waveform matched_phase_onebit_waveform(const ArrayGeometry& g, double theta0,
                                              int L) {
  detail::check_angle(theta0);
  if (L < 1) throw std::invalid_argument("matched_phase_onebit_waveform: L must be >= 1");
  const int nt = g.nt();
  Eigen::VectorXcd signs(static_cast<Eigen::Index>(nt) * L);
  // quadrant q covers mod(psi + pi/4, 2 pi) in [q pi/2, (q+1) pi/2)
  static const std::complex<double> kQuadrantSigns[4] = {
      {1.0, 1.0}, {-1.0, 1.0}, {-1.0, -1.0}, {1.0, -1.0}};
  for (int k = 0; k < nt; ++k) {
    double psi = 2.0 * kPi * g.tx_positions(k) * std::sin(theta0) / g.wavelength;
    double cell = std::fmod(psi + kPi / 4.0, 2.0 * kPi);
    if (cell < 0.0) cell += 2.0 * kPi;
    int quadrant = std::min(3, static_cast<int>(cell / (kPi / 2.0)));
    for (int l = 0; l < L; ++l)
      signs(static_cast<Eigen::Index>(l) * nt + k) = kQuadrantSigns[quadrant];
  }
  return Waveform::one_bit_from_signs(signs);
}

}  // namespace obr
