#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>

#include "obr/numerics.hpp"
#include "obr/radar_model.hpp"

namespace obr {

struct Filter {
  Eigen::VectorXcd w;

  void validate() const {
    if (w.size() == 0 || !w.allFinite() || w.squaredNorm() == 0.0)
      throw std::invalid_argument("Filter: must be nonzero and finite");
  }
};

// First-order statistics of y = Q(h + v), v ~ CN(0, sigma^2): the
// approximants mean = sqrt(4/(pi sigma^2)) h, variance = 2, together with the
// exact values erf(Re h / sigma) + j erf(Im h / sigma) and 2 - |mean|^2.
struct Prop1Moments {
  std::complex<double> mean;
  double variance;
  std::complex<double> exact_mean;
  double exact_variance;
};

inline Prop1Moments prop1_moments(std::complex<double> h, double sigma_sq) {
  if (!(sigma_sq > 0.0))
    throw std::invalid_argument("prop1_moments: noise power must be positive");
  Prop1Moments m;
  m.mean = std::sqrt(4.0 / (kPi * sigma_sq)) * h;
  m.variance = 2.0;
  double sigma = std::sqrt(sigma_sq);
  m.exact_mean = {numerics::erf(h.real() / sigma), numerics::erf(h.imag() / sigma)};
  m.exact_variance = 2.0 - std::norm(m.exact_mean);
  return m;
}

// beta_k = sqrt(4/(pi sigma^2)) s^H A^H(theta_k) w
inline std::complex<double> beta(const Eigen::VectorXcd& w, const Eigen::VectorXcd& s,
                                 const Eigen::MatrixXcd& A_theta, double sigma_sq) {
  if (A_theta.rows() != w.size() || A_theta.cols() != s.size())
    throw std::invalid_argument("beta: dimension mismatch");
  std::complex<double> inner = s.dot(A_theta.adjoint() * w);  // s^H A^H w
  return std::sqrt(4.0 / (kPi * sigma_sq)) * inner;
}

inline std::complex<double> beta(const Filter& w, const Waveform& s,
                                 const Eigen::MatrixXcd& A_theta, double sigma_sq) {
  return beta(w.w, s.vector(), A_theta, sigma_sq);
}

namespace detail {

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
  Eigen::MatrixXcd K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

inline void hermitize(Eigen::MatrixXcd& M) { M = 0.5 * (M + M.adjoint()).eval(); }

}  // namespace detail

// Closed-form expectation of (a_t kron a_r)(a_t kron a_r)^H under
// omega ~ U(varpi - delta, varpi + delta). Blocks indexed by transmit
// antennas, elements by receive antennas.
inline Eigen::MatrixXcd c_kernel(const ArrayGeometry& g, double varpi, double delta) {
  if (!(delta >= 0.0)) throw std::invalid_argument("c_kernel: delta must be >= 0");
  const int nt = g.nt(), nr = g.nr();
  Eigen::MatrixXcd C(static_cast<Eigen::Index>(nt) * nr, static_cast<Eigen::Index>(nt) * nr);
  const double inv = 1.0 / static_cast<double>(nt * nr);
  for (int m = 0; m < nt; ++m)
    for (int n = 0; n < nt; ++n)
      for (int p = 0; p < nr; ++p)
        for (int q = 0; q < nr; ++q) {
          double dtil = 2.0 *
                        (g.tx_positions(m) - g.tx_positions(n) + g.rx_positions(p) -
                         g.rx_positions(q)) /
                        g.wavelength;
          C(static_cast<Eigen::Index>(m) * nr + p, static_cast<Eigen::Index>(n) * nr + q) =
              std::polar(inv * numerics::sinc(dtil * delta), -kPi * dtil * varpi);
        }
  detail::hermitize(C);
  return C;
}

// Companion expectation of (a_r* kron a_t*)(a_r* kron a_t*)^H; blocks indexed
// by receive antennas, elements by transmit antennas.
inline Eigen::MatrixXcd d_kernel(const ArrayGeometry& g, double varpi, double delta) {
  if (!(delta >= 0.0)) throw std::invalid_argument("d_kernel: delta must be >= 0");
  const int nt = g.nt(), nr = g.nr();
  Eigen::MatrixXcd D(static_cast<Eigen::Index>(nt) * nr, static_cast<Eigen::Index>(nt) * nr);
  const double inv = 1.0 / static_cast<double>(nt * nr);
  for (int m = 0; m < nr; ++m)
    for (int n = 0; n < nr; ++n)
      for (int p = 0; p < nt; ++p)
        for (int q = 0; q < nt; ++q) {
          double dtil = 2.0 *
                        (g.rx_positions(m) - g.rx_positions(n) + g.tx_positions(p) -
                         g.tx_positions(q)) /
                        g.wavelength;
          D(static_cast<Eigen::Index>(m) * nt + p, static_cast<Eigen::Index>(n) * nt + q) =
              std::polar(inv * numerics::sinc(dtil * delta), kPi * dtil * varpi);
        }
  detail::hermitize(D);
  return D;
}

// Xi(s) = sum_k (2 sigma_k^2 / (pi sigma^2)) A_k s s^H A_k^H with the angles
// pinned at their means.
inline Eigen::MatrixXcd xi_matrix_deterministic(const Eigen::VectorXcd& s,
                                                const RadarScene& scene) {
  const int n = scene.snapshot_dim();
  Eigen::MatrixXcd Xi = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& src : scene.interferences) {
    Eigen::VectorXcd As =
        channel_matrix_normalized(scene.geometry, src.mean_normalized_angle,
                                  scene.code_length) *
        s;
    Xi += (2.0 * src.power / (kPi * scene.noise_power)) * (As * As.adjoint());
  }
  detail::hermitize(Xi);
  return Xi;
}

// Angle-uncertainty form built from the C kernels,
// Xi(s) = sum_k (2 sigma_k^2/(pi sigma^2)) (S^T kron I) C(omega_k) (S^T kron I)^H.
inline Eigen::MatrixXcd xi_matrix_stochastic(const Eigen::VectorXcd& s,
                                             const RadarScene& scene) {
  const int nt = scene.geometry.nt(), nr = scene.geometry.nr(), L = scene.code_length;
  Eigen::Map<const Eigen::MatrixXcd> S(s.data(), nt, L);
  Eigen::MatrixXcd lift =
      detail::kron(S.transpose(), Eigen::MatrixXcd::Identity(nr, nr));
  const int n = scene.snapshot_dim();
  Eigen::MatrixXcd Xi = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& src : scene.interferences) {
    Eigen::MatrixXcd C = c_kernel(scene.geometry, src.mean_normalized_angle, src.uncertainty);
    Xi += (2.0 * src.power / (kPi * scene.noise_power)) * (lift * C * lift.adjoint());
  }
  detail::hermitize(Xi);
  return Xi;
}

inline Eigen::MatrixXcd xi_matrix(const Eigen::VectorXcd& s, const RadarScene& scene) {
  return scene.has_angle_uncertainty() ? xi_matrix_stochastic(s, scene)
                                       : xi_matrix_deterministic(s, scene);
}

inline Eigen::MatrixXcd xi_matrix(const Waveform& s, const RadarScene& scene) {
  return xi_matrix(s.vector(), scene);
}

inline Eigen::MatrixXcd phi_matrix_deterministic(const Eigen::VectorXcd& w,
                                                 const RadarScene& scene) {
  const int n = scene.waveform_dim();
  Eigen::MatrixXcd Phi =
      w.squaredNorm() * Eigen::MatrixXcd::Identity(n, n);
  for (const auto& src : scene.interferences) {
    Eigen::VectorXcd Ahw =
        channel_matrix_normalized(scene.geometry, src.mean_normalized_angle,
                                  scene.code_length)
            .adjoint() *
        w;
    Phi += (2.0 * src.power / (kPi * scene.noise_power)) * (Ahw * Ahw.adjoint());
  }
  detail::hermitize(Phi);
  return Phi;
}

inline Eigen::MatrixXcd phi_matrix_stochastic(const Eigen::VectorXcd& w,
                                              const RadarScene& scene) {
  const int nt = scene.geometry.nt(), nr = scene.geometry.nr(), L = scene.code_length;
  Eigen::Map<const Eigen::MatrixXcd> W(w.data(), nr, L);
  Eigen::MatrixXcd lift =
      detail::kron(W.transpose(), Eigen::MatrixXcd::Identity(nt, nt));
  const int n = scene.waveform_dim();
  Eigen::MatrixXcd Phi = w.squaredNorm() * Eigen::MatrixXcd::Identity(n, n);
  for (const auto& src : scene.interferences) {
    Eigen::MatrixXcd D = d_kernel(scene.geometry, src.mean_normalized_angle, src.uncertainty);
    Phi += (2.0 * src.power / (kPi * scene.noise_power)) * (lift * D * lift.adjoint());
  }
  detail::hermitize(Phi);
  return Phi;
}

inline Eigen::MatrixXcd phi_matrix(const Eigen::VectorXcd& w, const RadarScene& scene) {
  if (w.squaredNorm() == 0.0) throw std::invalid_argument("phi_matrix: zero filter");
  return scene.has_angle_uncertainty() ? phi_matrix_stochastic(w, scene)
                                       : phi_matrix_deterministic(w, scene);
}

inline Eigen::MatrixXcd phi_matrix(const Filter& w, const RadarScene& scene) {
  return phi_matrix(w.w, scene);
}

// Gamma(w) = A^H(theta0) w w^H A(theta0), rank one by construction.
inline Eigen::MatrixXcd gamma_matrix(const Eigen::VectorXcd& w,
                                     const Eigen::MatrixXcd& A_theta0) {
  Eigen::VectorXcd Ahw = A_theta0.adjoint() * w;
  return Ahw * Ahw.adjoint();
}

// sigma_in^2 = 2 w^H w + beta^H Sigma beta. With angle uncertainty the
// interference term is taken through the Xi quadratic form (the two readings
// coincide when every delta is zero).
inline double sigma_in_sq(const Eigen::VectorXcd& w, const Eigen::VectorXcd& s,
                          const RadarScene& scene) {
  double base = 2.0 * w.squaredNorm();
  if (scene.interferences.empty()) return base;
  if (scene.has_angle_uncertainty()) {
    Eigen::MatrixXcd Xi = xi_matrix_stochastic(s, scene);
    return base + 2.0 * std::real(w.dot(Xi * w));
  }
  double acc = 0.0;
  for (const auto& src : scene.interferences) {
    Eigen::MatrixXcd A = channel_matrix_normalized(scene.geometry,
                                                   src.mean_normalized_angle,
                                                   scene.code_length);
    acc += src.power * std::norm(beta(w, s, A, scene.noise_power));
  }
  return base + acc;
}

inline double sigma_in_sq(const Filter& w, const Waveform& s, const RadarScene& scene) {
  return sigma_in_sq(w.w, s.vector(), scene);
}

inline double pf(double threshold, double sigma_in_sq_value) {
  if (!(threshold >= 0.0) || !(sigma_in_sq_value > 0.0))
    throw std::invalid_argument("pf: need threshold >= 0 and sigma_in^2 > 0");
  return std::exp(-threshold * threshold / sigma_in_sq_value);
}

inline double threshold_for_pf(double target_pf, double sigma_in_sq_value) {
  if (!(target_pf > 0.0) || target_pf > 1.0)
    throw std::invalid_argument("threshold_for_pf: target must lie in (0, 1]");
  return std::sqrt(-sigma_in_sq_value * std::log(target_pf));
}

inline double pd_rft(double pf_value, double sigma0_sq, std::complex<double> beta0,
                     double sigma_in_sq_value) {
  if (!(pf_value > 0.0) || pf_value >= 1.0)
    throw std::invalid_argument("pd_rft: pf must lie in (0, 1)");
  if (!(sigma0_sq > 0.0)) throw std::invalid_argument("pd_rft: sigma0^2 must be positive");
  double gain = sigma0_sq * std::norm(beta0) / sigma_in_sq_value;
  return std::exp(std::log(pf_value) / (1.0 + gain));
}

inline double pd_nft(double pf_value, std::complex<double> alpha0,
                     std::complex<double> beta0, double sigma_in_sq_value) {
  if (!(pf_value > 0.0) || pf_value >= 1.0)
    throw std::invalid_argument("pd_nft: pf must lie in (0, 1)");
  double a = std::sqrt(2.0 * std::norm(alpha0) * std::norm(beta0) / sigma_in_sq_value);
  double b = std::sqrt(-2.0 * std::log(pf_value));
  return numerics::marcum_q1(a, b);
}

// Real lift [[Re M, -Im M], [Im M, Re M]] of a Hermitian matrix; preserves
// quadratic forms against realify_vec.
inline Eigen::MatrixXd realify(const Eigen::MatrixXcd& M) {
  double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M - M.adjoint()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw std::invalid_argument("realify: matrix is not Hermitian");
  const auto n = M.rows();
  Eigen::MatrixXd R(2 * n, 2 * n);
  R.topLeftCorner(n, n) = M.real();
  R.topRightCorner(n, n) = -M.imag();
  R.bottomLeftCorner(n, n) = M.imag();
  R.bottomRightCorner(n, n) = M.real();
  return R;
}

inline Eigen::VectorXd realify_vec(const Eigen::VectorXcd& v) {
  Eigen::VectorXd r(2 * v.size());
  r.head(v.size()) = v.real();
  r.tail(v.size()) = v.imag();
  return r;
}

inline Eigen::VectorXcd complexify_vec(const Eigen::VectorXd& r) {
  const auto n = r.size() / 2;
  Eigen::VectorXcd v(n);
  v.real() = r.head(n);
  v.imag() = r.tail(n);
  return v;
}

// rho(w, s) = (2/(pi sigma^2)) |w^H A(theta0) s|^2 / (w^H Xi(s) w + w^H w)
inline double rho(const Eigen::VectorXcd& w, const Eigen::VectorXcd& s,
                  const RadarScene& scene) {
  if (w.squaredNorm() == 0.0) throw std::invalid_argument("rho: zero filter");
  Eigen::MatrixXcd A0 =
      channel_matrix(scene.geometry, scene.target.angle, scene.code_length);
  double num = std::norm(w.dot(A0 * s));
  Eigen::MatrixXcd Xi = xi_matrix(s, scene);
  double den = std::real(w.dot(Xi * w)) + w.squaredNorm();
  return (2.0 / (kPi * scene.noise_power)) * num / den;
}

inline double rho(const Filter& w, const Waveform& s, const RadarScene& scene) {
  return rho(w.w, s.vector(), scene);
}

inline double qsinr(const Eigen::VectorXcd& w, const Eigen::VectorXcd& s,
                    const RadarScene& scene) {
  return scene.target.power() * rho(w, s, scene);
}

inline double qsinr(const Filter& w, const Waveform& s, const RadarScene& scene) {
  return qsinr(w.w, s.vector(), scene);
}

struct DetectionReport {
  double sigma_in_sq = 0.0;
  std::complex<double> beta0;
  Eigen::VectorXcd betas;  // deterministic-angle scenes only
  double qsinr = 0.0;      // linear
  double rho = 0.0;
  std::optional<double> threshold;
  double pf = 0.0;
  double pd = 0.0;
};

// Assembles the analytic detection quantities at a desired false alarm. For
// scenes with angle uncertainty the per-interference betas are left empty and
// pd follows the same Gaussian argument through the Xi form of sigma_in^2.
inline DetectionReport detection_report(const Filter& w, const Waveform& s,
                                        const RadarScene& scene, double target_pf) {
  w.validate();
  scene.validate();
  DetectionReport rep;
  Eigen::MatrixXcd A0 =
      channel_matrix(scene.geometry, scene.target.angle, scene.code_length);
  rep.beta0 = beta(w.w, s.vector(), A0, scene.noise_power);
  rep.sigma_in_sq = sigma_in_sq(w, s, scene);
  if (!scene.has_angle_uncertainty()) {
    rep.betas.resize(scene.num_interferences());
    for (int k = 0; k < scene.num_interferences(); ++k) {
      Eigen::MatrixXcd Ak = channel_matrix_normalized(
          scene.geometry, scene.interferences[k].mean_normalized_angle, scene.code_length);
      rep.betas(k) = beta(w.w, s.vector(), Ak, scene.noise_power);
    }
  }
  rep.rho = std::norm(rep.beta0) / rep.sigma_in_sq;
  rep.qsinr = scene.target.power() * rep.rho;
  rep.threshold = threshold_for_pf(target_pf, rep.sigma_in_sq);
  rep.pf = pf(*rep.threshold, rep.sigma_in_sq);
  rep.pd = scene.target.kind == TargetModel::Kind::Rayleigh
               ? pd_rft(rep.pf, scene.target.variance, rep.beta0, rep.sigma_in_sq)
               : pd_nft(rep.pf, scene.target.amplitude, rep.beta0, rep.sigma_in_sq);
  return rep;
}

inline double db_from_linear(double x) { return 10.0 * std::log10(x); }
inline double linear_from_db(double x) { return std::pow(10.0, x / 10.0); }

}  // namespace obr
