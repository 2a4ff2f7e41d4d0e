#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>

#include "obr/qsinr.hpp"
#include "obr/radar_model.hpp"
#include "obr/rng.hpp"

namespace obr {

struct McConfig {
  long trials = 10000;
  std::uint64_t seed = 0;
  bool draw_interference_angles = true;  // resample omega_k per trial when delta_k > 0
  bool draw_target = true;               // resample xi_0 per trial for RFT scenes

  void validate() const {
    if (trials < 1) throw std::invalid_argument("McConfig: trials must be >= 1");
  }
};

struct McEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  long trials = 0;
  long rejected = 0;
};

namespace detail {

// Every trial owns its derived SplitMix64 substream, so estimates do not
// depend on how trials are partitioned across workers. Draw order per trial:
// interference angles, interference amplitudes, target amplitude, then noise.
struct TrialDraw {
  Eigen::VectorXcd h1;
  Eigen::VectorXcd h0;
  Eigen::VectorXcd v;
};

inline TrialDraw draw_trial(const RadarScene& scene, const Eigen::VectorXcd& s,
                            const McConfig& mc, SplitMix64& rng) {
  const int K = scene.num_interferences();
  Eigen::VectorXd omegas(K);
  for (int k = 0; k < K; ++k) {
    const auto& src = scene.interferences[k];
    omegas(k) = (src.uncertainty > 0.0 && mc.draw_interference_angles)
                    ? rng.uniform(src.mean_normalized_angle - src.uncertainty,
                                  src.mean_normalized_angle + src.uncertainty)
                    : src.mean_normalized_angle;
  }
  Eigen::VectorXcd xi(K);
  for (int k = 0; k < K; ++k) xi(k) = rng.complex_gaussian(scene.interferences[k].power);
  std::complex<double> xi0 = scene.target.amplitude;
  if (scene.target.kind == TargetModel::Kind::Rayleigh)
    xi0 = mc.draw_target ? rng.complex_gaussian(scene.target.variance)
                         : std::complex<double>(std::sqrt(scene.target.variance), 0.0);

  TrialDraw d;
  auto [h1, h0] = noise_free_returns(scene, s, xi, xi0, omegas);
  d.h1 = std::move(h1);
  d.h0 = std::move(h0);
  d.v.resize(scene.snapshot_dim());
  for (int i = 0; i < scene.snapshot_dim(); ++i)
    d.v(i) = rng.complex_gaussian(scene.noise_power);
  return d;
}

// |w^H Q(h0+v)|^2 is a lattice quantity; an exact zero shows up as rounding
// noise of this scale.
inline double zero_threshold(const Eigen::VectorXcd& w, int dim) {
  double bound = 1e-10 * w.norm() * std::sqrt(2.0 * dim);
  return bound * bound;
}

}  // namespace detail

// Monte Carlo QSINR: the ratio of the averaged output powers under H1 and H0
// minus one, sharing the same noise draw within a trial. Trials whose H0
// output is exactly zero are rejected and redrawn. The standard error comes
// from the delta method for a ratio of means.
inline McEstimate qsinr_mc(const Eigen::VectorXcd& w, const Eigen::VectorXcd& s,
                           const RadarScene& scene, const McConfig& mc) {
  mc.validate();
  scene.validate();
  const double zero_tol = detail::zero_threshold(w, scene.snapshot_dim());
  double sum_n = 0.0, sum_d = 0.0, sum_nn = 0.0, sum_dd = 0.0, sum_nd = 0.0;
  long rejected = 0;
  for (long k = 0; k < mc.trials; ++k) {
    SplitMix64 rng(SplitMix64::derive(mc.seed, static_cast<std::uint64_t>(k)));
    double num = 0.0, den = 0.0;
    while (true) {
      detail::TrialDraw d = detail::draw_trial(scene, s, mc, rng);
      den = std::norm(w.dot(one_bit_quantize(d.h0 + d.v)));
      if (den > zero_tol) {
        num = std::norm(w.dot(one_bit_quantize(d.h1 + d.v)));
        break;
      }
      ++rejected;  // redraw the whole trial from the same substream
    }
    sum_n += num;
    sum_d += den;
    sum_nn += num * num;
    sum_dd += den * den;
    sum_nd += num * den;
  }
  const double K = static_cast<double>(mc.trials);
  const double ratio = sum_n / sum_d;
  // var of e_k = num_k - ratio * den_k around its zero mean
  double var_e = (sum_nn - 2.0 * ratio * sum_nd + ratio * ratio * sum_dd) / K;
  double se = std::sqrt(std::max(0.0, var_e) / K) / (sum_d / K);
  return {ratio - 1.0, se, mc.trials, rejected};
}

inline McEstimate qsinr_mc(const Filter& w, const Waveform& s, const RadarScene& scene,
                           const McConfig& mc) {
  return qsinr_mc(w.w, s.vector(), scene, mc);
}

// Fraction of trials with |w^H Q(h0 + v)| above the threshold.
inline McEstimate empirical_pf(const Eigen::VectorXcd& w, const Eigen::VectorXcd& s,
                               const RadarScene& scene, double threshold,
                               const McConfig& mc) {
  mc.validate();
  if (!(threshold >= 0.0)) throw std::invalid_argument("empirical_pf: threshold < 0");
  long hits = 0;
  for (long k = 0; k < mc.trials; ++k) {
    SplitMix64 rng(SplitMix64::derive(mc.seed, static_cast<std::uint64_t>(k)));
    detail::TrialDraw d = detail::draw_trial(scene, s, mc, rng);
    if (std::abs(w.dot(one_bit_quantize(d.h0 + d.v))) >= threshold) ++hits;
  }
  double p = static_cast<double>(hits) / static_cast<double>(mc.trials);
  double se = std::sqrt(p * (1.0 - p) / static_cast<double>(mc.trials));
  return {p, se, mc.trials, 0};
}

inline McEstimate empirical_pf(const Filter& w, const Waveform& s, const RadarScene& scene,
                               double threshold, const McConfig& mc) {
  return empirical_pf(w.w, s.vector(), scene, threshold, mc);
}

// As empirical_pf with the target present.
inline McEstimate empirical_pd(const Eigen::VectorXcd& w, const Eigen::VectorXcd& s,
                               const RadarScene& scene, double threshold,
                               const McConfig& mc) {
  mc.validate();
  if (!(threshold >= 0.0)) throw std::invalid_argument("empirical_pd: threshold < 0");
  long hits = 0;
  for (long k = 0; k < mc.trials; ++k) {
    SplitMix64 rng(SplitMix64::derive(mc.seed, static_cast<std::uint64_t>(k)));
    detail::TrialDraw d = detail::draw_trial(scene, s, mc, rng);
    if (std::abs(w.dot(one_bit_quantize(d.h1 + d.v))) >= threshold) ++hits;
  }
  double p = static_cast<double>(hits) / static_cast<double>(mc.trials);
  double se = std::sqrt(p * (1.0 - p) / static_cast<double>(mc.trials));
  return {p, se, mc.trials, 0};
}

inline McEstimate empirical_pd(const Filter& w, const Waveform& s, const RadarScene& scene,
                               double threshold, const McConfig& mc) {
  return empirical_pd(w.w, s.vector(), scene, threshold, mc);
}

// Relative approximation error of the first-order quantized moments against
// their Monte Carlo estimates for y = Q(h + v).
struct RaeReport {
  double rae_mean = 0.0;
  double rae_var = 0.0;
  std::complex<double> mc_mean;
  double mc_var = 0.0;
  double mean_stderr = 0.0;    // per-draw noise of the complex mean estimate
  bool mean_is_absolute = false;  // set when the MC mean is ~0 and the ratio is ill-posed
};

inline RaeReport prop1_rae(std::complex<double> h, double sigma_sq, const McConfig& mc) {
  mc.validate();
  Prop1Moments approx = prop1_moments(h, sigma_sq);
  double sum_re = 0.0, sum_im = 0.0;
  for (long k = 0; k < mc.trials; ++k) {
    SplitMix64 rng(SplitMix64::derive(mc.seed, static_cast<std::uint64_t>(k)));
    std::complex<double> x = h + rng.complex_gaussian(sigma_sq);
    sum_re += x.real() >= 0.0 ? 1.0 : -1.0;
    sum_im += x.imag() >= 0.0 ? 1.0 : -1.0;
  }
  const double K = static_cast<double>(mc.trials);
  RaeReport rep;
  rep.mc_mean = {sum_re / K, sum_im / K};
  rep.mc_var = 2.0 - std::norm(rep.mc_mean);  // |y|^2 = 2 identically
  double var_re = 1.0 - rep.mc_mean.real() * rep.mc_mean.real();
  double var_im = 1.0 - rep.mc_mean.imag() * rep.mc_mean.imag();
  rep.mean_stderr = std::sqrt((var_re + var_im) / K);

  double err_mean = std::abs(approx.mean - rep.mc_mean);
  double denom = std::abs(rep.mc_mean);
  if (denom < 10.0 * rep.mean_stderr) {
    rep.rae_mean = err_mean;
    rep.mean_is_absolute = true;
  } else {
    rep.rae_mean = err_mean / denom;
  }
  rep.rae_var = std::abs(approx.variance - rep.mc_var) / rep.mc_var;
  return rep;
}

}  // namespace obr
