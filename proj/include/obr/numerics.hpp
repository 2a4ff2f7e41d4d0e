#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace obr::numerics {

inline constexpr double kPi = 3.14159265358979323846;

inline double erf(double x) { return std::erf(x); }

// sin(pi x) / (pi x) with the removable singularity filled by its series.
inline double sinc(double x) {
  double px = kPi * x;
  if (std::abs(px) < 1e-4) {
    double p2 = px * px;
    return 1.0 - p2 / 6.0 + p2 * p2 / 120.0;
  }
  return std::sin(px) / px;
}

namespace detail {

// Regularized incomplete gamma functions P(a,x), Q(a,x) = 1 - P(a,x).
// Series for x < a+1, Lentz continued fraction otherwise.
inline double gamma_p(double a, double x);

inline double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

inline double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

inline double gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

}  // namespace detail

// Marcum Q function of order 1,
//   Q_1(a,b) = int_b^inf t exp(-(t^2+a^2)/2) I_0(a t) dt.
// Evaluated as the Poisson mixture sum_k p_k(a^2/2) P[Pois(b^2/2) <= k],
// started at the mode of the Poisson weights so no factor underflows.
inline double marcum_q1(double a, double b) {
  if (a < 0.0 || b < 0.0 || !std::isfinite(a) || !std::isfinite(b))
    throw std::domain_error("marcum_q1: arguments must be nonnegative and finite");
  const double x = 0.5 * a * a;
  const double y = 0.5 * b * b;
  if (y == 0.0) return 1.0;
  if (x == 0.0) return std::exp(-y);

  const auto k0 = static_cast<long>(x);
  const double k0d = static_cast<double>(k0);
  // p_k = e^{-x} x^k / k!, R_k = sum_{m<=k} e^{-y} y^m / m! = Q(k+1, y)
  double p_mode = std::exp(-x + k0d * std::log(x) - std::lgamma(k0d + 1.0));
  double pois_y_mode = std::exp(-y + k0d * std::log(y) - std::lgamma(k0d + 1.0));
  double r_mode = detail::gamma_q(k0d + 1.0, y);

  double total = 0.0;
  double cum_p = 0.0;

  // Upward from the mode. Remaining truncation error is bounded by the
  // unexplored Poisson mass since every R_k <= 1.
  {
    double p = p_mode, r = r_mode, py = pois_y_mode;
    long k = k0;
    while (true) {
      total += p * r;
      cum_p += p;
      if (1.0 - cum_p < 1e-17) break;
      if (k - k0 > 100000) break;
      ++k;
      p *= x / static_cast<double>(k);
      py *= y / static_cast<double>(k);
      r += py;
      if (r > 1.0) r = 1.0;
    }
  }
  // Downward from the mode.
  {
    double p = p_mode, r = r_mode, py = pois_y_mode;
    for (long k = k0; k > 0; --k) {
      r -= py;
      p *= static_cast<double>(k) / x;
      py *= static_cast<double>(k) / y;
      if (r <= 0.0) break;  // all lower R_k are smaller still
      total += p * r;
      cum_p += p;
    }
  }
  return std::clamp(total, 0.0, 1.0);
}

// Deterministic bisection for a sign change of f on [lo, hi]. Stops when the
// interval width or |f| drops below tol.
inline double bisection_root(const std::function<double(double)>& f, double lo,
                             double hi, double tol) {
  if (!(lo <= hi)) throw std::invalid_argument("bisection_root: lo > hi");
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (flo * fhi > 0.0)
    throw std::invalid_argument("bisection_root: f(lo) and f(hi) have the same sign");
  for (int i = 0; i < 200 && (hi - lo) > tol; ++i) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if (std::abs(fm) <= tol) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// All real roots of c4 x^4 + c3 x^3 + c2 x^2 + c1 x + c0, repeated up to
// multiplicity. Companion-matrix eigenvalues polished by Newton steps.
inline std::vector<double> quartic_real_roots(double c4, double c3, double c2,
                                              double c1, double c0) {
  if (c4 == 0.0)
    throw std::invalid_argument("quartic_real_roots: leading coefficient is zero");
  const double a = c3 / c4, b = c2 / c4, c = c1 / c4, d = c0 / c4;
  Eigen::Matrix4d comp = Eigen::Matrix4d::Zero();
  comp(0, 3) = -d;
  comp(1, 0) = 1.0;
  comp(1, 3) = -c;
  comp(2, 1) = 1.0;
  comp(2, 3) = -b;
  comp(3, 2) = 1.0;
  comp(3, 3) = -a;
  Eigen::EigenSolver<Eigen::Matrix4d> es(comp);

  auto poly = [&](double x) { return (((x + a) * x + b) * x + c) * x + d; };
  auto dpoly = [&](double x) { return ((4.0 * x + 3.0 * a) * x + 2.0 * b) * x + c; };
  const double coeff_inf =
      std::max({std::abs(c4), std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
  const double accept_tol = 1e-8 * std::max(1.0, coeff_inf) / std::abs(c4);

  std::vector<double> roots;
  for (int i = 0; i < 4; ++i) {
    std::complex<double> ev = es.eigenvalues()(i);
    if (std::abs(ev.imag()) > 1e-6 * std::max(1.0, std::abs(ev))) continue;
    double x = ev.real();
    for (int it = 0; it < 50; ++it) {
      double fx = poly(x);
      double dx = dpoly(x);
      if (dx == 0.0 || !std::isfinite(fx)) break;
      double step = fx / dx;
      x -= step;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    if (std::abs(poly(x)) <= accept_tol) roots.push_back(x);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

// Solves A x = b for Hermitian positive-definite A via Cholesky.
inline Eigen::VectorXcd hermitian_solve(const Eigen::MatrixXcd& A,
                                        const Eigen::VectorXcd& b) {
  if (A.rows() != A.cols() || A.rows() != b.size())
    throw std::invalid_argument("hermitian_solve: dimension mismatch");
  double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if (((A - A.adjoint()).cwiseAbs().maxCoeff()) > 1e-10 * scale)
    throw std::invalid_argument("hermitian_solve: matrix is not Hermitian");
  Eigen::LLT<Eigen::MatrixXcd> llt(A);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("hermitian_solve: matrix is not positive definite");
  return llt.solve(b);
}

struct RealSymmetricEvd {
  Eigen::VectorXd eigenvalues;   // sorted descending
  Eigen::MatrixXd eigenvectors;  // column k pairs with eigenvalues[k]
};

inline RealSymmetricEvd real_symmetric_evd(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols())
    throw std::invalid_argument("real_symmetric_evd: matrix is not square");
  double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("real_symmetric_evd: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("real_symmetric_evd: eigensolver failed");
  RealSymmetricEvd out;
  out.eigenvalues = es.eigenvalues().reverse();
  out.eigenvectors = es.eigenvectors().rowwise().reverse();
  return out;
}

}  // namespace obr::numerics
