#include "npspectra/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "npspectra/types.hpp"

namespace npspectra::quad {

namespace {

Rule compute_gauss_legendre(std::size_t n) {
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  // Newton iteration from Chebyshev-like initial guesses; converges to
  // machine precision in a handful of steps for any practical n.
  for (std::size_t i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (double(i) + 0.75) / (double(n) + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * double(k) + 1.0) * x * p1 - double(k) * p2) / (double(k) + 1.0);
      }
      pp = double(n) * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.nodes[n - 1 - i] = x;
    r.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
  return r;
}

}  // namespace

const Rule& gauss_legendre(std::size_t n) {
  if (n < 1 || n > 64) throw InputError("gauss_legendre: order out of range [1,64]");
  static std::map<std::size_t, Rule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

std::vector<double> legendre_values(std::size_t kmax, double x) {
  std::vector<double> p(kmax + 1);
  p[0] = 1.0;
  if (kmax >= 1) p[1] = x;
  for (std::size_t k = 1; k < kmax; ++k)
    p[k + 1] = ((2.0 * double(k) + 1.0) * x * p[k] - double(k) * p[k - 1]) / (double(k) + 1.0);
  return p;
}

namespace {

// Legendre functions of the second kind Q_0..Q_kmax at real x (principal
// value on the cut |x|<1). Forward recurrence is fine on the cut; off the
// cut Q decays while P grows, so Miller's backward recurrence is used.
std::vector<double> legendre_q(std::size_t kmax, double x) {
  std::vector<double> q(kmax + 1);
  if (std::abs(x) < 1.0) {
    q[0] = 0.5 * std::log((1.0 + x) / (1.0 - x));
    if (kmax >= 1) q[1] = x * q[0] - 1.0;
    for (std::size_t k = 1; k < kmax; ++k)
      q[k + 1] = ((2.0 * double(k) + 1.0) * x * q[k] - double(k) * q[k - 1]) / (double(k) + 1.0);
    return q;
  }
  // For x < -1 the same formula holds with both factors negative.
  const double q0 = 0.5 * std::log((x + 1.0) / (x - 1.0));
  // Start far enough above kmax that Miller's normalization suppresses the
  // dominant solution to rounding level; the gap per step is rho^2 with
  // rho = |x| + sqrt(x^2-1).
  const double rho = std::abs(x) + std::sqrt(x * x - 1.0);
  const double per_step = 2.0 * std::log(rho);
  std::size_t off = 60;
  if (per_step > 1e-8) off = std::max<std::size_t>(60, std::size_t(40.0 / per_step) + 2);
  off = std::min<std::size_t>(off, 60000);
  const std::size_t start = kmax + off;
  std::vector<double> tmp(start + 2, 0.0);
  tmp[start + 1] = 0.0;
  tmp[start] = 1e-280;
  for (std::size_t k = start; k > 0; --k)
    tmp[k - 1] = ((2.0 * double(k) + 1.0) * x * tmp[k] - (double(k) + 1.0) * tmp[k + 1]) / double(k);
  const double scale = q0 / tmp[0];
  for (std::size_t k = 0; k <= kmax; ++k) q[k] = tmp[k] * scale;
  return q;
}

}  // namespace

std::vector<double> legendre_log_moments(std::size_t kmax, double x) {
  if (x == 1.0 || x == -1.0) throw InputError("legendre_log_moments: x at interval endpoint");
  std::vector<double> r(kmax + 1);
  r[0] = (1.0 + x) * std::log(std::abs(1.0 + x)) + (1.0 - x) * std::log(std::abs(1.0 - x)) - 2.0;
  if (kmax == 0) return r;
  auto q = legendre_q(kmax + 1, x);
  // d/dx R_k = 2 Q_k together with decay at infinity pins the constant.
  for (std::size_t k = 1; k <= kmax; ++k)
    r[k] = 2.0 * (q[k + 1] - q[k - 1]) / (2.0 * double(k) + 1.0);
  return r;
}

std::vector<double> log_weights(std::size_t n, double x) {
  const Rule& rule = gauss_legendre(n);
  auto moments = legendre_log_moments(n - 1, x);
  std::vector<double> c(n, 0.0);
  // Lagrange basis on Gauss nodes expanded in Legendre polynomials:
  // l_j = sum_k (2k+1)/2 w_j P_k(x_j) P_k, exact since deg l_j*P_k <= 2n-2.
  for (std::size_t j = 0; j < n; ++j) {
    auto p = legendre_values(n - 1, rule.nodes[j]);
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      s += (2.0 * double(k) + 1.0) * 0.5 * p[k] * moments[k];
    c[j] = rule.weights[j] * s;
  }
  return c;
}

std::vector<double> kussmaul_martensen_lags(std::size_t two_m) {
  if (two_m < 4 || two_m % 2 != 0)
    throw InputError("kussmaul_martensen_lags: node count must be even and >= 4");
  const std::size_t m = two_m / 2;
  std::vector<double> lags(two_m);
  for (std::size_t d = 0; d < two_m; ++d) {
    const double td = std::numbers::pi * double(d) / double(m);
    double s = 0.0;
    for (std::size_t k = 1; k < m; ++k) s += std::cos(double(k) * td) / double(k);
    lags[d] = -(2.0 * std::numbers::pi / double(m)) * s -
              (std::numbers::pi / (double(m) * double(m))) * std::cos(double(m) * td);
  }
  return lags;
}

}  // namespace npspectra::quad
