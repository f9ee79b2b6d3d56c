#ifndef NPSPECTRA_QUADRATURE_HPP
#define NPSPECTRA_QUADRATURE_HPP

#include <cstddef>
#include <vector>

namespace npspectra::quad {

struct Rule {
  std::vector<double> nodes;    // on [-1,1], ascending
  std::vector<double> weights;  // positive, sum 2
};

// Gauss-Legendre rule, exact for polynomials of degree <= 2n-1.
const Rule& gauss_legendre(std::size_t n);

// Legendre polynomial values P_0..P_kmax at x, forward recurrence.
std::vector<double> legendre_values(std::size_t kmax, double x);

// R_k(x) = integral_{-1}^{1} P_k(t) log|x-t| dt for k = 0..kmax.
// Valid for any real x not equal to +-1; targets on the open interval and
// outside it both occur (same-edge neighbour panels).
std::vector<double> legendre_log_moments(std::size_t kmax, double x);

// Interpolatory weights c_j on the nodes of gauss_legendre(n) with
//   sum_j c_j p(x_j) = integral_{-1}^{1} p(t) log|x-t| dt
// exact for all polynomials p of degree <= n-1.
std::vector<double> log_weights(std::size_t n, double x);

// Kussmaul-Martensen weights R_j for the 2m-point periodic trapezoid grid
// t_j = j*pi/m:
//   sum_j R_j(t_i) f(t_j) ~= integral_0^{2pi} log(4 sin^2((t_i-s)/2)) f(s) ds,
// exact for trigonometric polynomials of degree < m. Returned indexed by the
// lag d = (i-j) mod 2m, which is all a uniform grid needs.
std::vector<double> kussmaul_martensen_lags(std::size_t two_m);

}  // namespace npspectra::quad

#endif
