#include "npspectra/quadrature.hpp"

#include <cmath>
#include <functional>
#include <numbers>

#include "doctest.h"
#include "npspectra/types.hpp"

using namespace npspectra;

namespace {

constexpr double kPi = std::numbers::pi;

// Reference value of integral_{-1}^{1} f(t) log|x-t| dt. Dyadic shells
// shrinking toward the singularity (or toward the endpoint nearest to an
// exterior x), Gauss-24 per shell, analytic tail under the log.
double log_integral_ref(const std::function<double(double)>& f, double x) {
  const auto& g = quad::gauss_legendre(24);
  auto seg = [&](double a, double b) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      const double t = 0.5 * (a + b) + 0.5 * (b - a) * g.nodes[i];
      s += 0.5 * (b - a) * g.weights[i] * f(t) * std::log(std::abs(x - t));
    }
    return s;
  };
  const double p = std::clamp(x, -1.0, 1.0);
  double total = 0.0;
  for (int side = 0; side < 2; ++side) {
    const double end = side == 0 ? -1.0 : 1.0;
    double delta = end - p;  // signed offset from the split point, halved per shell
    if (delta == 0.0) continue;
    while (std::abs(delta) > 1e-14) {
      const double nxt = delta / 2.0;
      total += seg(p + std::min(delta, nxt), p + std::max(delta, nxt));
      delta = nxt;
    }
    const double eps = std::abs(delta);
    if (p == x) {
      total += f(x) * (eps * std::log(eps) - eps);  // integral of log s over (0, eps)
    } else {
      total += seg(std::min(p, p + delta), std::max(p, p + delta));
    }
  }
  return total;
}

}  // namespace

TEST_SUITE("quadrature") {

TEST_CASE("gauss nodes and weights match tabulated values") {
  const auto& r2 = quad::gauss_legendre(2);
  CHECK(r2.nodes[0] == doctest::Approx(-0.57735026918962576).epsilon(1e-15));
  CHECK(r2.nodes[1] == doctest::Approx(0.57735026918962576).epsilon(1e-15));
  CHECK(r2.weights[0] == doctest::Approx(1.0).epsilon(1e-15));

  const auto& r5 = quad::gauss_legendre(5);
  CHECK(r5.nodes[0] == doctest::Approx(-0.90617984593866399).epsilon(1e-15));
  CHECK(r5.nodes[1] == doctest::Approx(-0.53846931010568309).epsilon(1e-15));
  CHECK(r5.nodes[2] == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  CHECK(r5.weights[0] == doctest::Approx(0.23692688505618909).epsilon(1e-14));
  CHECK(r5.weights[1] == doctest::Approx(0.47862867049936647).epsilon(1e-14));
  CHECK(r5.weights[2] == doctest::Approx(0.56888888888888889).epsilon(1e-14));
}

TEST_CASE("gauss rule is exact through degree 2n-1 and spectrally accurate") {
  const auto& r = quad::gauss_legendre(8);
  for (int k = 0; k <= 15; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i)
      s += r.weights[i] * std::pow(r.nodes[i], k);
    const double exact = (k % 2 == 0) ? 2.0 / (k + 1) : 0.0;
    CHECK(s == doctest::Approx(exact).scale(1.0).epsilon(1e-14));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i)
    s += r.weights[i] * std::exp(r.nodes[i]);
  CHECK(s == doctest::Approx(std::exp(1.0) - std::exp(-1.0)).epsilon(1e-13));
}

TEST_CASE("gauss weights are positive and sum to 2") {
  for (std::size_t n : {1u, 3u, 16u, 40u, 64u}) {
    const auto& r = quad::gauss_legendre(n);
    REQUIRE(r.nodes.size() == n);
    double sum = 0.0;
    for (double w : r.weights) {
      CHECK(w > 0.0);
      sum += w;
    }
    CHECK(sum == doctest::Approx(2.0).epsilon(1e-14));
    for (std::size_t i = 1; i < n; ++i) CHECK(r.nodes[i] > r.nodes[i - 1]);
  }
  CHECK_THROWS_AS(quad::gauss_legendre(0), InputError);
  CHECK_THROWS_AS(quad::gauss_legendre(65), InputError);
}

TEST_CASE("legendre values match hand-expanded polynomials") {
  const auto p = quad::legendre_values(5, 0.3);
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[1] == doctest::Approx(0.3));
  CHECK(p[2] == doctest::Approx(-0.365).epsilon(1e-15));
  CHECK(p[3] == doctest::Approx(-0.3825).epsilon(1e-15));
  CHECK(p[4] == doctest::Approx(0.0729375).epsilon(1e-14));
  CHECK(p[5] == doctest::Approx(0.34538625).epsilon(1e-14));
}

TEST_CASE("log moments match the direct closed form for k = 0") {
  for (double x : {0.37, -0.82, 1.21, -3.5, 1.0000001}) {
    const auto mom = quad::legendre_log_moments(0, x);
    const double r0 = (1.0 + x) * std::log(std::abs(1.0 + x)) +
                      (1.0 - x) * std::log(std::abs(1.0 - x)) - 2.0;
    CHECK(mom[0] == doctest::Approx(r0).epsilon(1e-12));
  }
}

TEST_CASE("log moments match a refined reference quadrature") {
  for (double x : {0.3, -0.77, 0.985, 1.05, -1.004, 2.6}) {
    const auto mom = quad::legendre_log_moments(8, x);
    for (std::size_t k = 0; k <= 8; ++k) {
      auto f = [&](double t) { return quad::legendre_values(k, t)[k]; };
      const double ref = log_integral_ref(f, x);
      CHECK(mom[k] == doctest::Approx(ref).scale(1.0).epsilon(5e-13));
    }
  }
}

TEST_CASE("log weights integrate p(t) log|x-t| exactly for low degree p") {
  const std::size_t n = 12;
  const auto& r = quad::gauss_legendre(n);
  for (double x : {0.3, -0.77, 0.9999, 1.02, -1.3, 4.0}) {
    const auto c = quad::log_weights(n, x);
    REQUIRE(c.size() == n);
    for (std::size_t m = 0; m + 1 <= n; ++m) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += c[j] * std::pow(r.nodes[j], m);
      const double ref = log_integral_ref([&](double t) { return std::pow(t, m); }, x);
      CHECK(s == doctest::Approx(ref).scale(1.0).epsilon(2e-12));
    }
  }
}

TEST_CASE("periodic log rule reproduces the fourier cosine integrals") {
  const std::size_t two_m = 32;
  const std::size_t m = two_m / 2;
  const auto lags = quad::kussmaul_martensen_lags(two_m);
  REQUIRE(lags.size() == two_m);

  auto apply = [&](std::size_t i, const std::function<double(double)>& f) {
    double s = 0.0;
    for (std::size_t j = 0; j < two_m; ++j) {
      const std::size_t d = (i + two_m - j) % two_m;
      s += lags[d] * f(2.0 * kPi * double(j) / double(two_m));
    }
    return s;
  };

  for (std::size_t i : {0u, 3u, 17u}) {
    const double ti = 2.0 * kPi * double(i) / double(two_m);
    CHECK(apply(i, [](double) { return 1.0; }) == doctest::Approx(0.0).scale(1.0).epsilon(1e-13));
    for (std::size_t k : {1u, 2u, 5u, 11u}) {
      REQUIRE(k < m);
      const double got_c = apply(i, [&](double s) { return std::cos(k * s); });
      const double got_s = apply(i, [&](double s) { return std::sin(k * s); });
      CHECK(got_c == doctest::Approx(-(2.0 * kPi / k) * std::cos(k * ti)).scale(1.0).epsilon(1e-12));
      CHECK(got_s == doctest::Approx(-(2.0 * kPi / k) * std::sin(k * ti)).scale(1.0).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(quad::kussmaul_martensen_lags(7), InputError);
  CHECK_THROWS_AS(quad::kussmaul_martensen_lags(2), InputError);
}

TEST_CASE("periodic log rule converges spectrally on a smooth factor") {
  // integral_0^{2pi} log(4 sin^2(s/2)) exp(cos s) ds, reference from a large rule
  auto value = [](std::size_t two_m) {
    const auto lags = quad::kussmaul_martensen_lags(two_m);
    double s = 0.0;
    for (std::size_t j = 0; j < two_m; ++j)
      s += lags[j] * std::exp(std::cos(2.0 * kPi * double(j) / double(two_m)));
    return s;
  };
  const double ref = value(512);
  CHECK(std::abs(value(48) - ref) < 1e-12);
  CHECK(std::abs(value(24) - ref) < 1e-6);
}

}  // TEST_SUITE
