#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "scatlimit/daubechies.hpp"
#include "scatlimit/errors.hpp"
#include "scatlimit/fft.hpp"
#include "scatlimit/quadrature.hpp"
#include "scatlimit/stats.hpp"

using namespace scatlimit;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("adaptive quadrature on smooth integrands", "[quadrature]") {
  auto r = quad::adaptive([](double x) { return std::exp(x); }, 0.0, 1.0);
  CHECK_THAT(r.value, WithinAbs(std::numbers::e - 1.0, 1e-13));
}

TEST_CASE("power-weighted rule absorbs the endpoint singularity", "[quadrature]") {
  // ∫_0^1 x^{-0.9} dx = 10, ∫_0^1 cos(x) x^{-0.5} dx via series oracle.
  auto r = quad::power_weighted([](double) { return 1.0; }, -0.9, 1.0);
  CHECK_THAT(r.value, WithinRel(10.0, 1e-12));
  double series = 0.0, term_sign = 1.0, fact = 1.0;
  for (int k = 0; k < 15; ++k) {
    if (k > 0) fact *= (2.0 * k - 1.0) * (2.0 * k);
    series += term_sign / fact / (2.0 * k + 0.5);
    term_sign = -term_sign;
  }
  auto c = quad::power_weighted([](double x) { return std::cos(x); }, -0.5, 1.0);
  CHECK_THAT(c.value, WithinRel(series, 1e-12));
}

TEST_CASE("half-line integration of polynomial decay", "[quadrature]") {
  auto r = quad::half_line([](double x) { return 1.0 / ((1.0 + x) * (1.0 + x) * (1.0 + x) * (1.0 + x)); }, 0.0);
  CHECK_THAT(r.value, WithinRel(1.0 / 3.0, 1e-10));
}

TEST_CASE("Gauss-Hermite rule integrates Gaussian moments", "[quadrature]") {
  const auto& rule = quad::gauss_hermite(40);
  auto moment = [&](int k) {
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * std::pow(rule.nodes[i], k);
    return s;
  };
  CHECK_THAT(moment(0), WithinAbs(1.0, 1e-13));
  CHECK_THAT(moment(2), WithinAbs(1.0, 1e-12));
  CHECK_THAT(moment(4), WithinAbs(3.0, 1e-11));
  CHECK_THAT(moment(10), WithinRel(945.0, 1e-11));
  CHECK_THAT(moment(7), WithinAbs(0.0, 1e-9));
}

TEST_CASE("real FFT round trip and DC bin", "[fft]") {
  std::vector<double> x(64);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.3 * i) + 0.1 * i;
  auto X = fft::forward(x);
  CHECK_THAT(X[0].real(), WithinRel(std::accumulate(x.begin(), x.end(), 0.0), 1e-12));
  auto y = fft::inverse(X, x.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK_THAT(y[i], WithinAbs(x[i], 1e-12));
  CHECK_THROWS_AS(fft::inverse(X, 32), LengthError);
}

TEST_CASE("pairwise sum and moments", "[stats]") {
  std::vector<double> x(1000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
  CHECK(stats::pairwise_sum(x) == 499500.0);
  CHECK_THAT(stats::mean(x), WithinAbs(499.5, 1e-12));
  CHECK_THAT(stats::variance(x), WithinRel(1000.0 * 1001.0 / 12.0, 1e-12));
}

TEST_CASE("least squares recovers an exact line", "[stats]") {
  std::vector<double> x{1, 2, 3, 4, 5}, y;
  for (double v : x) y.push_back(2.5 - 0.7 * v);
  auto fit = stats::ols(x, y);
  CHECK_THAT(fit.slope, WithinAbs(-0.7, 1e-12));
  CHECK_THAT(fit.intercept, WithinAbs(2.5, 1e-12));
  CHECK(fit.slope_se < 1e-10);
}

TEST_CASE("KS statistic against known samples", "[stats]") {
  // Uniform CDF with evenly spaced sample (i+0.5)/n has D = 1/(2n).
  std::vector<double> u(100);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = (i + 0.5) / 100.0;
  CHECK_THAT(stats::ks_statistic(u, [](double v) { return v; }), WithinAbs(0.005, 1e-14));
}

TEST_CASE("counter RNG is reproducible and roughly normal", "[stats][rng]") {
  stats::CounterRng a(7, 3), b(7, 3), c(7, 4);
  CHECK(a() == b());
  CHECK(a() != c());
  stats::CounterRng g(11, 0);
  std::vector<double> z(200000);
  for (double& v : z) v = g.normal();
  CHECK(std::abs(stats::mean(z)) < 4.0 / std::sqrt(z.size()));
  CHECK_THAT(stats::variance(z), WithinAbs(1.0, 0.02));
  CHECK(stats::ks_statistic(z, [](double v) { return stats::normal_cdf(v); }) < 0.005);
}

TEST_CASE("Daubechies filters", "[daubechies]") {
  const double s3 = std::sqrt(3.0), d = 4.0 * std::numbers::sqrt2;
  const std::vector<double> db2{(1 + s3) / d, (3 + s3) / d, (3 - s3) / d, (1 - s3) / d};
  auto h = daubechies_filter(2);
  REQUIRE(h.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK_THAT(h[i], WithinAbs(db2[i], 1e-12));

  for (int n : {1, 3, 4, 8}) {
    auto f = daubechies_filter(n);
    REQUIRE(f.size() == static_cast<std::size_t>(2 * n));
    double sum = 0, energy = 0;
    for (double v : f) {
      sum += v;
      energy += v * v;
    }
    CHECK_THAT(sum, WithinAbs(std::numbers::sqrt2, 1e-10));
    CHECK_THAT(energy, WithinAbs(1.0, 1e-10));
    // Orthogonality to even shifts.
    for (int s = 1; s < n; ++s) {
      double dot = 0;
      for (int k = 0; k + 2 * s < 2 * n; ++k) dot += f[k] * f[k + 2 * s];
      CHECK_THAT(dot, WithinAbs(0.0, 1e-10));
    }
  }
}

TEST_CASE("factored high-pass term matches the direct filter sum", "[daubechies]") {
  DaubechiesTransform t(4);
  for (double lam : {0.3, 1.7, 4.0, 9.5}) {
    std::complex<double> phi = 1.0;
    double s = lam / 2.0;
    for (int m = 0; m < 20; ++m) {
      s /= 2.0;
      phi *= t.m0(s);
    }
    const auto direct = std::conj(t.m0(lam / 2.0 + std::numbers::pi)) * phi;
    CHECK(std::abs(direct - t(lam)) < 1e-12);
  }
}
