#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "scatlimit/errors.hpp"
#include "scatlimit/gaussian_simulator.hpp"
#include "scatlimit/scattering_transform.hpp"
#include "scatlimit/stats.hpp"

using namespace scatlimit;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SampledPath make_path(std::vector<double> v, double dt = 1.0) {
  SampledPath p;
  p.values = std::move(v);
  p.dt = dt;
  p.valid_begin = 0;
  p.valid_end = p.values.size();
  return p;
}

SampledPath noise(std::size_t n, std::uint64_t seed, double dt = 1.0) {
  stats::CounterRng rng(seed, 0);
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return make_path(std::move(v), dt);
}

SpectralModel lrd(double beta, double band = std::numbers::pi) {
  SpectralModelParams p;
  p.beta = beta;
  p.band = band;
  p.normalize = true;
  return SpectralModel(p);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b, std::size_t lo,
                    std::size_t hi) {
  double m = 0.0;
  for (std::size_t i = lo; i < hi; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("cwt of a constant vanishes", "[scattering]") {
  auto p = make_path(std::vector<double>(1024, 3.25));
  for (auto w : {Wavelet::mexican_hat(), Wavelet::morlet(), Wavelet::daubechies(4)}) {
    auto y = cwt(p, w, 3.0);
    for (double v : y.values) CHECK_THAT(v, WithinAbs(0.0, 1e-10));
  }
}

TEST_CASE("cwt is linear", "[scattering]") {
  auto x = noise(2048, 1), y = noise(2048, 2);
  auto z = x;
  for (std::size_t i = 0; i < z.size(); ++i) z.values[i] = 2.5 * x.values[i] - 0.75 * y.values[i];
  const auto w = Wavelet::mexican_hat();
  auto cx = cwt(x, w, 4), cy = cwt(y, w, 4), cz = cwt(z, w, 4);
  for (std::size_t i = 0; i < z.size(); ++i)
    CHECK_THAT(cz.values[i], WithinAbs(2.5 * cx.values[i] - 0.75 * cy.values[i], 1e-10));
}

TEST_CASE("cwt of an impulse reproduces the dilated Mexican hat", "[scattering]") {
  // ψ(t) = (1 - t²) e^{-t²/2} / √(2π) for ψ̂ = λ² e^{-λ²/2}.
  const std::size_t n = 1024;
  const double dt = 0.25, j = 2.0, s = std::exp2(j);
  const std::size_t t0 = 500;
  std::vector<double> v(n, 0.0);
  v[t0] = 1.0 / dt;
  auto y = cwt(make_path(v, dt), Wavelet::mexican_hat(), j);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (static_cast<double>(i) - static_cast<double>(t0)) * dt / s;
    const double psi = (1.0 - u * u) * std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi) / s;
    worst = std::max(worst, std::abs(y.values[i] - psi));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("cwt records margins and enforces its guards", "[scattering]") {
  auto p = noise(4096, 3, 0.5);
  const auto w = Wavelet::mexican_hat();
  auto y = cwt(p, w, 3.0);
  const std::size_t m = filter_margin(w, 3.0, 0.5);
  CHECK(m == 96);
  CHECK(y.valid_begin == m);
  CHECK(y.valid_end == 4096 - m);
  CHECK(filter_margin(Wavelet::daubechies(8), 2.0, 1.0) == 30);

  CHECK_THROWS_AS(cwt(p, w, 1.9), ResolutionError);
  CHECK_NOTHROW(cwt(p, w, 2.0));
  CHECK_THROWS_AS(cwt(make_path(std::vector<double>(1000, 0.0)), w, 3.0), LengthError);
  CHECK_THROWS_AS(cwt(noise(256, 1), w, 6.0), LengthError);
}

TEST_CASE("cwt commutes with circular shifts", "[scattering][property]") {
  auto x = noise(2048, 4);
  auto s = x;
  const std::size_t k = 317;
  std::rotate(s.values.rbegin(), s.values.rbegin() + k, s.values.rend());
  const auto w = Wavelet::daubechies(4);
  auto cx = cwt(x, w, 4.0), cs = cwt(s, w, 4.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK_THAT(cs.values[(i + k) % x.size()], WithinAbs(cx.values[i], 1e-10));
}

TEST_CASE("first-order modulus properties", "[scattering]") {
  const auto w = Wavelet::mexican_hat();
  auto zero = first_order(make_path(std::vector<double>(512, 0.0)), w, 3.0);
  for (double v : zero.values) CHECK(v == 0.0);

  auto x = noise(2048, 5);
  auto u = first_order(x, w, 4.0);
  auto neg = x, scaled = x, shifted = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    neg.values[i] = -x.values[i];
    scaled.values[i] = -3.0 * x.values[i];
    shifted.values[i] = x.values[i] + 17.0;
  }
  auto un = first_order(neg, w, 4.0), us = first_order(scaled, w, 4.0), uc = first_order(shifted, w, 4.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(u.values[i] >= 0.0);
    CHECK(un.values[i] == u.values[i]);
    CHECK_THAT(us.values[i], WithinAbs(3.0 * u.values[i], 1e-10));
    CHECK_THAT(uc.values[i], WithinAbs(u.values[i], 1e-10));
  }
}

TEST_CASE("second-order homogeneity and zero input", "[scattering]") {
  const auto w = Wavelet::mexican_hat();
  auto zero = second_order(make_path(std::vector<double>(4096, 0.0)), w, 3.0, 4.0);
  for (double v : zero.values) CHECK(v == 0.0);
  auto x = noise(4096, 6), c = x;
  for (double& v : c.values) v *= -0.4;
  auto ux = second_order(x, w, 3.0, 4.0), uc = second_order(c, w, 3.0, 4.0);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK_THAT(uc.values[i], WithinAbs(0.4 * ux.values[i], 1e-10));
  CHECK(ux.valid_begin == filter_margin(w, 3.0, 1.0) + filter_margin(w, 4.0, 1.0));
}

TEST_CASE("second order is Lipschitz in the sup norm", "[scattering][property]") {
  const auto w = Wavelet::mexican_hat();
  const std::size_t n = 2048;
  const double j1 = 3.0, j2 = 4.0;
  // ℓ¹ norms of the discrete filters, taken from their impulse responses.
  auto l1 = [&](double j) {
    std::vector<double> d(n, 0.0);
    d[0] = 1.0;
    auto h = cwt(make_path(d), w, j);
    double s = 0.0;
    for (double v : h.values) s += std::abs(v);
    return s;
  };
  const double bound = l1(j1) * l1(j2);
  for (std::uint64_t seed = 10; seed < 20; ++seed) {
    auto x = noise(n, seed), y = noise(n, seed + 100);
    for (std::size_t i = 0; i < n; ++i) y.values[i] = x.values[i] + 0.3 * y.values[i];
    double sup_in = 0.0;
    for (std::size_t i = 0; i < n; ++i) sup_in = std::max(sup_in, std::abs(x.values[i] - y.values[i]));
    auto ux = second_order(x, w, j1, j2), uy = second_order(y, w, j1, j2);
    CHECK(max_abs_diff(ux.values, uy.values, 0, n) <= bound * sup_in * (1.0 + 1e-12));
  }
}

TEST_CASE("second-order output of a long-range input is stationary", "[scattering][mc]") {
  auto g = simulate_gaussian(lrd(0.1), 1 << 16, 1.0, 11);
  auto u = second_order(g, Wavelet::daubechies(8), 4.0, 4.4);
  const std::size_t lo = u.valid_begin, hi = u.valid_end, mid = (lo + hi) / 2;
  std::vector<double> a(u.values.begin() + lo, u.values.begin() + mid);
  std::vector<double> b(u.values.begin() + mid, u.values.begin() + hi);
  for (double v : u.values) {
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
  }
  const double ma = stats::mean(a), mb = stats::mean(b);
  // Block means over 16 blocks per half give a dependence-aware standard error.
  auto block_se = [](const std::vector<double>& v) {
    std::vector<double> m;
    const std::size_t blk = v.size() / 16;
    for (std::size_t k = 0; k < 16; ++k)
      m.push_back(stats::mean(std::span<const double>(v.data() + k * blk, blk)));
    return stats::standard_error(m);
  };
  const double se = std::hypot(block_se(a), block_se(b));
  CHECK(std::abs(ma - mb) < 4.0 * se);
}

TEST_CASE("rescaling factor and nearest-grid sampling", "[scattering]") {
  CHECK_THAT(rescale_factor(0.5, 0.0, 0.0), WithinAbs(std::exp2(-0.0), 1e-15));
  CHECK_THAT(rescale_factor(0.5, 1.0, 0.0), WithinRel(std::exp2(-0.25), 1e-15));
  CHECK_THAT(rescale_factor(0.3, 10.0, 12.0), WithinRel(std::exp2(-3.5 + 6.0), 1e-15));

  ScatteringConfig cfg;
  cfg.beta = 0.3;
  cfg.j1 = 3.0;
  cfg.j2 = 3.5;
  const std::vector<double> t{-1.0, 0.0, 0.3};
  auto zero = rescaled_second_order(make_path(std::vector<double>(4096, 0.0)), cfg, t);
  for (double v : zero.values) CHECK(v == 0.0);
  // 2^{3.5} = 11.3137...: t = 0.3 lands 3.394 samples right of the centre.
  CHECK(zero.indices[1] == 2048);
  CHECK(zero.indices[2] == 2051);
  CHECK_THAT(zero.offsets[2], WithinAbs(0.3 * std::exp2(3.5) - 3.0, 1e-12));

  auto x = noise(4096, 8);
  auto r = rescaled_second_order(x, cfg, t);
  auto u = second_order(x, cfg.wavelet, 3.0, 3.5);
  CHECK(r.values[0] == rescale_factor(0.3, 3.0, 3.5) * u.values[r.indices[0]]);

  const std::vector<double> far{200.0};
  CHECK_THROWS_AS(rescaled_second_order(x, cfg, far), OutOfExtent);
}

TEST_CASE("coupling rule", "[scattering]") {
  CHECK(coupled_scale(10, 1.1, CouplingRounding::none) == Catch::Approx(11.0));
  CHECK(coupled_scale(7, 1.1, CouplingRounding::nearest) == 8.0);
  CHECK(coupled_scale(7, 1.1, CouplingRounding::floor) == 7.0);
  CHECK(coupled_scale(7, 1.1, CouplingRounding::ceil) == 8.0);

  ScatteringConfig cfg;
  cfg.beta = 0.3;
  cfg.ratio = 1.2;
  CHECK_NOTHROW(cfg.validate());
  cfg.ratio = 0.9;
  CHECK_THROWS_AS(cfg.validate(), CouplingViolation);
  cfg.ratio = 2.5;
  CHECK_THROWS_AS(cfg.validate(), CouplingViolation);
  cfg.counterexample = true;
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("S/T decomposition", "[scattering]") {
  const auto w = Wavelet::mexican_hat();
  auto g = simulate_gaussian(lrd(0.3), 4096, 1.0, 21);

  auto [s_id, t_id] = decompose_ST(Subordinator::identity(), g, w, 4.0);
  for (double v : t_id.values) CHECK_THAT(v, WithinAbs(0.0, 1e-12));

  auto a = Subordinator::hermite_sum({0.5, 1, 1, 1});
  auto [s, t] = decompose_ST(a, g, w, 4.0);
  auto x = apply(a, g);
  auto full = cwt(x, w, 4.0);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK_THAT(s.values[i] + t.values[i], WithinAbs(full.values[i], 1e-10));

  CHECK_THROWS_AS(decompose_ST(Subordinator::hermite_sum({0, 0, 1}), g, w, 4.0), RankViolation);
}

TEST_CASE("difference paths", "[scattering]") {
  const auto w = Wavelet::mexican_hat();
  auto g = simulate_gaussian(lrd(0.3), 4096, 1.0, 22);
  auto [d0, dt0] = diff_paths(Subordinator::identity(), g, w, 3.0, 3.5);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK_THAT(d0.values[i], WithinAbs(0.0, 1e-12));
    CHECK_THAT(dt0.values[i], WithinAbs(0.0, 1e-12));
  }

  // Where |S| >= |T| the pre-filter quantities coincide, so for a weak
  // nonlinearity D and D̃ are close.
  auto a = Subordinator::hermite_sum({0, 1, 0.01});
  auto [s, t] = decompose_ST(a, g, w, 3.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double sv = s.values[i], tv = t.values[i];
    if (std::abs(sv) >= std::abs(tv)) CHECK(std::abs(sv + tv) - std::abs(sv) == Catch::Approx(std::copysign(1.0, sv) * tv).margin(1e-14));
  }
}
