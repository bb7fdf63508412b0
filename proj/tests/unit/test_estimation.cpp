#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include "scatlimit/errors.hpp"
#include "scatlimit/estimation_ingest.hpp"
#include "scatlimit/stats.hpp"

using namespace scatlimit;
using Catch::Matchers::WithinAbs;

namespace {

std::string write_tmp(const std::string& name, const std::string& body) {
  auto p = std::filesystem::temp_directory_path() / ("scatlimit_" + name);
  std::ofstream(p) << body;
  return p.string();
}

SignalDataset simulated(double beta, std::size_t segments, std::size_t n, std::uint64_t seed) {
  SpectralModelParams p;
  p.beta = beta;
  p.band = std::numbers::pi;
  p.normalize = true;
  SpectralSynthesizer synth(SpectralModel(p), n, 1.0);
  std::vector<SampledPath> paths;
  for (std::size_t s = 0; s < segments; ++s) paths.push_back(synth.generate(seed, s));
  return dataset_from_paths(paths);
}

SignalDataset white(std::size_t segments, std::size_t n, std::uint64_t seed) {
  SignalDataset d;
  stats::CounterRng rng(seed, 0);
  for (std::size_t s = 0; s < segments; ++s) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal();
    d.segments.push_back(std::move(v));
  }
  return d;
}

SignalDataset mapped(const SignalDataset& d, const std::function<double(double)>& f) {
  SignalDataset out = d;
  for (auto& s : out.segments)
    for (double& v : s) v = f(v);
  return out;
}

}  // namespace

TEST_CASE("csv loading", "[ingest]") {
  std::string body = "# header comment\n";
  for (int r = 0; r < 1024; ++r) body += std::to_string(r) + "," + std::to_string(-r) + ", 0.5\n";
  auto d = load_csv(write_tmp("three.csv", body), 0.25);
  REQUIRE(d.segments.size() == 3);
  CHECK(d.segment_length() == 1024);
  CHECK(d.segments[1][10] == -10.0);
  CHECK(d.dt == 0.25);

  auto split = load_csv(write_tmp("three.csv", body), 1.0, 256);
  CHECK(split.segments.size() == 12);
  CHECK(split.segments[1][0] == 256.0);
  CHECK_THROWS_AS(load_csv(write_tmp("three.csv", body), 1.0, 300), ShapeError);

  std::string bad;
  for (int r = 1; r <= 10; ++r) bad += (r == 7 ? std::string("abc") : std::to_string(r)) + "\n";
  try {
    load_csv(write_tmp("bad.csv", bad), 1.0);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.row() == 7);
  }
  CHECK_THROWS_AS(load_csv(write_tmp("nan.csv", "1\n2\nnan\n"), 1.0), ParseError);
  CHECK_THROWS_AS(load_csv(write_tmp("ragged.csv", "1,2\n3\n"), 1.0), ParseError);
  CHECK_THROWS_AS(load_csv(write_tmp("empty.csv", "# nothing\n"), 1.0), ShapeError);
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", 1.0), ShapeError);
}

TEST_CASE("subordinator fit recovers a Laplace map", "[ingest]") {
  const auto g = simulated(0.8, 32, 4096, 11);
  const LaplaceCdf lap{0.0, 1.0};
  const auto x = mapped(g, [&](double z) { return laplace_transform(lap, z); });
  const auto fit = fit_subordinator(x);
  double sup = 0.0;
  for (double z = -2.0; z <= 2.0; z += 0.01) sup = std::max(sup, std::abs(fit.map(z) - laplace_transform(lap, z)));
  CHECK(sup < 0.05);

  // A(Z) for fresh normals reproduces the pooled empirical CDF.
  stats::CounterRng rng(99, 0);
  std::vector<double> pushed(100000);
  for (double& v : pushed) v = fit.map(rng.normal());
  const double ks = stats::ks_statistic(pushed, [&](double t) { return fit.cdf->cdf(t); });
  CHECK(ks < 0.02);
}

TEST_CASE("gaussian data gives an affine map", "[ingest]") {
  const auto g = white(4, 4096, 5);
  const auto x = mapped(g, [](double z) { return 3.0 * z + 1.0; });
  const auto fit = fit_subordinator(x);
  std::vector<double> zs, as;
  for (double z = -2.0; z <= 2.0; z += 0.05) {
    zs.push_back(z);
    as.push_back(fit.map(z));
  }
  const auto line = stats::ols(zs, as);
  CHECK_THAT(line.slope, WithinAbs(3.0, 0.1));
  CHECK_THAT(line.intercept, WithinAbs(1.0, 0.1));
}

TEST_CASE("subordinator fit rejects small or constant data", "[ingest]") {
  CHECK_THROWS_AS(fit_subordinator(white(1, 999, 1)), SampleTooSmall);
  SignalDataset c;
  c.segments = {std::vector<double>(2000, 4.0)};
  CHECK_THROWS_AS(fit_subordinator(c), NonInvertibleCDF);
}

TEST_CASE("Hurst estimate on simulated data", "[ingest]") {
  const auto h = estimate_hurst(simulated(0.5, 16, 4096, 3));
  CHECK_THAT(h.beta, WithinAbs(0.5, 0.1));
  CHECK(h.ci_low < h.beta);
  CHECK(h.ci_high > h.beta);
  CHECK_FALSE(h.short_range);
  CHECK(h.frequencies == 204);

  const auto low = estimate_hurst(simulated(0.1, 16, 4096, 4));
  CHECK(low.beta > 0.02);
  CHECK(low.beta < 0.25);

  const auto w = estimate_hurst(white(16, 4096, 8));
  CHECK_THAT(w.beta, WithinAbs(1.0, 0.1));
  CHECK(w.short_range);

  CHECK_THROWS_AS(estimate_hurst(white(4, 256, 1)), SampleTooSmall);
}

TEST_CASE("Hurst estimate is affine invariant", "[ingest]") {
  const auto d = simulated(0.5, 8, 2048, 21);
  const auto a = estimate_hurst(d);
  const auto b = estimate_hurst(mapped(d, [](double v) { return -4.0 * v + 7.0; }));
  CHECK_THAT(b.beta, WithinAbs(a.beta, 1e-12));
  CHECK_THAT(b.ci_low, WithinAbs(a.ci_low, 1e-12));
}

TEST_CASE("single segment interval uses the regression error", "[ingest]") {
  const auto h = estimate_hurst(simulated(0.5, 1, 8192, 2));
  CHECK(h.ci_high - h.beta > 0.0);
  CHECK_THAT(h.ci_high - h.beta, WithinAbs(h.beta - h.ci_low, 1e-12));
}

TEST_CASE("gaussianize round trip", "[ingest]") {
  const auto g = simulated(0.8, 32, 4096, 17);
  const LaplaceCdf lap{0.0, 1.0};
  const auto x = mapped(g, [&](double z) { return laplace_transform(lap, z); });
  const auto fit = fit_subordinator(x);
  const auto back = gaussianize(x, fit);
  const auto pooled = back.pooled();
  CHECK_THAT(stats::excess_kurtosis(pooled), WithinAbs(0.0, 0.2));
  CHECK(stats::ks_statistic(pooled, [](double t) { return stats::normal_cdf(t); }) < 0.02);

  // Recovery of G, up to the sample marginal of this realisation.
  const auto orig = g.pooled();
  double sup = 0.0;
  for (std::size_t i = 0; i < orig.size(); ++i)
    if (std::abs(orig[i]) < 2.0) sup = std::max(sup, std::abs(pooled[i] - orig[i]));
  CHECK(sup < 0.05);

  // Second pass is close to the identity.
  const auto again = fit_subordinator(back);
  double dev = 0.0;
  for (double z = -2.0; z <= 2.0; z += 0.01) dev = std::max(dev, std::abs(again.map(z) - z));
  CHECK(dev < 0.01);

  // Generic inverse through the parametric map.
  const auto param = subordinator_from_cdf(lap);
  const auto back2 = gaussianize(x, param);
  CHECK_THAT(back2.segments[3][100], WithinAbs(g.segments[3][100], 1e-9));
}

TEST_CASE("gaussianize with the identity is a no-op", "[ingest]") {
  const auto d = white(2, 512, 3);
  const auto out = gaussianize(d, Subordinator::identity());
  for (std::size_t i = 0; i < 512; ++i) CHECK_THAT(out.segments[1][i], WithinAbs(d.segments[1][i], 1e-12));
  CHECK_THROWS_AS(gaussianize(d, Subordinator::hermite_sum({0, 1, 1})), NonInvertibleCDF);
}

TEST_CASE("autocovariance against the direct sum", "[ingest]") {
  const auto d = white(3, 600, 9);
  const auto r = autocovariance(d, 5);
  REQUIRE(r.size() == 6);
  for (std::size_t k = 0; k <= 5; ++k) {
    double acc = 0.0;
    for (const auto& s : d.segments) {
      const double m = stats::mean(s);
      double sum = 0.0;
      for (std::size_t i = 0; i + k < s.size(); ++i) sum += (s[i] - m) * (s[i + k] - m);
      acc += sum / 600.0;
    }
    CHECK_THAT(r[k], WithinAbs(acc / 3.0, 1e-12));
  }
  const auto m = fit_model(simulated(0.5, 4, 1024, 1), {}, 64);
  CHECK(m.correlation.front() == 1.0);
  CHECK(m.correlation[1] > 0.0);
  CHECK(m.spectrum.lambda.size() == 512);
}
