#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace scatlimit::stats {

// Pairwise (tree) summation. The split points depend only on the length, so
// the result is independent of how the inputs were produced.
double pairwise_sum(std::span<const double> x);

double mean(std::span<const double> x);
// Unbiased sample variance.
double variance(std::span<const double> x);
double standard_error(std::span<const double> x);
double excess_kurtosis(std::span<const double> x);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double ci_low = 0.0;   // 95% t interval
  double ci_high = 0.0;
};

// Ordinary least squares y = a + b x. With `weights` (inverse variances),
// weighted least squares with the slope SE taken from the weights.
LinearFit ols(std::span<const double> x, std::span<const double> y,
              std::span<const double> weights = {});

// One-sample Kolmogorov-Smirnov statistic sup |F_n - F|. Sorts a copy.
double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf);

double normal_cdf(double x, double sd = 1.0);
double normal_quantile(double p);
double normal_pdf(double x);
// CDF of |N(0, sd^2)|.
double folded_normal_cdf(double x, double sd);

// Counter-based generator: the k-th output is a SplitMix64 finalizer applied
// to (key, k), so any (seed, stream) pair gives an independent, reproducible
// sequence regardless of which thread consumes it.
class CounterRng {
 public:
  using result_type = std::uint64_t;
  CounterRng(std::uint64_t seed, std::uint64_t stream);
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();
  // Uniform in (0, 1), never exactly 0 or 1.
  double uniform();
  // Standard normal via the polar-free Box-Muller form (two uniforms per pair).
  double normal();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace scatlimit::stats
