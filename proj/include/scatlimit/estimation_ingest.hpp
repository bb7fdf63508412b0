#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "scatlimit/gaussian_simulator.hpp"
#include "scatlimit/hermite_subordination.hpp"

namespace scatlimit {

// Equal-length records sharing one sampling step.
struct SignalDataset {
  std::vector<std::vector<double>> segments;
  double dt = 1.0;
  std::string label;
  std::string source;

  std::size_t segment_length() const { return segments.empty() ? 0 : segments.front().size(); }
  std::size_t pooled_size() const { return segments.size() * segment_length(); }
  std::vector<double> pooled() const;
  // ShapeError on ragged or empty segments, ParseError on non-finite values.
  void validate() const;
};

// Single-column or one-column-per-segment CSV. Lines starting with '#' and
// blank lines are skipped; rows are numbered from 1 as they appear in the
// file. segment_length == 0 keeps each column whole.
SignalDataset load_csv(const std::string& path, double dt, std::size_t segment_length = 0);
SignalDataset dataset_from_paths(const std::vector<SampledPath>& paths, std::string label = "simulated");

// A = quantile_X ∘ Φ with quantile clamping at 1/(2n). Needs ≥ 1000 pooled
// samples.
struct FittedSubordinator {
  std::shared_ptr<const EmpiricalCdf> cdf;
  Subordinator map = Subordinator::identity();
};
FittedSubordinator fit_subordinator(const SignalDataset& data, int truncation = 20);

struct HurstOptions {
  double band_fraction = 0.1;  // of the positive frequencies, zero bin excluded
  std::size_t bootstrap = 200;
  double confidence = 0.95;
  std::uint64_t seed = 1;
  int workers = 0;
};

struct HurstEstimate {
  double beta = 0.0;
  double ci_low = 0.0, ci_high = 0.0;
  double slope = 0.0, slope_se = 0.0;
  std::size_t frequencies = 0;
  bool short_range = false;  // β̂ ≥ 1 or the interval reaches 1
};

struct Periodogram {
  std::vector<double> lambda;  // 2πk/(n dt), k = 1..n/2
  std::vector<double> power;   // segment average of dt |X_k|² / (2π n)
};
Periodogram averaged_periodogram(const SignalDataset& data, int workers = 0);
Periodogram averaged_periodogram(const SignalDataset& data, const std::vector<std::size_t>& pick, int workers = 0);

// Log-periodogram regression over the lowest band; β = slope + 1. The
// interval resamples whole segments, or uses the OLS standard error when
// there is only one.
HurstEstimate estimate_hurst(const SignalDataset& data, const HurstOptions& opts = {});

// Segment-averaged biased autocovariance at lags 0..max_lag (in samples).
std::vector<double> autocovariance(const SignalDataset& data, std::size_t max_lag, int workers = 0);

// x ↦ A⁻¹(x). The empirical overload goes through Φ⁻¹(F_n(x)) directly.
SignalDataset gaussianize(const SignalDataset& data, const Subordinator& a);
SignalDataset gaussianize(const SignalDataset& data, const FittedSubordinator& a);

struct FittedModel {
  FittedSubordinator subordinator;
  HurstEstimate hurst;
  std::vector<double> correlation;  // normalized so correlation[0] == 1
  Periodogram spectrum;
};
FittedModel fit_model(const SignalDataset& data, const HurstOptions& opts = {}, std::size_t max_lag = 256);

}  // namespace scatlimit
