#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "scatlimit/gaussian_simulator.hpp"
#include "scatlimit/hermite_subordination.hpp"
#include "scatlimit/limit_theory.hpp"
#include "scatlimit/scattering_transform.hpp"
#include "scatlimit/spectral_models.hpp"
#include "scatlimit/stats.hpp"

namespace scatlimit {

// A value with its Monte Carlo standard error; `exact` marks values known
// without sampling error (e.g. identically zero).
struct Estimate {
  double value = 0.0;
  double se = 0.0;
  bool exact = false;
};

Estimate estimate_mean(std::span<const double> x);
// a/b from paired samples, delta-method SE. Exact NaN when both are exactly zero.
Estimate estimate_ratio(std::span<const double> a, std::span<const double> b);

// β = 0.5 on the band (-π, π), unit variance.
SpectralModel default_campaign_model();

struct Campaign {
  std::string name = "custom";
  SpectralModel model = default_campaign_model();
  Subordinator subordinator = Subordinator::identity();
  Wavelet wavelet = Wavelet::mexican_hat();
  std::vector<double> j1_grid{4, 5, 6};
  // j2 = ratio·j1 (rounded per `rounding`); otherwise j2_grid gives j2 per j1.
  std::optional<double> ratio;
  std::vector<double> j2_grid;
  CouplingRounding rounding = CouplingRounding::none;
  std::size_t replicates = 200;
  std::size_t path_length = std::size_t{1} << 16;
  double dt = 1.0;
  std::uint64_t seed = 1;
  // Rescaled sampling times for the limit-process checks.
  std::vector<double> t_points{0.0};
  // Average squared statistics over the valid part of each path rather than
  // reading one interior time. Replicate-level SEs stay valid; the per-time
  // dependence is absorbed into each replicate mean.
  bool time_average = false;
  bool counterexample = false;
  // 0 = OpenMP default.
  int workers = 0;

  double beta() const { return model.beta(); }
  double j2_at(std::size_t i) const;
  // Grid, replicate and resolution checks shared by all campaign operations.
  void validate(std::size_t min_replicates = 30) const;
};

// Runs `body(r, path)` for replicate r with the Gaussian path of stream r.
// Output rows are stored by replicate index, so results do not depend on the
// worker count.
using ReplicateBody = std::function<std::vector<double>(std::size_t, const SampledPath&)>;
std::vector<std::vector<double>> run_replicates(const Campaign& c, const ReplicateBody& body, bool parallel = true);

// Column k of a replicate table.
std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t k);

// At most `allowed` increases along the series, each within z combined SEs.
bool decreasing_up_to_noise(const std::vector<Estimate>& v, int allowed = 1, double z = 2.0);

struct Assumption5Row {
  double j1 = 0.0, j2 = 0.0;
  Estimate ed2, edt2, ratio;
};
struct Assumption5Result {
  std::vector<Assumption5Row> rows;
  double max_ratio = 0.0;
  bool degenerate = false;  // both moments exactly zero at every scale
  bool d_decays = false;
  bool dt_decays = false;
};
Assumption5Result assumption5_ratio(const Campaign& c);

struct VarianceScalingResult {
  std::vector<double> j1;
  std::vector<Estimate> var_s, var_t;
  stats::LinearFit s_fit, t_fit;
  double predicted_s_slope = 0.0;
  double predicted_t_slope = 0.0;
};
VarianceScalingResult variance_scaling(const Campaign& c);

struct FddRow {
  double j1 = 0.0, j2 = 0.0;
  std::vector<double> covariance;  // row-major, t_points x t_points
  std::vector<double> target;      // limit covariance at the same points
  Estimate rel_error;              // Frobenius, bootstrap SE
  std::vector<double> ks;          // marginal KS per t point
  std::vector<double> pair_ks;     // KS of Y(t_a)+Y(t_b) per pair a<b
  double ks_critical = 0.0;        // asymptotic 5% critical value
  bool psd = false;
};
struct FddResult {
  std::vector<FddRow> rows;
  double limit_variance = 0.0;
  bool rel_error_decreasing = false;
};
// Pure Gaussian input; the campaign's subordinator is not used.
FddResult fdd_convergence(const Campaign& c, const LimitConstants& lc);

struct TheoremRow {
  double j1 = 0.0, j2 = 0.0;
  std::vector<double> ks;      // per t point, vs folded normal
  Estimate mean;               // pooled over t points
  Estimate second_moment;      // pooled E[Y²]
  Estimate variance_ratio;     // E[Y²] / (C_{A,1} κ ‖ψ̂‖)²
};
struct TheoremResult {
  std::vector<TheoremRow> rows;
  double c1 = 0.0;
  double target_scale = 0.0;  // |C_{A,1}| κ ‖ψ̂‖
  double target_mean = 0.0;   // target_scale √(2/π)
  // Trend of the rescaled second moment across j1.
  bool variance_monotone = false;
  std::string variance_trend;  // "increasing", "decreasing" or "mixed"
};
// CouplingViolation when the ratio leaves (1, 1/(1-β)) outside counterexample mode.
TheoremResult theorem_convergence(const Campaign& c, const LimitConstants& lc);

struct Prop31Row {
  double j1 = 0.0, j2 = 0.0;
  Estimate normalized;  // 2^{j1(β-1)} 2^{j2} E[D²]
  double envelope = 0.0;  // fitted constant times the rate envelope
  bool below_envelope = false;
};
struct Prop31Result {
  std::vector<Prop31Row> rows;
  double fitted_constant = 0.0;
  bool decreasing = false;
  bool identically_zero = false;
};
Prop31Result prop31_decay(const Campaign& c);

struct DominanceResult {
  Estimate probability;
  std::size_t trials = 0;
};
// P(|S_{j1}| < |T_{j1}|) from `n_points` well-separated interior times per
// replicate path. InsufficientReplicates for zero replicates or points.
DominanceResult dominance_probability(const SpectralModel& model, const Subordinator& a, const Wavelet& w, double j1,
                                      std::size_t n_points, std::size_t replicates, std::uint64_t seed,
                                      std::size_t path_length = std::size_t{1} << 14, double dt = 1.0,
                                      int workers = 0);

}  // namespace scatlimit
