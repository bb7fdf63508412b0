#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scatlimit/gaussian_simulator.hpp"
#include "scatlimit/hermite_subordination.hpp"
#include "scatlimit/spectral_models.hpp"

namespace scatlimit {

enum class CouplingRounding { none, nearest, floor, ceil };

std::string to_string(CouplingRounding r);

struct ScatteringConfig {
  Wavelet wavelet = Wavelet::mexican_hat();
  double j1 = 4.0;
  // Explicit second scale; ignored when `ratio` is set.
  double j2 = 4.0;
  // Coupled sweep j2 = r·j1, rounded per `rounding` (none keeps it real).
  std::optional<double> ratio;
  CouplingRounding rounding = CouplingRounding::none;
  double beta = 0.5;
  // Permit ratios outside (1, 1/(1-β)).
  bool counterexample = false;

  double second_scale() const;
  // Throws CouplingViolation for a ratio outside the window unless in
  // counterexample mode.
  void validate() const;
};

double coupled_scale(double j1, double ratio, CouplingRounding rounding);

// ψ̂(2^j λ_k) on the rfft grid λ_k = 2πk/(n dt), cached per (wavelet, j, n, dt).
std::shared_ptr<const std::vector<std::complex<double>>> wavelet_filter(const Wavelet& w, double j,
                                                                        std::size_t n, double dt);

// Samples discarded on each side after filtering at scale j.
std::size_t filter_margin(const Wavelet& w, double j, double dt);

// X⋆ψ_j with ψ_j = 2^{-j}ψ(2^{-j}·), by circular convolution; the valid range
// shrinks by filter_margin on each side. ResolutionError when 2^j < 8 dt,
// LengthError for non power-of-two or fully consumed paths.
SampledPath cwt(const SampledPath& path, const Wavelet& w, double j);
// |X⋆ψ_{j1}|.
SampledPath first_order(const SampledPath& path, const Wavelet& w, double j1);
// ||X⋆ψ_{j1}|⋆ψ_{j2}|.
SampledPath second_order(const SampledPath& path, const Wavelet& w, double j1, double j2);

// 2^{j1(β-1)/2} 2^{j2/2}.
double rescale_factor(double beta, double j1, double j2);

struct RescaledSample {
  std::vector<double> values;
  std::vector<std::size_t> indices;
  // Requested time minus sampled time, in time units.
  std::vector<double> offsets;
};

// Normalized U[j1,j2]X at times 2^{j2} t_k measured from the path centre,
// using nearest-grid sampling. OutOfExtent if any time leaves the valid range.
RescaledSample rescaled_second_order(const SampledPath& path, const ScatteringConfig& cfg,
                                     std::span<const double> t_points);
// Same sampling applied to an already computed second-layer path.
RescaledSample sample_rescaled(const SampledPath& layer2, double factor, double j2,
                               std::span<const double> t_points);

// S = C_{A,1}(G⋆ψ_{j1}), T = (A(G) - C_{A,0} - C_{A,1}G)⋆ψ_{j1}. RankViolation
// when C_{A,1} vanishes.
std::pair<SampledPath, SampledPath> decompose_ST(const Subordinator& a, const SampledPath& g,
                                                 const Wavelet& w, double j1);

// D = (|S+T| - |S|)⋆ψ_{j2} and D̃ = (sign(S)·T)⋆ψ_{j2}.
std::pair<SampledPath, SampledPath> diff_paths(const Subordinator& a, const SampledPath& g,
                                               const Wavelet& w, double j1, double j2);

}  // namespace scatlimit
