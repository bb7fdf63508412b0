#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "scatlimit/spectral_models.hpp"

namespace scatlimit {

// σ² = C_G(0) ∫|ψ̂(λ)|²|λ|^{β-1} dλ.
double sigma_squared(const SpectralModel& model, const Wavelet& w);

struct GammaOptions {
  // Cells on [0, cutoff] for the first pass; doubled until converged.
  std::size_t initial_cells = 1024;
  // Convergence threshold on the increment of every requested γ.
  double increment_tol = 1e-8;
  // Largest FFT length tried before giving up.
  std::size_t max_fft = std::size_t{1} << 23;
};

struct GammaSeries {
  // values[k] = γ_{2k+2}.
  std::vector<double> values;
  double increment = 0.0;  // last refinement change, max over orders
  std::size_t cells = 0;   // cells on the half line at convergence
  double time_window = 0.0;
};

// γ_ℓ = (1/2π)∫ρ(t)^ℓ dt for ℓ = 2, 4, ..., max_ell, where ρ is the normalized
// Fourier transform of |ψ̂|²|λ|^{β-1}. ρ is sampled by FFT of exact cell masses
// on a grid of spacing h, which is a time window of length 2π/h; h is halved
// until every γ moves by less than the tolerance (TailTruncationError otherwise).
GammaSeries gamma_series(const SpectralModel& model, const Wavelet& w, int max_ell,
                         const GammaOptions& opts = {});
// EvenOrderRequired for odd or nonpositive ℓ.
double gamma_ell(const SpectralModel& model, const Wavelet& w, int ell, const GammaOptions& opts = {});

// C_{||,ℓ}: Hermite coefficients of |·|, closed form, ℓ = 0..L.
std::vector<double> abs_hermite_coeffs(int L);

struct KappaResult {
  double kappa = 0.0;
  double kappa2 = 0.0;
  int truncation = 0;
  // σ² γ_{2m} (1 - Σ_{ℓ<=2m} C²_{||,ℓ}) bounds the omitted terms.
  double tail_bound = 0.0;
};

// κ_m² = σ² Σ_{ℓ=2,4..2m} γ_ℓ C²_{||,ℓ}. gammas[k] = γ_{2k+2}; abs_coeffs indexed by ℓ.
KappaResult kappa(double sigma2, const std::vector<double>& gammas, const std::vector<double>& abs_coeffs,
                  int m);

struct LimitConstants {
  double sigma2 = 0.0;
  std::vector<double> gammas;  // γ_2, γ_4, ..., γ_{2m}
  double kappa = 0.0;
  double truncation_tail = 0.0;
  int truncation = 8;
  double wavelet_l2 = 0.0;  // ‖ψ̂‖²
  double gamma_increment = 0.0;
  std::size_t gamma_cells = 0;
  // Var V(t) = κ²‖ψ̂‖².
  double limit_variance() const { return kappa * kappa * wavelet_l2; }
};

LimitConstants limit_constants(const SpectralModel& model, const Wavelet& w, int m = 8,
                               const GammaOptions& opts = {});

// κ² ∫ e^{iλ(t1-t2)} |ψ̂(λ)|² dλ.
double limit_covariance(double kappa, const Wavelet& w, double t1, double t2);

// (1, 1/(1-β)); BetaOutOfRange outside (0,1).
std::pair<double, double> coupling_window(double beta);

enum class BetaRegime { below_half, half, above_half };

struct RateTerm {
  std::string label;
  std::function<double(double, double)> value;  // (j1, j2) -> envelope term
};

struct PredictedRates {
  double beta = 0.0;
  BetaRegime regime = BetaRegime::below_half;
  // E[D̃²] bound terms; the bound is their maximum up to constants.
  std::vector<RateTerm> diff_terms;
  // Var T_{j1} envelope as a function of j1.
  std::function<double(double)> var_t;
  std::string var_t_label;
  // Var S_{j1} ∝ 2^{-β j1}.
  std::function<double(double)> var_s;
  // Asymptotic log2-slopes in j1 (the log factor at β = ½ is ignored).
  double var_s_slope = 0.0;
  double var_t_slope = 0.0;

  double diff_bound(double j1, double j2) const;
  // Envelope of E[(2^{j1(β-1)/2} 2^{j2/2} D)²]:
  // j1 2^{j1(β-1)} + 2^{-j1} 2^{j2(1-β)} + 2^{-j1 β}.
  double normalized_diff_envelope(double j1, double j2) const;
  // Upper envelope for P(|S_{j1}| < |T_{j1}|), up to a constant.
  double dominance_envelope(double j1) const;
};

PredictedRates predicted_rates(double beta);

}  // namespace scatlimit
