#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scatlimit/daubechies.hpp"

namespace scatlimit {

enum class EnvelopeKind { constant, gaussian, lorentzian };

// C_G(λ) = amplitude * shape(λ / width), with shape 1, e^{-x²/2} or 1/(1+x²).
struct Envelope {
  EnvelopeKind kind = EnvelopeKind::constant;
  double amplitude = 1.0;
  double width = 1.0;

  double operator()(double lambda) const;
};

// Which sign the power-law exponent takes. `assumption` is f = C|λ|^{β-1};
// `caption` is the alternative reading f = C|λ|^{1-β}.
enum class ExponentConvention { assumption, caption };

struct SpectralModelParams {
  double beta = 0.5;
  Envelope envelope;
  // Support |λ| < band. A one-sided band (0, Λ) is recorded but evaluated
  // symmetrically, since the process is real.
  std::optional<double> band;
  bool one_sided_band = false;
  // Permits beta == 1 (no singularity), e.g. ½·1_{[-1,1]} or (1+λ²)^{-1}.
  bool short_range = false;
  // Permits C_G(0) == 0.
  bool degenerate = false;
  ExponentConvention convention = ExponentConvention::assumption;
  // Rescale the envelope amplitude so that ∫f = 1.
  bool normalize = false;
};

class SpectralModel {
 public:
  explicit SpectralModel(SpectralModelParams p);

  const SpectralModelParams& params() const { return p_; }
  double beta() const { return p_.beta; }
  // Exponent p in f(λ) = C(λ)|λ|^p.
  double exponent() const;
  // C_G(λ) after normalization.
  double envelope(double lambda) const;
  double c0() const { return envelope(0.0); }
  std::optional<double> band() const { return p_.band; }
  // |λ| beyond which the density is zero, or where the remaining mass is
  // below 1e-14 of the total for unbanded models.
  double support() const { return support_; }
  // ∫f over ℝ, i.e. Var G.
  double total_mass() const { return mass_; }
  bool long_range() const { return !p_.short_range && p_.convention == ExponentConvention::assumption; }
  std::string describe() const;

  // ∫_a^b f(λ) dλ for 0 <= a < b, resolving the power law at the origin.
  double mass(double a, double b) const;

 private:
  double raw(double lambda) const;

  SpectralModelParams p_;
  double scale_ = 1.0;
  double support_ = 0.0;
  double mass_ = 0.0;
};

// C_G(λ)|λ|^{p} inside the band, 0 outside; +∞ at λ = 0 when p < 0.
double eval_density(const SpectralModel& model, double lambda);

enum class WaveletKind { mexican_hat, morlet, daubechies, shannon, power_band };

// Mother wavelet defined through ψ̂(λ) = ∫ e^{-iλt} ψ(t) dt.
class Wavelet {
 public:
  static Wavelet mexican_hat();
  // Real part of the Morlet wavelet with the admissibility correction.
  static Wavelet morlet(double omega0 = 5.0);
  static Wavelet daubechies(int vanishing_moments, int depth = 20);
  // Ideal band-pass ψ̂ = 1 on lo <= |λ| <= hi.
  static Wavelet shannon(double lo, double hi);
  // Test spectrum ψ̂ = |λ|^p on |λ| <= hi. Not a wavelet when p < 1, kept
  // for constructing closed-form limit constants.
  static Wavelet power_band(double p, double hi);

  WaveletKind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  std::complex<double> ft(double lambda) const;
  double ft_abs2(double lambda) const;
  // C_ψ̂(λ) = |ψ̂(λ)| / |λ|^α (continuous extension at 0).
  double envelope(double lambda) const;
  // ∫|ψ̂|² over ℝ.
  double l2_norm2() const { return l2_; }
  // Half-width of the (effective) time support; used for convolution margins.
  double radius() const { return radius_; }
  // |λ| beyond which |ψ̂|² is exactly zero or negligible (< 1e-16 relative).
  double frequency_cutoff() const { return cutoff_; }
  // Breakpoints of ψ̂ where quadrature should split.
  std::vector<double> breakpoints() const;
  bool admissible() const { return alpha_ >= 1.0; }
  int vanishing_moments() const { return db_ ? db_->vanishing_moments() : 0; }
  double param(std::size_t i) const { return params_.at(i); }
  std::string name() const;

 private:
  Wavelet(WaveletKind kind, double alpha, std::vector<double> params);
  void finish();

  WaveletKind kind_;
  double alpha_;
  std::vector<double> params_;
  std::shared_ptr<const DaubechiesTransform> db_;
  double l2_ = 0.0;
  double radius_ = 0.0;
  double cutoff_ = 0.0;
};

std::complex<double> eval_wavelet_ft(const Wavelet& w, double lambda);

// An even spectral-type density with a power law at the origin,
// f(λ) ~ local_coeff * |λ|^{singular_power} as λ → 0, vanishing for |λ| > support.
struct Density {
  std::function<double(double)> f;
  double support = 0.0;
  double singular_power = 0.0;
  double local_coeff = 0.0;
  std::vector<double> breakpoints;

  double operator()(double lambda) const { return f(lambda); }
  // ∫_a^b f for 0 <= a < b.
  double mass(double a, double b) const;
};

Density as_density(const SpectralModel& model);
// Spectral density of G⋆ψ_j: f(λ)|ψ̂(2^j λ)|².
Density filtered_density(const SpectralModel& model, const Wavelet& w, double j);

// R(t) = ∫ e^{iλt} f(λ) dλ.
std::vector<double> covariance_from_density(const SpectralModel& model,
                                            std::span<const double> t_grid,
                                            double abs_tol = 1e-9);
std::vector<double> covariance_from_density(const Density& density,
                                            std::span<const double> t_grid,
                                            double abs_tol = 1e-9);

struct ConvolutionOptions {
  std::size_t points = 1u << 16;   // grid points across the base support window
  double window_factor = 4.0;      // window width / band width
  double refinement_tol = 1e-2;    // allowed relative change between n/2 and n grids
  bool check_refinement = true;
};

// ℓ-fold self-convolution f^{⋆ℓ} at the requested frequencies, from exact cell
// masses convolved on a uniform grid and linearly interpolated.
std::vector<double> convolve_density(const Density& density, int ell,
                                     std::span<const double> lambda_grid,
                                     const ConvolutionOptions& opts = {});
std::vector<double> convolve_density(const SpectralModel& model, int ell,
                                     std::span<const double> lambda_grid,
                                     const ConvolutionOptions& opts = {});

}  // namespace scatlimit
