#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "scatlimit/gaussian_simulator.hpp"

namespace scatlimit {

// Probabilists' Hermite polynomial He_ℓ(z) by the three-term recurrence.
double hermite_poly(int ell, double z);
// He_0..He_L at z (normalized: divided by √ℓ! when `normalized`).
void hermite_all(int max_ell, double z, std::span<double> out, bool normalized = false);

using ScalarMap = std::function<double(double)>;

struct HermiteOptions {
  // Gauss-Hermite node counts double from max(4L, 64) up to this cap.
  std::size_t max_nodes = 512;
  double agreement = 1e-10;
  // Interior points where A is not smooth; used by the adaptive fallback.
  std::vector<double> kinks;
};

// C_{A,ℓ} = E[A(Z) He_ℓ(Z)/√ℓ!] for ℓ = 0..L. Gauss-Hermite with node doubling;
// when successive rules disagree (non-smooth A) falls back to adaptive
// Gauss-Kronrod on [-12, 12] split at the kinks. Throws QuadratureNonConvergence
// if neither route meets the agreement tolerance.
std::vector<double> hermite_coeffs(const ScalarMap& a, int L, const HermiteOptions& opts = {});

// E[A(Z)²] by the same quadrature strategy.
double gaussian_second_moment(const ScalarMap& a, const HermiteOptions& opts = {});

// First ℓ >= 1 with |C_ℓ| > tolerance; RankUndetermined if none up to L.
int hermite_rank(std::span<const double> coeffs, double tolerance);

// Piecewise-linear quantile function of a sample: order statistics placed at
// probabilities (i - 1/2)/n, clamped to [1/(2n), 1 - 1/(2n)].
class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::vector<double> sample);
  double quantile(double p) const;
  // Monotone inverse of `quantile`; clamps outside the sample range.
  double cdf(double x) const;
  std::size_t size() const { return sorted_.size(); }
  const std::vector<double>& sorted() const { return sorted_; }

 private:
  std::vector<double> sorted_;
};

struct GumbelCdf {
  double location = 0.0;
  double scale = 1.0;
};
struct LaplaceCdf {
  double location = 0.0;
  double scale = 1.0;
};
using TargetCdf = std::variant<GumbelCdf, LaplaceCdf, std::shared_ptr<const EmpiricalCdf>>;

// Inverse CDFs evaluated at Φ(z), written in terms of the Gaussian tails so
// that |z| up to ~37 stays finite.
double gumbel_transform(const GumbelCdf& c, double z);
double laplace_transform(const LaplaceCdf& c, double z);

// A scalar map with lazily computed Hermite coefficients. Copies share the
// coefficient cache; concurrent readers see either nothing or the full vector.
class Subordinator {
 public:
  Subordinator(std::string name, ScalarMap map, int truncation = 20, HermiteOptions opts = {});

  static Subordinator identity();
  // Σ_ℓ a_ℓ He_ℓ, e.g. {0, 1, 1, 1} for He_1 + He_2 + He_3.
  static Subordinator hermite_sum(std::vector<double> a);
  static Subordinator absolute(double shift = 0.0);
  static Subordinator sign();

  const std::string& name() const { return name_; }
  double operator()(double z) const { return map_(z); }
  const ScalarMap& map() const { return map_; }
  int truncation() const { return truncation_; }
  const std::vector<double>& coeffs() const;
  double coeff(int ell) const { return coeffs().at(static_cast<std::size_t>(ell)); }
  double l2_norm() const;
  // Rank with tolerance 1e-8 ‖A‖₂.
  int rank() const;
  // Inverse map for monotone A (bisection on [-40, 40]); NonInvertibleCDF on
  // flat stretches.
  double inverse(double x) const;
  bool monotone() const { return monotone_; }
  void set_monotone(bool m) { monotone_ = m; }

 private:
  struct Cache;
  std::string name_;
  ScalarMap map_;
  int truncation_;
  HermiteOptions opts_;
  bool monotone_ = false;
  std::shared_ptr<Cache> cache_;
};

Subordinator subordinator_from_cdf(const TargetCdf& target, int truncation = 20);

// Pointwise X = A(G); valid range and dt are preserved.
SampledPath apply(const Subordinator& a, const SampledPath& path);

}  // namespace scatlimit
