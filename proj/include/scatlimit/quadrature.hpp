#pragma once

#include <functional>
#include <span>
#include <vector>

namespace scatlimit::quad {

using Integrand = std::function<double(double)>;

struct Result {
  double value = 0.0;
  double error = 0.0;
};

// Globally adaptive Gauss-Kronrod (15-point) on a finite interval. Throws
// QuadratureNonConvergence if the error estimate stays above `abs_tol` and
// `rel_tol * |value|`.
Result adaptive(const Integrand& f, double a, double b, double abs_tol = 1e-12,
                double rel_tol = 1e-10, unsigned max_depth = 30);

// Same as `adaptive` but splits [a, b] at the given interior breakpoints first.
Result adaptive_split(const Integrand& f, double a, double b, std::span<const double> breaks,
                      double abs_tol = 1e-12, double rel_tol = 1e-10);

// ∫_0^delta g(x) x^p dx for p > -1 with g continuous. The substitution
// u = x^{p+1} absorbs the power weight, so the transformed integrand is as
// smooth as g and a plain Gauss-Kronrod rule converges.
Result power_weighted(const Integrand& g, double p, double delta, double abs_tol = 1e-13,
                      double rel_tol = 1e-11);

// ∫_a^∞ f over geometrically growing panels [a, a+w], [a+w, a+3w], ... until
// `quiet_panels` consecutive panels each contribute less than abs_tol.
// Used for integrands with only polynomial decay (Daubechies spectra).
Result half_line(const Integrand& f, double a, double first_width = 1.0, double abs_tol = 1e-13,
                 int quiet_panels = 3, int max_panels = 80);

// Nodes and weights for ∫ f(z) φ(z) dz with φ the standard normal density
// (probabilists' Gauss-Hermite). Weights sum to 1. Cached per n.
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const Rule& gauss_hermite(std::size_t n);

}  // namespace scatlimit::quad
