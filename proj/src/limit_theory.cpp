#include "scatlimit/limit_theory.hpp"

#include <algorithm>
#include <bit>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "scatlimit/errors.hpp"
#include "scatlimit/fft.hpp"
#include "scatlimit/quadrature.hpp"

namespace scatlimit {

namespace {

// |λ| beyond which |ψ̂|²|λ|^p carries less than 1e-13 of its mass. Daubechies
// spectra decay only polynomially, so their nominal cutoff is generous.
double effective_cutoff(const Wavelet& w, double p) {
  if (w.kind() != WaveletKind::daubechies) return w.frequency_cutoff();
  auto f = [&](double x) { return w.ft_abs2(x) * std::pow(x, p); };
  const double total = quad::half_line(f, 0.0, 2.0 * std::numbers::pi, 1e-15).value;
  double cut = 2.0 * std::numbers::pi;
  while (cut < w.frequency_cutoff()) {
    const double tail = quad::half_line(f, cut, 2.0 * std::numbers::pi, 1e-16).value;
    if (tail < 1e-13 * total) break;
    cut *= 2.0;
  }
  return std::min(cut, w.frequency_cutoff());
}

// ∫_a^b env(λ)² λ^{2α+p} on a cell away from the origin.
double cell_mass(const Wavelet& w, double p, double a, double b) {
  auto f = [&](double x) { return w.ft_abs2(x) * std::pow(x, p); };
  return boost::math::quadrature::gauss<double, 10>::integrate(f, a, b);
}

double origin_mass(const Wavelet& w, double p, double half) {
  const double q = 2.0 * w.alpha() + p;
  auto g = [&](double x) {
    const double e = w.envelope(x);
    return e * e;
  };
  return quad::power_weighted(g, q, half).value;
}

}  // namespace

double sigma_squared(const SpectralModel& model, const Wavelet& w) {
  const double c0 = model.c0();
  if (c0 == 0.0) return 0.0;
  const double p = model.exponent();
  const double q = 2.0 * w.alpha() + p;
  if (q <= -1.0) throw QuadratureNonConvergence("|ψ̂|²|λ|^p is not integrable at the origin");
  auto br = w.breakpoints();
  const double first = br.empty() ? w.frequency_cutoff() : std::min(w.frequency_cutoff(), br.front());
  const double delta = 0.01 * std::min(first, 1.0);
  auto g = [&](double x) {
    const double e = w.envelope(x);
    return e * e;
  };
  double v = quad::power_weighted(g, q, delta).value;
  auto f = [&](double x) { return w.ft_abs2(x) * std::pow(x, p); };
  if (w.kind() == WaveletKind::daubechies) {
    v += quad::half_line(f, delta, 2.0 * std::numbers::pi, 1e-14).value;
  } else {
    std::vector<double> inner;
    for (double b : br)
      if (b > delta && b < w.frequency_cutoff()) inner.push_back(b);
    v += quad::adaptive_split(f, delta, w.frequency_cutoff(), inner, 1e-14, 1e-12).value;
  }
  return 2.0 * c0 * v;
}

GammaSeries gamma_series(const SpectralModel& model, const Wavelet& w, int max_ell, const GammaOptions& opts) {
  if (max_ell < 2 || max_ell % 2 != 0) throw EvenOrderRequired("gamma orders must be even and >= 2");
  const double p = model.exponent();
  if (2.0 * w.alpha() + p <= -1.0) throw QuadratureNonConvergence("|ψ̂|²|λ|^p is not integrable at the origin");
  const double cut = effective_cutoff(w, p);
  const int orders = max_ell / 2;

  GammaSeries out;
  // Cell averaging smooths w by a box of width h, which perturbs w^{⋆ℓ}(0) by
  // an even series in h; two Richardson passes remove the h² and h⁴ terms.
  std::vector<std::vector<double>> raw, once, twice;
  for (std::size_t m = opts.initial_cells;; m *= 2) {
    const std::size_t n_fft = std::bit_ceil(static_cast<std::size_t>(max_ell) * m + 1);
    if (n_fft > opts.max_fft) {
      std::ostringstream os;
      os << "gamma integrals not converged within an FFT of " << opts.max_fft << " points (last increment "
         << out.increment << ", time window " << out.time_window << ")";
      throw TailTruncationError(os.str());
    }
    // Cells of width h centred on kh, |k| <= m; the outer edge lands on the cutoff.
    const double h = cut / (static_cast<double>(m) + 0.5);
    std::vector<double> mass(m + 1);
    mass[0] = 2.0 * origin_mass(w, p, 0.5 * h);
    for (std::size_t k = 1; k <= m; ++k)
      mass[k] = cell_mass(w, p, (static_cast<double>(k) - 0.5) * h, (static_cast<double>(k) + 0.5) * h);
    double total = mass[0];
    for (std::size_t k = 1; k <= m; ++k) total += 2.0 * mass[k];

    std::vector<double> circ(n_fft, 0.0);
    circ[0] = mass[0] / total;
    for (std::size_t k = 1; k <= m; ++k) circ[k] = circ[n_fft - k] = mass[k] / total;
    auto spec = fft::forward(circ);

    std::vector<double> g(orders, 0.0);
    const std::size_t half = n_fft / 2;
    for (int o = 0; o < orders; ++o) {
      const int ell = 2 * o + 2;
      double s = 0.0;
      for (std::size_t i = 0; i <= half; ++i) {
        const double r = std::pow(spec[i].real(), ell);
        s += (i == 0 || i == half) ? r : 2.0 * r;
      }
      g[o] = s / (static_cast<double>(n_fft) * h);
    }
    out.cells = m;
    out.time_window = 2.0 * std::numbers::pi / h;
    raw.push_back(std::move(g));
    const std::size_t lv = raw.size();
    // h halves only approximately (h = cut/(m+½)), so use the exact ratio.
    auto extrapolate = [&](const std::vector<double>& fine, const std::vector<double>& coarse, double ratio2) {
      std::vector<double> e(orders);
      for (int o = 0; o < orders; ++o) e[o] = (ratio2 * fine[o] - coarse[o]) / (ratio2 - 1.0);
      return e;
    };
    const double q = (2.0 * static_cast<double>(m) + 1.0) / (static_cast<double>(m) + 1.0);
    if (lv >= 2) once.push_back(extrapolate(raw[lv - 1], raw[lv - 2], q * q));
    if (once.size() >= 2) twice.push_back(extrapolate(once.back(), once[once.size() - 2], q * q * q * q));
    if (twice.size() >= 2) {
      const auto& a = twice.back();
      const auto& b = twice[twice.size() - 2];
      out.increment = 0.0;
      for (int o = 0; o < orders; ++o) out.increment = std::max(out.increment, std::abs(a[o] - b[o]));
      if (out.increment < opts.increment_tol) {
        out.values = a;
        return out;
      }
    }
  }
}

double gamma_ell(const SpectralModel& model, const Wavelet& w, int ell, const GammaOptions& opts) {
  if (ell < 2 || ell % 2 != 0) throw EvenOrderRequired("gamma_ell needs an even order >= 2, got " + std::to_string(ell));
  return gamma_series(model, w, ell, opts).values.back();
}

std::vector<double> abs_hermite_coeffs(int L) {
  // E[|Z| He_{2k}(Z)] = (-1)^{k+1} √(2/π) (2k)! / (2^k k! (2k-1)), normalized by √(2k)!.
  std::vector<double> c(static_cast<std::size_t>(L) + 1, 0.0);
  for (int l = 0; l <= L; l += 2) {
    const int k = l / 2;
    const double logmag = 0.5 * std::lgamma(l + 1.0) - k * std::numbers::ln2 - std::lgamma(k + 1.0);
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    c[l] = sign * std::sqrt(2.0 / std::numbers::pi) * std::exp(logmag) / (l - 1.0);
  }
  return c;
}

KappaResult kappa(double sigma2, const std::vector<double>& gammas, const std::vector<double>& abs_coeffs, int m) {
  if (m < 1) throw InvalidModel("kappa truncation must be >= 1");
  if (gammas.size() < static_cast<std::size_t>(m) || abs_coeffs.size() < static_cast<std::size_t>(2 * m + 1))
    throw InvalidModel("kappa needs gamma_2..gamma_2m and C_{||,0..2m}");
  KappaResult r;
  r.truncation = m;
  double s = 0.0, captured = 0.0;
  for (int l = 0; l <= 2 * m; ++l) captured += abs_coeffs[l] * abs_coeffs[l];
  for (int k = 1; k <= m; ++k) s += gammas[k - 1] * abs_coeffs[2 * k] * abs_coeffs[2 * k];
  r.kappa2 = sigma2 * s;
  r.kappa = std::sqrt(r.kappa2);
  r.tail_bound = sigma2 * gammas[m - 1] * std::max(0.0, 1.0 - captured);
  return r;
}

LimitConstants limit_constants(const SpectralModel& model, const Wavelet& w, int m, const GammaOptions& opts) {
  LimitConstants lc;
  lc.truncation = m;
  lc.sigma2 = sigma_squared(model, w);
  auto gs = gamma_series(model, w, 2 * m, opts);
  lc.gammas = gs.values;
  lc.gamma_increment = gs.increment;
  lc.gamma_cells = gs.cells;
  auto k = kappa(lc.sigma2, lc.gammas, abs_hermite_coeffs(2 * m), m);
  lc.kappa = k.kappa;
  lc.truncation_tail = k.tail_bound;
  lc.wavelet_l2 = w.l2_norm2();
  return lc;
}

double limit_covariance(double kappa_value, const Wavelet& w, double t1, double t2) {
  const double tau = t1 - t2;
  if (tau == 0.0) return kappa_value * kappa_value * w.l2_norm2();
  Density d;
  d.f = [w](double x) { return w.ft_abs2(x); };
  d.support = effective_cutoff(w, 0.0);
  d.singular_power = 2.0 * w.alpha();
  const double e0 = w.envelope(0.0);
  d.local_coeff = e0 * e0;
  d.breakpoints = w.breakpoints();
  const std::vector<double> t{std::abs(tau)};
  return kappa_value * kappa_value * covariance_from_density(d, t, 1e-12)[0];
}

std::pair<double, double> coupling_window(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) {
    std::ostringstream os;
    os << "beta = " << beta << " outside (0, 1)";
    throw BetaOutOfRange(os.str());
  }
  return {1.0, 1.0 / (1.0 - beta)};
}

double PredictedRates::diff_bound(double j1, double j2) const {
  double m = 0.0;
  for (const auto& t : diff_terms) m = std::max(m, t.value(j1, j2));
  return m;
}

double PredictedRates::normalized_diff_envelope(double j1, double j2) const {
  return j1 * std::exp2(j1 * (beta - 1.0)) + std::exp2(-j1 + j2 * (1.0 - beta)) + std::exp2(-j1 * beta);
}

double PredictedRates::dominance_envelope(double j1) const {
  switch (regime) {
    case BetaRegime::below_half: return std::exp2(-beta * j1 / 3.0);
    case BetaRegime::half: return j1 * std::exp2(-j1 / 6.0);
    case BetaRegime::above_half: return std::exp2(-(1.0 - beta) * j1 / 3.0);
  }
  return 1.0;
}

PredictedRates predicted_rates(double beta) {
  coupling_window(beta);
  PredictedRates r;
  r.beta = beta;
  const double b = beta;
  auto cross = RateTerm{"2^{-j1 b} 2^{-j2 b}", [b](double j1, double j2) { return std::exp2(-b * j1 - b * j2); }};
  auto lead = RateTerm{"2^{j1(1-2b)} 2^{-j2}", [b](double j1, double j2) { return std::exp2(j1 * (1 - 2 * b) - j2); }};
  auto flat = RateTerm{"2^{-j2}", [](double, double j2) { return std::exp2(-j2); }};
  r.var_s = [b](double j1) { return std::exp2(-b * j1); };
  r.var_s_slope = -b;
  if (std::abs(b - 0.5) < 1e-12) {
    r.regime = BetaRegime::half;
    r.diff_terms = {RateTerm{"j1 2^{-j2}", [](double j1, double j2) { return j1 * std::exp2(-j2); }},
                    RateTerm{"2^{-j1/2} 2^{-j2/2}", [](double j1, double j2) { return std::exp2(-0.5 * j1 - 0.5 * j2); }},
                    flat};
    r.var_t = [](double j1) { return j1 * std::exp2(-j1); };
    r.var_t_label = "j1 2^{-j1}";
    r.var_t_slope = -1.0;
  } else if (b < 0.5) {
    r.regime = BetaRegime::below_half;
    r.diff_terms = {cross, lead};
    r.var_t = [b](double j1) { return std::exp2(-2.0 * b * j1); };
    r.var_t_label = "2^{-2 b j1}";
    r.var_t_slope = -2.0 * b;
  } else {
    r.regime = BetaRegime::above_half;
    r.diff_terms = {flat, cross, lead};
    r.var_t = [](double j1) { return std::exp2(-j1); };
    r.var_t_label = "2^{-j1}";
    r.var_t_slope = -1.0;
  }
  return r;
}

}  // namespace scatlimit
