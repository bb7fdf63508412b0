#include "scatlimit/spectral_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "scatlimit/errors.hpp"
#include "scatlimit/fft.hpp"
#include "scatlimit/quadrature.hpp"

namespace scatlimit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ∫_a^b of an even density with a power law p at 0; `g` is f(λ)/λ^p, continuous on [0, b].
double singular_mass(const std::function<double(double)>& f, const std::function<double(double)>& g,
                     double p, double a, double b, double delta, std::span<const double> breaks) {
  if (b <= a) return 0.0;
  double total = 0.0;
  if (a == 0.0 && p != 0.0) {
    const double d = std::min(b, delta);
    total += quad::power_weighted(g, p, d).value;
    a = d;
    if (b <= a) return total;
  }
  return total + quad::adaptive_split(f, a, b, breaks, 1e-14, 1e-11).value;
}

}  // namespace

double Envelope::operator()(double lambda) const {
  const double x = lambda / width;
  switch (kind) {
    case EnvelopeKind::constant: return amplitude;
    case EnvelopeKind::gaussian: return amplitude * std::exp(-0.5 * x * x);
    case EnvelopeKind::lorentzian: return amplitude / (1.0 + x * x);
  }
  return 0.0;
}

SpectralModel::SpectralModel(SpectralModelParams p) : p_(p) {
  if (p_.short_range) {
    if (p_.beta != 1.0) throw InvalidModel("short-range models require beta = 1");
  } else if (!(p_.beta > 0.0 && p_.beta < 1.0)) {
    throw InvalidModel("beta must lie in (0, 1), got " + std::to_string(p_.beta));
  }
  if (!(p_.envelope.amplitude >= 0.0) || !(p_.envelope.width > 0.0))
    throw InvalidModel("envelope amplitude must be >= 0 and width > 0");
  if (p_.band && !(*p_.band > 0.0)) throw InvalidModel("band limit must be positive");
  if (!p_.degenerate && !(p_.envelope(0.0) > 0.0))
    throw InvalidModel("C_G(0) must be positive unless the model is flagged degenerate");

  if (p_.band) {
    support_ = *p_.band;
  } else if (p_.envelope.kind == EnvelopeKind::gaussian) {
    // e^{-x²/2} < 1e-18 beyond x = 9.1; the power factor only helps.
    support_ = 9.5 * p_.envelope.width;
  } else {
    throw InvalidModel("a band limit is required for constant and Lorentzian envelopes");
  }

  mass_ = 2.0 * mass(0.0, support_);
  if (!std::isfinite(mass_)) throw InvalidModel("spectral density is not integrable");
  if (p_.normalize) {
    if (!(mass_ > 0.0)) throw InvalidModel("cannot normalize a zero density");
    scale_ = 1.0 / mass_;
    mass_ = 1.0;
  }
}

double SpectralModel::exponent() const {
  if (p_.short_range) return 0.0;
  return p_.convention == ExponentConvention::assumption ? p_.beta - 1.0 : 1.0 - p_.beta;
}

double SpectralModel::envelope(double lambda) const { return scale_ * p_.envelope(lambda); }

double SpectralModel::raw(double lambda) const {
  const double a = std::abs(lambda);
  if (a > support_) return 0.0;
  const double p = exponent();
  if (a == 0.0) {
    if (p < 0.0) return kInf;
    return p == 0.0 ? envelope(0.0) : 0.0;
  }
  return envelope(lambda) * std::pow(a, p);
}

double SpectralModel::mass(double a, double b) const {
  b = std::min(b, support_);
  const double p = exponent();
  auto f = [this](double x) { return raw(x); };
  auto g = [this](double x) { return envelope(x); };
  return singular_mass(f, g, p, a, b, 0.01 * support_, {});
}

std::string SpectralModel::describe() const {
  std::ostringstream os;
  os << "beta=" << p_.beta << " exponent=" << exponent();
  if (p_.band) os << " band=" << (p_.one_sided_band ? "(0," : "(-") << *p_.band << ")";
  return os.str();
}

double eval_density(const SpectralModel& model, double lambda) {
  const double a = std::abs(lambda);
  if (a > model.support()) return 0.0;
  const double p = model.exponent();
  if (a == 0.0) {
    if (p < 0.0 && model.c0() > 0.0) return kInf;
    return p == 0.0 ? model.c0() : 0.0;
  }
  return model.envelope(lambda) * std::pow(a, p);
}

// --- wavelets ---------------------------------------------------------------

Wavelet::Wavelet(WaveletKind kind, double alpha, std::vector<double> params)
    : kind_(kind), alpha_(alpha), params_(std::move(params)) {}

Wavelet Wavelet::mexican_hat() {
  Wavelet w(WaveletKind::mexican_hat, 2.0, {});
  w.radius_ = 6.0;
  w.cutoff_ = 12.0;
  w.finish();
  return w;
}

Wavelet Wavelet::morlet(double omega0) {
  if (!(omega0 > 0.0)) throw InvalidModel("Morlet centre frequency must be positive");
  Wavelet w(WaveletKind::morlet, 2.0, {omega0});
  w.radius_ = 6.0;
  w.cutoff_ = omega0 + 12.0;
  w.finish();
  return w;
}

Wavelet Wavelet::daubechies(int n, int depth) {
  Wavelet w(WaveletKind::daubechies, static_cast<double>(n), {static_cast<double>(n)});
  w.db_ = std::make_shared<DaubechiesTransform>(n, depth);
  w.radius_ = n - 0.5;
  // Only polynomial decay; this is where |ψ̂|² has dropped below ~1e-14 for N >= 2.
  w.cutoff_ = 2.0 * std::numbers::pi * 512.0;
  w.finish();
  return w;
}

Wavelet Wavelet::shannon(double lo, double hi) {
  if (!(lo > 0.0 && hi > lo)) throw InvalidModel("Shannon band needs 0 < lo < hi");
  Wavelet w(WaveletKind::shannon, 1.0, {lo, hi});
  w.radius_ = 64.0 * 2.0 * std::numbers::pi / (hi - lo);
  w.cutoff_ = hi;
  w.finish();
  return w;
}

Wavelet Wavelet::power_band(double p, double hi) {
  if (!(p > -0.5 && hi > 0.0)) throw InvalidModel("power band needs p > -1/2 and hi > 0");
  Wavelet w(WaveletKind::power_band, p, {p, hi});
  w.radius_ = 64.0 * 2.0 * std::numbers::pi / hi;
  w.cutoff_ = hi;
  w.finish();
  return w;
}

void Wavelet::finish() {
  auto f = [this](double x) { return ft_abs2(x); };
  if (kind_ == WaveletKind::daubechies) {
    l2_ = 2.0 * quad::half_line(f, 0.0, 2.0 * std::numbers::pi, 1e-13).value;
  } else {
    const auto br = breakpoints();
    l2_ = 2.0 * quad::adaptive_split(f, 0.0, cutoff_, br, 1e-14, 1e-12).value;
  }
}

std::vector<double> Wavelet::breakpoints() const {
  switch (kind_) {
    case WaveletKind::shannon: return {params_[0], params_[1]};
    case WaveletKind::power_band: return {params_[1]};
    case WaveletKind::morlet: return {params_[0]};
    default: return {};
  }
}

std::complex<double> Wavelet::ft(double lambda) const {
  const double a = std::abs(lambda);
  switch (kind_) {
    case WaveletKind::mexican_hat: return lambda * lambda * std::exp(-0.5 * lambda * lambda);
    case WaveletKind::morlet: {
      // √(π/2)[e^{-(λ-ω)²/2} + e^{-(λ+ω)²/2} - 2e^{-ω²/2}e^{-λ²/2}], written without cancellation.
      const double w0 = params_[0];
      const double s = std::sinh(0.5 * w0 * lambda);
      return std::sqrt(std::numbers::pi / 2.0) * std::exp(-0.5 * (lambda * lambda + w0 * w0)) * 4.0 * s * s;
    }
    case WaveletKind::daubechies: return (*db_)(lambda);
    case WaveletKind::shannon: return (a >= params_[0] && a <= params_[1]) ? 1.0 : 0.0;
    case WaveletKind::power_band:
      return (a <= params_[1] && a > 0.0) ? std::pow(a, params_[0]) : 0.0;
  }
  return 0.0;
}

double Wavelet::ft_abs2(double lambda) const {
  if (kind_ == WaveletKind::daubechies) {
    // |m0(ω)|² = cos^{2N}(ω/2) P(sin²(ω/2)); the high-pass factor swaps sin and cos.
    const int n = db_->vanishing_moments();
    auto poly = [n](double y) {
      double s = 0.0, c = 1.0;
      for (int k = 0; k < n; ++k) {
        s += c * std::pow(y, k);
        c = c * (n + k) / (k + 1);
      }
      return s;
    };
    auto low2 = [&](double w) {
      const double c = std::cos(0.5 * w), s = std::sin(0.5 * w);
      return std::pow(c * c, n) * poly(s * s);
    };
    const double w = 0.5 * lambda;
    const double c = std::cos(0.5 * w), s = std::sin(0.5 * w);
    double v = std::pow(s * s, n) * poly(c * c);
    double scale = w;
    for (int m = 0; m < 20; ++m) {
      scale *= 0.5;
      v *= low2(scale);
    }
    return v;
  }
  return std::norm(ft(lambda));
}

double Wavelet::envelope(double lambda) const {
  const double a = std::abs(lambda);
  if (a == 0.0) {
    switch (kind_) {
      case WaveletKind::mexican_hat: return 1.0;
      case WaveletKind::morlet: {
        const double w0 = params_[0];
        return std::sqrt(std::numbers::pi / 2.0) * std::exp(-0.5 * w0 * w0) * w0 * w0;
      }
      case WaveletKind::daubechies: {
        // ψ̂(λ) ~ (λ/4)^N Q(-1) near the origin, with φ̂(0) = 1.
        return std::abs(db_->high_pass_constant()) / std::pow(4.0, db_->vanishing_moments());
      }
      case WaveletKind::shannon: return 0.0;
      case WaveletKind::power_band: return 1.0;
    }
  }
  return std::abs(ft(lambda)) / std::pow(a, alpha_);
}

std::string Wavelet::name() const {
  std::ostringstream os;
  switch (kind_) {
    case WaveletKind::mexican_hat: os << "mexican_hat"; break;
    case WaveletKind::morlet: os << "morlet(" << params_[0] << ")"; break;
    case WaveletKind::daubechies: os << "db" << static_cast<int>(params_[0]); break;
    case WaveletKind::shannon: os << "shannon[" << params_[0] << "," << params_[1] << "]"; break;
    case WaveletKind::power_band: os << "power_band(" << params_[0] << "," << params_[1] << ")"; break;
  }
  return os.str();
}

std::complex<double> eval_wavelet_ft(const Wavelet& w, double lambda) { return w.ft(lambda); }

// --- densities ----------------------------------------------------------------

double Density::mass(double a, double b) const {
  b = std::min(b, support);
  const double p = singular_power;
  auto g = [this, p](double x) { return x > 0.0 ? f(x) / std::pow(x, p) : local_coeff; };
  return singular_mass(f, g, p, a, b, 0.01 * support, breakpoints);
}

Density as_density(const SpectralModel& model) {
  Density d;
  d.f = [model](double x) { return x == 0.0 ? model.c0() : eval_density(model, x); };
  d.support = model.support();
  d.singular_power = model.exponent();
  d.local_coeff = model.c0();
  if (model.band()) d.breakpoints.push_back(*model.band());
  return d;
}

Density filtered_density(const SpectralModel& model, const Wavelet& w, double j) {
  const double s = std::exp2(j);
  Density d;
  d.f = [model, w, s](double x) {
    if (x == 0.0) return 0.0;
    return eval_density(model, x) * w.ft_abs2(s * x);
  };
  d.support = std::min(model.support(), w.frequency_cutoff() / s);
  d.singular_power = model.exponent() + 2.0 * w.alpha();
  const double env0 = w.envelope(0.0);
  d.local_coeff = model.c0() * env0 * env0 * std::pow(s, 2.0 * w.alpha());
  if (model.band()) d.breakpoints.push_back(*model.band());
  for (double b : w.breakpoints()) d.breakpoints.push_back(b / s);
  return d;
}

std::vector<double> covariance_from_density(const SpectralModel& model,
                                            std::span<const double> t_grid, double abs_tol) {
  return covariance_from_density(as_density(model), t_grid, abs_tol);
}

std::vector<double> covariance_from_density(const Density& d, std::span<const double> t_grid,
                                            double abs_tol) {
  std::vector<double> out;
  out.reserve(t_grid.size());
  const double delta = 0.01 * d.support;
  const double p = d.singular_power;
  for (double t : t_grid) {
    auto f = [&](double x) { return std::cos(x * t) * d.f(x); };
    auto g = [&](double x) {
      return std::cos(x * t) * (x > 0.0 ? d.f(x) / std::pow(x, p) : d.local_coeff);
    };
    double r = quad::power_weighted(g, p, delta, abs_tol * 1e-2).value;
    // Panels no wider than half a period of cos(λt).
    const double span = d.support - delta;
    const std::size_t panels =
        std::max<std::size_t>(8, static_cast<std::size_t>(std::ceil(span * std::abs(t) / std::numbers::pi)));
    std::vector<double> edges;
    for (std::size_t k = 0; k <= panels; ++k) edges.push_back(delta + span * k / panels);
    for (double b : d.breakpoints)
      if (b > delta && b < d.support) edges.push_back(b);
    std::sort(edges.begin(), edges.end());
    const double tol = abs_tol / static_cast<double>(edges.size());
    for (std::size_t k = 0; k + 1 < edges.size(); ++k)
      if (edges[k + 1] > edges[k]) r += quad::adaptive(f, edges[k], edges[k + 1], tol, 1e-11).value;
    out.push_back(2.0 * r);
  }
  return out;
}

namespace {

struct ConvolvedGrid {
  double h = 0.0;
  std::ptrdiff_t centre = 0;  // index of λ = 0
  std::vector<double> values;

  double at(double lambda) const {
    const double x = lambda / h + static_cast<double>(centre);
    if (x < 0.0 || x > static_cast<double>(values.size() - 1)) return 0.0;
    const std::size_t i = static_cast<std::size_t>(std::floor(x));
    if (i + 1 >= values.size()) return values.back();
    const double frac = x - static_cast<double>(i);
    return (1.0 - frac) * values[i] + frac * values[i + 1];
  }
};

ConvolvedGrid convolve_on_grid(const Density& d, int ell, std::size_t points, double factor) {
  const double h = factor * 2.0 * d.support / static_cast<double>(points);
  const std::size_t m = static_cast<std::size_t>(std::ceil(d.support / h + 0.5));
  // Cell masses on [kh - h/2, kh + h/2], k = -m..m.
  std::vector<double> half(m + 1);
  half[0] = 2.0 * d.mass(0.0, 0.5 * h);
  for (std::size_t k = 1; k <= m; ++k) half[k] = d.mass((k - 0.5) * h, (k + 0.5) * h);
  const std::size_t width = 2 * m + 1;
  const std::size_t out_len = static_cast<std::size_t>(ell) * (width - 1) + 1;
  std::size_t n = 2;
  while (n < out_len) n <<= 1;
  std::vector<double> buf(n, 0.0);
  for (std::size_t k = 0; k <= m; ++k) {
    buf[m + k] = half[k];
    buf[m - k] = half[k];
  }
  auto spec = fft::forward(buf);
  for (auto& c : spec) c = std::pow(c, ell);
  auto conv = fft::inverse(spec, n);
  ConvolvedGrid g;
  g.h = h;
  g.centre = static_cast<std::ptrdiff_t>(ell * m);
  g.values.resize(out_len);
  for (std::size_t i = 0; i < out_len; ++i) g.values[i] = conv[i] / h;
  return g;
}

}  // namespace

std::vector<double> convolve_density(const Density& d, int ell, std::span<const double> lambda_grid,
                                     const ConvolutionOptions& opts) {
  if (ell < 2) throw InvalidModel("convolution order must be >= 2");
  const auto fine = convolve_on_grid(d, ell, opts.points, opts.window_factor);
  std::vector<double> out;
  out.reserve(lambda_grid.size());
  for (double x : lambda_grid) out.push_back(fine.at(x));

  if (opts.check_refinement) {
    const auto coarse = convolve_on_grid(d, ell, opts.points / 2, opts.window_factor);
    double peak = 0.0;
    for (double v : fine.values) peak = std::max(peak, std::abs(v));
    // When ℓ(1+p) <= 1 the result itself is infinite at 0 and only cell
    // averages exist there; compare away from the peak.
    const bool singular = ell * (1.0 + d.singular_power) <= 1.0;
    for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
      const double x = lambda_grid[i];
      if (singular && std::abs(x) < 2.0 * coarse.h) continue;
      const double c = coarse.at(x);
      const double ref = std::max(std::abs(out[i]), 1e-2 * peak);
      if (std::abs(c - out[i]) > opts.refinement_tol * ref) {
        throw GridTooCoarse("convolution changed by " + std::to_string(std::abs(c - out[i]) / ref) +
                            " (relative) under grid refinement at lambda=" + std::to_string(x));
      }
    }
  }
  // FFT round-off can leave values of order -1e-16 * peak where the result is zero.
  double peak = 0.0;
  for (double v : fine.values) peak = std::max(peak, v);
  for (double& v : out)
    if (v < 0.0 && v > -1e-12 * peak) v = 0.0;
  return out;
}

std::vector<double> convolve_density(const SpectralModel& model, int ell,
                                     std::span<const double> lambda_grid,
                                     const ConvolutionOptions& opts) {
  return convolve_density(as_density(model), ell, lambda_grid, opts);
}

}  // namespace scatlimit
