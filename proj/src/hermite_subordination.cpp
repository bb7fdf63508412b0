#include "scatlimit/hermite_subordination.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include "scatlimit/errors.hpp"
#include "scatlimit/quadrature.hpp"
#include "scatlimit/stats.hpp"

namespace scatlimit {

double hermite_poly(int ell, double z) {
  if (ell < 0) throw std::invalid_argument("Hermite degree must be >= 0");
  double prev = 1.0;
  if (ell == 0) return prev;
  double cur = z;
  for (int k = 1; k < ell; ++k) {
    const double next = z * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

void hermite_all(int max_ell, double z, std::span<double> out, bool normalized) {
  out[0] = 1.0;
  if (max_ell == 0) return;
  out[1] = z;
  for (int k = 1; k < max_ell; ++k) {
    if (normalized) {
      out[k + 1] = (z * out[k] - std::sqrt(static_cast<double>(k)) * out[k - 1]) / std::sqrt(k + 1.0);
    } else {
      out[k + 1] = z * out[k] - k * out[k - 1];
    }
  }
}

namespace {

constexpr double kTail = 12.0;

std::vector<double> coeffs_gauss_hermite(const ScalarMap& a, int L, std::size_t nodes) {
  const auto& rule = quad::gauss_hermite(nodes);
  std::vector<double> c(L + 1, 0.0), h(L + 1);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    // Far-tail nodes carry weights below the double range; skip them so maps
    // that overflow there (log-type quantiles) do not produce 0·∞.
    if (rule.weights[i] < 1e-300) continue;
    const double v = a(rule.nodes[i]) * rule.weights[i];
    hermite_all(L, rule.nodes[i], h, true);
    for (int l = 0; l <= L; ++l) c[l] += v * h[l];
  }
  return c;
}

std::vector<double> coeffs_adaptive(const ScalarMap& a, int L, const std::vector<double>& kinks) {
  std::vector<double> c(L + 1);
  std::vector<double> breaks = kinks;
  breaks.push_back(0.0);
  for (int l = 0; l <= L; ++l) {
    auto f = [&](double z) {
      return a(z) * stats::normal_pdf(z) * hermite_poly(l, z) /
             std::sqrt(std::tgamma(static_cast<double>(l) + 1.0));
    };
    c[l] = quad::adaptive_split(f, -kTail, kTail, breaks, 1e-13, 1e-12).value;
  }
  return c;
}

double max_abs_diff(const std::vector<double>& x, const std::vector<double>& y) {
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
  return d;
}

}  // namespace

std::vector<double> hermite_coeffs(const ScalarMap& a, int L, const HermiteOptions& opts) {
  if (L < 0) throw std::invalid_argument("truncation must be >= 0");
  std::size_t n = std::max<std::size_t>(4 * static_cast<std::size_t>(L), 64);
  auto prev = coeffs_gauss_hermite(a, L, n);
  while (2 * n <= opts.max_nodes) {
    n *= 2;
    auto next = coeffs_gauss_hermite(a, L, n);
    const bool finite = std::all_of(next.begin(), next.end(), [](double v) { return std::isfinite(v); });
    if (finite && max_abs_diff(prev, next) < opts.agreement) return next;
    prev = std::move(next);
  }
  // Gauss-Hermite converges only algebraically for kinked maps.
  auto fallback = coeffs_adaptive(a, L, opts.kinks);
  auto check = coeffs_adaptive(
      [&](double z) { return a(z); }, L, [&] {
        auto k = opts.kinks;
        k.push_back(-1.0);
        k.push_back(1.0);
        return k;
      }());
  if (max_abs_diff(fallback, check) > opts.agreement)
    throw QuadratureNonConvergence("Hermite coefficients did not converge (difference " +
                                   std::to_string(max_abs_diff(fallback, check)) + ")");
  return check;
}

double gaussian_second_moment(const ScalarMap& a, const HermiteOptions& opts) {
  auto sq = [&](double z) {
    const double v = a(z);
    return v * v;
  };
  auto c = hermite_coeffs(sq, 0, opts);
  return c[0];
}

int hermite_rank(std::span<const double> coeffs, double tolerance) {
  for (std::size_t l = 1; l < coeffs.size(); ++l)
    if (std::abs(coeffs[l]) > tolerance) return static_cast<int>(l);
  throw RankUndetermined("no Hermite coefficient above " + std::to_string(tolerance) + " up to L=" +
                         std::to_string(coeffs.empty() ? 0 : coeffs.size() - 1));
}

// --- empirical CDF -------------------------------------------------------------

EmpiricalCdf::EmpiricalCdf(std::vector<double> sample) : sorted_(std::move(sample)) {
  if (sorted_.size() < 2) throw NonInvertibleCDF("empirical CDF needs at least two samples");
  for (double v : sorted_)
    if (!std::isfinite(v)) throw NonInvertibleCDF("empirical sample contains non-finite values");
  std::sort(sorted_.begin(), sorted_.end());
  if (sorted_.front() == sorted_.back()) throw NonInvertibleCDF("empirical sample is constant");
}

double EmpiricalCdf::quantile(double p) const {
  const double n = static_cast<double>(sorted_.size());
  p = std::clamp(p, 0.5 / n, 1.0 - 0.5 / n);
  const double x = p * n - 0.5;
  const std::size_t i = std::min(static_cast<std::size_t>(x), sorted_.size() - 2);
  const double frac = x - static_cast<double>(i);
  return sorted_[i] + frac * (sorted_[i + 1] - sorted_[i]);
}

double EmpiricalCdf::cdf(double x) const {
  const double n = static_cast<double>(sorted_.size());
  if (x <= sorted_.front()) return 0.5 / n;
  if (x >= sorted_.back()) return 1.0 - 0.5 / n;
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - sorted_.begin()) - 1;
  const double lo = sorted_[i], hi = sorted_[i + 1];
  return (static_cast<double>(i) + 0.5 + (x - lo) / (hi - lo)) / n;
}

double gumbel_transform(const GumbelCdf& c, double z) {
  // -ln Φ(z) computed from the upper tail when Φ is close to 1.
  const double lower = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double upper = 0.5 * std::erfc(z / std::numbers::sqrt2);
  const double neg_log_phi = z > 0.0 ? -std::log1p(-upper) : -std::log(lower);
  return c.location - c.scale * std::log(neg_log_phi);
}

double laplace_transform(const LaplaceCdf& c, double z) {
  if (z <= 0.0) return c.location + c.scale * std::log(std::erfc(-z / std::numbers::sqrt2));
  return c.location - c.scale * std::log(std::erfc(z / std::numbers::sqrt2));
}

// --- subordinator -----------------------------------------------------------------

struct Subordinator::Cache {
  std::once_flag coeff_once;
  std::once_flag norm_once;
  std::vector<double> coeffs;
  double norm = 0.0;
};

Subordinator::Subordinator(std::string name, ScalarMap map, int truncation, HermiteOptions opts)
    : name_(std::move(name)),
      map_(std::move(map)),
      truncation_(truncation),
      opts_(std::move(opts)),
      cache_(std::make_shared<Cache>()) {}

Subordinator Subordinator::identity() {
  Subordinator s("identity", [](double z) { return z; });
  s.monotone_ = true;
  return s;
}

Subordinator Subordinator::hermite_sum(std::vector<double> a) {
  std::ostringstream os;
  os << "hermite_sum(";
  for (std::size_t i = 0; i < a.size(); ++i) os << (i ? "," : "") << a[i];
  os << ")";
  const int degree = static_cast<int>(a.size()) - 1;
  auto map = [a](double z) {
    double s = 0.0, prev = 1.0, cur = z;
    if (!a.empty()) s += a[0];
    if (a.size() > 1) s += a[1] * z;
    for (std::size_t k = 1; k + 1 < a.size(); ++k) {
      const double next = z * cur - static_cast<double>(k) * prev;
      prev = cur;
      cur = next;
      s += a[k + 1] * cur;
    }
    return s;
  };
  return Subordinator(os.str(), map, std::max(20, degree + 2));
}

Subordinator Subordinator::absolute(double shift) {
  HermiteOptions o;
  o.kinks = {-shift};
  std::ostringstream os;
  os << "abs(z+" << shift << ")";
  return Subordinator(os.str(), [shift](double z) { return std::abs(z + shift); }, 20, o);
}

Subordinator Subordinator::sign() {
  HermiteOptions o;
  o.kinks = {0.0};
  return Subordinator("sign", [](double z) { return z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0); }, 20, o);
}

const std::vector<double>& Subordinator::coeffs() const {
  std::call_once(cache_->coeff_once, [this] { cache_->coeffs = hermite_coeffs(map_, truncation_, opts_); });
  return cache_->coeffs;
}

double Subordinator::l2_norm() const {
  std::call_once(cache_->norm_once,
                 [this] { cache_->norm = std::sqrt(gaussian_second_moment(map_, opts_)); });
  return cache_->norm;
}

int Subordinator::rank() const { return hermite_rank(coeffs(), 1e-8 * l2_norm()); }

double Subordinator::inverse(double x) const {
  double lo = -40.0, hi = 40.0;
  const double flo = map_(lo), fhi = map_(hi);
  if (!(fhi > flo)) throw NonInvertibleCDF("map " + name_ + " is not increasing");
  if (x <= flo) return lo;
  if (x >= fhi) return hi;
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    (map_(mid) < x ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Subordinator subordinator_from_cdf(const TargetCdf& target, int truncation) {
  HermiteOptions kink0;
  kink0.kinks = {0.0};
  Subordinator s = std::visit(
      [&](const auto& t) -> Subordinator {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, GumbelCdf>) {
          if (!(t.scale > 0.0)) throw NonInvertibleCDF("Gumbel scale must be positive");
          std::ostringstream os;
          os << "gumbel(" << t.location << "," << t.scale << ")";
          return Subordinator(os.str(), [t](double z) { return gumbel_transform(t, z); }, truncation);
        } else if constexpr (std::is_same_v<T, LaplaceCdf>) {
          if (!(t.scale > 0.0)) throw NonInvertibleCDF("Laplace scale must be positive");
          std::ostringstream os;
          os << "laplace(" << t.location << "," << t.scale << ")";
          return Subordinator(os.str(), [t](double z) { return laplace_transform(t, z); }, truncation,
                              kink0);
        } else {
          if (!t) throw NonInvertibleCDF("missing empirical CDF");
          return Subordinator("empirical(n=" + std::to_string(t->size()) + ")",
                              [t](double z) { return t->quantile(stats::normal_cdf(z)); }, truncation);
        }
      },
      target);
  s.set_monotone(true);
  return s;
}

SampledPath apply(const Subordinator& a, const SampledPath& path) {
  SampledPath out = path;
  for (double& v : out.values) v = a(v);
  out.model_id = path.model_id + "|A=" + a.name();
  return out;
}

}  // namespace scatlimit
