#include "scatlimit/stats.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace scatlimit::stats {

double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

double mean(std::span<const double> x) {
  if (x.empty()) return std::numeric_limits<double>::quiet_NaN();
  return pairwise_sum(x) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean(x);
  std::vector<double> d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = (x[i] - m) * (x[i] - m);
  return pairwise_sum(d) / static_cast<double>(x.size() - 1);
}

double standard_error(std::span<const double> x) {
  return std::sqrt(variance(x) / static_cast<double>(x.size()));
}

double excess_kurtosis(std::span<const double> x) {
  const double m = mean(x);
  std::vector<double> d2(x.size()), d4(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = (x[i] - m) * (x[i] - m);
    d2[i] = d;
    d4[i] = d * d;
  }
  const double n = static_cast<double>(x.size());
  const double m2 = pairwise_sum(d2) / n;
  const double m4 = pairwise_sum(d4) / n;
  return m4 / (m2 * m2) - 3.0;
}

LinearFit ols(std::span<const double> x, std::span<const double> y,
              std::span<const double> weights) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw std::invalid_argument("ols: need matching x, y with n >= 2");
  const bool weighted = !weights.empty();
  std::vector<double> w(n, 1.0);
  if (weighted) std::copy(weights.begin(), weights.end(), w.begin());

  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double xm = sx / sw, ym = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += w[i] * (x[i] - xm) * (x[i] - xm);
    sxy += w[i] * (x[i] - xm) * (y[i] - ym);
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ym - fit.slope * xm;

  double quantile = 1.959963984540054;
  if (weighted) {
    fit.slope_se = std::sqrt(1.0 / sxx);
  } else if (n > 2) {
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      rss += r * r;
    }
    fit.slope_se = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
    boost::math::students_t t(static_cast<double>(n - 2));
    quantile = boost::math::quantile(boost::math::complement(t, 0.025));
  }
  fit.ci_low = fit.slope - quantile * fit.slope_se;
  fit.ci_high = fit.slope + quantile * fit.slope_se;
  return fit;
}

double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf) {
  std::vector<double> s(sample.begin(), sample.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double normal_cdf(double x, double sd) { return 0.5 * std::erfc(-x / (sd * std::numbers::sqrt2)); }

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double folded_normal_cdf(double x, double sd) {
  if (x <= 0) return 0.0;
  return std::erf(x / (sd * std::numbers::sqrt2));
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(mix64(seed + 0x9e3779b97f4a7c15ULL) ^ (index * 0xd1b54a32d192ed03ULL + 1));
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(derive_seed(seed, stream)) {}

CounterRng::result_type CounterRng::operator()() {
  return mix64(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL);
}

double CounterRng::uniform() {
  // 53 random bits, shifted off zero by half an ulp.
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double th = 2.0 * std::numbers::pi * uniform();
  spare_ = r * std::sin(th);
  has_spare_ = true;
  return r * std::cos(th);
}

}  // namespace scatlimit::stats
