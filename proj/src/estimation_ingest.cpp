#include "scatlimit/estimation_ingest.hpp"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "scatlimit/errors.hpp"
#include "scatlimit/fft.hpp"
#include "scatlimit/stats.hpp"

namespace scatlimit {

namespace {

int thread_count(int workers) { return workers > 0 ? workers : omp_get_max_threads(); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_cell(std::string_view cell, std::size_t row) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size())
    throw ParseError(row, "'" + std::string(cell) + "' is not a number");
  if (!std::isfinite(v)) throw ParseError(row, "non-finite value");
  return v;
}

std::vector<double> demeaned(const std::vector<double>& x) {
  const double m = stats::mean(x);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - m;
  return out;
}

}  // namespace

std::vector<double> SignalDataset::pooled() const {
  std::vector<double> out;
  out.reserve(pooled_size());
  for (const auto& s : segments) out.insert(out.end(), s.begin(), s.end());
  return out;
}

void SignalDataset::validate() const {
  if (segments.empty() || segments.front().empty()) throw ShapeError("dataset has no samples");
  if (!(dt > 0.0)) throw ShapeError("dt must be positive");
  for (const auto& s : segments) {
    if (s.size() != segments.front().size()) throw ShapeError("segments differ in length");
    for (std::size_t i = 0; i < s.size(); ++i)
      if (!std::isfinite(s[i])) throw ParseError(i + 1, "non-finite value");
  }
}

SignalDataset load_csv(const std::string& path, double dt, std::size_t segment_length) {
  std::ifstream in(path);
  if (!in) throw ShapeError("cannot open " + path);
  std::vector<std::vector<double>> columns;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::vector<double> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = body.find(',', start);
      cells.push_back(parse_cell(body.substr(start, comma == std::string_view::npos ? body.npos : comma - start), row));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (columns.empty()) columns.resize(cells.size());
    if (cells.size() != columns.size())
      throw ParseError(row, "expected " + std::to_string(columns.size()) + " columns, found " +
                                std::to_string(cells.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) columns[c].push_back(cells[c]);
  }
  if (columns.empty()) throw ShapeError(path + " contains no data rows");
  const std::size_t rows = columns.front().size();
  const std::size_t len = segment_length == 0 ? rows : segment_length;
  if (rows % len != 0)
    throw ShapeError("segment length " + std::to_string(len) + " does not divide " + std::to_string(rows) + " rows");
  SignalDataset d;
  d.dt = dt;
  d.source = path;
  d.label = path;
  for (const auto& col : columns)
    for (std::size_t s = 0; s < rows; s += len) d.segments.emplace_back(col.begin() + s, col.begin() + s + len);
  d.validate();
  return d;
}

SignalDataset dataset_from_paths(const std::vector<SampledPath>& paths, std::string label) {
  SignalDataset d;
  d.label = std::move(label);
  if (!paths.empty()) d.dt = paths.front().dt;
  for (const auto& p : paths) d.segments.push_back(p.values);
  d.validate();
  return d;
}

FittedSubordinator fit_subordinator(const SignalDataset& data, int truncation) {
  data.validate();
  if (data.pooled_size() < 1000)
    throw SampleTooSmall("subordinator fit needs at least 1000 samples, got " + std::to_string(data.pooled_size()));
  FittedSubordinator f;
  f.cdf = std::make_shared<const EmpiricalCdf>(data.pooled());
  f.map = subordinator_from_cdf(f.cdf, truncation);
  return f;
}

Periodogram averaged_periodogram(const SignalDataset& data, const std::vector<std::size_t>& pick, int workers) {
  const std::size_t n = data.segment_length();
  const std::size_t half = n / 2;
  const auto m = static_cast<std::ptrdiff_t>(pick.size());
  std::vector<std::vector<double>> per(pick.size());
#pragma omp parallel for num_threads(thread_count(workers))
  for (std::ptrdiff_t s = 0; s < m; ++s) {
    const auto spec = fft::forward(demeaned(data.segments[pick[s]]));
    std::vector<double> p(half);
    for (std::size_t k = 1; k <= half; ++k) p[k - 1] = std::norm(spec[k]);
    per[s] = std::move(p);
  }
  Periodogram out;
  out.lambda.resize(half);
  out.power.assign(half, 0.0);
  const double norm = data.dt / (2.0 * std::numbers::pi * static_cast<double>(n) * static_cast<double>(pick.size()));
  for (std::size_t k = 0; k < half; ++k) {
    out.lambda[k] = 2.0 * std::numbers::pi * static_cast<double>(k + 1) / (static_cast<double>(n) * data.dt);
    double acc = 0.0;
    for (const auto& p : per) acc += p[k];
    out.power[k] = acc * norm;
  }
  return out;
}

Periodogram averaged_periodogram(const SignalDataset& data, int workers) {
  std::vector<std::size_t> all(data.segments.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return averaged_periodogram(data, all, workers);
}

namespace {

stats::LinearFit low_band_fit(const Periodogram& p, std::size_t count) {
  std::vector<double> x(count), y(count);
  for (std::size_t k = 0; k < count; ++k) {
    x[k] = std::log(p.lambda[k]);
    y[k] = std::log(p.power[k]);
  }
  return stats::ols(x, y);
}

}  // namespace

HurstEstimate estimate_hurst(const SignalDataset& data, const HurstOptions& opts) {
  data.validate();
  const std::size_t n = data.segment_length();
  if (n < 512) throw SampleTooSmall("Hurst estimation needs segments of at least 512 samples, got " + std::to_string(n));
  HurstEstimate h;
  h.frequencies = std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(opts.band_fraction * (n / 2))));
  const auto fit = low_band_fit(averaged_periodogram(data, opts.workers), h.frequencies);
  h.slope = fit.slope;
  h.slope_se = fit.slope_se;
  h.beta = fit.slope + 1.0;
  const double alpha = 1.0 - opts.confidence;
  const std::size_t m = data.segments.size();
  if (m >= 2 && opts.bootstrap > 0) {
    stats::CounterRng rng(stats::derive_seed(opts.seed, 0x4857), 0);
    std::vector<double> betas;
    std::vector<std::size_t> pick(m);
    for (std::size_t b = 0; b < opts.bootstrap; ++b) {
      for (auto& p : pick) p = static_cast<std::size_t>(rng() % m);
      betas.push_back(low_band_fit(averaged_periodogram(data, pick, opts.workers), h.frequencies).slope + 1.0);
    }
    std::sort(betas.begin(), betas.end());
    auto at = [&](double q) {
      const double pos = q * static_cast<double>(betas.size() - 1);
      const auto i = static_cast<std::size_t>(pos);
      const double f = pos - static_cast<double>(i);
      return i + 1 < betas.size() ? betas[i] * (1 - f) + betas[i + 1] * f : betas[i];
    };
    h.ci_low = at(alpha / 2);
    h.ci_high = at(1 - alpha / 2);
  } else {
    const double z = stats::normal_quantile(1 - alpha / 2);
    h.ci_low = h.beta - z * h.slope_se;
    h.ci_high = h.beta + z * h.slope_se;
  }
  h.short_range = h.beta >= 1.0 || h.ci_high >= 1.0;
  return h;
}

std::vector<double> autocovariance(const SignalDataset& data, std::size_t max_lag, int workers) {
  data.validate();
  const std::size_t n = data.segment_length();
  max_lag = std::min(max_lag, n - 1);
  const std::size_t padded = std::bit_ceil(2 * n);
  const auto m = static_cast<std::ptrdiff_t>(data.segments.size());
  std::vector<std::vector<double>> per(data.segments.size());
#pragma omp parallel for num_threads(thread_count(workers))
  for (std::ptrdiff_t s = 0; s < m; ++s) {
    auto x = demeaned(data.segments[s]);
    x.resize(padded, 0.0);
    auto spec = fft::forward(x);
    for (auto& v : spec) v = std::norm(v);
    auto r = fft::inverse(spec, padded);
    r.resize(max_lag + 1);
    for (double& v : r) v /= static_cast<double>(n);
    per[s] = std::move(r);
  }
  std::vector<double> out(max_lag + 1, 0.0);
  for (const auto& r : per)
    for (std::size_t k = 0; k <= max_lag; ++k) out[k] += r[k] / static_cast<double>(m);
  return out;
}

SignalDataset gaussianize(const SignalDataset& data, const Subordinator& a) {
  data.validate();
  if (!a.monotone()) throw NonInvertibleCDF("map " + a.name() + " is not known to be monotone");
  SignalDataset out = data;
  out.label = data.label + " (gaussianized)";
  for (auto& s : out.segments)
    for (double& v : s) v = a.inverse(v);
  return out;
}

SignalDataset gaussianize(const SignalDataset& data, const FittedSubordinator& a) {
  data.validate();
  if (!a.cdf) throw NonInvertibleCDF("fitted subordinator has no empirical CDF");
  SignalDataset out = data;
  out.label = data.label + " (gaussianized)";
  for (auto& s : out.segments)
    for (double& v : s) v = stats::normal_quantile(a.cdf->cdf(v));
  return out;
}

FittedModel fit_model(const SignalDataset& data, const HurstOptions& opts, std::size_t max_lag) {
  FittedModel m{fit_subordinator(data), estimate_hurst(data, opts), {}, averaged_periodogram(data, opts.workers)};
  m.correlation = autocovariance(data, max_lag, opts.workers);
  const double c0 = m.correlation.front();
  for (double& v : m.correlation) v /= c0;
  return m;
}

}  // namespace scatlimit
