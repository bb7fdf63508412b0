#include "scatlimit/mc_validation.hpp"

#include <omp.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>

#include "scatlimit/errors.hpp"
#include "scatlimit/fft.hpp"

namespace scatlimit {

Estimate estimate_mean(std::span<const double> x) {
  Estimate e;
  e.value = stats::mean(x);
  e.se = x.size() > 1 ? stats::standard_error(x) : std::numeric_limits<double>::infinity();
  e.exact = std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; });
  if (e.exact) e.se = 0.0;
  return e;
}

Estimate estimate_ratio(std::span<const double> a, std::span<const double> b) {
  const double ma = stats::mean(a), mb = stats::mean(b);
  Estimate e;
  if (ma == 0.0 && mb == 0.0 && std::all_of(a.begin(), a.end(), [](double v) { return v == 0.0; }) &&
      std::all_of(b.begin(), b.end(), [](double v) { return v == 0.0; })) {
    e.value = std::numeric_limits<double>::quiet_NaN();
    e.exact = true;
    return e;
  }
  e.value = ma / mb;
  const std::size_t n = a.size();
  if (n < 2) {
    e.se = std::numeric_limits<double>::infinity();
    return e;
  }
  std::vector<double> cross(n);
  for (std::size_t i = 0; i < n; ++i) cross[i] = (a[i] - ma) * (b[i] - mb);
  const double va = stats::variance(a), vb = stats::variance(b);
  const double cab = stats::pairwise_sum(cross) / static_cast<double>(n - 1);
  const double rel = va / (ma * ma) + vb / (mb * mb) - 2.0 * cab / (ma * mb);
  e.se = std::abs(e.value) * std::sqrt(std::max(0.0, rel) / static_cast<double>(n));
  return e;
}

SpectralModel default_campaign_model() {
  SpectralModelParams p;
  p.band = std::numbers::pi;
  p.normalize = true;
  return SpectralModel(p);
}

double Campaign::j2_at(std::size_t i) const {
  if (ratio) return coupled_scale(j1_grid.at(i), *ratio, rounding);
  return j2_grid.at(i);
}

void Campaign::validate(std::size_t min_replicates) const {
  if (replicates < min_replicates)
    throw InsufficientReplicates("campaign '" + name + "' needs at least " + std::to_string(min_replicates) +
                                 " replicates, has " + std::to_string(replicates));
  if (j1_grid.empty()) throw ShapeError("j1 grid is empty");
  for (std::size_t i = 1; i < j1_grid.size(); ++i)
    if (!(j1_grid[i] > j1_grid[i - 1])) throw ShapeError("j1 grid must be strictly increasing");
  if (!ratio && j2_grid.size() != j1_grid.size())
    throw ShapeError("j2 grid must match the j1 grid when no coupling ratio is given");
  if (!fft::is_power_of_two(path_length)) throw LengthError("path length must be a power of two");
  for (std::size_t i = 0; i < j1_grid.size(); ++i)
    for (double j : {j1_grid[i], j2_at(i)})
      if (std::exp2(j) < 8.0 * dt * (1.0 - 1e-12)) {
        std::ostringstream os;
        os << "scale 2^" << j << " is below 8 dt = " << 8.0 * dt;
        throw ResolutionError(os.str());
      }
}

std::vector<std::vector<double>> run_replicates(const Campaign& c, const ReplicateBody& body, bool parallel) {
  const SpectralSynthesizer synth(c.model, c.path_length, c.dt);
  const auto n = static_cast<std::ptrdiff_t>(c.replicates);
  std::vector<std::vector<double>> rows(c.replicates);
  std::exception_ptr first_error;
  std::ptrdiff_t first_index = n;
  std::mutex mu;
  const int threads = c.workers > 0 ? c.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads) if (parallel)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    try {
      const auto path = synth.generate(c.seed, static_cast<std::uint64_t>(r));
      rows[r] = body(static_cast<std::size_t>(r), path);
    } catch (...) {
      std::lock_guard lock(mu);
      if (r < first_index) {
        first_index = r;
        first_error = std::current_exception();
      }
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return rows;
}

std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t k) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(k));
  return out;
}

bool decreasing_up_to_noise(const std::vector<Estimate>& v, int allowed, double z) {
  int inversions = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i].value <= v[i - 1].value) continue;
    ++inversions;
    if (v[i].value - v[i - 1].value > z * std::hypot(v[i].se, v[i - 1].se)) return false;
  }
  return inversions <= allowed;
}

namespace {

// Squared value at the path centre, or the mean square over the valid range.
double square_stat(const SampledPath& y, bool time_average) {
  if (!time_average) {
    const std::size_t c = y.size() / 2;
    if (c < y.valid_begin || c >= y.valid_end) throw OutOfExtent("path centre lies inside the discarded margin");
    return y.values[c] * y.values[c];
  }
  if (y.valid_size() == 0) throw OutOfExtent("no valid samples left after filtering");
  std::vector<double> sq(y.values.begin() + y.valid_begin, y.values.begin() + y.valid_end);
  for (double& v : sq) v *= v;
  return stats::pairwise_sum(sq) / static_cast<double>(sq.size());
}

std::vector<Estimate> column_means(const std::vector<std::vector<double>>& rows, std::size_t first, std::size_t stride,
                                   std::size_t count) {
  std::vector<Estimate> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(estimate_mean(column(rows, first + i * stride)));
  return out;
}

std::vector<double> log2_values(const std::vector<Estimate>& v) {
  std::vector<double> out;
  for (const auto& e : v) out.push_back(std::log2(e.value));
  return out;
}

// A(z) = c0 + c1 z leaves T identically zero; floating point would only
// produce roundoff there, so such maps are answered analytically.
bool affine(const Subordinator& a) {
  const auto& c = a.coeffs();
  const double norm = a.l2_norm();
  const double rest2 = norm * norm - c[0] * c[0] - (c.size() > 1 ? c[1] * c[1] : 0.0);
  return std::sqrt(std::max(0.0, rest2)) <= 1e-8 * norm;
}

double frobenius(const std::vector<double>& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

std::vector<double> sample_covariance(const std::vector<std::vector<double>>& rows, std::size_t offset, std::size_t k,
                                      const std::vector<std::size_t>* pick = nullptr) {
  const std::size_t n = pick ? pick->size() : rows.size();
  std::vector<double> mean(k, 0.0), cov(k * k, 0.0);
  auto row = [&](std::size_t i) -> const std::vector<double>& { return rows[pick ? (*pick)[i] : i]; };
  for (std::size_t a = 0; a < k; ++a) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = row(i)[offset + a];
    mean[a] = stats::mean(col);
  }
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a; b < k; ++b) {
      std::vector<double> prod(n);
      for (std::size_t i = 0; i < n; ++i) prod[i] = (row(i)[offset + a] - mean[a]) * (row(i)[offset + b] - mean[b]);
      cov[a * k + b] = cov[b * k + a] = stats::pairwise_sum(prod) / static_cast<double>(n - 1);
    }
  return cov;
}

double rel_error(const std::vector<double>& cov, const std::vector<double>& target) {
  std::vector<double> d(cov.size());
  for (std::size_t i = 0; i < cov.size(); ++i) d[i] = cov[i] - target[i];
  return frobenius(d) / frobenius(target);
}

}  // namespace

Assumption5Result assumption5_ratio(const Campaign& c) {
  c.validate();
  const std::size_t nj = c.j1_grid.size();
  const bool zero = affine(c.subordinator);
  auto rows = zero ? std::vector<std::vector<double>>(c.replicates, std::vector<double>(2 * nj, 0.0))
                   : run_replicates(c, [&](std::size_t, const SampledPath& g) {
    std::vector<double> out;
    for (std::size_t i = 0; i < nj; ++i) {
      auto [d, dtl] = diff_paths(c.subordinator, g, c.wavelet, c.j1_grid[i], c.j2_at(i));
      out.push_back(square_stat(d, c.time_average));
      out.push_back(square_stat(dtl, c.time_average));
    }
    return out;
  });
  Assumption5Result res;
  res.degenerate = true;
  std::vector<Estimate> ed, edt;
  for (std::size_t i = 0; i < nj; ++i) {
    const auto a = column(rows, 2 * i), b = column(rows, 2 * i + 1);
    Assumption5Row r;
    r.j1 = c.j1_grid[i];
    r.j2 = c.j2_at(i);
    r.ed2 = estimate_mean(a);
    r.edt2 = estimate_mean(b);
    r.ratio = estimate_ratio(a, b);
    res.degenerate = res.degenerate && r.ratio.exact;
    if (!r.ratio.exact) res.max_ratio = std::max(res.max_ratio, r.ratio.value);
    ed.push_back(r.ed2);
    edt.push_back(r.edt2);
    res.rows.push_back(r);
  }
  res.d_decays = decreasing_up_to_noise(ed);
  res.dt_decays = decreasing_up_to_noise(edt);
  return res;
}

VarianceScalingResult variance_scaling(const Campaign& c) {
  c.validate();
  const std::size_t nj = c.j1_grid.size();
  auto rows = run_replicates(c, [&](std::size_t, const SampledPath& g) {
    std::vector<double> out;
    for (std::size_t i = 0; i < nj; ++i) {
      auto [s, t] = decompose_ST(c.subordinator, g, c.wavelet, c.j1_grid[i]);
      out.push_back(square_stat(s, c.time_average));
      out.push_back(square_stat(t, c.time_average));
    }
    return out;
  });
  VarianceScalingResult res;
  res.j1 = c.j1_grid;
  res.var_s = column_means(rows, 0, 2, nj);
  res.var_t = column_means(rows, 1, 2, nj);
  res.s_fit = stats::ols(res.j1, log2_values(res.var_s));
  res.t_fit = stats::ols(res.j1, log2_values(res.var_t));
  const auto rates = predicted_rates(c.beta());
  res.predicted_s_slope = rates.var_s_slope;
  res.predicted_t_slope = rates.var_t_slope;
  return res;
}

FddResult fdd_convergence(const Campaign& c, const LimitConstants& lc) {
  c.validate();
  const std::size_t nj = c.j1_grid.size(), k = c.t_points.size();
  if (k == 0) throw ShapeError("fdd_convergence needs at least one t point");
  const double beta = c.beta();
  auto rows = run_replicates(c, [&](std::size_t, const SampledPath& g) {
    std::vector<double> out;
    for (std::size_t i = 0; i < nj; ++i) {
      const double j1 = c.j1_grid[i], j2 = c.j2_at(i);
      auto y = cwt(first_order(g, c.wavelet, j1), c.wavelet, j2);
      auto s = sample_rescaled(y, rescale_factor(beta, j1, j2), j2, c.t_points);
      out.insert(out.end(), s.values.begin(), s.values.end());
    }
    return out;
  });

  FddResult res;
  res.limit_variance = lc.limit_variance();
  std::vector<double> target(k * k);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b)
      target[a * k + b] = limit_covariance(lc.kappa, c.wavelet, c.t_points[a], c.t_points[b]);
  const double sd = std::sqrt(res.limit_variance);
  std::vector<Estimate> errs;
  for (std::size_t i = 0; i < nj; ++i) {
    FddRow r;
    r.j1 = c.j1_grid[i];
    r.j2 = c.j2_at(i);
    r.target = target;
    const std::size_t off = i * k;
    if (k == 1) {
      // A single point reduces to a scalar variance comparison.
      r.covariance = {stats::variance(column(rows, off))};
    } else {
      r.covariance = sample_covariance(rows, off, k);
    }
    r.rel_error.value = rel_error(r.covariance, target);
    // Bootstrap over replicates with a fixed stream per scale.
    stats::CounterRng rng(stats::derive_seed(c.seed, 0xb007), i);
    std::vector<double> boot;
    std::vector<std::size_t> pick(c.replicates);
    for (int bsi = 0; bsi < 200; ++bsi) {
      for (auto& p : pick) p = static_cast<std::size_t>(rng() % c.replicates);
      std::vector<double> cov;
      if (k == 1) {
        std::vector<double> col;
        for (auto p : pick) col.push_back(rows[p][off]);
        cov = {stats::variance(col)};
      } else {
        cov = sample_covariance(rows, off, k, &pick);
      }
      boot.push_back(rel_error(cov, target));
    }
    r.rel_error.se = std::sqrt(stats::variance(boot));
    for (std::size_t a = 0; a < k; ++a)
      r.ks.push_back(stats::ks_statistic(column(rows, off + a), [sd](double x) { return stats::normal_cdf(x, sd); }));
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = a + 1; b < k; ++b) {
        std::vector<double> sum(c.replicates);
        for (std::size_t q = 0; q < c.replicates; ++q) sum[q] = rows[q][off + a] + rows[q][off + b];
        const double v = target[a * k + a] + target[b * k + b] + 2.0 * target[a * k + b];
        const double s2 = std::sqrt(v);
        r.pair_ks.push_back(stats::ks_statistic(sum, [s2](double x) { return stats::normal_cdf(x, s2); }));
      }
    r.ks_critical = 1.358 / std::sqrt(static_cast<double>(c.replicates));
    Eigen::MatrixXd m(k, k);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) m(a, b) = r.covariance[a * k + b];
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues();
    r.psd = ev.minCoeff() >= -1e-12 * std::max(1.0, ev.maxCoeff());
    errs.push_back(r.rel_error);
    res.rows.push_back(std::move(r));
  }
  res.rel_error_decreasing = decreasing_up_to_noise(errs);
  return res;
}

TheoremResult theorem_convergence(const Campaign& c, const LimitConstants& lc) {
  if (!c.counterexample) {
    if (!c.ratio) throw CouplingViolation("theorem_convergence needs a coupled sweep j2 = r j1");
    ScatteringConfig cfg;
    cfg.beta = c.beta();
    cfg.ratio = c.ratio;
    cfg.validate();
  }
  c.validate();
  const std::size_t nj = c.j1_grid.size(), k = c.t_points.size();
  if (k == 0) throw ShapeError("theorem_convergence needs at least one t point");
  const double beta = c.beta();
  auto rows = run_replicates(c, [&](std::size_t, const SampledPath& g) {
    const auto x = apply(c.subordinator, g);
    std::vector<double> out;
    for (std::size_t i = 0; i < nj; ++i) {
      const double j1 = c.j1_grid[i], j2 = c.j2_at(i);
      auto u = second_order(x, c.wavelet, j1, j2);
      auto s = sample_rescaled(u, rescale_factor(beta, j1, j2), j2, c.t_points);
      out.insert(out.end(), s.values.begin(), s.values.end());
    }
    return out;
  });

  TheoremResult res;
  res.c1 = c.subordinator.coeff(1);
  res.target_scale = std::abs(res.c1) * lc.kappa * std::sqrt(lc.wavelet_l2);
  res.target_mean = res.target_scale * std::sqrt(2.0 / std::numbers::pi);
  const double scale = res.target_scale;
  std::vector<double> moments;
  for (std::size_t i = 0; i < nj; ++i) {
    TheoremRow r;
    r.j1 = c.j1_grid[i];
    r.j2 = c.j2_at(i);
    std::vector<double> pooled, sq;
    for (std::size_t a = 0; a < k; ++a) {
      auto col = column(rows, i * k + a);
      r.ks.push_back(stats::ks_statistic(col, [scale](double x) { return stats::folded_normal_cdf(x, scale); }));
      pooled.insert(pooled.end(), col.begin(), col.end());
    }
    // Per replicate averages keep the SEs on independent units.
    std::vector<double> rep_mean(c.replicates), rep_sq(c.replicates);
    for (std::size_t q = 0; q < c.replicates; ++q) {
      double m = 0.0, s = 0.0;
      for (std::size_t a = 0; a < k; ++a) {
        const double v = rows[q][i * k + a];
        m += v;
        s += v * v;
      }
      rep_mean[q] = m / static_cast<double>(k);
      rep_sq[q] = s / static_cast<double>(k);
    }
    r.mean = estimate_mean(rep_mean);
    r.second_moment = estimate_mean(rep_sq);
    const double t2 = scale * scale;
    r.variance_ratio = {r.second_moment.value / t2, r.second_moment.se / t2, false};
    moments.push_back(r.second_moment.value);
    res.rows.push_back(std::move(r));
  }
  bool up = true, down = true;
  for (std::size_t i = 1; i < moments.size(); ++i) {
    up = up && moments[i] > moments[i - 1];
    down = down && moments[i] < moments[i - 1];
  }
  res.variance_monotone = moments.size() >= 2 && (up || down);
  res.variance_trend = up ? "increasing" : (down ? "decreasing" : "mixed");
  return res;
}

Prop31Result prop31_decay(const Campaign& c) {
  c.validate();
  const std::size_t nj = c.j1_grid.size();
  const double beta = c.beta();
  const bool zero = affine(c.subordinator);
  auto rows = zero ? std::vector<std::vector<double>>(c.replicates, std::vector<double>(nj, 0.0))
                   : run_replicates(c, [&](std::size_t, const SampledPath& g) {
    std::vector<double> out;
    for (std::size_t i = 0; i < nj; ++i) {
      const double j1 = c.j1_grid[i], j2 = c.j2_at(i);
      auto d = diff_paths(c.subordinator, g, c.wavelet, j1, j2).first;
      out.push_back(std::exp2(j1 * (beta - 1.0) + j2) * square_stat(d, c.time_average));
    }
    return out;
  });
  Prop31Result res;
  const auto rates = predicted_rates(beta);
  std::vector<Estimate> series = column_means(rows, 0, 1, nj);
  res.identically_zero = std::all_of(series.begin(), series.end(), [](const Estimate& e) { return e.exact; });
  const double env0 = rates.normalized_diff_envelope(c.j1_grid[0], c.j2_at(0));
  // One-sided envelope: fitted at the smallest j1 (value plus 2 SE), tested beyond.
  res.fitted_constant = (series[0].value + 2.0 * series[0].se) / env0;
  for (std::size_t i = 0; i < nj; ++i) {
    Prop31Row r;
    r.j1 = c.j1_grid[i];
    r.j2 = c.j2_at(i);
    r.normalized = series[i];
    r.envelope = res.fitted_constant * rates.normalized_diff_envelope(r.j1, r.j2);
    r.below_envelope = r.normalized.value <= r.envelope + 2.0 * r.normalized.se;
    res.rows.push_back(r);
  }
  res.decreasing = decreasing_up_to_noise(series);
  return res;
}

DominanceResult dominance_probability(const SpectralModel& model, const Subordinator& a, const Wavelet& w, double j1,
                                      std::size_t n_points, std::size_t replicates, std::uint64_t seed,
                                      std::size_t path_length, double dt, int workers) {
  if (replicates == 0 || n_points == 0) throw InsufficientReplicates("dominance_probability needs replicates and points");
  Campaign c;
  c.model = model;
  c.subordinator = a;
  c.wavelet = w;
  c.j1_grid = {j1};
  c.j2_grid = {j1};
  c.replicates = replicates;
  c.path_length = path_length;
  c.dt = dt;
  c.seed = seed;
  c.workers = workers;
  c.validate(1);
  if (affine(a)) {
    DominanceResult res;
    res.trials = replicates * n_points;
    res.probability.exact = true;
    return res;
  }
  auto rows = run_replicates(c, [&](std::size_t, const SampledPath& g) {
    auto [s, t] = decompose_ST(a, g, w, j1);
    const std::size_t span = s.valid_size();
    if (span < n_points) throw OutOfExtent("fewer valid samples than requested points");
    const std::size_t step = span / n_points;
    double hits = 0.0;
    for (std::size_t k = 0; k < n_points; ++k) {
      const std::size_t idx = s.valid_begin + k * step + step / 2;
      if (std::abs(s.values[idx]) < std::abs(t.values[idx])) hits += 1.0;
    }
    return std::vector<double>{hits};
  });
  const auto hits = column(rows, 0);
  DominanceResult res;
  res.trials = replicates * n_points;
  const double p = stats::pairwise_sum(hits) / static_cast<double>(res.trials);
  res.probability.value = p;
  res.probability.se = std::sqrt(p * (1.0 - p) / static_cast<double>(res.trials));
  return res;
}

}  // namespace scatlimit
