#include "scatlimit/scattering_transform.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "scatlimit/errors.hpp"
#include "scatlimit/fft.hpp"

namespace scatlimit {

std::string to_string(CouplingRounding r) {
  switch (r) {
    case CouplingRounding::none: return "none";
    case CouplingRounding::nearest: return "nearest";
    case CouplingRounding::floor: return "floor";
    case CouplingRounding::ceil: return "ceil";
  }
  return "none";
}

double coupled_scale(double j1, double ratio, CouplingRounding rounding) {
  const double j2 = ratio * j1;
  switch (rounding) {
    case CouplingRounding::none: return j2;
    case CouplingRounding::nearest: return std::round(j2);
    case CouplingRounding::floor: return std::floor(j2);
    case CouplingRounding::ceil: return std::ceil(j2);
  }
  return j2;
}

double ScatteringConfig::second_scale() const {
  return ratio ? coupled_scale(j1, *ratio, rounding) : j2;
}

void ScatteringConfig::validate() const {
  if (!ratio || counterexample) return;
  if (!(beta > 0.0 && beta < 1.0)) throw CouplingViolation("beta must lie in (0, 1) for a coupled sweep");
  const double hi = 1.0 / (1.0 - beta);
  if (!(*ratio > 1.0 && *ratio < hi)) {
    std::ostringstream os;
    os << "ratio " << *ratio << " outside the coupling window (1, " << hi << ")";
    throw CouplingViolation(os.str());
  }
}

std::shared_ptr<const std::vector<std::complex<double>>> wavelet_filter(const Wavelet& w, double j,
                                                                        std::size_t n, double dt) {
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const std::vector<std::complex<double>>>> cache;
  std::ostringstream key;
  key.precision(17);
  key << w.name() << '|' << j << '|' << n << '|' << dt;
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(key.str()); it != cache.end()) return it->second;
  }
  const std::size_t half = n / 2;
  auto f = std::make_shared<std::vector<std::complex<double>>>(half + 1);
  const double s = std::exp2(j);
  const double dl = 2.0 * std::numbers::pi / (static_cast<double>(n) * dt);
  for (std::size_t k = 0; k <= half; ++k) (*f)[k] = w.ft(s * dl * static_cast<double>(k));
  // The Nyquist bin stands for ±λ; a real filter keeps only the even part there.
  (*f)[half] = (*f)[half].real();
  std::lock_guard lock(mu);
  // Bound the cache; long sweeps touch few distinct keys.
  if (cache.size() > 256) cache.clear();
  cache.emplace(key.str(), f);
  return f;
}

std::size_t filter_margin(const Wavelet& w, double j, double dt) {
  return static_cast<std::size_t>(std::ceil(std::max(4.0, w.radius()) * std::exp2(j) / dt));
}

SampledPath cwt(const SampledPath& path, const Wavelet& w, double j) {
  const std::size_t n = path.size();
  if (!fft::is_power_of_two(n) || n < 4) throw LengthError("path length must be a power of two");
  if (std::exp2(j) < 8.0 * path.dt * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << "scale 2^" << j << " is below 8 dt = " << 8.0 * path.dt;
    throw ResolutionError(os.str());
  }
  const std::size_t margin = filter_margin(w, j, path.dt);
  if (path.valid_begin + margin >= path.valid_end || path.valid_end - path.valid_begin <= 2 * margin)
    throw LengthError("path too short for scale 2^" + std::to_string(j) + " (margin " +
                      std::to_string(margin) + " samples)");

  auto spec = fft::forward(path.values);
  const auto filt = wavelet_filter(w, j, n, path.dt);
  for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= (*filt)[k];
  SampledPath out;
  out.values.resize(n);
  fft::inverse(spec, out.values);
  out.dt = path.dt;
  out.seed = path.seed;
  out.model_id = path.model_id;
  out.valid_begin = path.valid_begin + margin;
  out.valid_end = path.valid_end - margin;
  return out;
}

SampledPath first_order(const SampledPath& path, const Wavelet& w, double j1) {
  auto out = cwt(path, w, j1);
  for (double& v : out.values) v = std::abs(v);
  return out;
}

SampledPath second_order(const SampledPath& path, const Wavelet& w, double j1, double j2) {
  return first_order(first_order(path, w, j1), w, j2);
}

double rescale_factor(double beta, double j1, double j2) {
  return std::exp2(0.5 * j1 * (beta - 1.0) + 0.5 * j2);
}

RescaledSample sample_rescaled(const SampledPath& layer2, double factor, double j2,
                               std::span<const double> t_points) {
  RescaledSample r;
  const double centre = static_cast<double>(layer2.size() / 2);
  const double scale = std::exp2(j2);
  for (double t : t_points) {
    const double exact = centre + scale * t / layer2.dt;
    const double nearest = std::round(exact);
    if (nearest < static_cast<double>(layer2.valid_begin) || nearest >= static_cast<double>(layer2.valid_end)) {
      std::ostringstream os;
      os << "time 2^" << j2 << "*" << t << " falls outside the valid range [" << layer2.valid_begin << ", "
         << layer2.valid_end << ")";
      throw OutOfExtent(os.str());
    }
    const auto idx = static_cast<std::size_t>(nearest);
    r.indices.push_back(idx);
    r.offsets.push_back((exact - nearest) * layer2.dt);
    r.values.push_back(factor * layer2.values[idx]);
  }
  return r;
}

RescaledSample rescaled_second_order(const SampledPath& path, const ScatteringConfig& cfg,
                                     std::span<const double> t_points) {
  cfg.validate();
  const double j2 = cfg.second_scale();
  // Check the extent before paying for the transforms.
  const std::size_t m = filter_margin(cfg.wavelet, cfg.j1, path.dt) + filter_margin(cfg.wavelet, j2, path.dt);
  SampledPath probe;
  probe.dt = path.dt;
  probe.values.resize(path.size());
  probe.valid_begin = path.valid_begin + m;
  probe.valid_end = path.valid_end > m ? path.valid_end - m : 0;
  sample_rescaled(probe, 1.0, j2, t_points);

  const auto u2 = second_order(path, cfg.wavelet, cfg.j1, j2);
  return sample_rescaled(u2, rescale_factor(cfg.beta, cfg.j1, j2), j2, t_points);
}

namespace {

double checked_c1(const Subordinator& a) {
  const double c1 = a.coeff(1);
  if (std::abs(c1) <= 1e-8 * a.l2_norm())
    throw RankViolation("subordinator " + a.name() + " has C_{A,1} = 0 (Hermite rank above 1)");
  return c1;
}

}  // namespace

std::pair<SampledPath, SampledPath> decompose_ST(const Subordinator& a, const SampledPath& g,
                                                 const Wavelet& w, double j1) {
  const double c1 = checked_c1(a);
  const double c0 = a.coeff(0);
  SampledPath rem = g;
  for (std::size_t i = 0; i < g.size(); ++i) rem.values[i] = a(g.values[i]) - c0 - c1 * g.values[i];
  auto s = cwt(g, w, j1);
  for (double& v : s.values) v *= c1;
  auto t = cwt(rem, w, j1);
  return {std::move(s), std::move(t)};
}

std::pair<SampledPath, SampledPath> diff_paths(const Subordinator& a, const SampledPath& g, const Wavelet& w,
                                               double j1, double j2) {
  auto [s, t] = decompose_ST(a, g, w, j1);
  SampledPath u = s, v = s;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double sv = s.values[i], tv = t.values[i];
    u.values[i] = std::abs(sv + tv) - std::abs(sv);
    v.values[i] = (sv > 0.0 ? 1.0 : (sv < 0.0 ? -1.0 : 0.0)) * tv;
  }
  return {cwt(u, w, j2), cwt(v, w, j2)};
}

}  // namespace scatlimit
