#include "scatlimit/gaussian_simulator.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "scatlimit/errors.hpp"
#include "scatlimit/fft.hpp"

namespace scatlimit {

namespace {

constexpr char kMagic[4] = {'S', 'L', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void fnv(std::uint64_t& h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
}

template <class T>
void fnv_value(std::uint64_t& h, T v) {
  fnv(h, &v, sizeof v);
}

}  // namespace

std::uint64_t model_hash(const SpectralModel& model) {
  const auto& p = model.params();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  fnv_value(h, p.beta);
  fnv_value(h, static_cast<int>(p.envelope.kind));
  fnv_value(h, p.envelope.amplitude);
  fnv_value(h, p.envelope.width);
  fnv_value(h, p.band.value_or(-1.0));
  fnv_value(h, static_cast<int>(p.one_sided_band) | static_cast<int>(p.short_range) << 1 |
                   static_cast<int>(p.degenerate) << 2 | static_cast<int>(p.normalize) << 3 |
                   static_cast<int>(p.convention) << 4);
  return h;
}

std::string to_hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

SpectralSynthesizer::SpectralSynthesizer(const SpectralModel& model, std::size_t n, double dt)
    : n_(n), dt_(dt), model_id_(to_hex(model_hash(model))) {
  if (!fft::is_power_of_two(n) || n < 4) throw LengthError("path length must be a power of two >= 4");
  if (!(dt > 0.0)) throw LengthError("dt must be positive");
  const double nyquist = std::numbers::pi / dt;
  if (model.band()) {
    if (*model.band() > nyquist * (1.0 + 1e-12))
      throw AliasingError("band " + std::to_string(*model.band()) + " exceeds the Nyquist frequency " +
                          std::to_string(nyquist));
  } else if (model.support() > nyquist) {
    const double tail = 2.0 * model.mass(nyquist, model.support());
    if (tail > 1e-10 * model.total_mass())
      throw AliasingError("spectral mass beyond the Nyquist frequency is " + std::to_string(tail));
  }

  const std::size_t half = n / 2;
  const double dl = 2.0 * std::numbers::pi / (static_cast<double>(n) * dt);
  mass_.resize(half + 1);
  mass_[0] = 2.0 * model.mass(0.0, 0.5 * dl);
  for (std::size_t k = 1; k < half; ++k) mass_[k] = 2.0 * model.mass((k - 0.5) * dl, (k + 0.5) * dl);
  mass_[half] = 2.0 * model.mass((half - 0.5) * dl, half * dl);

  amp_.resize(half + 1);
  for (std::size_t k = 0; k <= half; ++k) amp_[k] = std::sqrt(std::max(mass_[k], 0.0));
}

double SpectralSynthesizer::variance() const { return stats::pairwise_sum(mass_); }

double SpectralSynthesizer::covariance(std::size_t lag) const {
  std::vector<double> terms(mass_.size());
  for (std::size_t k = 0; k < mass_.size(); ++k)
    terms[k] = mass_[k] * std::cos(2.0 * std::numbers::pi * static_cast<double>(k * lag % n_) / n_);
  return stats::pairwise_sum(terms);
}

void SpectralSynthesizer::generate_into(stats::CounterRng& rng, std::span<double> out) const {
  if (out.size() != n_) throw LengthError("output buffer length mismatch");
  const std::size_t half = n_ / 2;
  const double n = static_cast<double>(n_);
  std::vector<fft::cplx> c(half + 1);
  // G(t_j) = √m_0 a_0 + Σ_k √m_k (a_k cos λ_k t_j + b_k sin λ_k t_j) + √m_{n/2} a (-1)^j.
  c[0] = n * amp_[0] * rng.normal();
  for (std::size_t k = 1; k < half; ++k) {
    const double a = rng.normal(), b = rng.normal();
    c[k] = 0.5 * n * amp_[k] * fft::cplx(a, -b);
  }
  c[half] = n * amp_[half] * rng.normal();
  fft::inverse(c, out);
}

SampledPath SpectralSynthesizer::generate(std::uint64_t seed, std::uint64_t stream) const {
  SampledPath p;
  p.values.resize(n_);
  p.dt = dt_;
  p.seed = seed;
  p.model_id = model_id_;
  p.valid_begin = 0;
  p.valid_end = n_;
  stats::CounterRng rng(seed, stream);
  generate_into(rng, p.values);
  return p;
}

SampledPath simulate_gaussian(const SpectralModel& model, std::size_t n, double dt, std::uint64_t seed) {
  return SpectralSynthesizer(model, n, dt).generate(seed);
}

SampledPath simulate_circulant(const SpectralModel& model, std::size_t n, double dt, std::uint64_t seed,
                               double* clipped) {
  if (!fft::is_power_of_two(n) || n < 4) throw LengthError("path length must be a power of two >= 4");
  std::vector<double> lags(n + 1);
  for (std::size_t k = 0; k <= n; ++k) lags[k] = static_cast<double>(k) * dt;
  const auto r = covariance_from_density(model, lags);
  const std::size_t m = 2 * n;
  std::vector<double> row(m);
  for (std::size_t k = 0; k <= n; ++k) row[k] = r[k];
  for (std::size_t k = n + 1; k < m; ++k) row[k] = r[m - k];
  auto eig = fft::forward(row);
  double neg = 0.0, total = 0.0;
  std::vector<double> s(eig.size());
  for (std::size_t k = 0; k < eig.size(); ++k) {
    const double e = eig[k].real();
    total += std::abs(e);
    if (e < 0.0) neg += -e;
    s[k] = std::sqrt(std::max(e, 0.0) / static_cast<double>(m));
  }
  if (clipped) *clipped = total > 0.0 ? neg / total : 0.0;

  // Real Gaussian vector with circulant covariance: Re of the inverse DFT of
  // Hermitian-weighted complex noise, built here directly in r2c layout.
  stats::CounterRng rng(seed, 0);
  std::vector<fft::cplx> c(n + 1);
  const double mm = static_cast<double>(m);
  c[0] = mm * s[0] * rng.normal();
  for (std::size_t k = 1; k < n; ++k) {
    const double a = rng.normal(), b = rng.normal();
    c[k] = mm * s[k] * fft::cplx(a, b) / std::numbers::sqrt2;
  }
  c[n] = mm * s[n] * rng.normal();
  auto full = fft::inverse(c, m);
  SampledPath p;
  p.values.assign(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(n));
  p.dt = dt;
  p.seed = seed;
  p.model_id = to_hex(model_hash(model)) + ":circulant";
  p.valid_end = n;
  return p;
}

void write_path_csv(const std::filesystem::path& file, const SampledPath& path,
                    const std::string& config_hash) {
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot open " + file.string());
  os << "# config_hash=" << config_hash << " seed=" << path.seed << " model=" << path.model_id
     << " dt=" << std::setprecision(17) << path.dt << "\n";
  os << "t,value\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < path.values.size(); ++i)
    os << static_cast<double>(i) * path.dt << "," << path.values[i] << "\n";
}

SampledPath read_path_csv(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw std::runtime_error("cannot open " + file.string());
  SampledPath p;
  std::string line;
  std::size_t row = 0;
  std::vector<double> t;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty() || line[0] == '#') {
      if (auto pos = line.find("seed="); pos != std::string::npos) p.seed = std::stoull(line.substr(pos + 5));
      continue;
    }
    if (line.rfind("t,", 0) == 0) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(row, "expected two columns");
    char* end = nullptr;
    const double tv = std::strtod(line.c_str(), &end);
    const double v = std::strtod(line.c_str() + comma + 1, &end);
    if (!std::isfinite(v) || !std::isfinite(tv)) throw ParseError(row, "non-finite value");
    t.push_back(tv);
    p.values.push_back(v);
  }
  p.dt = t.size() > 1 ? t[1] - t[0] : 1.0;
  p.valid_end = p.values.size();
  return p;
}

void write_path_binary(const std::filesystem::path& file, const SampledPath& path,
                       std::uint64_t model_hash_value) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + file.string());
  const std::uint64_t n = path.values.size();
  os.write(kMagic, 4);
  os.write(reinterpret_cast<const char*>(&kVersion), sizeof kVersion);
  os.write(reinterpret_cast<const char*>(&path.dt), sizeof path.dt);
  os.write(reinterpret_cast<const char*>(&n), sizeof n);
  os.write(reinterpret_cast<const char*>(&path.seed), sizeof path.seed);
  os.write(reinterpret_cast<const char*>(&model_hash_value), sizeof model_hash_value);
  os.write(reinterpret_cast<const char*>(path.values.data()), static_cast<std::streamsize>(n * sizeof(double)));
}

SampledPath read_path_binary(const std::filesystem::path& file, std::uint64_t* model_hash_value) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + file.string());
  char magic[4];
  std::uint32_t version = 0;
  std::uint64_t n = 0, hash = 0;
  SampledPath p;
  is.read(magic, 4);
  is.read(reinterpret_cast<char*>(&version), sizeof version);
  if (!is || std::memcmp(magic, kMagic, 4) != 0 || version != kVersion)
    throw ParseError(0, "not a path file or unsupported version");
  is.read(reinterpret_cast<char*>(&p.dt), sizeof p.dt);
  is.read(reinterpret_cast<char*>(&n), sizeof n);
  is.read(reinterpret_cast<char*>(&p.seed), sizeof p.seed);
  is.read(reinterpret_cast<char*>(&hash), sizeof hash);
  p.values.resize(n);
  is.read(reinterpret_cast<char*>(p.values.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw ParseError(0, "truncated path file");
  if (model_hash_value) *model_hash_value = hash;
  p.model_id = to_hex(hash);
  p.valid_end = n;
  return p;
}

}  // namespace scatlimit
