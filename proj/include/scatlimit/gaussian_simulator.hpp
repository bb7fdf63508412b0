#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "scatlimit/spectral_models.hpp"
#include "scatlimit/stats.hpp"

namespace scatlimit {

struct SampledPath {
  std::vector<double> values;
  double dt = 1.0;
  std::uint64_t seed = 0;
  std::string model_id;
  // Samples [valid_begin, valid_end) are free of circular wrap-around from
  // the filtering stages applied so far.
  std::size_t valid_begin = 0;
  std::size_t valid_end = 0;

  std::size_t size() const { return values.size(); }
  std::size_t valid_size() const { return valid_end > valid_begin ? valid_end - valid_begin : 0; }
};

// 64-bit FNV-1a of the model parameters, used as the path lineage id.
std::uint64_t model_hash(const SpectralModel& model);
std::string to_hex(std::uint64_t v);

// Periodic spectral synthesis on the grid λ_k = 2πk/(n dt). Cell masses are
// exact integrals of f over each frequency cell; the cell at the origin is a
// Gaussian random constant carrying ∫_{|λ|<Δ/2} f, so no low-frequency energy
// is lost to the singularity.
class SpectralSynthesizer {
 public:
  SpectralSynthesizer(const SpectralModel& model, std::size_t n, double dt);

  std::size_t size() const { return n_; }
  double dt() const { return dt_; }
  // Two-sided mass of cell k, k = 0..n/2.
  std::span<const double> cell_masses() const { return mass_; }
  // Σ_k m_k, the variance of every synthesized sample.
  double variance() const;
  // Exact covariance of the synthesized (periodic) process at lag `k` samples.
  double covariance(std::size_t lag) const;

  void generate_into(stats::CounterRng& rng, std::span<double> out) const;
  SampledPath generate(std::uint64_t seed, std::uint64_t stream = 0) const;

 private:
  std::size_t n_;
  double dt_;
  std::string model_id_;
  std::vector<double> mass_;
  std::vector<double> amp_;
};

// Path of length n (a power of two). Throws AliasingError when the band
// exceeds the Nyquist frequency π/dt and LengthError for bad n.
SampledPath simulate_gaussian(const SpectralModel& model, std::size_t n, double dt,
                              std::uint64_t seed);

// Cross-check generator: circulant embedding of the exact covariance
// R(k dt), k = 0..n. Negative embedding eigenvalues are clipped to zero and
// their total relative weight is returned through `clipped` when non-null.
// Intended for modest n; the covariance is computed lag by lag.
SampledPath simulate_circulant(const SpectralModel& model, std::size_t n, double dt,
                               std::uint64_t seed, double* clipped = nullptr);

// CSV with a "# key=value" provenance line, then "t,value".
void write_path_csv(const std::filesystem::path& file, const SampledPath& path,
                    const std::string& config_hash);
SampledPath read_path_csv(const std::filesystem::path& file);

// Binary layout (little-endian): "SLPT" magic, u32 version, f64 dt, u64 n,
// u64 seed, u64 model hash, then n f64 samples.
void write_path_binary(const std::filesystem::path& file, const SampledPath& path,
                       std::uint64_t model_hash_value);
SampledPath read_path_binary(const std::filesystem::path& file, std::uint64_t* model_hash_value = nullptr);

}  // namespace scatlimit
