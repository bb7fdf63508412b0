#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "scatlimit/hermite_subordination.hpp"
#include "scatlimit/scattering_transform.hpp"
#include "scatlimit/spectral_models.hpp"

namespace scatlimit {

struct WaveletSpec {
  std::string kind = "mexican_hat";  // mexican_hat | morlet | daubechies | shannon | power_band
  double omega0 = 5.0;
  int vanishing_moments = 8;
  double lo = 1.0, hi = 2.0;
  double p = 0.25;

  Wavelet build() const;
};

struct SubordinatorSpec {
  std::string kind = "identity";  // identity | hermite_sum | absolute | sign | laplace | gumbel
  std::vector<double> coeffs;
  double shift = 0.0;
  double location = 0.0, scale = 1.0;

  Subordinator build() const;
};

struct CampaignSpec {
  std::string kind = "assumption5";  // assumption5 | variance_scaling | fdd | theorem | prop31 | dominance
  std::vector<double> j1{4, 5, 6};
  std::optional<double> ratio;
  std::vector<double> j2;
  CouplingRounding rounding = CouplingRounding::none;
  std::size_t replicates = 200;
  std::size_t path_length = std::size_t{1} << 16;
  double dt = 1.0;
  std::vector<double> t_points{0.0};
  bool time_average = false;
  bool counterexample = false;
  bool assert_envelope = true;
  std::size_t points = 64;  // dominance only
  double slope_tol_s = 0.05;
  double slope_tol_t = 0.1;
  double ks_max = 0.05;
};

struct SimulateSpec {
  std::size_t path_length = 4096;
  double dt = 1.0;
  std::size_t count = 1;
};

struct ScatterSpec {
  double j1 = 4.0;
  double j2 = 5.0;
  std::size_t path_length = 4096;
  double dt = 1.0;
  std::string input;  // optional CSV; otherwise a simulated path
};

struct ConstantsSpec {
  int max_ell = 16;
  int m = 8;
};

struct DiagramsSpec {
  std::vector<int> orders{1, 1, 1, 1};
  // Row-major p x p correlation matrix; empty means ρ on every off-diagonal.
  std::vector<double> correlation;
  double rho = 0.5;
  bool list = false;
  std::size_t max_vertices = 20;
};

struct FitSpec {
  std::string input;
  double dt = 1.0;
  std::size_t segment_length = 0;
  std::size_t max_lag = 256;
  std::size_t bootstrap = 200;
};

struct RunConfig {
  std::string subcommand;
  std::string preset;
  std::uint64_t seed = 1;
  int workers = 0;
  std::string out = "scatlimit_out";
  SpectralModelParams model = [] {
    SpectralModelParams p;
    p.band = 3.141592653589793;
    p.normalize = true;
    return p;
  }();
  WaveletSpec wavelet;
  SubordinatorSpec subordinator;
  CampaignSpec campaign;
  SimulateSpec simulate;
  ScatterSpec scatter;
  ConstantsSpec constants;
  DiagramsSpec diagrams;
  FitSpec fit;

  SpectralModel build_model() const;
};

nlohmann::json to_json(const RunConfig& c);
// Strict: unknown keys and wrong types raise UsageError naming the key path.
// Keys absent from `j` keep their value from `base`.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});
// FNV-1a over the canonical JSON with `workers` and `out` removed.
std::uint64_t config_hash(const RunConfig& c);
std::string hash_hex(std::uint64_t h);

struct Preset {
  std::string name;
  std::string description;
  std::string anchor;
  RunConfig config;
};
const std::vector<Preset>& presets();
const Preset& find_preset(const std::string& name);

// Entry point for the command-line tool; returns 0, 1 (envelope failure) or
// 2 (usage error).
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace scatlimit
