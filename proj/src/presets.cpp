#include <numbers>

#include "scatlimit/cli_io.hpp"
#include "scatlimit/errors.hpp"

namespace scatlimit {

namespace {

RunConfig figure_base(bool short_range, double ratio) {
  RunConfig c;
  c.subcommand = "validate";
  c.model = {};
  c.model.band = 36.0;
  c.model.one_sided_band = true;
  c.model.normalize = true;
  if (short_range) {
    c.model.beta = 1.0;
    c.model.short_range = true;
    c.model.envelope.kind = EnvelopeKind::lorentzian;
  } else {
    c.model.beta = 0.1;
  }
  c.wavelet.kind = "daubechies";
  c.wavelet.vanishing_moments = 8;
  c.subordinator.kind = "hermite_sum";
  c.subordinator.coeffs = {0, 1, 1, 1};
  auto& k = c.campaign;
  k.kind = "assumption5";
  k.j1 = {1, 2, 3, 4, 5, 6, 7, 8};
  k.ratio = ratio;
  k.dt = 1.0 / 16.0;
  k.path_length = std::size_t{1} << 18;
  k.replicates = 200;
  k.time_average = true;
  k.assert_envelope = !short_range;
  return c;
}

RunConfig limit_base(const std::string& kind) {
  RunConfig c;
  c.subcommand = "validate";
  c.model.beta = 0.3;
  c.model.band = std::numbers::pi;
  c.model.normalize = true;
  auto& k = c.campaign;
  k.kind = kind;
  k.j1 = {4, 6, 8, 10};
  k.ratio = 1.2;
  k.t_points = {0, 1, 2};
  k.replicates = 2000;
  k.path_length = std::size_t{1} << 17;
  return c;
}

RunConfig constants_base(double beta) {
  RunConfig c;
  c.subcommand = "constants";
  c.model.beta = beta;
  c.model.band = std::numbers::pi;
  c.model.normalize = false;
  return c;
}

std::vector<Preset> build() {
  std::vector<Preset> out;
  auto add = [&](std::string name, std::string desc, std::string anchor, RunConfig c) {
    c.preset = name;
    out.push_back({std::move(name), std::move(desc), std::move(anchor), std::move(c)});
  };
  add("figure4a", "E[D^2] and E[D~^2] along j1 for X = He1+He2+He3 of a beta=0.1 process, db8, j2 = j1",
      "Figure 4, j₂(j₁)=j₁", figure_base(false, 1.0));
  add("figure4b", "as figure4a with j2 = 1.1 j1", "Figure 4, j₂(j₁)=1.1j₁", figure_base(false, 1.1));
  add("figure5a", "as figure4a for the short-range density (1+l^2)^-1 on (0,36); descriptive only",
      "Figure 5, j₂(j₁)=j₁", figure_base(true, 1.0));
  add("figure5b", "as figure5a with j2 = 1.1 j1; descriptive only", "Figure 5, j₂(j₁)=1.1j₁",
      figure_base(true, 1.1));
  add("prop33", "Gaussian input, beta=0.3, r=1.2: covariance and marginal law of the rescaled second layer",
      "Gaussian limit process V of the rescaled second layer", limit_base("fdd"));
  {
    auto c = limit_base("theorem");
    c.subordinator.kind = "laplace";
    add("thm34", "Laplace-subordinated input, beta=0.3, r=1.2: marginal law against |C1| |V|",
        "double scaling limit |C_{A,1}||V| of the second-order transform", c);
  }
  {
    RunConfig c;
    c.subcommand = "validate";
    c.model.beta = 0.3;
    c.model.band = std::numbers::pi;
    c.model.normalize = true;
    c.subordinator.kind = "hermite_sum";
    c.subordinator.coeffs = {0, 1, 1};
    auto& k = c.campaign;
    k.kind = "variance_scaling";
    k.j1 = {4, 5, 6, 7, 8, 9, 10};
    k.j2 = k.j1;
    k.replicates = 200;
    k.path_length = std::size_t{1} << 16;
    k.time_average = true;
    add("rates", "log2-slopes of Var S and Var T along j1 against the beta-regime prediction",
        "first-layer variance rates of S and T", c);
  }
  add("mexhat-beta05", "sigma^2, gamma_l and kappa for the Mexican hat with f = |l|^-0.5 on (-pi, pi)",
      "sigma^2 = Γ(2.25) for the Mexican hat", constants_base(0.5));
  {
    auto c = constants_base(0.5);
    c.wavelet.kind = "power_band";
    c.wavelet.p = 0.25;
    c.wavelet.hi = 1.0;
    add("rectangle-beta05", "flat weighted spectrum |psi^|^2 f = 1 on [-1,1]: gamma_2 = 1/2, gamma_4 = 1/3",
        "sinc² correlation, γ₂ = 1/2", c);
  }
  return out;
}

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = build();
  return all;
}

const Preset& find_preset(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  throw UsageError("preset", "unknown preset '" + name + "' (see list-presets)");
}

}  // namespace scatlimit
