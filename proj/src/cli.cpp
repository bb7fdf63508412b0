#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "scatlimit/cli_io.hpp"
#include "scatlimit/errors.hpp"
#include "scatlimit/estimation_ingest.hpp"
#include "scatlimit/gaussian_simulator.hpp"
#include "scatlimit/limit_theory.hpp"
#include "scatlimit/mc_validation.hpp"
#include "scatlimit/wick_diagrams.hpp"

namespace scatlimit {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json num_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json estimate_json(const Estimate& e) { return {{"value", num_json(e.value)}, {"se", num_json(e.se)}, {"exact", e.exact}}; }

class Artifacts {
 public:
  explicit Artifacts(const RunConfig& c) : cfg_(c), hash_(hash_hex(config_hash(c))) {
    std::error_code ec;
    fs::create_directories(c.out, ec);
    if (ec) throw UsageError("--out", "cannot create directory " + c.out + ": " + ec.message());
  }

  // Header comment with the config hash, then a column header with units.
  void csv(const std::string& name, const std::vector<std::string>& columns,
           const std::vector<std::vector<double>>& rows) const {
    std::ofstream f(path(name));
    f << "# config_hash=" << hash_ << " seed=" << cfg_.seed << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) f << (i ? "," : "") << columns[i];
    f << "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) f << (i ? "," : "") << num(r[i]);
      f << "\n";
    }
  }

  json write_json(const std::string& name, json body, const std::string& kind) const {
    body["kind"] = kind;
    body["config_hash"] = hash_;
    body["seed"] = cfg_.seed;
    body["config"] = to_json(cfg_);
    body["config"].erase("workers");
    body["config"].erase("out");
    std::ofstream(path(name)) << body.dump(2) << "\n";
    return body;
  }

  std::string path(const std::string& name) const { return (fs::path(cfg_.out) / name).string(); }

 private:
  const RunConfig& cfg_;
  std::string hash_;
};

Campaign make_campaign(const RunConfig& c) {
  Campaign k;
  k.name = c.preset.empty() ? c.campaign.kind : c.preset;
  k.model = c.build_model();
  k.subordinator = c.subordinator.build();
  k.wavelet = c.wavelet.build();
  k.j1_grid = c.campaign.j1;
  k.ratio = c.campaign.ratio;
  k.j2_grid = c.campaign.j2;
  k.rounding = c.campaign.rounding;
  k.replicates = c.campaign.replicates;
  k.path_length = c.campaign.path_length;
  k.dt = c.campaign.dt;
  k.seed = c.seed;
  k.t_points = c.campaign.t_points;
  k.time_average = c.campaign.time_average;
  k.counterexample = c.campaign.counterexample;
  k.workers = c.workers;
  return k;
}

struct Check {
  std::string name;
  bool pass;
  json detail;
};

json checks_json(const std::vector<Check>& checks) {
  json a = json::array();
  for (const auto& c : checks) a.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  return a;
}

int cmd_simulate(const RunConfig& c, std::ostream& out) {
  const auto model = c.build_model();
  const auto a = c.subordinator.build();
  SpectralSynthesizer synth(model, c.simulate.path_length, c.simulate.dt);
  std::vector<SampledPath> paths;
  for (std::size_t i = 0; i < c.simulate.count; ++i) paths.push_back(apply(a, synth.generate(c.seed, i)));
  Artifacts art(c);
  std::vector<std::string> cols{"t_time_units"};
  for (std::size_t i = 0; i < paths.size(); ++i) cols.push_back("x_" + std::to_string(i));
  std::vector<std::vector<double>> rows(c.simulate.path_length);
  for (std::size_t n = 0; n < rows.size(); ++n) {
    rows[n].push_back(static_cast<double>(n) * c.simulate.dt);
    for (const auto& p : paths) rows[n].push_back(p.values[n]);
  }
  art.csv("simulate.csv", cols, rows);
  json s = {{"model", model.describe()},
            {"subordinator", a.name()},
            {"path_length", c.simulate.path_length},
            {"dt", c.simulate.dt},
            {"count", c.simulate.count},
            {"gaussian_variance", synth.variance()},
            {"model_hash", hash_hex(model_hash(model))}};
  out << art.write_json("simulate.json", s, "simulate").dump(2) << "\n";
  return 0;
}

int cmd_scatter(const RunConfig& c, std::ostream& out) {
  const auto w = c.wavelet.build();
  SampledPath x;
  if (!c.scatter.input.empty()) {
    const auto d = load_csv(c.scatter.input, c.scatter.dt);
    x.values = d.segments.front();
    x.dt = d.dt;
    x.valid_begin = 0;
    x.valid_end = x.values.size();
  } else {
    SpectralSynthesizer synth(c.build_model(), c.scatter.path_length, c.scatter.dt);
    x = apply(c.subordinator.build(), synth.generate(c.seed, 0));
  }
  const auto u1 = first_order(x, w, c.scatter.j1);
  const auto u2 = cwt(u1, w, c.scatter.j2);
  Artifacts art(c);
  std::vector<std::vector<double>> rows;
  for (std::size_t n = u2.valid_begin; n < u2.valid_end; ++n)
    rows.push_back({static_cast<double>(n) * x.dt, x.values[n], u1.values[n], std::abs(u2.values[n])});
  art.csv("scatter.csv", {"t_time_units", "x", "first_order", "second_order"}, rows);
  std::vector<double> a1(u1.values.begin() + u1.valid_begin, u1.values.begin() + u1.valid_end);
  std::vector<double> a2;
  for (const auto& r : rows) a2.push_back(r[3]);
  json s = {{"wavelet", w.name()},
            {"j1", c.scatter.j1},
            {"j2", c.scatter.j2},
            {"samples", x.size()},
            {"valid_begin", u2.valid_begin},
            {"valid_end", u2.valid_end},
            {"first_order_mean", stats::mean(a1)},
            {"second_order_mean", a2.empty() ? json(nullptr) : json(stats::mean(a2))}};
  out << art.write_json("scatter.json", s, "scatter").dump(2) << "\n";
  return 0;
}

int cmd_constants(const RunConfig& c, std::ostream& out) {
  const auto model = c.build_model();
  const auto w = c.wavelet.build();
  const auto lc = limit_constants(model, w, std::max(c.constants.m, c.constants.max_ell / 2));
  const auto window = model.long_range() ? json::array({coupling_window(model.beta()).first,
                                                        coupling_window(model.beta()).second})
                                         : json(nullptr);
  json gammas = json::array();
  for (std::size_t k = 0; k < lc.gammas.size() && static_cast<int>(2 * k + 2) <= c.constants.max_ell; ++k)
    gammas.push_back({{"ell", 2 * k + 2}, {"value", lc.gammas[k]}});
  const auto km = kappa(lc.sigma2, lc.gammas, abs_hermite_coeffs(2 * c.constants.m), c.constants.m);
  json s = {{"model", model.describe()},
            {"wavelet", w.name()},
            {"sigma2", lc.sigma2},
            {"gammas", gammas},
            {"gamma_increment", lc.gamma_increment},
            {"gamma_cells", lc.gamma_cells},
            {"kappa", km.kappa},
            {"kappa_truncation", km.truncation},
            {"truncation_tail", km.tail_bound},
            {"wavelet_l2", lc.wavelet_l2},
            {"limit_variance", km.kappa * km.kappa * lc.wavelet_l2},
            {"coupling_window", window}};
  Artifacts art(c);
  out << art.write_json("constants.json", s, "constants").dump(2) << "\n";
  return 0;
}

int cmd_diagrams(const RunConfig& c, std::ostream& out) {
  const auto& d = c.diagrams;
  const std::size_t p = d.orders.size();
  DiagramOptions opts;
  opts.max_vertices = static_cast<int>(d.max_vertices);
  CorrelationMatrix cov{p, d.correlation};
  if (cov.values.empty()) {
    cov.values.assign(p * p, d.rho);
    for (std::size_t i = 0; i < p; ++i) cov.values[i * p + i] = 1.0;
  }
  const auto tally = tally_diagrams(d.orders, opts);
  const double moment = hermite_moment_parallel(d.orders, cov, opts);
  json s = {{"orders", d.orders},
            {"correlation", cov.values},
            {"total", tally.total},
            {"regular", tally.regular},
            {"non_regular", tally.non_regular()},
            {"moment", moment}};
  if (d.list) {
    json list = json::array();
    for_each_diagram(
        d.orders,
        [&](const Diagram& g) {
          json edges = json::array();
          for (auto [u, v] : g.edges) edges.push_back({u, v});
          list.push_back({{"edges", edges}, {"regular", g.regular}});
        },
        opts);
    s["diagrams"] = list;
  }
  Artifacts art(c);
  out << art.write_json("diagrams.json", s, "diagrams").dump(2) << "\n";
  return 0;
}

int cmd_validate(const RunConfig& c, std::ostream& out) {
  const auto& spec = c.campaign;
  const Campaign k = make_campaign(c);
  Artifacts art(c);
  const std::string stem = c.preset.empty() ? spec.kind : c.preset;
  std::vector<Check> checks;
  json s = {{"campaign", spec.kind}, {"name", stem}, {"replicates", spec.replicates}};
  const bool assert_env = spec.assert_envelope;

  if (spec.kind == "assumption5") {
    const auto r = assumption5_ratio(k);
    std::vector<std::vector<double>> rows;
    json jr = json::array();
    for (const auto& row : r.rows) {
      rows.push_back({row.j1, row.j2, row.ed2.value, row.ed2.se, row.edt2.value, row.edt2.se, row.ratio.value,
                      row.ratio.se, row.ratio.exact ? 1.0 : 0.0});
      jr.push_back({{"j1", row.j1}, {"j2", row.j2}, {"ed2", estimate_json(row.ed2)}, {"edt2", estimate_json(row.edt2)},
                    {"ratio", estimate_json(row.ratio)}});
    }
    art.csv(stem + ".csv", {"j1", "j2", "ed2", "ed2_se", "edt2", "edt2_se", "ratio", "ratio_se", "exact"}, rows);
    s["rows"] = jr;
    s["max_ratio"] = num_json(r.max_ratio);
    s["degenerate"] = r.degenerate;
    if (assert_env) {
      checks.push_back({"E[D^2] decays in j1", r.d_decays, nullptr});
      checks.push_back({"E[D~^2] decays in j1", r.dt_decays, nullptr});
      checks.push_back({"max ratio finite", !r.degenerate && std::isfinite(r.max_ratio), num_json(r.max_ratio)});
    }
  } else if (spec.kind == "variance_scaling") {
    const auto r = variance_scaling(k);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < r.j1.size(); ++i)
      rows.push_back({r.j1[i], r.var_s[i].value, r.var_s[i].se, r.var_t[i].value, r.var_t[i].se});
    art.csv(stem + ".csv", {"j1", "var_s", "var_s_se", "var_t", "var_t_se"}, rows);
    s["s_slope"] = {{"value", r.s_fit.slope}, {"se", r.s_fit.slope_se}, {"predicted", r.predicted_s_slope}};
    s["t_slope"] = {{"value", r.t_fit.slope}, {"se", r.t_fit.slope_se}, {"predicted", r.predicted_t_slope}};
    if (assert_env) {
      checks.push_back({"Var S slope", std::abs(r.s_fit.slope - r.predicted_s_slope) <= spec.slope_tol_s,
                        {{"slope", r.s_fit.slope}, {"tolerance", spec.slope_tol_s}}});
      checks.push_back({"Var T slope", std::abs(r.t_fit.slope - r.predicted_t_slope) <= spec.slope_tol_t,
                        {{"slope", r.t_fit.slope}, {"tolerance", spec.slope_tol_t}}});
    }
  } else if (spec.kind == "fdd" || spec.kind == "theorem") {
    const auto lc = limit_constants(k.model, k.wavelet);
    s["kappa"] = lc.kappa;
    s["limit_variance"] = lc.limit_variance();
    std::vector<std::vector<double>> rows;
    json jr = json::array();
    double terminal_ks = 0.0;
    if (spec.kind == "fdd") {
      const auto r = fdd_convergence(k, lc);
      bool psd = true;
      for (const auto& row : r.rows) {
        const double ks = *std::max_element(row.ks.begin(), row.ks.end());
        const double pks = row.pair_ks.empty() ? 0.0 : *std::max_element(row.pair_ks.begin(), row.pair_ks.end());
        rows.push_back({row.j1, row.j2, row.rel_error.value, row.rel_error.se, ks, pks, row.ks_critical,
                        row.psd ? 1.0 : 0.0});
        jr.push_back({{"j1", row.j1}, {"j2", row.j2}, {"covariance", row.covariance}, {"target", row.target},
                      {"rel_error", estimate_json(row.rel_error)}, {"ks", row.ks}, {"pair_ks", row.pair_ks},
                      {"ks_critical", row.ks_critical}, {"psd", row.psd}});
        psd = psd && row.psd;
        terminal_ks = ks;
      }
      art.csv(stem + ".csv",
              {"j1", "j2", "rel_error", "rel_error_se", "ks_max", "pair_ks_max", "ks_critical", "psd"}, rows);
      if (assert_env) {
        checks.push_back({"covariance error decreases", r.rel_error_decreasing, nullptr});
        checks.push_back({"terminal marginal KS", terminal_ks < spec.ks_max,
                          {{"ks", terminal_ks}, {"threshold", spec.ks_max}}});
        checks.push_back({"covariances PSD", psd, nullptr});
      }
    } else {
      const auto r = theorem_convergence(k, lc);
      for (const auto& row : r.rows) {
        const double ks = *std::max_element(row.ks.begin(), row.ks.end());
        rows.push_back({row.j1, row.j2, ks, row.mean.value, row.mean.se, row.second_moment.value,
                        row.second_moment.se, row.variance_ratio.value});
        jr.push_back({{"j1", row.j1}, {"j2", row.j2}, {"ks", row.ks}, {"mean", estimate_json(row.mean)},
                      {"second_moment", estimate_json(row.second_moment)},
                      {"variance_ratio", estimate_json(row.variance_ratio)}});
        terminal_ks = ks;
      }
      art.csv(stem + ".csv",
              {"j1", "j2", "ks_max", "mean", "mean_se", "second_moment", "second_moment_se", "variance_ratio"},
              rows);
      s["c1"] = r.c1;
      s["target_scale"] = r.target_scale;
      s["target_mean"] = r.target_mean;
      s["variance_trend"] = r.variance_trend;
      if (assert_env) {
        if (spec.counterexample)
          checks.push_back({"rescaled variance monotone", r.variance_monotone, r.variance_trend});
        else
          checks.push_back({"terminal folded-normal KS", terminal_ks < spec.ks_max,
                            {{"ks", terminal_ks}, {"threshold", spec.ks_max}}});
      }
    }
    s["rows"] = jr;
  } else if (spec.kind == "prop31") {
    const auto r = prop31_decay(k);
    std::vector<std::vector<double>> rows;
    for (const auto& row : r.rows)
      rows.push_back({row.j1, row.j2, row.normalized.value, row.normalized.se, row.envelope,
                      row.below_envelope ? 1.0 : 0.0});
    art.csv(stem + ".csv", {"j1", "j2", "normalized", "normalized_se", "envelope", "below_envelope"}, rows);
    s["fitted_constant"] = num_json(r.fitted_constant);
    s["identically_zero"] = r.identically_zero;
    if (assert_env && !r.identically_zero) {
      checks.push_back({"normalized E[D^2] decreasing", r.decreasing, nullptr});
      checks.push_back({"terminal value below envelope", r.rows.back().below_envelope, nullptr});
    }
  } else if (spec.kind == "dominance") {
    std::vector<std::vector<double>> rows;
    std::vector<Estimate> probs;
    for (double j1 : spec.j1) {
      const auto r = dominance_probability(k.model, k.subordinator, k.wavelet, j1, spec.points, spec.replicates,
                                           c.seed, spec.path_length, spec.dt, c.workers);
      rows.push_back({j1, r.probability.value, r.probability.se, static_cast<double>(r.trials)});
      probs.push_back(r.probability);
    }
    art.csv(stem + ".csv", {"j1", "probability", "probability_se", "trials"}, rows);
    if (assert_env) checks.push_back({"P(|S|<|T|) decays", decreasing_up_to_noise(probs), nullptr});
  }

  bool pass = true;
  for (const auto& ch : checks) pass = pass && ch.pass;
  s["checks"] = checks_json(checks);
  s["pass"] = pass;
  s["csv"] = stem + ".csv";
  out << art.write_json(stem + ".json", s, "validate").dump(2) << "\n";
  return pass ? 0 : 1;
}

int cmd_fit(const RunConfig& c, std::ostream& out) {
  if (c.fit.input.empty()) throw UsageError("fit.input", "no input CSV given");
  const auto data = load_csv(c.fit.input, c.fit.dt, c.fit.segment_length);
  HurstOptions opts;
  opts.bootstrap = c.fit.bootstrap;
  opts.seed = c.seed;
  opts.workers = c.workers;
  const auto m = fit_model(data, opts, c.fit.max_lag);
  Artifacts art(c);
  std::vector<std::vector<double>> a_rows, s_rows, r_rows;
  for (int i = -400; i <= 400; ++i) {
    const double z = i / 100.0;
    a_rows.push_back({z, m.subordinator.map(z)});
  }
  for (std::size_t k = 0; k < m.spectrum.lambda.size(); ++k) s_rows.push_back({m.spectrum.lambda[k], m.spectrum.power[k]});
  for (std::size_t k = 0; k < m.correlation.size(); ++k)
    r_rows.push_back({static_cast<double>(k) * data.dt, m.correlation[k]});
  art.csv("fit_subordinator.csv", {"z", "A_z"}, a_rows);
  art.csv("fit_spectrum.csv", {"lambda_rad_per_time_unit", "periodogram"}, s_rows);
  art.csv("fit_correlation.csv", {"lag_time_units", "correlation"}, r_rows);
  json s = {{"input", c.fit.input},
            {"segments", data.segments.size()},
            {"segment_length", data.segment_length()},
            {"dt", data.dt},
            {"beta", m.hurst.beta},
            {"beta_ci", {m.hurst.ci_low, m.hurst.ci_high}},
            {"slope", {{"value", m.hurst.slope}, {"se", m.hurst.slope_se}}},
            {"frequencies", m.hurst.frequencies},
            {"short_range", m.hurst.short_range}};
  out << art.write_json("fit.json", s, "fit").dump(2) << "\n";
  return 0;
}

int cmd_list(std::ostream& out) {
  for (const auto& p : presets())
    out << p.name << "\t" << p.config.subcommand << "\t" << p.anchor << "\t" << p.description << "\n";
  return 0;
}

// key.path=value, value parsed as JSON when possible and as a string otherwise.
json overlay(const std::vector<std::string>& sets) {
  json patch = json::object();
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--set", "expected key.path=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq), raw = kv.substr(eq + 1);
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::parse_error&) {
      value = raw;
    }
    json* node = &patch;
    std::size_t start = 0;
    while (true) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (dot == std::string::npos) {
        (*node)[part] = value;
        break;
      }
      node = &(*node)[part];
      if (!node->is_object()) *node = json::object();
      start = dot + 1;
    }
  }
  return patch;
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Scattering transform laboratory for subordinated long-range dependent processes", "scatlimit"};
  app.require_subcommand(1);
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out_dir, config_path, preset;
  std::vector<std::string> sets;
  app.option_defaults()->always_capture_default(false);
  app.add_option("--seed", seed, "random seed");
  app.add_option("--workers", workers, "worker threads (0 = all)")->check(CLI::NonNegativeNumber);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--preset", preset, "start from a shipped preset");
  app.add_option("--set", sets, "override a config entry, key.path=value");
  app.fallthrough();

  const std::vector<std::pair<std::string, std::string>> names{
      {"simulate", "synthesize subordinated Gaussian paths"},
      {"scatter", "first and second-order scattering of one path"},
      {"constants", "limit constants sigma^2, gamma_l, kappa"},
      {"diagrams", "complete diagram counts and Hermite moments"},
      {"validate", "run a Monte Carlo campaign and check its envelope"},
      {"fit", "fit subordinator, Hurst index and spectrum to a CSV signal"},
      {"list-presets", "print the preset catalog"}};
  for (const auto& [n, d] : names) app.add_subcommand(n, d)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }
  const std::string sub = app.get_subcommands().front()->get_name();

  try {
    if (sub == "list-presets") return cmd_list(out);
    RunConfig cfg;
    if (preset) cfg = find_preset(*preset).config;
    if (config_path) cfg = load_config(*config_path, cfg);
    if (!sets.empty()) cfg = config_from_json(overlay(sets), cfg);
    if (!cfg.subcommand.empty() && cfg.subcommand != sub)
      throw UsageError("subcommand", "configured for '" + cfg.subcommand + "', invoked as '" + sub + "'");
    cfg.subcommand = sub;
    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;
    if (out_dir) cfg.out = *out_dir;

    if (sub == "simulate") return cmd_simulate(cfg, out);
    if (sub == "scatter") return cmd_scatter(cfg, out);
    if (sub == "constants") return cmd_constants(cfg, out);
    if (sub == "diagrams") return cmd_diagrams(cfg, out);
    if (sub == "validate") return cmd_validate(cfg, out);
    if (sub == "fit") return cmd_fit(cfg, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace scatlimit
