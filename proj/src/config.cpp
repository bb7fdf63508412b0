#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "scatlimit/cli_io.hpp"
#include "scatlimit/errors.hpp"

namespace scatlimit {

using nlohmann::json;

namespace {

const char* to_string(EnvelopeKind k) {
  switch (k) {
    case EnvelopeKind::constant: return "constant";
    case EnvelopeKind::gaussian: return "gaussian";
    case EnvelopeKind::lorentzian: return "lorentzian";
  }
  return "constant";
}

const char* to_string(ExponentConvention c) { return c == ExponentConvention::assumption ? "assumption" : "caption"; }

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Reads keys out of one JSON object and rejects whatever is left over.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw UsageError(path_, "expected an object");
  }
  ~Reader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw UsageError(join(path_, k), "unknown key");
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  std::string path(const std::string& key) const { return join(path_, key); }

  void read(const std::string& key, double& dst) {
    if (auto v = find(key)) {
      if (!v->is_number()) throw UsageError(path(key), "expected a number");
      dst = v->get<double>();
    }
  }
  void read(const std::string& key, bool& dst) {
    if (auto v = find(key)) {
      if (!v->is_boolean()) throw UsageError(path(key), "expected true or false");
      dst = v->get<bool>();
    }
  }
  void read(const std::string& key, std::string& dst) {
    if (auto v = find(key)) {
      if (!v->is_string()) throw UsageError(path(key), "expected a string");
      dst = v->get<std::string>();
    }
  }
  void read(const std::string& key, int& dst) {
    if (auto v = find(key)) {
      if (!v->is_number_integer()) throw UsageError(path(key), "expected an integer");
      dst = v->get<int>();
    }
  }
  void read(const std::string& key, std::size_t& dst) {
    if (auto v = find(key)) {
      if (!v->is_number_integer() || v->get<long long>() < 0)
        throw UsageError(path(key), "expected a non-negative integer");
      dst = v->get<std::size_t>();
    }
  }
  void read(const std::string& key, std::uint64_t& dst, int) {
    if (auto v = find(key)) {
      if (!v->is_number_unsigned()) throw UsageError(path(key), "expected a non-negative integer");
      dst = v->get<std::uint64_t>();
    }
  }
  void read(const std::string& key, std::optional<double>& dst) {
    if (auto v = find(key)) {
      if (v->is_null()) {
        dst.reset();
      } else {
        if (!v->is_number()) throw UsageError(path(key), "expected a number or null");
        dst = v->get<double>();
      }
    }
  }
  template <class T>
  void read(const std::string& key, std::vector<T>& dst) {
    if (auto v = find(key)) {
      if (!v->is_array()) throw UsageError(path(key), "expected an array");
      std::vector<T> out;
      for (std::size_t i = 0; i < v->size(); ++i) {
        const auto& e = (*v)[i];
        const bool ok = std::is_integral_v<T> ? e.is_number_integer() : e.is_number();
        if (!ok) throw UsageError(path(key) + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back(e.get<T>());
      }
      dst = std::move(out);
    }
  }
  template <class E>
  void read_enum(const std::string& key, E& dst, std::initializer_list<std::pair<const char*, E>> names) {
    if (auto v = find(key)) {
      if (v->is_string())
        for (const auto& [n, e] : names)
          if (v->get<std::string>() == n) {
            dst = e;
            return;
          }
      std::string allowed;
      for (const auto& [n, e] : names) allowed += (allowed.empty() ? "" : ", ") + std::string(n);
      throw UsageError(path(key), "expected one of: " + allowed);
    }
  }
  void read_choice(const std::string& key, std::string& dst, std::initializer_list<const char*> names) {
    read(key, dst);
    for (const char* n : names)
      if (dst == n) return;
    std::string allowed;
    for (const char* n : names) allowed += (allowed.empty() ? "" : ", ") + std::string(n);
    throw UsageError(path(key), "'" + dst + "' is not one of: " + allowed);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void check(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw UsageError(path, what);
}

}  // namespace

Wavelet WaveletSpec::build() const {
  if (kind == "mexican_hat") return Wavelet::mexican_hat();
  if (kind == "morlet") return Wavelet::morlet(omega0);
  if (kind == "daubechies") return Wavelet::daubechies(vanishing_moments);
  if (kind == "shannon") return Wavelet::shannon(lo, hi);
  if (kind == "power_band") return Wavelet::power_band(p, hi);
  throw UsageError("wavelet.kind", "unknown wavelet '" + kind + "'");
}

Subordinator SubordinatorSpec::build() const {
  if (kind == "identity") return Subordinator::identity();
  if (kind == "hermite_sum") return Subordinator::hermite_sum(coeffs);
  if (kind == "absolute") return Subordinator::absolute(shift);
  if (kind == "sign") return Subordinator::sign();
  if (kind == "laplace") return subordinator_from_cdf(LaplaceCdf{location, scale});
  if (kind == "gumbel") return subordinator_from_cdf(GumbelCdf{location, scale});
  throw UsageError("subordinator.kind", "unknown subordinator '" + kind + "'");
}

SpectralModel RunConfig::build_model() const {
  try {
    return SpectralModel(model);
  } catch (const InvalidModel& e) {
    throw UsageError("model", e.what());
  }
}

json to_json(const RunConfig& c) {
  json j;
  j["subcommand"] = c.subcommand;
  j["preset"] = c.preset;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["out"] = c.out;
  const auto& m = c.model;
  j["model"] = {{"beta", m.beta},
                {"envelope", {{"kind", to_string(m.envelope.kind)}, {"amplitude", m.envelope.amplitude},
                              {"width", m.envelope.width}}},
                {"band", m.band ? json(*m.band) : json(nullptr)},
                {"one_sided_band", m.one_sided_band},
                {"short_range", m.short_range},
                {"degenerate", m.degenerate},
                {"convention", to_string(m.convention)},
                {"normalize", m.normalize}};
  const auto& w = c.wavelet;
  j["wavelet"] = {{"kind", w.kind}, {"omega0", w.omega0}, {"vanishing_moments", w.vanishing_moments},
                  {"lo", w.lo},     {"hi", w.hi},         {"p", w.p}};
  const auto& s = c.subordinator;
  j["subordinator"] = {{"kind", s.kind}, {"coeffs", s.coeffs}, {"shift", s.shift}, {"location", s.location},
                       {"scale", s.scale}};
  const auto& k = c.campaign;
  j["campaign"] = {{"kind", k.kind},
                   {"j1", k.j1},
                   {"ratio", k.ratio ? json(*k.ratio) : json(nullptr)},
                   {"j2", k.j2},
                   {"rounding", to_string(k.rounding)},
                   {"replicates", k.replicates},
                   {"path_length", k.path_length},
                   {"dt", k.dt},
                   {"t_points", k.t_points},
                   {"time_average", k.time_average},
                   {"counterexample", k.counterexample},
                   {"assert_envelope", k.assert_envelope},
                   {"points", k.points},
                   {"slope_tol_s", k.slope_tol_s},
                   {"slope_tol_t", k.slope_tol_t},
                   {"ks_max", k.ks_max}};
  j["simulate"] = {{"path_length", c.simulate.path_length}, {"dt", c.simulate.dt}, {"count", c.simulate.count}};
  j["scatter"] = {{"j1", c.scatter.j1},
                  {"j2", c.scatter.j2},
                  {"path_length", c.scatter.path_length},
                  {"dt", c.scatter.dt},
                  {"input", c.scatter.input}};
  j["constants"] = {{"max_ell", c.constants.max_ell}, {"m", c.constants.m}};
  j["diagrams"] = {{"orders", c.diagrams.orders},
                   {"correlation", c.diagrams.correlation},
                   {"rho", c.diagrams.rho},
                   {"list", c.diagrams.list},
                   {"max_vertices", c.diagrams.max_vertices}};
  j["fit"] = {{"input", c.fit.input},
              {"dt", c.fit.dt},
              {"segment_length", c.fit.segment_length},
              {"max_lag", c.fit.max_lag},
              {"bootstrap", c.fit.bootstrap}};
  return j;
}

RunConfig config_from_json(const json& j, RunConfig c) {
  Reader root(j, "");
  root.read("subcommand", c.subcommand);
  root.read("preset", c.preset);
  root.read("seed", c.seed, 0);
  root.read("workers", c.workers);
  root.read("out", c.out);
  check(c.workers >= 0, "workers", "must be >= 0");

  if (auto v = root.find("model")) {
    Reader r(*v, "model");
    auto& m = c.model;
    r.read("beta", m.beta);
    if (auto e = r.find("envelope")) {
      Reader re(*e, "model.envelope");
      re.read_enum("kind", m.envelope.kind,
                   {{"constant", EnvelopeKind::constant},
                    {"gaussian", EnvelopeKind::gaussian},
                    {"lorentzian", EnvelopeKind::lorentzian}});
      re.read("amplitude", m.envelope.amplitude);
      re.read("width", m.envelope.width);
      check(m.envelope.amplitude >= 0.0, "model.envelope.amplitude", "must be >= 0");
      check(m.envelope.width > 0.0, "model.envelope.width", "must be > 0");
    }
    r.read("band", m.band);
    r.read("one_sided_band", m.one_sided_band);
    r.read("short_range", m.short_range);
    r.read("degenerate", m.degenerate);
    r.read_enum("convention", m.convention,
                {{"assumption", ExponentConvention::assumption}, {"caption", ExponentConvention::caption}});
    r.read("normalize", m.normalize);
  }
  {
    const auto& m = c.model;
    const bool ok = m.short_range ? (m.beta > 0.0 && m.beta <= 1.0) : (m.beta > 0.0 && m.beta < 1.0);
    check(ok, "model.beta", m.short_range ? "must lie in (0, 1]" : "must lie in (0, 1); set short_range for beta = 1");
    check(!m.band || *m.band > 0.0, "model.band", "must be > 0");
  }

  if (auto v = root.find("wavelet")) {
    Reader r(*v, "wavelet");
    auto& w = c.wavelet;
    r.read_choice("kind", w.kind, {"mexican_hat", "morlet", "daubechies", "shannon", "power_band"});
    r.read("omega0", w.omega0);
    r.read("vanishing_moments", w.vanishing_moments);
    r.read("lo", w.lo);
    r.read("hi", w.hi);
    r.read("p", w.p);
    check(w.vanishing_moments >= 1 && w.vanishing_moments <= 20, "wavelet.vanishing_moments", "must lie in 1..20");
  }
  if (auto v = root.find("subordinator")) {
    Reader r(*v, "subordinator");
    auto& s = c.subordinator;
    r.read_choice("kind", s.kind, {"identity", "hermite_sum", "absolute", "sign", "laplace", "gumbel"});
    r.read("coeffs", s.coeffs);
    r.read("shift", s.shift);
    r.read("location", s.location);
    r.read("scale", s.scale);
    check(s.kind != "hermite_sum" || !s.coeffs.empty(), "subordinator.coeffs", "needs at least one coefficient");
    check(s.scale > 0.0, "subordinator.scale", "must be > 0");
  }
  if (auto v = root.find("campaign")) {
    Reader r(*v, "campaign");
    auto& k = c.campaign;
    r.read_choice("kind", k.kind, {"assumption5", "variance_scaling", "fdd", "theorem", "prop31", "dominance"});
    r.read("j1", k.j1);
    r.read("ratio", k.ratio);
    r.read("j2", k.j2);
    r.read_enum("rounding", k.rounding,
                {{"none", CouplingRounding::none},
                 {"nearest", CouplingRounding::nearest},
                 {"floor", CouplingRounding::floor},
                 {"ceil", CouplingRounding::ceil}});
    r.read("replicates", k.replicates);
    r.read("path_length", k.path_length);
    r.read("dt", k.dt);
    r.read("t_points", k.t_points);
    r.read("time_average", k.time_average);
    r.read("counterexample", k.counterexample);
    r.read("assert_envelope", k.assert_envelope);
    r.read("points", k.points);
    r.read("slope_tol_s", k.slope_tol_s);
    r.read("slope_tol_t", k.slope_tol_t);
    r.read("ks_max", k.ks_max);
    check(!k.j1.empty(), "campaign.j1", "must not be empty");
    check(k.dt > 0.0, "campaign.dt", "must be > 0");
  }
  if (auto v = root.find("simulate")) {
    Reader r(*v, "simulate");
    r.read("path_length", c.simulate.path_length);
    r.read("dt", c.simulate.dt);
    r.read("count", c.simulate.count);
    check(c.simulate.dt > 0.0, "simulate.dt", "must be > 0");
  }
  if (auto v = root.find("scatter")) {
    Reader r(*v, "scatter");
    r.read("j1", c.scatter.j1);
    r.read("j2", c.scatter.j2);
    r.read("path_length", c.scatter.path_length);
    r.read("dt", c.scatter.dt);
    r.read("input", c.scatter.input);
    check(c.scatter.dt > 0.0, "scatter.dt", "must be > 0");
  }
  if (auto v = root.find("constants")) {
    Reader r(*v, "constants");
    r.read("max_ell", c.constants.max_ell);
    r.read("m", c.constants.m);
    check(c.constants.max_ell >= 2 && c.constants.max_ell % 2 == 0, "constants.max_ell", "must be even and >= 2");
    check(c.constants.m >= 1, "constants.m", "must be >= 1");
  }
  if (auto v = root.find("diagrams")) {
    Reader r(*v, "diagrams");
    r.read("orders", c.diagrams.orders);
    r.read("correlation", c.diagrams.correlation);
    r.read("rho", c.diagrams.rho);
    r.read("list", c.diagrams.list);
    r.read("max_vertices", c.diagrams.max_vertices);
    const auto p = c.diagrams.orders.size();
    check(c.diagrams.correlation.empty() || c.diagrams.correlation.size() == p * p, "diagrams.correlation",
          "must hold orders.size()^2 entries");
  }
  if (auto v = root.find("fit")) {
    Reader r(*v, "fit");
    r.read("input", c.fit.input);
    r.read("dt", c.fit.dt);
    r.read("segment_length", c.fit.segment_length);
    r.read("max_lag", c.fit.max_lag);
    r.read("bootstrap", c.fit.bootstrap);
    check(c.fit.dt > 0.0, "fit.dt", "must be > 0");
  }
  return c;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw UsageError("--config", "cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("--config", std::string("invalid JSON: ") + e.what());
  }
  return config_from_json(j, std::move(base));
}

std::uint64_t config_hash(const RunConfig& c) {
  json j = to_json(c);
  j.erase("workers");
  j.erase("out");
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace scatlimit
