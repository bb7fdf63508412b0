#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "scatlimit/cli_io.hpp"
#include "scatlimit/errors.hpp"
#include "scatlimit/gaussian_simulator.hpp"

using namespace scatlimit;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "scatlimit");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string tmpdir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("scatlimit_cli_" + name);
  fs::remove_all(p);
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

json read_json(const std::string& path) { return json::parse(slurp(path)); }

bool has_type(const json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "integer") return v.is_number_integer();
  if (t == "number") return v.is_number();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  return false;
}

// The subset of JSON Schema used by the shipped schema files.
void conform(const json& v, const json& s, const std::string& path) {
  if (s.contains("type")) {
    bool ok = false;
    if (s["type"].is_array()) {
      for (const auto& t : s["type"]) ok = ok || has_type(v, t.get<std::string>());
    } else {
      ok = has_type(v, s["type"].get<std::string>());
    }
    INFO(path);
    REQUIRE(ok);
  }
  if (s.contains("pattern") && v.is_string()) {
    INFO(path);
    CHECK(std::regex_match(v.get<std::string>(), std::regex(s["pattern"].get<std::string>())));
  }
  if (v.is_object()) {
    for (const auto& r : s.value("required", json::array())) {
      INFO(path << "." << r.get<std::string>());
      CHECK(v.contains(r.get<std::string>()));
    }
    if (s.contains("properties"))
      for (const auto& [k, sub] : s["properties"].items())
        if (v.contains(k)) conform(v[k], sub, path + "." + k);
  }
  if (v.is_array() && s.contains("items"))
    for (std::size_t i = 0; i < v.size(); ++i) conform(v[i], s["items"], path + "[" + std::to_string(i) + "]");
}

void check_schema(const std::string& file, const std::string& kind) {
  const auto schema = read_json(std::string(SCATLIMIT_SOURCE_DIR) + "/schemas/" + kind + ".schema.json");
  conform(read_json(file), schema, kind);
}

void check_csv_header(const std::string& file) {
  std::ifstream f(file);
  std::string first, second;
  std::getline(f, first);
  std::getline(f, second);
  CHECK(first.rfind("# config_hash=", 0) == 0);
  CHECK(second.find(',') != std::string::npos);
  CHECK(second.find_first_of("0123456789") != 0);
}

}  // namespace

TEST_CASE("preset catalog", "[cli]") {
  REQUIRE_FALSE(presets().empty());
  const auto& p = find_preset("figure4b");
  CHECK(p.anchor == "Figure 4, j₂(j₁)=1.1j₁");
  for (const char* name : {"figure4a", "figure4b", "figure5a", "figure5b", "prop33", "thm34", "rates",
                           "mexhat-beta05", "rectangle-beta05"})
    CHECK_NOTHROW(find_preset(name));
  CHECK_THROWS_AS(find_preset("nope"), UsageError);
  auto r = cli({"list-presets"});
  CHECK(r.code == 0);
  CHECK(r.out.find("figure4b") != std::string::npos);
}

TEST_CASE("every preset round-trips through serialization", "[cli]") {
  for (const auto& p : presets()) {
    INFO(p.name);
    const json j = to_json(p.config);
    const RunConfig back = config_from_json(j);
    CHECK(to_json(back) == j);
    CHECK(config_hash(back) == config_hash(p.config));
    CHECK_NOTHROW(p.config.build_model());
    CHECK_NOTHROW(p.config.wavelet.build());
    CHECK_NOTHROW(p.config.subordinator.build());
  }
}

TEST_CASE("config hash ignores workers and output directory", "[cli]") {
  RunConfig a;
  RunConfig b = a;
  b.workers = 7;
  b.out = "/elsewhere";
  CHECK(config_hash(a) == config_hash(b));
  b.seed = 2;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(hash_hex(0xabcULL) == "0000000000000abc");
}

TEST_CASE("strict parsing names the key path", "[cli]") {
  auto path_of = [](const json& j) {
    try {
      config_from_json(j);
    } catch (const UsageError& e) {
      return e.key_path();
    }
    return std::string("<none>");
  };
  CHECK(path_of({{"model", {{"beta", 1.5}}}}) == "model.beta");
  CHECK(path_of({{"model", {{"envelope", {{"shape", 1}}}}}}) == "model.envelope.shape");
  CHECK(path_of({{"campaign", {{"replicates", "many"}}}}) == "campaign.replicates");
  CHECK(path_of({{"campaign", {{"j1", {4, "x"}}}}}) == "campaign.j1[1]");
  CHECK(path_of({{"wavelet", {{"kind", "haar"}}}}) == "wavelet.kind");
  CHECK(path_of({{"extra", 1}}) == "extra");
  CHECK(path_of({{"model", {{"beta", 1.0}, {"short_range", true}}}}) == "<none>");
}

TEST_CASE("usage errors exit with 2", "[cli]") {
  const auto dir = tmpdir("usage");
  fs::create_directories(dir);
  std::ofstream(dir + "/bad.json") << R"({"model": {"beta": 1.5}})";
  auto r = cli({"constants", "--config", dir + "/bad.json", "--out", dir});
  CHECK(r.code == 2);
  CHECK(r.err.find("model.beta") != std::string::npos);
  CHECK(cli({"constants", "--set", "model.beta=1.5"}).code == 2);
  CHECK(cli({"validate", "--preset", "mexhat-beta05"}).code == 2);
  CHECK(cli({"constants", "--preset", "missing"}).code == 2);
  CHECK(cli({}).code == 2);
  CHECK(cli({"constants", "--workers", "-1"}).code == 2);
  std::ofstream(dir + "/broken.json") << "{";
  CHECK(cli({"constants", "--config", dir + "/broken.json"}).code == 2);
}

TEST_CASE("constants subcommand", "[cli]") {
  const auto dir = tmpdir("constants");
  auto r = cli({"constants", "--preset", "mexhat-beta05", "--out", dir});
  REQUIRE(r.code == 0);
  const auto j = read_json(dir + "/constants.json");
  CHECK_THAT(j["sigma2"].get<double>(), Catch::Matchers::WithinAbs(std::tgamma(2.25), 1e-6));
  CHECK(j["config_hash"].get<std::string>().size() == 16);
  check_schema(dir + "/constants.json", "constants");
  CHECK(json::parse(r.out)["sigma2"] == j["sigma2"]);
}

TEST_CASE("simulate, scatter and diagrams write artifacts", "[cli]") {
  const auto dir = tmpdir("misc");
  REQUIRE(cli({"simulate", "--out", dir, "--set", "simulate.path_length=1024", "--set", "simulate.count=2"}).code == 0);
  check_csv_header(dir + "/simulate.csv");
  check_schema(dir + "/simulate.json", "simulate");
  REQUIRE(cli({"scatter", "--out", dir, "--set", "scatter.j1=3", "--set", "scatter.j2=4"}).code == 0);
  check_csv_header(dir + "/scatter.csv");
  check_schema(dir + "/scatter.json", "scatter");
  REQUIRE(cli({"diagrams", "--out", dir, "--set", "diagrams.orders=[2,2]", "--set", "diagrams.rho=0.5",
               "--set", "diagrams.list=true"})
              .code == 0);
  const auto d = read_json(dir + "/diagrams.json");
  CHECK(d["total"] == 2);
  CHECK_THAT(d["moment"].get<double>(), Catch::Matchers::WithinAbs(0.5, 1e-15));
  check_schema(dir + "/diagrams.json", "diagrams");
}

TEST_CASE("fit subcommand on a synthetic CSV", "[cli]") {
  const auto dir = tmpdir("fit");
  fs::create_directories(dir);
  SpectralModelParams p;
  p.beta = 0.5;
  p.band = 3.141592653589793;
  p.normalize = true;
  SpectralSynthesizer synth{SpectralModel(p), 2048, 1.0};
  std::vector<SampledPath> paths;
  for (int s = 0; s < 4; ++s) paths.push_back(synth.generate(5, s));
  {
    std::ofstream f(dir + "/signal.csv");
    for (std::size_t n = 0; n < 2048; ++n)
      f << paths[0].values[n] << "," << paths[1].values[n] << "," << paths[2].values[n] << "," << paths[3].values[n]
        << "\n";
  }
  auto r = cli({"fit", "--out", dir, "--set", "fit.input=" + dir + "/signal.csv"});
  REQUIRE(r.code == 0);
  check_schema(dir + "/fit.json", "fit");
  check_csv_header(dir + "/fit_subordinator.csv");
  CHECK(cli({"fit", "--out", dir}).code == 2);
}

TEST_CASE("validate is deterministic across worker counts", "[cli]") {
  const std::vector<std::string> small{"--set", "campaign.replicates=30", "--set", "campaign.j1=[5,6]",
                                       "--set", "campaign.path_length=65536", "--seed", "7"};
  auto run = [&](const std::string& dir, const std::string& workers) {
    std::vector<std::string> a{"validate", "--preset", "figure4b", "--out", dir, "--workers", workers};
    a.insert(a.end(), small.begin(), small.end());
    return cli(a);
  };
  const auto d1 = tmpdir("det1"), d2 = tmpdir("det2");
  const auto r1 = run(d1, "1");
  const auto r2 = run(d2, "2");
  REQUIRE(r1.code != 2);
  CHECK(r1.code == r2.code);
  CHECK(slurp(d1 + "/figure4b.csv") == slurp(d2 + "/figure4b.csv"));
  CHECK(slurp(d1 + "/figure4b.json") == slurp(d2 + "/figure4b.json"));
  check_schema(d1 + "/figure4b.json", "validate");
  check_csv_header(d1 + "/figure4b.csv");
}

TEST_CASE("envelope failure exits with 1", "[cli]") {
  const auto dir = tmpdir("envelope");
  const std::vector<std::string> base{"validate", "--preset", "rates", "--out", dir, "--set", "campaign.replicates=30",
                                      "--set", "campaign.j1=[4,5,6]", "--set", "campaign.j2=[4,5,6]",
                                      "--set", "campaign.path_length=16384"};
  auto strict = base;
  strict.insert(strict.end(), {"--set", "campaign.slope_tol_s=0", "--set", "campaign.slope_tol_t=0"});
  CHECK(cli(strict).code == 1);
  const auto j = read_json(dir + "/rates.json");
  CHECK(j["pass"] == false);
  auto loose = base;
  loose.insert(loose.end(), {"--set", "campaign.slope_tol_s=10", "--set", "campaign.slope_tol_t=10"});
  CHECK(cli(loose).code == 0);
}
