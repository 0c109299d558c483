#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "evanskit/report.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace evanskit;
namespace fs = std::filesystem;

namespace {

const double kPi = std::acos(-1.0);

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "evanskit_cli_tests";
  fs::create_directories(d);
  return d / name;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(EVANSKIT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

ScanConfig burgers_config() {
  ScanConfig c;
  c.system = "burgers";
  c.eps = 1.0;
  c.contour.points = 64;
  return c;
}

std::vector<std::vector<double>> read_csv(const std::string& path, std::string& header) {
  std::ifstream in(path);
  std::getline(in, header);
  std::vector<std::vector<double>> rows;
  for (std::string line; std::getline(in, line);) {
    std::stringstream ss(line);
    std::vector<double> row;
    for (std::string cell; std::getline(ss, cell, ',');) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("registry lists the four systems and their hypotheses pass") {
  const auto all = list_systems();
  REQUIRE(all.size() == 4);
  std::vector<std::string> names;
  for (const auto& e : all) names.push_back(e.name);
  CHECK(names == std::vector<std::string>{"burgers", "gnl2x2", "jinxin", "multid-model"});
  for (const auto& e : all) {
    const auto inst = make_system(e.name, {});
    CHECK(inst.entry.name == e.name);
    CHECK(inst.hypotheses.all_pass());
  }
  CHECK_THROWS_AS(make_system("kdv", {}), UnknownSystem);
  CHECK_THROWS_AS(make_system("burgers", {{"nu", 1.0}}), std::invalid_argument);
}

TEST_CASE("config JSON round trip") {
  ScanConfig c = burgers_config();
  c.system = "jinxin";
  c.params = {{"a", 1.5}};
  c.contour.geometry = "circle";
  c.contour.center_re = 0.5;
  c.contour.radius = 0.25;
  c.jobs = 3;
  const ScanConfig d = config_from_json(to_json(c));
  CHECK(to_json(d) == to_json(c));
  const ScanConfig e = config_from_json(nlohmann::json{{"eps", 0.2}}, c);
  CHECK(e.eps == 0.2);
  CHECK(e.system == "jinxin");
  ScanConfig bad = c;
  bad.contour.geometry = "triangle";
  CHECK_THROWS(bad.validate());
}

TEST_CASE("Burgers scan is stable and deterministic") {
  const ScanConfig c = burgers_config();
  const auto a = run_scan(c);
  CHECK(a.error.empty());
  CHECK(a.kind == Verdict::Kind::Stable);
  CHECK(exit_code(a) == 0);
  REQUIRE(a.contours.size() == 1);
  CHECK(a.contours[0]["winding"] == 0);
  const auto b = run_scan(c);
  CHECK(a.to_json(false) == b.to_json(false));
  ScanConfig p = c;
  p.jobs = 4;
  const auto q = run_scan(p);
  nlohmann::json ja = a.to_json(false), jq = q.to_json(false);
  ja["config"].erase("parallel");
  jq["config"].erase("parallel");
  CHECK(ja == jq);
}

TEST_CASE("exit codes follow the verdict") {
  ScanReport r;
  r.kind = Verdict::Kind::Unstable;
  CHECK(exit_code(r) == 2);
  r.kind = Verdict::Kind::Inconclusive;
  CHECK(exit_code(r) == 3);
  r.kind = Verdict::Kind::Stable;
  CHECK(exit_code(r) == 0);
  r.error = "failure";
  CHECK(exit_code(r) == 3);
}

TEST_CASE("emitted JSON and CSV agree with the report") {
  const auto rep = run_scan(burgers_config());
  const auto paths = emit_report(rep, scratch("burgers").string());
  std::ifstream jin(paths.json);
  const auto j = nlohmann::json::parse(jin);
  for (const char* key : {"schema_version", "config", "hypotheses", "profile", "regimes", "contours", "verdict",
                          "error", "runtime"})
    CHECK(j.contains(key));
  CHECK(j["schema_version"] == kReportSchemaVersion);
  std::string header;
  const auto rows = read_csv(paths.csv, header);
  CHECK(header == "re_lambda,im_lambda,re_D,im_D,abs_D,arg_D,logscale");
  CHECK(rows.size() == rep.samples.size());
  CHECK(rows.size() == j["contours"][0]["samples"].get<size_t>());
  double phase = 0;
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& a = rows[i];
    const auto& b = rows[(i + 1) % rows.size()];
    phase += std::arg(cplx(b[2], b[3]) / cplx(a[2], a[3]));
    CHECK(std::abs(a[4] - std::abs(cplx(a[2], a[3]))) <= 1e-12 * a[4]);
  }
  CHECK(std::abs(phase - 2 * kPi * j["contours"][0]["winding"].get<int>()) < 1e-6);
  CHECK(fs::exists(paths.profile));
}

TEST_CASE("profile cache reproduces the uncached scan") {
  const fs::path dir = scratch("cache");
  fs::remove_all(dir);
  fs::create_directories(dir);
  ScanConfig c = burgers_config();
  c.system = "gnl2x2";
  c.eps = 0.1;
  const auto fresh = run_scan(c);
  setenv("EVANSKIT_CACHE_DIR", dir.c_str(), 1);
  const auto first = run_scan(c);
  const auto second = run_scan(c);
  unsetenv("EVANSKIT_CACHE_DIR");
  CHECK(first.runtime["profile_cached"] == false);
  CHECK(second.runtime["profile_cached"] == true);
  REQUIRE(second.samples.size() == fresh.samples.size());
  for (size_t i = 0; i < fresh.samples.size(); ++i)
    CHECK(std::abs(second.samples[i].value() - fresh.samples[i].value()) <= 1e-9 * std::abs(fresh.samples[i].value()));
  CHECK(second.verdict == fresh.verdict);
}

TEST_CASE("command line binary") {
  const fs::path out = scratch("cli_run");
  CHECK(run_cli("list-systems --json") == 0);
  CHECK(run_cli("scan --system burgers --eps 1 --points 64 --out " + out.string()) == 0);
  CHECK(fs::exists(out.string() + ".json"));
  CHECK(fs::exists(out.string() + ".csv"));
  CHECK(run_cli("scan --system jinxin --eps 0.1 --points 64 --out " + out.string()) == 0);
  CHECK(run_cli("scan --system nosuch --out " + out.string()) == 3);
  CHECK(run_cli("scan --system gnl2x2 --eps 1 --out " + out.string()) == 3);

  const fs::path cfg = scratch("circle.json");
  std::ofstream(cfg) << R"({"system": "burgers", "eps": 1.0, "contour": {"geometry": "circle", "center": [2.0, 0.0], "radius": 0.5, "points": 32}})";
  CHECK(run_cli("scan --config " + cfg.string() + " --out " + out.string()) == 0);
  std::ifstream jin(out.string() + ".json");
  const auto j = nlohmann::json::parse(jin);
  CHECK(j["config"]["contour"]["geometry"] == "circle");
  CHECK(j["contours"][0]["winding"] == 0);
}
