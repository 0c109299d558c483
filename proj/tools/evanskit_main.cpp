#include "evanskit/report.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace evanskit;

namespace {

int list_command(bool as_json) {
  if (as_json) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& e : list_systems()) {
      nlohmann::json params = nlohmann::json::array();
      for (const auto& p : e.parameters)
        params.push_back({{"name", p.name}, {"default", p.default_value}, {"description", p.description}});
      out.push_back({{"name", e.name}, {"kind", e.kind}, {"description", e.description}, {"parameters", params}});
    }
    std::cout << out.dump(2) << '\n';
    return 0;
  }
  for (const auto& e : list_systems()) {
    std::cout << e.name << " (" << e.kind << "): " << e.description << '\n';
    for (const auto& p : e.parameters)
      std::cout << "    " << p.name << " = " << p.default_value << "  " << p.description << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evans-function stability scans for small-amplitude shock profiles"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list-systems", "List registered systems and their parameters");
  bool list_json = false;
  list->add_flag("--json", list_json, "Print the registry as JSON");

  auto* scan = app.add_subcommand("scan", "Run a stability scan and write <out>.json, <out>.csv, <out>.profile");
  std::string config_path, system, contour, out;
  std::vector<std::string> param_args;
  double eps = 0, rmin = 0, rmax = 0, domain_L = 0, tol = 0;
  int points = 0, jobs = -1;
  scan->add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  scan->add_option("--system", system, "System name (see list-systems)");
  scan->add_option("--param", param_args, "System parameter override name=value (repeatable)");
  scan->add_option("--eps", eps, "Shock amplitude");
  scan->add_option("--contour", contour, "Contour geometry: half-annulus, circle or rectangle");
  scan->add_option("--rmin", rmin, "Inner radius of the half-annulus");
  scan->add_option("--rmax", rmax, "Outer radius of the half-annulus");
  scan->add_option("--points", points, "Initial contour points");
  scan->add_option("--domain-L", domain_L, "Domain half-length");
  scan->add_option("--tol", tol, "ODE relative tolerance");
  scan->add_option("--out", out, "Output path prefix");
  scan->add_option("--jobs", jobs, "Worker threads (0 = all cores)");

  CLI11_PARSE(app, argc, argv);

  if (*list) return list_command(list_json);

  ScanConfig cfg;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      cfg = config_from_json(nlohmann::json::parse(in));
    }
    if (scan->count("--system")) cfg.system = system;
    for (const auto& kv : param_args) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("--param expects name=value, got '" + kv + "'");
      cfg.params[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    }
    if (scan->count("--eps")) cfg.eps = eps;
    if (scan->count("--contour")) cfg.contour.geometry = contour;
    if (scan->count("--rmin")) cfg.contour.r_min = rmin;
    if (scan->count("--rmax")) cfg.contour.R_max = rmax;
    if (scan->count("--points")) cfg.contour.points = points;
    if (scan->count("--domain-L")) cfg.L = domain_L;
    if (scan->count("--tol")) cfg.tol = tol;
    if (scan->count("--out")) cfg.out = out;
    if (scan->count("--jobs")) cfg.jobs = jobs;
  } catch (const std::exception& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 3;
  }

  const ScanReport report = run_scan(cfg);
  try {
    const EmittedPaths paths = emit_report(report, cfg.out);
    std::cout << "verdict: " << report.verdict.value("kind", "inconclusive");
    if (!report.contours.empty()) std::cout << "  winding: " << report.contours[0]["winding"];
    std::cout << "\nreport: " << paths.json << '\n';
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return 3;
  }
  if (!report.error.empty()) std::cerr << "error: " << report.error << '\n';
  return exit_code(report);
}
