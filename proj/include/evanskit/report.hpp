#pragma once

#include "evanskit/evans.hpp"
#include "evanskit/registry.hpp"

#include <json.hpp>

#include <string>

namespace evanskit {

struct ContourSpec {
  std::string geometry = "half-annulus";  ///< "half-annulus", "circle" or "rectangle"
  double r_min = -1;   ///< half-annulus inner radius; negative picks the default
  double R_max = -1;   ///< half-annulus outer radius; negative picks the default
  int points = 256;
  double center_re = 0, center_im = 0, radius = 1;  ///< circle
  double lo_re = 0, lo_im = -1, hi_re = 1, hi_im = 1;  ///< rectangle corners
};

struct ScanConfig {
  std::string system = "burgers";
  SystemParams params;
  double eps = 1.0;
  ContourSpec contour;
  double L = 0;              ///< domain half-length; 0 picks the default
  double tol = 1e-8;         ///< ODE relative tolerance
  double frame_tol = 1e-11;  ///< frame continuation relative tolerance
  double zero_floor = 1e-8;
  double regime_C = 4;
  std::string out = "evanskit_scan";  ///< output path prefix
  int jobs = 0;
  int max_depth = 12;

  /// Throws std::invalid_argument or UnknownSystem on an invalid configuration.
  void validate() const;
};

nlohmann::json to_json(const ScanConfig& c);
/// Keys absent from the JSON keep their current values in `base`.
ScanConfig config_from_json(const nlohmann::json& j, ScanConfig base = {});

inline constexpr int kReportSchemaVersion = 1;

struct ScanReport {
  ScanConfig config;
  nlohmann::json hypotheses;
  nlohmann::json profile;
  nlohmann::json regimes = nlohmann::json::array();
  nlohmann::json contours = nlohmann::json::array();
  nlohmann::json verdict;
  nlohmann::json runtime;  ///< timings and cache status, excluded from determinism checks
  std::string error;       ///< first module error, empty on success
  Verdict::Kind kind = Verdict::Kind::Inconclusive;
  std::vector<EvansSample> samples;
  std::shared_ptr<const ShockProfile> shock;

  /// Report without the runtime section.
  nlohmann::json to_json(bool with_runtime = true) const;
};

/// Profile cache file name for a configuration (relative to EVANSKIT_CACHE_DIR).
std::string profile_cache_key(const ScanConfig& config, double L);

ScanReport run_scan(const ScanConfig& config);

/// 0 stable, 2 unstable, 3 inconclusive or error.
int exit_code(const ScanReport& report);

struct EmittedPaths {
  std::string json, csv, profile;
};

/// Writes <out>.json, <out>.csv and <out>.profile.
EmittedPaths emit_report(const ScanReport& report, const std::string& out_prefix);

}  // namespace evanskit
