#include "evanskit/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace evanskit {

using nlohmann::json;

namespace {

std::string fmt(double v, int digits = 17) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

/// Finite doubles pass through; non-finite values become strings so the report stays valid JSON.
json num(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

template <typename T>
void read_into(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

void read_pair(const json& j, const char* key, double& re, double& im) {
  if (!j.contains(key)) return;
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 2) throw std::invalid_argument(std::string(key) + " must be [re, im]");
  re = a[0].get<double>();
  im = a[1].get<double>();
}

class Stopwatch {
public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

json hypotheses_json(const HypothesisReport& h) {
  json checks = json::array();
  for (const auto& c : h.checks)
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"margin", num(c.margin)}, {"witness", c.witness}});
  return {{"all_pass", h.all_pass()}, {"Lambda", num(h.Lambda)}, {"beta", num(h.beta)}, {"checks", checks}};
}

json regimes_json(const RegimeReport& r) {
  json out = json::array();
  for (const auto& s : r.segments) {
    json seg = {{"regime", to_string(s.tag)}, {"lo", num(s.lo)},         {"hi", num(s.hi)},
                {"hat_lo", num(s.hat_lo)},    {"hat_hi", num(s.hat_hi)}, {"C", num(r.C)}};
    if (s.tag == Regime::I)
      seg["certificates"] = {{"phi_rho_infinity", num(r.phi_rho_infinity)},
                             {"coupling_C", num(r.coupling_C)},
                             {"coupling_theta", num(r.coupling_theta)},
                             {"forcing_C", num(r.forcing_C)},
                             {"superslow_C", num(r.superslow_C)}};
    if (s.tag == Regime::II) seg["certificates"] = {{"burgers_root_gap", num(r.burgers_root_gap)}};
    out.push_back(seg);
  }
  return out;
}

json contour_json(const Contour& c, const WindingResult& w, int points) {
  json params = json::object();
  for (const auto& [k, v] : c.parameters) params[k] = num(v);
  return {{"geometry", c.geometry},
          {"parameters", params},
          {"initial_points", points},
          {"winding", w.winding},
          {"min_abs_D", num(w.min_abs_D)},
          {"argmin_lambda", cplx_json(w.argmin_lambda)},
          {"phase_total", num(w.phase_total)},
          {"max_log_abs_D", num(w.max_log_abs_D)},
          {"depth", w.depth},
          {"samples", w.samples.size()}};
}

Contour build_contour(const ContourSpec& spec) {
  if (spec.geometry == "circle")
    return circle(cplx(spec.center_re, spec.center_im), spec.radius, spec.points);
  return rectangle(cplx(spec.lo_re, spec.lo_im), cplx(spec.hi_re, spec.hi_im), spec.points);
}

std::shared_ptr<const ShockProfile> obtain_profile(const SystemInstance& inst, const ScanConfig& c, double L,
                                                   json& runtime) {
  const char* dir = std::getenv("EVANSKIT_CACHE_DIR");
  if (!dir || !*dir) {
    runtime["profile_cached"] = false;
    return std::make_shared<const ShockProfile>(inst.solve_profile(c.eps, L));
  }
  std::filesystem::create_directories(dir);
  const std::string path = (std::filesystem::path(dir) / profile_cache_key(c, L)).string();
  runtime["profile_cache"] = path;
  if (std::filesystem::exists(path)) {
    runtime["profile_cached"] = true;
    return std::make_shared<const ShockProfile>(
        read_profile_cache(path, inst.profile_rhs(inst.default_left_state(c.eps))));
  }
  runtime["profile_cached"] = false;
  auto p = std::make_shared<const ShockProfile>(inst.solve_profile(c.eps, L));
  write_profile_cache(*p, path);
  return p;
}

}  // namespace

void ScanConfig::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0)) throw std::invalid_argument(std::string(what) + " must be positive");
  };
  positive(eps, "eps");
  positive(tol, "ODE tolerance");
  positive(frame_tol, "frame tolerance");
  positive(zero_floor, "zero floor");
  positive(regime_C, "regime constant");
  if (L < 0) throw std::invalid_argument("domain half-length must be nonnegative");
  if (contour.points < 4) throw std::invalid_argument("contour needs at least 4 initial points");
  if (jobs < 0) throw std::invalid_argument("jobs must be nonnegative");
  if (max_depth < 0) throw std::invalid_argument("max_depth must be nonnegative");
  if (contour.geometry == "half-annulus") {
    if (contour.r_min > 0 && contour.R_max > 0 && !(contour.r_min < contour.R_max))
      throw std::invalid_argument("r_min must be smaller than R_max");
  } else if (contour.geometry == "circle") {
    positive(contour.radius, "circle radius");
  } else if (contour.geometry == "rectangle") {
    if (!(contour.lo_re < contour.hi_re && contour.lo_im < contour.hi_im))
      throw std::invalid_argument("rectangle corners must satisfy lo < hi");
  } else {
    throw std::invalid_argument("unknown contour geometry '" + contour.geometry + "'");
  }
  make_system(system, params);
}

json to_json(const ScanConfig& c) {
  json params = json::object();
  for (const auto& [k, v] : c.params) params[k] = v;
  return {{"system", c.system},
          {"params", params},
          {"eps", c.eps},
          {"contour",
           {{"geometry", c.contour.geometry},
            {"r_min", c.contour.r_min},
            {"R_max", c.contour.R_max},
            {"points", c.contour.points},
            {"center", {c.contour.center_re, c.contour.center_im}},
            {"radius", c.contour.radius},
            {"lo", {c.contour.lo_re, c.contour.lo_im}},
            {"hi", {c.contour.hi_re, c.contour.hi_im}}}},
          {"domain", {{"L", c.L}}},
          {"tolerances", {{"ode", c.tol}, {"frame", c.frame_tol}, {"zero_floor", c.zero_floor}}},
          {"regime", {{"C", c.regime_C}}},
          {"output", {{"prefix", c.out}}},
          {"parallel", {{"jobs", c.jobs}}},
          {"winding", {{"max_depth", c.max_depth}}}};
}

ScanConfig config_from_json(const json& j, ScanConfig c) {
  if (!j.is_object()) throw std::invalid_argument("configuration must be a JSON object");
  read_into(j, "system", c.system);
  if (j.contains("params"))
    for (const auto& [k, v] : j.at("params").items()) c.params[k] = v.get<double>();
  read_into(j, "eps", c.eps);
  if (j.contains("contour")) {
    const auto& k = j.at("contour");
    read_into(k, "geometry", c.contour.geometry);
    read_into(k, "r_min", c.contour.r_min);
    read_into(k, "R_max", c.contour.R_max);
    read_into(k, "points", c.contour.points);
    read_pair(k, "center", c.contour.center_re, c.contour.center_im);
    read_into(k, "radius", c.contour.radius);
    read_pair(k, "lo", c.contour.lo_re, c.contour.lo_im);
    read_pair(k, "hi", c.contour.hi_re, c.contour.hi_im);
  }
  if (j.contains("domain")) read_into(j.at("domain"), "L", c.L);
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    read_into(t, "ode", c.tol);
    read_into(t, "frame", c.frame_tol);
    read_into(t, "zero_floor", c.zero_floor);
  }
  if (j.contains("regime")) read_into(j.at("regime"), "C", c.regime_C);
  if (j.contains("output")) read_into(j.at("output"), "prefix", c.out);
  if (j.contains("parallel")) read_into(j.at("parallel"), "jobs", c.jobs);
  if (j.contains("winding")) read_into(j.at("winding"), "max_depth", c.max_depth);
  return c;
}

std::string profile_cache_key(const ScanConfig& c, double L) {
  std::string key = c.system;
  const auto inst = make_system(c.system, c.params);
  for (const auto& [k, v] : inst.params) key += "_" + k + "=" + fmt(v);
  key += "_eps=" + fmt(c.eps) + "_L=" + fmt(L);
  for (char& ch : key)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '=' || ch == '.' || ch == '-'))
      ch = '_';
  return key + ".profile";
}

json ScanReport::to_json(bool with_runtime) const {
  json j = {{"schema_version", kReportSchemaVersion},
            {"config", evanskit::to_json(config)},
            {"hypotheses", hypotheses},
            {"profile", profile},
            {"regimes", regimes},
            {"contours", contours},
            {"verdict", verdict},
            {"error", error.empty() ? json(nullptr) : json(error)}};
  if (with_runtime) j["runtime"] = runtime;
  return j;
}

ScanReport run_scan(const ScanConfig& config) {
  ScanReport rep;
  rep.config = config;
  rep.verdict = {{"kind", to_string(Verdict::Kind::Inconclusive)}, {"count", 0}, {"message", "not run"}};
  Stopwatch total, sw;
  json timings = json::object();
  auto fail = [&](const std::string& what) {
    rep.error = what;
    rep.kind = Verdict::Kind::Inconclusive;
    rep.verdict["message"] = what;
  };
  try {
    config.validate();
    const SystemInstance inst = make_system(config.system, config.params);
    rep.config.params = inst.params;
    rep.hypotheses = hypotheses_json(inst.hypotheses);
    timings["model"] = sw.lap();
    if (!inst.hypotheses.all_pass()) {
      for (const auto& c : inst.hypotheses.checks)
        if (!c.pass) {
          fail("hypothesis " + c.name + " fails: " + c.witness);
          break;
        }
      rep.runtime = {{"timings", timings}};
      return rep;
    }

    const double L = config.L > 0 ? config.L : default_domain_length(config.eps);
    rep.shock = obtain_profile(inst, config, L, rep.runtime);
    const ShockProfile& p = *rep.shock;
    rep.profile = {{"eps", p.eps},
                   {"L", p.L},
                   {"grid_points", p.size()},
                   {"endpoint_states",
                    {{"u_minus", vec_json(p.u_minus)},
                     {"u_plus", vec_json(p.u_plus)},
                     {"v_minus", vec_json(p.v_minus)},
                     {"v_plus", vec_json(p.v_plus)}}},
                   {"tail_rate", num(p.tail_rate)},
                   {"tail_r2", num(p.tail_r2)},
                   {"residual", num(p.residual)}};
    const RescaleReport rs =
        inst.viscous ? rescale_and_compare(p, *inst.viscous) : rescale_and_compare(p, *inst.relaxation);
    rep.profile["rescaled"] = {{"sup_eta_error", num(rs.sup_eta_error)},
                               {"theta_hat", num(rs.theta_hat)},
                               {"monotone", rs.monotone}};
    timings["profile"] = sw.lap();

    EigenvalueSystem es = inst.assemble(rep.shock);
    rep.profile["formulation"] = to_string(es.tag);
    timings["assembly"] = sw.lap();

    WindingOptions wopt;
    wopt.evans.rtol = config.tol;
    wopt.evans.atol = config.tol * 1e-2;
    wopt.continuation.rtol = config.frame_tol;
    wopt.continuation.atol = config.frame_tol * 1e-2;
    wopt.jobs = config.jobs;
    wopt.max_depth = config.max_depth;
    wopt.zero_floor = config.zero_floor;

    double r_min = config.contour.r_min > 0 ? config.contour.r_min : default_r_min(config.eps);
    double R_max = config.contour.R_max > 0 ? config.contour.R_max : default_R_max(es);
    if (config.contour.geometry == "half-annulus") {
      VerdictOptions vopt;
      vopt.r_min = r_min;
      vopt.R_max = R_max;
      vopt.points = config.contour.points;
      vopt.winding = wopt;
      const Verdict v = stability_verdict(es, config.eps, vopt);
      rep.kind = v.kind;
      rep.verdict = {{"kind", to_string(v.kind)},
                     {"count", v.count},
                     {"message", v.message},
                     {"r_min", v.r_min},
                     {"R_max", v.R_max},
                     {"small_arc_min_abs_D", num(v.small_arc_min_abs_D)}};
      if (!v.winding.samples.empty()) {
        rep.contours.push_back(contour_json(v.contour, v.winding, config.contour.points));
        rep.samples = v.winding.samples;
      } else {
        rep.error = v.message;
      }
    } else {
      const Contour c = build_contour(config.contour);
      const WindingResult w = winding_number(es, c, wopt);
      rep.contours.push_back(contour_json(c, w, config.contour.points));
      rep.samples = w.samples;
      rep.kind = w.winding == 0 ? Verdict::Kind::Stable
                 : w.winding > 0 ? Verdict::Kind::Unstable
                                 : Verdict::Kind::Inconclusive;
      if (rep.kind == Verdict::Kind::Stable && !(w.min_abs_D >= config.zero_floor))
        rep.kind = Verdict::Kind::Inconclusive;
      rep.verdict = {{"kind", to_string(rep.kind)},
                     {"count", std::max(w.winding, 0)},
                     {"message", "zeros enclosed by the " + c.geometry + " only"}};
    }
    timings["verdict"] = sw.lap();

    if (config.eps <= 0.25 && inst.entry.name != "multid-model") {
      const RegimeReport rr =
          regime_partition_and_normal_form(config.eps, std::max(config.regime_C, 4.0), r_min, R_max,
                                           inst.principal(), &es);
      rep.regimes = regimes_json(rr);
    }
    timings["regimes"] = sw.lap();
  } catch (const std::exception& e) {
    fail(e.what());
  }
  timings["total"] = total.lap();
  rep.runtime["timings"] = timings;
  return rep;
}

int exit_code(const ScanReport& r) {
  if (!r.error.empty()) return 3;
  switch (r.kind) {
    case Verdict::Kind::Stable: return 0;
    case Verdict::Kind::Unstable: return 2;
    default: return 3;
  }
}

EmittedPaths emit_report(const ScanReport& report, const std::string& prefix) {
  EmittedPaths paths{prefix + ".json", prefix + ".csv", prefix + ".profile"};
  const auto parent = std::filesystem::path(prefix).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  {
    std::ofstream out(paths.json);
    if (!out) throw std::runtime_error("cannot write " + paths.json);
    out << report.to_json().dump(2) << '\n';
    if (!out) throw std::runtime_error("failed while writing " + paths.json);
  }
  {
    std::ofstream out(paths.csv);
    if (!out) throw std::runtime_error("cannot write " + paths.csv);
    out << "re_lambda,im_lambda,re_D,im_D,abs_D,arg_D,logscale\n";
    for (const auto& s : report.samples)
      out << fmt(s.lambda.real()) << ',' << fmt(s.lambda.imag()) << ',' << fmt(s.D.real()) << ','
          << fmt(s.D.imag()) << ',' << fmt(std::abs(s.D)) << ',' << fmt(std::arg(s.D)) << ','
          << fmt(s.logscale) << '\n';
    if (!out) throw std::runtime_error("failed while writing " + paths.csv);
  }
  if (report.shock) {
    write_profile_cache(*report.shock, paths.profile);
  } else {
    paths.profile.clear();
  }
  return paths;
}

}  // namespace evanskit
