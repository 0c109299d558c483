#include "evanskit/registry.hpp"

#include <algorithm>

namespace evanskit {

const std::vector<SystemEntry>& list_systems() {
  static const std::vector<SystemEntry> entries = {
      {"burgers", "viscous", "u_t + (u^2/2)_x = u_xx", {}},
      {"gnl2x2",
       "viscous",
       "f(u) = (u1^2/2, u1 + u2) with constant viscosity B = [[b11, b12], [b21, b22]]",
       {{"b11", 1.0, "viscosity entry (1,1)"},
        {"b12", 0.0, "viscosity entry (1,2)"},
        {"b21", 0.0, "viscosity entry (2,1)"},
        {"b22", 1.0, "viscosity entry (2,2)"}}},
      {"jinxin",
       "relaxation",
       "Jin-Xin relaxation of u^2/2",
       {{"a", 1.0, "relaxation sound speed"}, {"u0", 0.0, "base state"}}},
      {"multid-model",
       "multid",
       "coupled Burgers / linearly degenerate model at fixed transverse frequency",
       {{"xi2", 0.0, "transverse frequency"}, {"a", 1.0, "linearly degenerate speed"}}},
  };
  return entries;
}

namespace {

Mat gnl_viscosity(const SystemParams& p) {
  return Mat{{p.at("b11"), p.at("b12")}, {p.at("b21"), p.at("b22")}};
}

bool is_identity(const Mat& B) { return (B - Mat::Identity(B.rows(), B.cols())).norm() == 0.0; }

}  // namespace

SystemInstance make_system(const std::string& name, const SystemParams& overrides) {
  const auto& entries = list_systems();
  auto it = std::find_if(entries.begin(), entries.end(), [&](const SystemEntry& e) { return e.name == name; });
  if (it == entries.end()) throw UnknownSystem("no registered system named '" + name + "'");
  SystemInstance inst;
  inst.entry = *it;
  for (const auto& p : it->parameters) inst.params[p.name] = p.default_value;
  for (const auto& [k, v] : overrides) {
    if (!inst.params.count(k))
      throw std::invalid_argument("system '" + name + "' has no parameter '" + k + "'");
    inst.params[k] = v;
  }
  if (name == "burgers" || name == "multid-model") {
    inst.viscous = systems::burgers();
  } else if (name == "gnl2x2") {
    inst.viscous = systems::gnl2x2(gnl_viscosity(inst.params));
  } else {
    inst.relaxation = systems::jin_xin(inst.params.at("a"), inst.params.at("u0"));
  }
  inst.hypotheses = inst.viscous ? check_hypotheses_viscous(*inst.viscous)
                                 : check_hypotheses_relaxation(*inst.relaxation);
  if (name == "multid-model") {
    HypothesisCheck c;
    c.name = "parabolicity";
    c.margin = multid_parabolicity_margin(MultidBlocks{});
    c.pass = c.margin > 0;
    if (!c.pass) c.witness = "symbol margin " + std::to_string(c.margin);
    inst.hypotheses.checks.push_back(c);
  }
  return inst;
}

Vec SystemInstance::default_left_state(double eps) const {
  if (entry.name == "gnl2x2") return Vec{{eps, 0.0}};
  if (entry.name == "jinxin") return Vec::Constant(1, params.at("u0") + eps);
  return Vec::Constant(1, eps);
}

PrincipalModel SystemInstance::principal() const {
  return viscous ? principal_model(*viscous) : principal_model(*relaxation);
}

ShockProfile SystemInstance::solve_profile(double eps, double L) const {
  if (entry.name == "burgers" || entry.name == "multid-model") return burgers_profile(eps, L);
  if (viscous) return solve_viscous_profile(*viscous, default_left_state(eps), eps, L);
  return solve_relaxation_profile(*relaxation, default_left_state(eps), eps, L);
}

std::function<Vec(const Vec&)> SystemInstance::profile_rhs(const Vec& u_minus) const {
  if (viscous) return viscous_profile_rhs(*viscous, u_minus);
  return relaxation_profile_rhs(*relaxation);
}

EigenvalueSystem SystemInstance::assemble(std::shared_ptr<const ShockProfile> profile) const {
  if (entry.name == "multid-model")
    return assemble_multid_model(profile->eps, params.at("xi2"), params.at("a"), MultidBlocks{}, profile->L);
  if (relaxation) return assemble_relaxation_balanced_flux(profile, *relaxation);
  if (entry.name == "gnl2x2" && !is_identity(gnl_viscosity(params)))
    return assemble_general_viscous(profile, *viscous);
  return assemble_identity_viscous(profile, *viscous, true);
}

}  // namespace evanskit
