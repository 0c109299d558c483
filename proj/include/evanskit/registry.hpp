#pragma once

#include "evanskit/evalsys.hpp"
#include "evanskit/reduction.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace evanskit {

struct ParameterSpec {
  std::string name;
  double default_value = 0;
  std::string description;
};

struct SystemEntry {
  std::string name;
  std::string kind;  ///< "viscous", "relaxation" or "multid"
  std::string description;
  std::vector<ParameterSpec> parameters;
};

using SystemParams = std::map<std::string, double>;

/// Registered systems: burgers, gnl2x2, jinxin, multid-model.
const std::vector<SystemEntry>& list_systems();

struct SystemInstance {
  SystemEntry entry;
  SystemParams params;  ///< defaults merged with overrides
  std::optional<ViscousSystem> viscous;
  std::optional<RelaxationSystem> relaxation;
  HypothesisReport hypotheses;

  /// Left state of the default eps-amplitude profile.
  Vec default_left_state(double eps) const;
  PrincipalModel principal() const;
  /// Profile for amplitude eps on [-L, L].
  ShockProfile solve_profile(double eps, double L) const;
  /// Profile ODE right-hand side for reloading a cached profile with the given left state.
  std::function<Vec(const Vec&)> profile_rhs(const Vec& u_minus) const;
  /// Eigenvalue system on a profile (the multi-d model builds its own Burgers profile).
  EigenvalueSystem assemble(std::shared_ptr<const ShockProfile> profile) const;
};

/// Throws UnknownSystem for unregistered names and std::invalid_argument for unknown parameters.
SystemInstance make_system(const std::string& name, const SystemParams& overrides = {});

}  // namespace evanskit
