#pragma once

#include "evanskit/profile.hpp"

#include <functional>
#include <memory>
#include <string>
#include <utility>

namespace evanskit {

enum class Formulation {
  IntegratedIdentityViscous,
  UnintegratedViscous,
  IntegratedGeneralViscous,
  BalancedFluxRelaxation,
  MultidModel,
  Synthetic,
};

std::string to_string(Formulation f);

/// First-order eigenvalue problem W' = A(x, lambda) W on [-L, L].
struct EigenvalueSystem {
  std::string name;
  Formulation tag = Formulation::Synthetic;
  int N = 0;
  double L = 0;
  std::shared_ptr<const ShockProfile> profile;
  /// Coefficient as a function of the profile state and its derivative.
  std::function<CMat(const Vec& y, const Vec& dy, cplx lambda)> coefficient;
  std::function<CMat(double x, cplx lambda)> A;
  std::function<CMat(int side, cplx lambda)> A_inf;
  /// Declared decay |A(x) - A±| <= C1 exp(-|x| / C2).
  double C1 = 0, C2 = 1;
  /// conj(A(x, conj lambda)) = A(x, lambda).
  bool real_coefficients = true;

  CMat operator()(double x, cplx lambda) const { return A(x, lambda); }
};

/// Wire A and A_inf from a state coefficient map and a profile.
EigenvalueSystem make_profile_system(std::string name, Formulation tag, int N,
                                     std::shared_ptr<const ShockProfile> profile,
                                     std::function<CMat(const Vec&, const Vec&, cplx)> coefficient);

/// [[0, I], [lambda, Df(u)]] (integrated) or [[Df(u), I], [lambda, 0]] acting on (w, w' - Df w).
EigenvalueSystem assemble_identity_viscous(std::shared_ptr<const ShockProfile> profile,
                                           const ViscousSystem& sys, bool integrated = true);

/// [[0, I], [lambda B^{-1}, B^{-1} A^eps]] with A^eps v = Df v - (DB v) u'.
EigenvalueSystem assemble_general_viscous(std::shared_ptr<const ShockProfile> profile,
                                          const ViscousSystem& sys);

/// Balanced flux coefficient diag(1/lambda, I)(Q - lambda)A^{-1} diag(lambda, I),
/// evaluated in the cancelled form that is also valid at lambda = 0.
EigenvalueSystem assemble_relaxation_balanced_flux(std::shared_ptr<const ShockProfile> profile,
                                                   const RelaxationSystem& sys);

/// Balanced flux coefficient at a state, in the cancelled form.
CMat balanced_flux_coefficient(const RelaxationSystem& sys, const Vec& u, const Vec& v, cplx lambda);
/// Literal product diag(1/lambda, I)(Q - lambda I)A^{-1}diag(lambda, I); lambda != 0.
CMat balanced_flux_definition(const RelaxationSystem& sys, const Vec& u, const Vec& v, cplx lambda);
/// The simplified product [[I, 0], [q_u, q_v]] A^{-1} diag(lambda, I).
CMat balanced_flux_simplified(const RelaxationSystem& sys, const Vec& u, const Vec& v, cplx lambda);

struct MultidBlocks {
  Mat B11 = Mat::Identity(2, 2), B12 = Mat::Zero(2, 2), B21 = Mat::Zero(2, 2),
      B22 = Mat::Identity(2, 2);
};

/// Smallest eigenvalue of the Hermitian part of the second-order symbol over |xi|^2,
/// sampled over directions and magnitudes.
double multid_parabolicity_margin(const MultidBlocks& B);

/// Integrated fixed-xi2 family for the coupled Burgers / linearly degenerate model.
EigenvalueSystem assemble_multid_model(double eps, double xi2, double a, const MultidBlocks& B = {},
                                       double L = 0.0);

/// A±(lambda), side = -1 or +1.
CMat asymptotic_matrix(const EigenvalueSystem& es, int side, cplx lambda);

struct Splitting {
  int k_plus = 0;   ///< stable dimension of A+
  int k_minus = 0;  ///< unstable dimension of A-
};

Splitting check_consistent_splitting(const EigenvalueSystem& es, cplx lambda, double tol = 1e-10);

/// Set (C1, C2) so that the declared bound covers the measured decay on the grid.
void certify_decay(EigenvalueSystem& es);

/// Max over grid points of |A(x) - A±| / (C1 exp(-|x|/C2)).
double decay_certificate_ratio(const EigenvalueSystem& es, cplx lambda);

/// Discrete L2 norm of W' - A(x, 0) W for W = (u', u'' - Df(u) u') in the
/// unintegrated formulation, with fourth-order differences.
double translational_residual(const EigenvalueSystem& unintegrated);

}  // namespace evanskit
