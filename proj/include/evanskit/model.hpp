#pragma once

#include "evanskit/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace evanskit {

/// Sorted, binormalized eigen-decomposition of a strictly hyperbolic matrix.
struct SpectralDecomposition {
  Vec a;   ///< eigenvalues, ascending
  Mat L;   ///< rows are left eigenvectors l_j
  Mat R;   ///< columns are right eigenvectors r_j
  int p = 0;  ///< 0-based index of the eigenvalue of smallest magnitude
};

/// Right eigenvectors are scaled so their first significant entry is 1.
SpectralDecomposition characteristic_decomposition(const Mat& A, double rel_tol = 1e-7);

/// Same, but each r_j is scaled so that reference.L.row(j) * r_j = 1, which
/// keeps the decomposition smooth along a family of matrices.
SpectralDecomposition characteristic_decomposition(const Mat& A,
                                                   const SpectralDecomposition& reference,
                                                   double rel_tol = 1e-7);

/// u_t + f(u)_x = (B(u) u_x)_x near a base state.
struct ViscousSystem {
  std::string name;
  int n = 1;
  std::function<Vec(const Vec&)> f;
  std::function<Mat(const Vec&)> Df;
  /// D^2 f(u)(a, b)
  std::function<Vec(const Vec&, const Vec&, const Vec&)> D2f;
  std::function<Mat(const Vec&)> B;
  /// Directional derivative DB(u)[v]
  std::function<Mat(const Vec&, const Vec&)> DB;
  Vec u0;
  double radius = 1.0;
};

/// u_t + f~(u,v)_x = 0, v_t + g~(u,v)_x = q(u,v) with equilibrium v = v*(u).
struct RelaxationSystem {
  std::string name;
  int n = 1;
  int r = 1;
  std::function<Vec(const Vec&, const Vec&)> ft, gt, q;
  std::function<Mat(const Vec&, const Vec&)> ft_u, ft_v, gt_u, gt_v, q_u, q_v;
  std::function<Vec(const Vec&)> vstar;
  /// D^2 of the equilibrium flux f(u) = f~(u, v*(u)) applied to (a, b)
  std::function<Vec(const Vec&, const Vec&, const Vec&)> D2f_eq;
  Vec u0;
  Vec v0;
  double radius = 1.0;

  Vec f_eq(const Vec& u) const { return ft(u, vstar(u)); }
  /// v*_u = -q_v^{-1} q_u on the equilibrium manifold.
  Mat vstar_u(const Vec& u) const;
  /// Jacobian of the equilibrium flux.
  Mat Df_eq(const Vec& u) const;
  /// Jacobian of g(u) = g~(u, v*(u)).
  Mat Dg_eq(const Vec& u) const;
  /// Full flux Jacobian [[f~_u, f~_v], [g~_u, g~_v]].
  Mat flux_jacobian(const Vec& u, const Vec& v) const;
  /// Relaxation Jacobian [[0, 0], [q_u, q_v]].
  Mat source_jacobian(const Vec& u, const Vec& v) const;
};

struct HypothesisCheck {
  std::string name;
  bool pass = false;
  double margin = 0.0;   ///< nonnegative measured margin (0 on failure)
  std::string witness;   ///< offending quantity when the check fails
};

struct HypothesisReport {
  std::vector<HypothesisCheck> checks;
  double Lambda = 0.0;
  double beta = 0.0;
  bool all_pass() const;
  const HypothesisCheck& get(const std::string& name) const;
};

HypothesisReport check_hypotheses_viscous(const ViscousSystem& sys);
HypothesisReport check_hypotheses_relaxation(const RelaxationSystem& sys);

struct NonlinearityDiffusion {
  double Lambda;
  double beta;
};

NonlinearityDiffusion genuine_nonlinearity_and_diffusion(const ViscousSystem& sys, const Vec& u);
NonlinearityDiffusion genuine_nonlinearity_and_diffusion(const RelaxationSystem& sys, const Vec& u);

/// Effective viscosity -f~_v q_v^{-1} (g_u - v*_u f_u) on the equilibrium manifold.
Mat chapman_enskog_viscosity(const RelaxationSystem& sys, const Vec& u);

/// Log-spaced frequency grid with the given density per decade.
std::vector<double> log_grid(double lo, double hi, int per_decade);

namespace systems {

/// u_t + (u^2/2)_x = u_xx
ViscousSystem burgers();
/// f(u) = (u1^2/2, u1 + u2) with constant viscosity B (identity by default).
ViscousSystem gnl2x2(const Mat& B = Mat::Identity(2, 2));
/// f(u) = (u2, u1), B = I: no characteristic speed vanishes.
ViscousSystem symmetric_linear();
/// Jin-Xin relaxation of u^2/2 with sound speed a, based at u0.
RelaxationSystem jin_xin(double a = 1.0, double u0 = 0.0);

}  // namespace systems

}  // namespace evanskit
