#pragma once

#include "evanskit/linalg.hpp"

#include <functional>
#include <string>
#include <vector>

namespace evanskit {

/// Basis of a stable or unstable invariant subspace, continued along a lambda path.
struct AnalyticFrame {
  cplx lambda0 = 0;   ///< base point
  cplx lambda = 0;    ///< current point
  CMat V;             ///< N x k basis
  bool stable = true;
  int side = 0;       ///< +1 / -1 for asymptotic frames, 0 otherwise
  double path_variation = 0;  ///< accumulated integral of |P'| |d lambda|
  long steps = 0;
  int k() const { return static_cast<int>(V.cols()); }
};

/// Ordered-Schur frame for the eigenvalues with Re mu < 0 (stable) or > 0.
/// Real input matrices yield real orthonormal bases.
AnalyticFrame stable_unstable_frames(const CMat& M, bool stable, double tol = 1e-10);

struct ContinuationOptions {
  double max_rotation = 0.1;      ///< cap on |P'| |d lambda| per step
  double rtol = 1e-11, atol = 1e-13;
  double collision_tol = 1e-8;    ///< relative eigenvalue separation that counts as a crossing
  double fd_step = 1e-3;          ///< relative step for dM/d lambda
  double min_step = 1e-9;         ///< smallest path fraction per step before a crossing is reported
};

using MatrixFamily = std::function<CMat(cplx)>;

/// Kato transport V' = P'(lambda) V along the polyline through `path`.
/// Returns frames at every path point (the first equals the input).
std::vector<AnalyticFrame> continue_frame_along_path(const AnalyticFrame& frame, const MatrixFamily& M,
                                                     const std::vector<cplx>& path,
                                                     const ContinuationOptions& opt = {});

/// Convenience: the frame at the end of the path.
AnalyticFrame continue_frame_to(const AnalyticFrame& frame, const MatrixFamily& M,
                                const std::vector<cplx>& path, const ContinuationOptions& opt = {});

/// Invariance residual |M V - V (V^+ M V)| / |M|.
double invariance_residual(const CMat& M, const CMat& V);

/// Square roots continued along a path, starting from the principal root.
std::vector<cplx> continued_sqrt(const std::vector<cplx>& z);

struct ModeExpansion {
  cplx mu;
  std::string kind;  ///< "slow" or "fast"
  CVec R;            ///< right eigenvector (identity viscous case, else empty)
  Eigen::RowVectorXcd Lrow;  ///< left eigenvector with Lrow R = 1 (identity viscous case)
};

struct ModeContext {
  enum class Kind { IdentityViscous, GeneralViscous, Relaxation } kind = Kind::IdentityViscous;
  double beta = 1.0;            ///< l_j B r_j, or l_j B* r_j for relaxation
  std::vector<double> gamma;    ///< fast rates (eigenvalues of B^{-1} Df or of H)
  std::vector<double> dgamma;   ///< first-order lambda coefficients of the fast rates
  Vec l, r;                     ///< characteristic eigenvectors (optional)
};

/// Transverse modes for characteristic speed a: exact roots of mu^2 - a mu - lambda
/// for identity viscosity, otherwise the slow expansion -lambda/a + lambda^2 beta/a^3
/// and the fast rates gamma + lambda dgamma.
std::vector<ModeExpansion> transverse_mode_expansions(double a, cplx lambda, const ModeContext& ctx);

}  // namespace evanskit
