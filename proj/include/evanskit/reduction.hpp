#pragma once

#include "evanskit/evalsys.hpp"

#include <array>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace evanskit {

/// Principal-mode data along the profile: speed, diffusion and the (eta, z) coordinate rows.
struct PrincipalData {
  double a_p = 0;
  double beta = 1;
  Eigen::RowVectorXd l_p;
  Vec r_p;
  Mat Lm;  ///< 2 x N rows [(l_p, 0); (0, s~_p)]
};

struct PrincipalModel {
  std::string kind;  ///< "viscous" or "relaxation"
  int N = 2;
  double Lambda = 0;        ///< genuine nonlinearity at u0
  double beta0 = 1;         ///< principal diffusion at u0
  double fast_threshold = 0;  ///< |Re mu| at or above this counts as fast
  double expansion_radius = 0;  ///< largest |lambda| for which the block matching is trusted
  std::function<PrincipalData(const Vec& y, const Vec& dy)> at;
};

PrincipalModel principal_model(const ViscousSystem& sys);
PrincipalModel principal_model(const RelaxationSystem& sys);

enum class BlockKind { NuMinus = 0, RhoMinus = 1, Principal = 2, RhoPlus = 3, NuPlus = 4 };
std::string to_string(BlockKind k);

/// Column basis R-hat and rows L = R-hat^{-1} on a grid, ordered by blocks (nu-, rho-, (eta,z), rho+, nu+).
struct BlockBasis {
  cplx lambda = 0;
  int N = 0;
  std::vector<BlockKind> kinds;  ///< per column
  std::array<int, 5> sizes{};    ///< block sizes in the order above
  int principal_offset = 0;
  Vec x;
  std::vector<CMat> R, dR, L;
  std::vector<CVec> mu;  ///< eigenvalue of each transverse column (principal entries are 0)
  bool normalized = false;
  double sup_biorthogonality_error() const;
};

/// Exact spectral block basis of A(x, lambda) along the profile, sampled on at most max_points nodes.
BlockBasis build_block_basis(const EigenvalueSystem& es, const PrincipalModel& pm, cplx lambda,
                             int max_points = 1601);

/// alpha' = -(l_j r_j') alpha per transverse mode and alpha' = -(L0 R0') alpha on the principal block,
/// with alpha(0) = I.
BlockBasis normalize_basis(const BlockBasis& basis);

/// sup over the grid of |l_j r_j'| and |L0 R0'| (zero after normalization).
double normalization_defect(const BlockBasis& basis);

struct ReducedSystem {
  cplx lambda = 0;
  Vec x;
  std::vector<CMat> M;          ///< block-diagonal part of L A R
  std::vector<CMat> Theta;      ///< coupling, so that L (A R - R') = M + delta Theta
  std::vector<CMat> conjugated; ///< L (A R - R')
  Vec delta;                    ///< |eta'| = |l_p u'|
  std::vector<BlockKind> kinds;
  std::array<int, 5> sizes{};
  int principal_offset = 0;
  double sup_theta = 0;
  double C_delta = 0;       ///< sup delta e^{theta_fit |x|} / eps^2
  double theta_delta = 0;   ///< fitted decay rate of delta in x units
  double conjugacy_residual = 0;
  CMat M0(Eigen::Index i) const { return M[i].block(principal_offset, principal_offset, 2, 2); }
};

ReducedSystem block_diagonalize(const EigenvalueSystem& es, const PrincipalModel& pm, const BlockBasis& basis,
                                 double eps);

struct BurgersBlockReport {
  Mat sup_diff = Mat::Zero(2, 2);  ///< sup_x |M0 - M0~| entrywise
  double beta = 1;
};

/// Compare M0 with M0~ = [[0, 1], [lambda/beta, a_p/beta]] along the grid.
BurgersBlockReport compare_burgers_block(const ReducedSystem& reduced, const EigenvalueSystem& es,
                                         const PrincipalModel& pm);

/// Declared orders [[|l|, |l| + e], [|l| e, |l| + e^2]] of the M0 - M0~ entries.
Mat declared_block_orders(cplx lambda, double eps);

struct RatioTest {
  Mat measured;   ///< d(eps) / d(eps/2)
  Mat declared;   ///< b(eps) / b(eps/2)
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> pass;
  bool all_pass = true;
};

/// Entries pass when the measured ratio is at least half the declared one, or both values sit below noise.
RatioTest block_ratio_test(const Mat& d_eps, const Mat& d_half, const Mat& b_eps, const Mat& b_half,
                           double noise = 1e-12);

/// Relaxation identities at a state, with s_p scaled so that l_p E s_p = 1 and s~_p s_p = 1.
struct KeyFacts {
  double E_residual = 0;          ///< |E s_p - r_p|
  double F_residual = 0;          ///< |F s_p + q_v^{-1} q_u r_p|
  double H_residual = 0;          ///< |s~_p H~ - l_p / beta|
  double H_residual_literal = 0;  ///< |s~_p H~ + l_p / beta|
  double gu_scale = 0;            ///< c with s_p = c g~_u r_p
};

KeyFacts relaxation_key_facts(const RelaxationSystem& sys, const Vec& u, const Vec& v);

/// Z1' = M1 Z1 + delta (Theta11 Z1 + Theta12 Z2), Z2' = M2 Z2 + delta (Theta21 Z1 + Theta22 Z2).
struct TrackingProblem {
  int k1 = 1, k2 = 1;
  double x_lo = -20, x_hi = 20;
  std::function<CMat(double)> M1, M2;
  std::function<double(double)> delta;
  std::function<CMat(double)> Theta;  ///< (k1 + k2) square, block order (1, 2)
};

struct TrackingOptions {
  double h = 0.01;
  double max_ratio = 0.1;  ///< GapTooSmall when delta-hat / eta-hat reaches this
  int max_iter = 200;
  double tol = 1e-14;
  double C = 4;            ///< certificate constant
};

struct TrackingResult {
  Vec x;
  std::vector<CMat> Phi2;  ///< Z2 = Phi2 Z1 on the M1-invariant graph
  std::vector<CMat> Phi1;  ///< Z1 = Phi1 Z2 on the M2-invariant graph
  double sup_Phi1 = 0, sup_Phi2 = 0;
  double delta_hat = 0, eta_hat = 0;
  int iterations = 0;
  bool certified = false;  ///< sup |Phi| <= C delta-hat / eta-hat
  CMat Phi2_at(double x) const;
};

TrackingResult tracking_reduce(const TrackingProblem& problem, const TrackingOptions& opt = {});

/// Constant system [[1, delta], [delta, -1]].
TrackingProblem constant_tracking_example(double delta, double L = 20);
/// (sqrt(1 + delta^2) - 1) / delta
double constant_tracking_slope(double delta);

/// Random block system with gap eta and coupling delta0 e^{-|x|} Theta, Theta entries in [-1, 1].
TrackingProblem random_tracking_problem(std::mt19937_64& rng, double eta, double delta0);

/// Largest graph distance |Z2 - Phi2 Z1| / |Z| after one RK4 step from random graph points.
double graph_invariance_drift(const TrackingProblem& problem, const TrackingResult& result, int samples,
                              std::mt19937_64& rng);

/// Split a reduced system: block 1 collects the columns with the given kinds.
TrackingProblem tracking_problem(const ReducedSystem& reduced, const std::vector<BlockKind>& first);

enum class Regime { I, II, III };
std::string to_string(Regime r);

struct RegimeSegment {
  Regime tag = Regime::I;
  double lo = 0, hi = 0;  ///< |lambda| range in original coordinates
  double hat_lo = 0, hat_hi = 0;  ///< rescaled range
  double Lambda = 1, beta = 1, eps = 1;
  double x_to_hat(double x) const { return Lambda * eps * x / beta; }
  double x_from_hat(double xr) const { return beta * xr / (Lambda * eps); }
  cplx lambda_to_hat(cplx l) const { return beta * l / (Lambda * Lambda * eps * eps); }
  cplx lambda_from_hat(cplx lh) const { return Lambda * Lambda * eps * eps * lh / beta; }
  cplx z_to_hat(cplx z) const { return beta * z / (Lambda * eps); }
  cplx z_from_hat(cplx zh) const { return Lambda * eps * zh / beta; }
};

struct RegimeReport {
  std::vector<RegimeSegment> segments;
  double C = 4;
  // Regime I measurements (rescaled units)
  double phi_rho_infinity = 0;  ///< |delta Theta| at x = +-L on rho rows
  double coupling_C = 0;        ///< sup delta |Theta| e^{theta |x|} / ((1 + |lambda|) eps)
  double coupling_theta = 0;    ///< fitted decay rate in rescaled x
  double forcing_C = 0;         ///< sup |N| e^{theta |x|}
  double superslow_C = 0;       ///< sup |M_rho| / (eps |lambda-hat|), rescaled
  // Regime II
  double burgers_root_gap = 0;  ///< min |Re(mu+ - mu-)| / |lambda-hat|^{1/2} of [[0,1],[l, eta-bar]]
};

/// Partition (r_min, R_max) into regimes I-III and measure the regime-I normal-form constants.
RegimeReport regime_partition_and_normal_form(double eps, double C, double r_min, double R_max,
                                              const PrincipalModel& pm, const EigenvalueSystem* es = nullptr,
                                              int samples = 6);

}  // namespace evanskit
