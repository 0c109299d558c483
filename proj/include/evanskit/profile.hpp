#pragma once

#include "evanskit/model.hpp"

#include <functional>
#include <string>
#include <vector>

namespace evanskit {

/// Stationary traveling wave on a uniform grid over [-L, L], C^1 interpolated.
struct ShockProfile {
  std::string system;
  int n = 1;  ///< conserved components
  int r = 0;  ///< relaxation components (0 for viscous profiles)
  Vec x;      ///< uniform grid
  Mat Y;      ///< (n + r) x size(x) states (u stacked over v)
  Mat dY;     ///< derivatives at the grid points
  Vec u_minus, u_plus, v_minus, v_plus;
  double eps = 0;        ///< half-jump in the principal coordinate
  double L = 0;
  double tail_rate = 0;  ///< fitted exponential decay rate in x units
  double tail_r2 = 0;    ///< goodness of the tail fit
  double residual = 0;   ///< collocation defect (sup norm)
  /// Profile ODE Y' = rhs(Y), used for second derivatives and cache reloads.
  std::function<Vec(const Vec&)> rhs;

  Eigen::Index size() const { return x.size(); }
  double h() const { return x[1] - x[0]; }
  Vec state(double xq) const;
  Vec dstate(double xq) const;
  /// Y'' = Drhs(Y) Y', by a centered directional difference.
  Vec ddstate(double xq) const;
  Vec u(double xq) const { return state(xq).head(n); }
  Vec du(double xq) const { return dstate(xq).head(n); }
  /// State at x, continued beyond [-L, L] by the endpoint values.
  Vec endpoint(int side) const;
};

/// u = -eps tanh(eps x / 2) for u_t + (u^2/2)_x = u_xx.
ShockProfile burgers_profile(double eps, double L, double h = 0.0);

/// Nontrivial root u+ of f(u+) = f(u-) reached by Newton from u- - 2 eps r_p.
Vec hugoniot_endpoint(const ViscousSystem& sys, const Vec& u_minus, double eps);
Vec hugoniot_endpoint(const RelaxationSystem& sys, const Vec& u_minus, double eps);

/// Domain half-length giving |u(±L) - u±| below tail_tol * eps.
double default_domain_length(double eps, double tail_tol = 1e-8);
double default_grid_spacing(double eps);

/// Solve B(u) u' = f(u) - f(u-) by Hermite-Simpson collocation.
ShockProfile solve_viscous_profile(const ViscousSystem& sys, const Vec& u_minus, double eps,
                                   double L, double tol = 1e-10);

/// Solve f~(u,v) = f~(u-,v-), g~(u,v)' = q(u,v) by Hermite-Simpson collocation.
ShockProfile solve_relaxation_profile(const RelaxationSystem& sys, const Vec& u_minus, double eps,
                                      double L, double tol = 1e-10);

struct RescaledProfile {
  Vec xr;       ///< rescaled coordinate Lambda eps x / beta
  Vec eta;      ///< l_p (u - (u- + u+)/2) / eps
  Vec eta_bar;  ///< -tanh(xr / 2)
};

struct RescaleReport {
  RescaledProfile rescaled;
  double sup_eta_error = 0;   ///< sup |eta - eta_bar|
  double theta_hat = 0;       ///< tail rate in rescaled units
  double tail_r2 = 0;
  double sup_speed_error = 0; ///< sup |a_p(u)/eps - eta_bar|
  bool monotone = false;      ///< eta strictly decreasing
};

RescaleReport rescale_and_compare(const ShockProfile& profile, double Lambda, double beta,
                                  const Eigen::RowVectorXd& lp,
                                  const std::function<double(const Vec&)>& principal_speed);
/// Uses Lambda, beta and l_p evaluated at u-.
RescaleReport rescale_and_compare(const ShockProfile& profile, const ViscousSystem& sys);
RescaleReport rescale_and_compare(const ShockProfile& profile, const RelaxationSystem& sys);

/// Sup-norm ODE residual of the interpolant at interval midpoints.
double midpoint_residual(const ShockProfile& profile);

/// Fit log|Y(x) - Y±| ~ c - theta |x| on the outer half of the domain.
void fit_tail(ShockProfile& profile);

void write_profile_cache(const ShockProfile& profile, const std::string& path);
/// Reload a cached profile and reattach the profile ODE.
ShockProfile read_profile_cache(const std::string& path, const std::function<Vec(const Vec&)>& rhs);

/// Profile ODE right-hand sides.
std::function<Vec(const Vec&)> viscous_profile_rhs(const ViscousSystem& sys, const Vec& u_minus);
std::function<Vec(const Vec&)> relaxation_profile_rhs(const RelaxationSystem& sys);

}  // namespace evanskit
