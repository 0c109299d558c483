#pragma once

#include "evanskit/evalsys.hpp"
#include "evanskit/subspace.hpp"

#include <functional>
#include <string>
#include <vector>

namespace evanskit {

struct EvansOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double reortho_tol = 1e-8;   ///< re-orthonormalize when |Q*Q - I| exceeds this
  bool force_exterior = false; ///< use the exterior-power flow even for N <= 4
};

/// Frames spanning the stable subspace of A+ and the unstable subspace of A- at lambda.
struct EvansFrames {
  CMat plus;
  CMat minus;
};

struct EvansSample {
  cplx lambda = 0;
  cplx D = 0;            ///< phase-carrying value; the analytic value is D exp(logscale)
  double logscale = 0;
  double error_estimate = 0;
  double conditioning = 0;  ///< smallest singular value of the juxtaposed unit frames
  long steps = 0;
  double log_abs() const { return std::log(std::abs(D)) + logscale; }
  cplx value() const { return D * std::exp(logscale); }
};

/// Frames at lambda computed directly from ordered Schur forms of A±.
EvansFrames asymptotic_frames(const EigenvalueSystem& es, cplx lambda);

EvansSample evans_evaluate(const EigenvalueSystem& es, cplx lambda, const EvansFrames& frames,
                           const EvansOptions& opt = {});

struct Contour {
  std::string geometry;                 ///< "half-annulus", "circle", "rectangle"
  std::vector<std::pair<std::string, double>> parameters;
  std::function<cplx(double)> param;    ///< t in [0, 1], param(1) == param(0)
  std::vector<double> t;                ///< initial samples in [0, 1)
  bool closed = true;
  std::vector<cplx> points() const;
};

/// Counterclockwise boundary of {Re lambda >= 0, r_min <= |lambda| <= R_max}, starting at R_max.
Contour half_annulus(double r_min, double R_max, int points);
/// Counterclockwise circle starting at center + radius.
Contour circle(cplx center, double radius, int points);
/// Counterclockwise rectangle boundary starting at its right-edge midpoint.
Contour rectangle(cplx lo, cplx hi, int points);
/// Contour with every parameter interval halved.
Contour refined(const Contour& c);

struct WindingOptions {
  EvansOptions evans;
  ContinuationOptions continuation;
  int jobs = 0;            ///< 0 picks the hardware concurrency
  int max_depth = 12;
  double zero_floor = 1e-8;  ///< relative to the contour maximum of |D|
  std::function<cplx(cplx)> gauge;  ///< optional analytic factor applied to D
};

struct WindingResult {
  int winding = 0;
  double phase_total = 0;
  double min_abs_D = 0;  ///< relative to the contour maximum
  double max_log_abs_D = 0;
  cplx argmin_lambda = 0;
  int depth = 0;
  std::vector<EvansSample> samples;  ///< in contour order, closing sample excluded
};

WindingResult winding_number(const EigenvalueSystem& es, const Contour& contour,
                             const WindingOptions& opt = {});

/// Winding of an arbitrary analytic function (test doubles and gauges).
WindingResult winding_number(const std::function<cplx(cplx)>& f, const Contour& contour,
                             const WindingOptions& opt = {});

/// Map fn over [0, n) on up to `jobs` threads, collecting results in order.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

struct VerdictOptions {
  double r_min = -1;  ///< negative: 1e-3 min(1, eps^2)
  double R_max = -1;  ///< negative: 10 (1 + sup_x |A(x, 1)|^2)
  int points = 256;
  WindingOptions winding;
};

struct Verdict {
  enum class Kind { Stable, Unstable, Inconclusive } kind = Kind::Inconclusive;
  int count = 0;
  std::string message;
  double r_min = 0, R_max = 0;
  double small_arc_min_abs_D = 0;  ///< relative min |D| over the inner arc samples
  WindingResult winding;
  Contour contour;
};

std::string to_string(Verdict::Kind k);

double default_r_min(double eps);
double default_R_max(const EigenvalueSystem& es);

Verdict stability_verdict(const EigenvalueSystem& es, double eps, const VerdictOptions& opt = {});

struct ConvergenceMember {
  double eps;
  EigenvalueSystem es;
  double lambda_scale;  ///< lambda = lambda_scale * lambda_hat
};

struct ConvergenceReport {
  std::vector<double> eps;
  std::vector<double> sup_diff;
  double order = 0;
};

/// sup over the rescaled contour of |D^eps / D^eps(anchor) - D0 / D0(anchor)| and its fitted order.
ConvergenceReport evans_convergence_study(const std::vector<ConvergenceMember>& family,
                                          const EigenvalueSystem& limit, const Contour& contour,
                                          const WindingOptions& opt = {});

/// Least-squares slope of log y against log x.
double fitted_order(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace evanskit
