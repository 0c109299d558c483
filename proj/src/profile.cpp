#include "evanskit/profile.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace evanskit {

namespace {

struct HermiteBasis {
  Eigen::Index i;
  double t, h;
};

HermiteBasis locate(const Vec& x, double xq) {
  const Eigen::Index m = x.size();
  const double h = x[1] - x[0];
  xq = std::clamp(xq, x[0], x[m - 1]);
  auto i = static_cast<Eigen::Index>(std::floor((xq - x[0]) / h));
  i = std::clamp<Eigen::Index>(i, 0, m - 2);
  return {i, (xq - x[i]) / h, h};
}

/// Jacobian of a vector field by centered differences.
Mat numeric_jacobian(const std::function<Vec(const Vec&)>& F, const Vec& y) {
  const Eigen::Index d = y.size();
  Mat J(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double s = 1e-7 * std::max(1.0, std::abs(y[j]));
    Vec yp = y, ym = y;
    yp[j] += s;
    ym[j] -= s;
    J.col(j) = (F(yp) - F(ym)) / (2 * s);
  }
  return J;
}

/// Real row vectors spanning the left invariant subspace for eigenvalues
/// with Re > tol (sign = +1) or Re < -tol (sign = -1).
Mat left_rows(const Mat& J, int sign, double tol) {
  Eigen::EigenSolver<Mat> es(J, true);
  const Eigen::MatrixXcd Vinv = es.eigenvectors().inverse();
  std::vector<Eigen::RowVectorXd> rows;
  for (Eigen::Index k = 0; k < J.rows(); ++k) {
    const cplx mu = es.eigenvalues()[k];
    if (sign * mu.real() <= tol) continue;
    if (mu.imag() < -1e-12) continue;
    rows.push_back(Vinv.row(k).real());
    if (mu.imag() > 1e-12) rows.push_back(Vinv.row(k).imag());
  }
  Mat out(rows.size(), J.cols());
  for (size_t k = 0; k < rows.size(); ++k) out.row(k) = rows[k];
  return out;
}

struct Bvp {
  int d;
  std::function<Vec(const Vec&)> F;
  /// Residuals (size d) of the boundary and phase conditions from (Y_first, Y_mid, Y_last).
  std::function<Vec(const Vec&, const Vec&, const Vec&)> bc;
};

Vec collocation_residual(const Bvp& p, const Vec& x, const Vec& z, Mat& Fv) {
  const int d = p.d;
  const Eigen::Index m = x.size(), M = m - 1;
  Vec res(d * m);
  Fv.resize(d, m);
  for (Eigen::Index i = 0; i < m; ++i) Fv.col(i) = p.F(z.segment(i * d, d));
  res.head(d) = p.bc(z.head(d), z.segment((M / 2) * d, d), z.tail(d));
  for (Eigen::Index i = 0; i < M; ++i) {
    const double h = x[i + 1] - x[i];
    const Vec yi = z.segment(i * d, d), yj = z.segment((i + 1) * d, d);
    const Vec ym = 0.5 * (yi + yj) + (h / 8) * (Fv.col(i) - Fv.col(i + 1));
    res.segment(d + i * d, d) = yj - yi - (h / 6) * (Fv.col(i) + 4 * p.F(ym) + Fv.col(i + 1));
  }
  return res;
}

Mat solve_collocation(const Bvp& p, const Vec& x, Mat Y, double tol, double& defect) {
  const int d = p.d;
  const Eigen::Index m = x.size(), M = m - 1;
  const Eigen::Index nz = d * m;
  Vec z = Eigen::Map<Vec>(Y.data(), nz);
  Mat Fv;
  Vec res = collocation_residual(p, x, z, Fv);
  double rnorm = res.lpNorm<Eigen::Infinity>();
  const Mat I = Mat::Identity(d, d);
  for (int iter = 0; iter < 40 && rnorm > tol; ++iter) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(M) * 2 * d * d + 3 * d * d);
    // Boundary rows: differentiate bc in each of its three node arguments.
    const Eigen::Index nodes[3] = {0, M / 2, M};
    for (int a = 0; a < 3; ++a) {
      for (int j = 0; j < d; ++j) {
        Vec zp = z, zm = z;
        const double s = 1e-7 * std::max(1.0, std::abs(z[nodes[a] * d + j]));
        zp[nodes[a] * d + j] += s;
        zm[nodes[a] * d + j] -= s;
        const Vec col = (p.bc(zp.head(d), zp.segment((M / 2) * d, d), zp.tail(d)) -
                         p.bc(zm.head(d), zm.segment((M / 2) * d, d), zm.tail(d))) /
                        (2 * s);
        for (int r = 0; r < d; ++r)
          if (col[r] != 0.0) trip.emplace_back(r, nodes[a] * d + j, col[r]);
      }
    }
    std::vector<Mat> J(m);
    for (Eigen::Index i = 0; i < m; ++i) J[i] = numeric_jacobian(p.F, z.segment(i * d, d));
    for (Eigen::Index i = 0; i < M; ++i) {
      const double h = x[i + 1] - x[i];
      const Vec yi = z.segment(i * d, d), yj = z.segment((i + 1) * d, d);
      const Vec ym = 0.5 * (yi + yj) + (h / 8) * (Fv.col(i) - Fv.col(i + 1));
      const Mat Jm = numeric_jacobian(p.F, ym);
      const Mat Ai = -I - (h / 6) * (J[i] + 4 * Jm * (0.5 * I + (h / 8) * J[i]));
      const Mat Aj = I - (h / 6) * (J[i + 1] + 4 * Jm * (0.5 * I - (h / 8) * J[i + 1]));
      const Eigen::Index row0 = d + i * d;
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) {
          trip.emplace_back(row0 + r, i * d + c, Ai(r, c));
          trip.emplace_back(row0 + r, (i + 1) * d + c, Aj(r, c));
        }
    }
    Eigen::SparseMatrix<double> Jac(nz, nz);
    Jac.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(Jac);
    if (lu.info() != Eigen::Success) throw NoConnection("singular collocation Jacobian");
    const Vec dz = lu.solve(res);
    if (!dz.allFinite()) throw NoConnection("collocation Newton step is not finite");
    double step = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 20; ++ls) {
      const Vec zt = z - step * dz;
      Mat Ft;
      const Vec rt = collocation_residual(p, x, zt, Ft);
      const double nt = rt.lpNorm<Eigen::Infinity>();
      if (std::isfinite(nt) && nt < rnorm) {
        z = zt;
        res = rt;
        Fv = Ft;
        rnorm = nt;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  defect = rnorm;
  if (!(rnorm <= tol)) {
    std::ostringstream os;
    os << "collocation defect " << rnorm << " above tolerance " << tol;
    throw NoConnection(os.str());
  }
  return Eigen::Map<Mat>(z.data(), d, m);
}

Vec uniform_grid(double L, double h) {
  auto M = static_cast<Eigen::Index>(std::ceil(2 * L / h));
  if (M % 2) ++M;
  M = std::max<Eigen::Index>(M, 8);
  return Vec::LinSpaced(M + 1, -L, L);
}

Mat tanh_guess(const Vec& x, const Vec& Ym, const Vec& Yp, double kappa) {
  Mat Y(Ym.size(), x.size());
  const Vec mid = 0.5 * (Ym + Yp), half = 0.5 * (Ym - Yp);
  for (Eigen::Index i = 0; i < x.size(); ++i) Y.col(i) = mid - std::tanh(kappa * x[i]) * half;
  return Y;
}

template <typename Sys>
Vec newton_endpoint(const Sys& sys, const std::function<Vec(const Vec&)>& f,
                    const std::function<Mat(const Vec&)>& Df, const Vec& u_minus, double eps) {
  if (!(eps > 0) || eps > sys.radius)
    throw NoEndpoint("amplitude outside the neighborhood radius");
  const auto d0 = characteristic_decomposition(Df(sys.u0));
  const Vec rp = d0.R.col(d0.p);
  double Lambda = 1.0;
  try {
    Lambda = genuine_nonlinearity_and_diffusion(sys, sys.u0).Lambda;
  } catch (const Error&) {
  }
  // Reflect u- through u0 along r_p; fall back to eps when u- sits on u0.
  double s = d0.L.row(d0.p).dot(u_minus - sys.u0);
  if (std::abs(s) < 0.1 * eps) s = eps * (Lambda >= 0 ? 1.0 : -1.0);
  Vec u = u_minus - 2 * s * rp;
  const Vec target = f(u_minus);
  auto outside = [&](const Vec& w) { return (w - sys.u0).norm() > sys.radius * (1 + 1e-12); };
  if (outside(u)) throw NoEndpoint("initial guess leaves the neighborhood of u0");
  for (int it = 0; it < 60; ++it) {
    const Vec F = f(u) - target;
    if (F.norm() < 1e-14 * std::max(1.0, target.norm())) break;
    Eigen::FullPivLU<Mat> lu(Df(u));
    if (!lu.isInvertible()) throw NoEndpoint("singular Jacobian during Newton iteration");
    u -= lu.solve(F);
    if (!u.allFinite() || outside(u)) throw NoEndpoint("Newton iterate leaves the neighborhood of u0");
  }
  if ((f(u) - target).norm() > 1e-12 * std::max(1.0, target.norm()))
    throw NoEndpoint("Newton iteration did not converge");
  if ((u - u_minus).norm() < 1e-3 * eps) throw NoEndpoint("Newton converged to the trivial root u-");
  return u;
}

double linear_fit_slope(const std::vector<double>& t, const std::vector<double>& y, double& r2) {
  const double n = static_cast<double>(t.size());
  double st = 0, sy = 0, stt = 0, sty = 0, syy = 0;
  for (size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sy += y[i];
    stt += t[i] * t[i];
    sty += t[i] * y[i];
    syy += y[i] * y[i];
  }
  const double ct = stt - st * st / n, cy = syy - sy * sy / n, cty = sty - st * sy / n;
  r2 = (ct > 0 && cy > 0) ? cty * cty / (ct * cy) : 0.0;
  return ct > 0 ? cty / ct : 0.0;
}

ShockProfile finish_profile(ShockProfile p) {
  p.dY.resize(p.Y.rows(), p.Y.cols());
  for (Eigen::Index i = 0; i < p.size(); ++i) p.dY.col(i) = p.rhs(p.Y.col(i));
  fit_tail(p);
  return p;
}

}  // namespace

Vec ShockProfile::state(double xq) const {
  const auto b = locate(x, xq);
  const double t = b.t, t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * Y.col(b.i) + (t3 - 2 * t2 + t) * b.h * dY.col(b.i) +
         (-2 * t3 + 3 * t2) * Y.col(b.i + 1) + (t3 - t2) * b.h * dY.col(b.i + 1);
}

Vec ShockProfile::dstate(double xq) const {
  const auto b = locate(x, xq);
  const double t = b.t, t2 = t * t;
  return ((6 * t2 - 6 * t) * Y.col(b.i) + (-6 * t2 + 6 * t) * Y.col(b.i + 1)) / b.h +
         (3 * t2 - 4 * t + 1) * dY.col(b.i) + (3 * t2 - 2 * t) * dY.col(b.i + 1);
}

Vec ShockProfile::ddstate(double xq) const {
  const Vec y = state(xq), dy = dstate(xq);
  const double nd = dy.norm();
  if (nd == 0.0) return Vec::Zero(y.size());
  const double s = 1e-6 * std::max(1.0, y.norm()) / nd;
  return (rhs(y + s * dy) - rhs(y - s * dy)) / (2 * s);
}

Vec ShockProfile::endpoint(int side) const {
  Vec e(n + r);
  if (side < 0) {
    e.head(n) = u_minus;
    if (r) e.tail(r) = v_minus;
  } else {
    e.head(n) = u_plus;
    if (r) e.tail(r) = v_plus;
  }
  return e;
}

double default_domain_length(double eps, double tail_tol) {
  return std::log(2.0 / tail_tol) / eps;
}

double default_grid_spacing(double eps) { return 0.01 / std::min(eps, 1.0); }

ShockProfile burgers_profile(double eps, double L, double h) {
  ShockProfile p;
  p.system = "burgers";
  p.n = 1;
  p.r = 0;
  p.eps = eps;
  p.L = L;
  p.x = uniform_grid(L, h > 0 ? h : default_grid_spacing(eps));
  p.Y.resize(1, p.x.size());
  p.dY.resize(1, p.x.size());
  for (Eigen::Index i = 0; i < p.x.size(); ++i) {
    const double t = std::tanh(eps * p.x[i] / 2);
    p.Y(0, i) = -eps * t;
    p.dY(0, i) = -0.5 * eps * eps * (1 - t * t);
  }
  p.u_minus = Vec::Constant(1, eps);
  p.u_plus = Vec::Constant(1, -eps);
  p.rhs = [eps](const Vec& u) { return Vec::Constant(1, 0.5 * (u[0] * u[0] - eps * eps)); };
  fit_tail(p);
  return p;
}

Vec hugoniot_endpoint(const ViscousSystem& sys, const Vec& u_minus, double eps) {
  return newton_endpoint(sys, sys.f, sys.Df, u_minus, eps);
}

Vec hugoniot_endpoint(const RelaxationSystem& sys, const Vec& u_minus, double eps) {
  return newton_endpoint(
      sys, [&](const Vec& u) { return sys.f_eq(u); }, [&](const Vec& u) { return sys.Df_eq(u); },
      u_minus, eps);
}

std::function<Vec(const Vec&)> viscous_profile_rhs(const ViscousSystem& sys, const Vec& u_minus) {
  const Vec fm = sys.f(u_minus);
  return [sys, fm](const Vec& u) -> Vec { return sys.B(u).partialPivLu().solve(Vec(sys.f(u) - fm)); };
}

std::function<Vec(const Vec&)> relaxation_profile_rhs(const RelaxationSystem& sys) {
  return [sys](const Vec& y) -> Vec {
    const Vec u = y.head(sys.n), v = y.tail(sys.r);
    Vec rhs = Vec::Zero(sys.n + sys.r);
    rhs.tail(sys.r) = sys.q(u, v);
    return sys.flux_jacobian(u, v).partialPivLu().solve(rhs);
  };
}

namespace {

/// Shared collocation setup: projection conditions at ±L plus phase.
ShockProfile solve_connection(ShockProfile p, const Bvp& base, const Eigen::RowVectorXd& lp,
                              const Mat& extra_left, const std::function<Vec(const Vec&)>& extra_res,
                              double kappa, double tol) {
  const Vec Ym = p.endpoint(-1), Yp = p.endpoint(+1);
  const Mat Jm = numeric_jacobian(base.F, Ym), Jp = numeric_jacobian(base.F, Yp);
  const double ztol = 1e-9 * std::max({1.0, Jm.norm(), Jp.norm()});
  const Mat Sm = left_rows(Jm, -1, ztol);  // stable directions at u-: must be absent
  const Mat Up = left_rows(Jp, +1, ztol);  // unstable directions at u+: must be absent
  const int nbc = static_cast<int>(Sm.rows() + Up.rows() + extra_left.rows()) + 1;
  if (nbc != base.d) {
    std::ostringstream os;
    os << "Lax count fails: " << Sm.rows() << " stable modes at u-, " << Up.rows()
       << " unstable modes at u+ for a " << base.d << "-dimensional profile ODE";
    throw NoConnection(os.str());
  }
  const Vec mid = 0.5 * (p.u_minus + p.u_plus);
  const int n = p.n;
  Bvp prob = base;
  prob.bc = [=](const Vec& y0, const Vec& ymid, const Vec& y1) {
    Vec r(base.d);
    Eigen::Index k = 0;
    r.segment(k, Sm.rows()) = Sm * (y0 - Ym);
    k += Sm.rows();
    if (extra_left.rows()) {
      r.segment(k, extra_left.rows()) = extra_res(y0);
      k += extra_left.rows();
    }
    r.segment(k, Up.rows()) = Up * (y1 - Yp);
    k += Up.rows();
    r[k] = lp.dot(ymid.head(n) - mid);
    return r;
  };
  const Mat guess = tanh_guess(p.x, Ym, Yp, kappa);
  p.Y = solve_collocation(prob, p.x, guess, tol, p.residual);
  p.rhs = base.F;
  return finish_profile(std::move(p));
}

}  // namespace

ShockProfile solve_viscous_profile(const ViscousSystem& sys, const Vec& u_minus, double eps,
                                   double L, double tol) {
  ShockProfile p;
  p.system = sys.name;
  p.n = sys.n;
  p.r = 0;
  p.L = L;
  p.u_minus = u_minus;
  p.u_plus = hugoniot_endpoint(sys, u_minus, eps);
  const auto d0 = characteristic_decomposition(sys.Df(sys.u0));
  const Eigen::RowVectorXd lp = d0.L.row(d0.p);
  p.eps = 0.5 * lp.dot(p.u_minus - p.u_plus);
  p.x = uniform_grid(L, default_grid_spacing(std::abs(p.eps)));
  const auto nd = genuine_nonlinearity_and_diffusion(sys, sys.u0);
  const double kappa = std::abs(nd.Lambda * p.eps / (2 * nd.beta));
  Bvp base{sys.n, viscous_profile_rhs(sys, u_minus), {}};
  return solve_connection(std::move(p), base, lp, Mat(0, sys.n), {}, kappa, tol);
}

ShockProfile solve_relaxation_profile(const RelaxationSystem& sys, const Vec& u_minus, double eps,
                                      double L, double tol) {
  const auto rep = check_hypotheses_relaxation(sys);
  if (!rep.get("subcharacteristic").pass)
    throw NoConnection("subcharacteristic condition fails: " + rep.get("subcharacteristic").witness);
  ShockProfile p;
  p.system = sys.name;
  p.n = sys.n;
  p.r = sys.r;
  p.L = L;
  p.u_minus = u_minus;
  p.u_plus = hugoniot_endpoint(sys, u_minus, eps);
  p.v_minus = sys.vstar(p.u_minus);
  p.v_plus = sys.vstar(p.u_plus);
  const auto d0 = characteristic_decomposition(sys.Df_eq(sys.u0));
  const Eigen::RowVectorXd lp = d0.L.row(d0.p);
  p.eps = 0.5 * lp.dot(p.u_minus - p.u_plus);
  p.x = uniform_grid(L, default_grid_spacing(std::abs(p.eps)));
  const auto nd = genuine_nonlinearity_and_diffusion(sys, sys.u0);
  const double kappa = std::abs(nd.Lambda * p.eps / (2 * nd.beta));
  Bvp base{sys.n + sys.r, relaxation_profile_rhs(sys), {}};
  const Vec ftm = sys.ft(p.u_minus, p.v_minus);
  const int n = sys.n;
  auto flux_res = [sys, ftm, n](const Vec& y) -> Vec {
    return sys.ft(y.head(n), y.tail(y.size() - n)) - ftm;
  };
  return solve_connection(std::move(p), base, lp, Mat(sys.n, sys.n + sys.r), flux_res, kappa, tol);
}

void fit_tail(ShockProfile& p) {
  const Vec Ym = p.endpoint(-1), Yp = p.endpoint(+1);
  double rate = std::numeric_limits<double>::infinity(), r2 = 1.0;
  for (int side : {-1, 1}) {
    std::vector<double> t, y;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double xi = p.x[i];
      if (side * xi < p.L / 2) continue;
      const double dist = (p.Y.col(i) - (side < 0 ? Ym : Yp)).norm();
      if (dist <= 1e-14 * std::max(1.0, Ym.norm())) continue;
      t.push_back(std::abs(xi));
      y.push_back(std::log(dist));
    }
    if (t.size() < 3) continue;
    double fit_r2 = 0;
    const double slope = linear_fit_slope(t, y, fit_r2);
    rate = std::min(rate, -slope);
    r2 = std::min(r2, fit_r2);
  }
  p.tail_rate = std::isfinite(rate) ? rate : 0.0;
  p.tail_r2 = r2;
}

double midpoint_residual(const ShockProfile& p) {
  double out = 0;
  for (Eigen::Index i = 0; i + 1 < p.size(); ++i) {
    const double xm = 0.5 * (p.x[i] + p.x[i + 1]);
    out = std::max(out, (p.dstate(xm) - p.rhs(p.state(xm))).lpNorm<Eigen::Infinity>());
  }
  return out;
}

RescaleReport rescale_and_compare(const ShockProfile& profile, double Lambda, double beta,
                                  const Eigen::RowVectorXd& lp,
                                  const std::function<double(const Vec&)>& principal_speed) {
  RescaleReport rep;
  const Vec mid = 0.5 * (profile.u_minus + profile.u_plus);
  const double eps = 0.5 * lp.dot(profile.u_minus - profile.u_plus);
  const double scale = Lambda * eps / beta;
  const Eigen::Index m = profile.size();
  auto& rs = rep.rescaled;
  rs.xr = scale * profile.x;
  rs.eta.resize(m);
  rs.eta_bar.resize(m);
  rep.monotone = true;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Vec u = profile.Y.col(i).head(profile.n);
    rs.eta[i] = lp.dot(u - mid) / eps;
    rs.eta_bar[i] = -std::tanh(rs.xr[i] / 2);
    rep.sup_eta_error = std::max(rep.sup_eta_error, std::abs(rs.eta[i] - rs.eta_bar[i]));
    rep.sup_speed_error =
        std::max(rep.sup_speed_error, std::abs(principal_speed(u) / eps - rs.eta_bar[i]));
    if (i > 0 && !(rs.eta[i] < rs.eta[i - 1])) rep.monotone = false;
  }
  rep.theta_hat = profile.tail_rate / std::abs(scale);
  rep.tail_r2 = profile.tail_r2;
  return rep;
}

namespace {

template <typename Jac>
std::function<double(const Vec&)> principal_speed_fn(Jac jac, const Vec& u0) {
  const int p = characteristic_decomposition(jac(u0)).p;
  return [jac, p](const Vec& u) { return characteristic_decomposition(jac(u)).a[p]; };
}

}  // namespace

RescaleReport rescale_and_compare(const ShockProfile& profile, const ViscousSystem& sys) {
  const auto d = characteristic_decomposition(sys.Df(profile.u_minus));
  const auto nd = genuine_nonlinearity_and_diffusion(sys, profile.u_minus);
  return rescale_and_compare(profile, nd.Lambda, nd.beta, d.L.row(d.p),
                             principal_speed_fn([&sys](const Vec& u) { return sys.Df(u); }, sys.u0));
}

RescaleReport rescale_and_compare(const ShockProfile& profile, const RelaxationSystem& sys) {
  const auto d = characteristic_decomposition(sys.Df_eq(profile.u_minus));
  const auto nd = genuine_nonlinearity_and_diffusion(sys, profile.u_minus);
  return rescale_and_compare(
      profile, nd.Lambda, nd.beta, d.L.row(d.p),
      principal_speed_fn([&sys](const Vec& u) { return sys.Df_eq(u); }, sys.u0));
}

void write_profile_cache(const ShockProfile& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write profile cache " + path);
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << p.system << ' ' << num(p.eps) << ' ' << num(p.L) << ' ' << p.size() << ' ' << p.n << ' '
      << p.r << '\n';
  out << "# endpoints";
  for (const Vec* e : {&p.u_minus, &p.u_plus, &p.v_minus, &p.v_plus})
    for (Eigen::Index k = 0; k < e->size(); ++k) out << ' ' << num((*e)[k]);
  out << " tail " << num(p.tail_rate) << ' ' << num(p.tail_r2) << " residual " << num(p.residual)
      << '\n';
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    out << num(p.x[i]);
    for (Eigen::Index k = 0; k < p.n + p.r; ++k) out << ' ' << num(p.Y(k, i));
    for (Eigen::Index k = 0; k < p.n; ++k) out << ' ' << num(p.dY(k, i));
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed while writing profile cache " + path);
}

ShockProfile read_profile_cache(const std::string& path, const std::function<Vec(const Vec&)>& rhs) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read profile cache " + path);
  ShockProfile p;
  Eigen::Index m = 0;
  in >> p.system >> p.eps >> p.L >> m >> p.n >> p.r;
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  std::istringstream hs(line);
  std::string tag;
  hs >> tag >> tag;
  auto read_vec = [&](Vec& v, int k) {
    v.resize(k);
    for (int i = 0; i < k; ++i) hs >> v[i];
  };
  read_vec(p.u_minus, p.n);
  read_vec(p.u_plus, p.n);
  read_vec(p.v_minus, p.r);
  read_vec(p.v_plus, p.r);
  hs >> tag >> p.tail_rate >> p.tail_r2 >> tag >> p.residual;
  const int d = p.n + p.r;
  p.x.resize(m);
  p.Y.resize(d, m);
  p.dY.resize(d, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    in >> p.x[i];
    for (int k = 0; k < d; ++k) in >> p.Y(k, i);
    for (int k = 0; k < p.n; ++k) in >> p.dY(k, i);
  }
  if (!in) throw std::runtime_error("malformed profile cache " + path);
  p.rhs = rhs;
  if (p.r > 0)
    for (Eigen::Index i = 0; i < m; ++i) p.dY.col(i).tail(p.r) = rhs(p.Y.col(i)).tail(p.r);
  return p;
}

}  // namespace evanskit
