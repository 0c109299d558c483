#include "evanskit/model.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace evanskit {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

/// Real unit null vector of (A - a I), from the smallest singular value.
Vec null_vector(const Mat& A, double a) {
  Mat S = A;
  S.diagonal().array() -= a;
  Eigen::JacobiSVD<Mat> svd(S, Eigen::ComputeFullV);
  return svd.matrixV().col(S.cols() - 1);
}

Vec sorted_real_spectrum(const Mat& A, double rel_tol) {
  const double scale = A.norm();
  Eigen::EigenSolver<Mat> es(A, false);
  const Eigen::VectorXcd ev = es.eigenvalues();
  Vec a(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev[i].imag()) > rel_tol * std::max(scale, 1e-300))
      throw NotStrictlyHyperbolic("complex eigenvalue " + fmt(ev[i].real()) + "+" +
                                  fmt(ev[i].imag()) + "i");
    a[i] = ev[i].real();
  }
  std::sort(a.data(), a.data() + a.size());
  for (Eigen::Index i = 1; i < a.size(); ++i)
    if (a[i] - a[i - 1] < rel_tol * scale || scale == 0.0)
      throw NotStrictlyHyperbolic("eigenvalues " + fmt(a[i - 1]) + " and " + fmt(a[i]) +
                                  " coalesce");
  return a;
}

int principal_index(const Vec& a) {
  int p = 0;
  for (int j = 1; j < a.size(); ++j)
    if (std::abs(a[j]) < std::abs(a[p])) p = j;
  return p;
}

std::vector<Vec> neighborhood_samples(const Vec& u0, double radius) {
  std::vector<Vec> out{u0};
  for (Eigen::Index i = 0; i < u0.size(); ++i) {
    for (double s : {-0.5, 0.5}) {
      Vec u = u0;
      u[i] += s * radius;
      out.push_back(u);
    }
  }
  return out;
}

double max_real_eig(const CMat& M) {
  Eigen::ComplexEigenSolver<CMat> es(M, false);
  return es.eigenvalues().real().maxCoeff();
}

bool finite(const Mat& m) { return m.allFinite(); }

}  // namespace

SpectralDecomposition characteristic_decomposition(const Mat& A, double rel_tol) {
  SpectralDecomposition d;
  d.a = sorted_real_spectrum(A, rel_tol);
  const Eigen::Index n = A.rows();
  d.R.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Vec r = null_vector(A, d.a[j]);
    Eigen::Index lead = 0;
    while (lead < n && std::abs(r[lead]) <= 1e-8 * r.norm()) ++lead;
    d.R.col(j) = r / r[lead];
  }
  d.L = d.R.inverse();
  d.p = principal_index(d.a);
  return d;
}

SpectralDecomposition characteristic_decomposition(const Mat& A,
                                                   const SpectralDecomposition& reference,
                                                   double rel_tol) {
  SpectralDecomposition d;
  d.a = sorted_real_spectrum(A, rel_tol);
  const Eigen::Index n = A.rows();
  d.R.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Vec r = null_vector(A, d.a[j]);
    const double s = reference.L.row(j).dot(r);
    if (std::abs(s) < 1e-10)
      throw NotStrictlyHyperbolic("eigenvector drifted away from the reference family");
    d.R.col(j) = r / s;
  }
  d.L = d.R.inverse();
  d.p = principal_index(d.a);
  return d;
}

Mat RelaxationSystem::vstar_u(const Vec& u) const {
  const Vec v = vstar(u);
  const Mat qv = q_v(u, v);
  Eigen::FullPivLU<Mat> lu(qv);
  if (!lu.isInvertible()) throw SingularRelaxation("q_v is singular");
  return -lu.solve(q_u(u, v));
}

Mat RelaxationSystem::Df_eq(const Vec& u) const {
  const Vec v = vstar(u);
  return ft_u(u, v) + ft_v(u, v) * vstar_u(u);
}

Mat RelaxationSystem::Dg_eq(const Vec& u) const {
  const Vec v = vstar(u);
  return gt_u(u, v) + gt_v(u, v) * vstar_u(u);
}

Mat RelaxationSystem::flux_jacobian(const Vec& u, const Vec& v) const {
  Mat A(n + r, n + r);
  A << ft_u(u, v), ft_v(u, v), gt_u(u, v), gt_v(u, v);
  return A;
}

Mat RelaxationSystem::source_jacobian(const Vec& u, const Vec& v) const {
  Mat Q = Mat::Zero(n + r, n + r);
  Q.bottomLeftCorner(r, n) = q_u(u, v);
  Q.bottomRightCorner(r, r) = q_v(u, v);
  return Q;
}

bool HypothesisReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

const HypothesisCheck& HypothesisReport::get(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw std::out_of_range("no hypothesis named " + name);
}

std::vector<double> log_grid(double lo, double hi, int per_decade) {
  const int n = static_cast<int>(std::ceil(std::log10(hi / lo) * per_decade));
  std::vector<double> out(n + 1);
  for (int i = 0; i <= n; ++i) out[i] = lo * std::pow(hi / lo, double(i) / n);
  return out;
}

namespace {

HypothesisCheck hyperbolicity_check(const std::string& name, const std::vector<Vec>& samples,
                                    const std::function<Mat(const Vec&)>& jac) {
  HypothesisCheck c{name, true, std::numeric_limits<double>::infinity(), ""};
  for (const auto& u : samples) {
    const Mat A = jac(u);
    try {
      const auto d = characteristic_decomposition(A);
      double gap = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 1; i < d.a.size(); ++i) gap = std::min(gap, d.a[i] - d.a[i - 1]);
      c.margin = std::min(c.margin, A.norm() > 0 ? gap / A.norm() : gap);
    } catch (const NotStrictlyHyperbolic& e) {
      c.pass = false;
      c.margin = 0;
      c.witness = e.what();
      return c;
    }
  }
  if (!std::isfinite(c.margin)) c.margin = 1.0;  // scalar case: no pair to separate
  return c;
}

/// theta = min over the frequency grid of -max Re sigma(symbol(xi)) / weight(xi).
HypothesisCheck dissipativity_check(const std::function<CMat(double)>& symbol,
                                    const std::function<double(double)>& weight) {
  HypothesisCheck c{"H3", true, std::numeric_limits<double>::infinity(), ""};
  for (double xi : log_grid(1e-2, 1e2, 64)) {
    const double theta = -max_real_eig(symbol(xi)) / weight(xi);
    if (theta < c.margin) {
      c.margin = theta;
      if (theta <= 0) c.witness = "xi = " + fmt(xi) + ", growth rate " + fmt(-theta * weight(xi));
    }
  }
  c.pass = c.margin > 0;
  c.margin = std::max(c.margin, 0.0);
  return c;
}

HypothesisCheck nonlinearity_check(const Mat& Df0, const std::function<Vec(const Vec&, const Vec&)>& d2f,
                                   double& Lambda) {
  HypothesisCheck c{"H4", false, 0.0, ""};
  try {
    const auto d = characteristic_decomposition(Df0);
    const double ap = d.a[d.p];
    if (std::abs(ap) > 1e-8 * (1.0 + Df0.norm())) {
      c.witness = "no vanishing characteristic speed: a_p(u0) = " + fmt(ap);
      return c;
    }
    Lambda = d.L.row(d.p).dot(d2f(d.R.col(d.p), d.R.col(d.p)));
    if (std::abs(Lambda) < 1e-10) {
      c.witness = "Lambda = " + fmt(Lambda);
      return c;
    }
    c.pass = true;
    c.margin = std::abs(Lambda);
  } catch (const NotStrictlyHyperbolic& e) {
    c.witness = e.what();
  }
  return c;
}

}  // namespace

HypothesisReport check_hypotheses_viscous(const ViscousSystem& sys) {
  HypothesisReport rep;
  const auto samples = neighborhood_samples(sys.u0, sys.radius);

  HypothesisCheck h0{"H0", true, 1.0, ""};
  for (const auto& u : samples)
    if (!sys.f(u).allFinite() || !finite(sys.Df(u)) || !finite(sys.B(u))) {
      h0 = {"H0", false, 0.0, "non-finite coefficients"};
      break;
    }
  rep.checks.push_back(h0);

  HypothesisCheck h1{"H1", true, std::numeric_limits<double>::infinity(), ""};
  for (const auto& u : samples) {
    Eigen::EigenSolver<Mat> es(sys.B(u), false);
    const double m = es.eigenvalues().real().minCoeff();
    h1.margin = std::min(h1.margin, m);
    if (m <= 0) {
      h1.pass = false;
      h1.witness = "Re sigma(B) = " + fmt(m);
    }
  }
  h1.margin = std::max(h1.margin, 0.0);
  rep.checks.push_back(h1);

  rep.checks.push_back(hyperbolicity_check("H2", samples, sys.Df));

  HypothesisCheck h3{"H3", true, std::numeric_limits<double>::infinity(), ""};
  for (const Vec& u : samples) {
    const Mat A = sys.Df(u), B = sys.B(u);
    auto c = dissipativity_check(
        [&](double xi) { return CMat(cplx(0, -xi) * A.cast<cplx>() - xi * xi * B.cast<cplx>()); },
        [](double xi) { return xi * xi; });
    if (c.margin < h3.margin || !c.pass) h3 = c;
  }
  rep.checks.push_back(h3);

  double Lambda = 0;
  rep.checks.push_back(nonlinearity_check(
      sys.Df(sys.u0), [&](const Vec& a, const Vec& b) { return sys.D2f(sys.u0, a, b); }, Lambda));
  if (rep.checks.back().pass) {
    const auto nd = genuine_nonlinearity_and_diffusion(sys, sys.u0);
    rep.Lambda = nd.Lambda;
    rep.beta = nd.beta;
  }
  return rep;
}

HypothesisReport check_hypotheses_relaxation(const RelaxationSystem& sys) {
  HypothesisReport rep;
  const auto samples = neighborhood_samples(sys.u0, sys.radius);

  HypothesisCheck eq{"equilibrium", true, 1.0, ""};
  double qres = 0;
  for (const auto& u : samples) qres = std::max(qres, sys.q(u, sys.vstar(u)).norm());
  const double v0res = (sys.v0 - sys.vstar(sys.u0)).norm();
  if (qres > 1e-8 || v0res > 1e-8) {
    eq.pass = false;
    eq.margin = 0;
    eq.witness = "|q(u, v*(u))| = " + fmt(qres) + ", |v0 - v*(u0)| = " + fmt(v0res);
  }
  rep.checks.push_back(eq);

  HypothesisCheck st{"equilibrium_stability", true, std::numeric_limits<double>::infinity(), ""};
  for (const auto& u : samples) {
    Eigen::EigenSolver<Mat> es(sys.q_v(u, sys.vstar(u)), false);
    const double m = -es.eigenvalues().real().maxCoeff();
    st.margin = std::min(st.margin, m);
    if (m <= 0) {
      st.pass = false;
      st.witness = "Re sigma(q_v) = " + fmt(-m);
    }
  }
  st.margin = std::max(st.margin, 0.0);
  rep.checks.push_back(st);

  HypothesisCheck h1{"H1", true, std::numeric_limits<double>::infinity(), ""};
  for (const auto& u : samples) {
    const Mat A = sys.flux_jacobian(u, sys.vstar(u));
    Eigen::EigenSolver<Mat> es(A, true);
    const auto ev = es.eigenvalues();
    const double imag = ev.imag().cwiseAbs().maxCoeff();
    const double m = ev.cwiseAbs().minCoeff();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(es.eigenvectors());
    const double cond = svd.singularValues()(0) / svd.singularValues().tail(1)(0);
    h1.margin = std::min(h1.margin, m);
    if (imag > 1e-7 * A.norm() || m < 1e-10 || cond > 1e8) {
      h1.pass = false;
      h1.witness = "frozen characteristic speeds not real, semisimple and nonzero (min |a| = " +
                   fmt(m) + ")";
    }
  }
  if (!h1.pass) h1.margin = 0;
  rep.checks.push_back(h1);

  rep.checks.push_back(hyperbolicity_check("H2", samples, [&](const Vec& u) { return sys.Df_eq(u); }));

  {
    const Mat A = sys.flux_jacobian(sys.u0, sys.v0), Q = sys.source_jacobian(sys.u0, sys.v0);
    rep.checks.push_back(dissipativity_check(
        [&](double xi) { return CMat(cplx(0, -xi) * A.cast<cplx>() + Q.cast<cplx>()); },
        [](double xi) { return xi * xi / (1 + xi * xi); }));
  }

  HypothesisCheck sub{"subcharacteristic", true, std::numeric_limits<double>::infinity(), ""};
  for (const auto& u : samples) {
    try {
      Eigen::EigenSolver<Mat> es(chapman_enskog_viscosity(sys, u), false);
      const double m = es.eigenvalues().real().minCoeff();
      if (&u == &samples.front()) sub.margin = m;
      if (m <= 0) {
        sub.pass = false;
        sub.witness = "Re sigma(B*) = " + fmt(m) + " at u = " + fmt(u[0]);
      }
    } catch (const SingularRelaxation& e) {
      sub.pass = false;
      sub.witness = e.what();
    }
  }
  sub.margin = std::max(sub.margin, 0.0);
  rep.checks.push_back(sub);

  double Lambda = 0;
  rep.checks.push_back(nonlinearity_check(
      sys.Df_eq(sys.u0), [&](const Vec& a, const Vec& b) { return sys.D2f_eq(sys.u0, a, b); },
      Lambda));
  if (rep.checks.back().pass) {
    try {
      const auto nd = genuine_nonlinearity_and_diffusion(sys, sys.u0);
      rep.Lambda = nd.Lambda;
      rep.beta = nd.beta;
    } catch (const Error&) {
    }
  }
  return rep;
}

namespace {

NonlinearityDiffusion lambda_beta(const Mat& Df, const Mat& B,
                                  const std::function<Vec(const Vec&, const Vec&)>& d2f) {
  const auto d = characteristic_decomposition(Df);
  const Vec r = d.R.col(d.p);
  const Eigen::RowVectorXd l = d.L.row(d.p);
  const double Lambda = l.dot(d2f(r, r));
  const double beta = l * B * r;
  if (std::abs(Lambda) < 1e-10)
    throw DegenerateField("Lambda = " + fmt(Lambda));
  if (!(beta > 0)) throw NonDissipative("beta = " + fmt(beta));
  return {Lambda, beta};
}

}  // namespace

NonlinearityDiffusion genuine_nonlinearity_and_diffusion(const ViscousSystem& sys, const Vec& u) {
  return lambda_beta(sys.Df(u), sys.B(u),
                     [&](const Vec& a, const Vec& b) { return sys.D2f(u, a, b); });
}

NonlinearityDiffusion genuine_nonlinearity_and_diffusion(const RelaxationSystem& sys, const Vec& u) {
  return lambda_beta(sys.Df_eq(u), chapman_enskog_viscosity(sys, u),
                     [&](const Vec& a, const Vec& b) { return sys.D2f_eq(u, a, b); });
}

Mat chapman_enskog_viscosity(const RelaxationSystem& sys, const Vec& u) {
  const Vec v = sys.vstar(u);
  const Mat qv = sys.q_v(u, v);
  Eigen::FullPivLU<Mat> lu(qv);
  if (!lu.isInvertible() || std::abs(qv.determinant()) < 1e-14)
    throw SingularRelaxation("q_v is not invertible");
  const Mat vsu = -lu.solve(sys.q_u(u, v));
  const Mat fu = sys.ft_u(u, v) + sys.ft_v(u, v) * vsu;
  const Mat gu = sys.gt_u(u, v) + sys.gt_v(u, v) * vsu;
  return -sys.ft_v(u, v) * lu.solve(Mat(gu - vsu * fu));
}

namespace systems {

ViscousSystem burgers() {
  ViscousSystem s;
  s.name = "burgers";
  s.n = 1;
  s.f = [](const Vec& u) { return Vec::Constant(1, 0.5 * u[0] * u[0]); };
  s.Df = [](const Vec& u) { return Mat::Constant(1, 1, u[0]); };
  s.D2f = [](const Vec&, const Vec& a, const Vec& b) { return Vec::Constant(1, a[0] * b[0]); };
  s.B = [](const Vec&) { return Mat::Identity(1, 1); };
  s.DB = [](const Vec&, const Vec&) { return Mat::Zero(1, 1); };
  s.u0 = Vec::Zero(1);
  s.radius = 1.0;
  return s;
}

ViscousSystem gnl2x2(const Mat& B) {
  ViscousSystem s;
  s.name = "gnl2x2";
  s.n = 2;
  s.f = [](const Vec& u) { return Vec{{0.5 * u[0] * u[0], u[0] + u[1]}}; };
  s.Df = [](const Vec& u) { return Mat{{u[0], 0.0}, {1.0, 1.0}}; };
  s.D2f = [](const Vec&, const Vec& a, const Vec& b) { return Vec{{a[0] * b[0], 0.0}}; };
  s.B = [B](const Vec&) { return B; };
  s.DB = [](const Vec&, const Vec&) { return Mat::Zero(2, 2); };
  s.u0 = Vec::Zero(2);
  s.radius = 0.5;
  return s;
}

ViscousSystem symmetric_linear() {
  ViscousSystem s;
  s.name = "symmetric-linear";
  s.n = 2;
  s.f = [](const Vec& u) { return Vec{{u[1], u[0]}}; };
  s.Df = [](const Vec&) { return Mat{{0.0, 1.0}, {1.0, 0.0}}; };
  s.D2f = [](const Vec&, const Vec&, const Vec&) { return Vec::Zero(2); };
  s.B = [](const Vec&) { return Mat::Identity(2, 2); };
  s.DB = [](const Vec&, const Vec&) { return Mat::Zero(2, 2); };
  s.u0 = Vec::Zero(2);
  s.radius = 0.5;
  return s;
}

RelaxationSystem jin_xin(double a, double u0) {
  RelaxationSystem s;
  s.name = "jinxin";
  s.n = 1;
  s.r = 1;
  const double a2 = a * a;
  s.ft = [](const Vec&, const Vec& v) { return v; };
  s.gt = [a2](const Vec& u, const Vec&) { return Vec(a2 * u); };
  s.q = [](const Vec& u, const Vec& v) { return Vec::Constant(1, 0.5 * u[0] * u[0] - v[0]); };
  s.ft_u = [](const Vec&, const Vec&) { return Mat::Zero(1, 1); };
  s.ft_v = [](const Vec&, const Vec&) { return Mat::Identity(1, 1); };
  s.gt_u = [a2](const Vec&, const Vec&) { return Mat::Constant(1, 1, a2); };
  s.gt_v = [](const Vec&, const Vec&) { return Mat::Zero(1, 1); };
  s.q_u = [](const Vec& u, const Vec&) { return Mat::Constant(1, 1, u[0]); };
  s.q_v = [](const Vec&, const Vec&) { return Mat::Constant(1, 1, -1.0); };
  s.vstar = [](const Vec& u) { return Vec::Constant(1, 0.5 * u[0] * u[0]); };
  s.D2f_eq = [](const Vec&, const Vec& x, const Vec& y) { return Vec::Constant(1, x[0] * y[0]); };
  s.u0 = Vec::Constant(1, u0);
  s.v0 = s.vstar(s.u0);
  s.radius = 0.5;
  return s;
}

}  // namespace systems

}  // namespace evanskit
