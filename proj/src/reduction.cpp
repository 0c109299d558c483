#include "evanskit/reduction.hpp"

#include "evanskit/evans.hpp"
#include "evanskit/ode.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace evanskit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Right eigenvector of G for the eigenvalue nearest `target`, with its dual left row.
void nearest_eigenpair(const Mat& G, double target, CVec& right, Eigen::RowVectorXcd& left) {
  Eigen::ComplexEigenSolver<CMat> ces(G.cast<cplx>());
  Eigen::Index k = 0;
  (ces.eigenvalues().array() - cplx(target)).abs().minCoeff(&k);
  const CMat V = ces.eigenvectors();
  const CMat Vi = V.inverse();
  right = V.col(k);
  left = Vi.row(k);
}

/// Real representative of an eigenvector after dividing by a nonzero pairing.
Vec realize(const CVec& v, cplx scale) { return (v / scale).real(); }

double min_abs_excluding_nearest_zero(const Eigen::VectorXcd& ev, double& nearest) {
  Eigen::Index p = 0;
  ev.array().abs().minCoeff(&p);
  nearest = ev[p].real();
  double m = kInf;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (i != p) m = std::min(m, std::abs(ev[i].real()));
  return m;
}

}  // namespace

PrincipalModel principal_model(const ViscousSystem& sys) {
  PrincipalModel pm;
  pm.kind = "viscous";
  const int n = sys.n;
  pm.N = 2 * n;
  const auto nd = genuine_nonlinearity_and_diffusion(sys, sys.u0);
  pm.Lambda = nd.Lambda;
  pm.beta0 = nd.beta;
  const Mat G0 = sys.B(sys.u0).partialPivLu().solve(sys.Df(sys.u0));
  double g_p = 0;
  const double gmin = min_abs_excluding_nearest_zero(Eigen::ComplexEigenSolver<CMat>(G0.cast<cplx>()).eigenvalues(), g_p);
  pm.fast_threshold = 0.5 * gmin;
  pm.expansion_radius = std::isfinite(gmin) ? 0.25 * gmin * gmin : kInf;
  const SpectralDecomposition ref = characteristic_decomposition(sys.Df(sys.u0));
  pm.at = [sys, ref, n](const Vec& y, const Vec& dy) {
    const Vec u = y.head(n);
    const SpectralDecomposition d = characteristic_decomposition(sys.Df(u), ref);
    PrincipalData pd;
    pd.a_p = d.a[d.p];
    pd.l_p = d.L.row(d.p);
    pd.r_p = d.R.col(d.p);
    const Mat B = sys.B(u);
    pd.beta = pd.l_p * B * pd.r_p;
    Mat Aeps = sys.Df(u);
    for (int j = 0; j < n; ++j) Aeps.col(j) -= sys.DB(u, Vec::Unit(n, j)) * dy.head(n);
    const Mat G = B.partialPivLu().solve(Aeps);
    CVec s;
    Eigen::RowVectorXcd st;
    nearest_eigenpair(G, pd.a_p / pd.beta, s, st);
    const cplx ls = pd.l_p.cast<cplx>() * s;
    if (std::abs(ls) < 1e-12) throw DegenerateMode("l_p s_p vanishes");
    const Vec sp = realize(s, ls);
    const Eigen::RowVectorXd stp = (st * ls).real();
    pd.Lm = Mat::Zero(2, 2 * n);
    pd.Lm.block(0, 0, 1, n) = pd.l_p;
    pd.Lm.block(1, n, 1, n) = stp / stp.dot(sp);
    return pd;
  };
  return pm;
}

namespace {

struct RelaxationBlocks {
  Mat E, Et, F, Ft, H, Ht;
};

RelaxationBlocks relaxation_blocks(const RelaxationSystem& sys, const Vec& u, const Vec& v) {
  const int n = sys.n, r = sys.r;
  const Mat A = sys.flux_jacobian(u, v);
  Eigen::FullPivLU<Mat> lu(A);
  if (!lu.isInvertible()) throw SingularA("flux Jacobian is singular");
  const Mat Ai = lu.inverse();
  Mat qq(r, n + r);
  qq << sys.q_u(u, v), sys.q_v(u, v);
  const Mat HH = qq * Ai;
  RelaxationBlocks b;
  b.Et = -Ai.topRows(n).leftCols(n);
  b.E = -Ai.topRows(n).rightCols(r);
  b.Ft = -Ai.bottomRows(r).leftCols(n);
  b.F = -Ai.bottomRows(r).rightCols(r);
  b.Ht = HH.leftCols(n);
  b.H = HH.rightCols(r);
  return b;
}

struct RelaxationPrincipal {
  PrincipalData pd;
  Vec s_p;
  Eigen::RowVectorXd st_p;
  RelaxationBlocks blocks;
};

RelaxationPrincipal relaxation_principal(const RelaxationSystem& sys, const SpectralDecomposition& ref,
                                         const Vec& u, const Vec& v) {
  const int n = sys.n, r = sys.r;
  RelaxationPrincipal out;
  const SpectralDecomposition d = characteristic_decomposition(sys.Df_eq(u), ref);
  PrincipalData& pd = out.pd;
  pd.a_p = d.a[d.p];
  pd.l_p = d.L.row(d.p);
  pd.r_p = d.R.col(d.p);
  pd.beta = pd.l_p * chapman_enskog_viscosity(sys, u) * pd.r_p;
  out.blocks = relaxation_blocks(sys, u, v);
  CVec s;
  Eigen::RowVectorXcd st;
  nearest_eigenpair(out.blocks.H, pd.a_p / pd.beta, s, st);
  const cplx les = pd.l_p.cast<cplx>() * out.blocks.E.cast<cplx>() * s;
  if (std::abs(les) < 1e-12) throw DegenerateMode("l_p E s_p vanishes");
  out.s_p = realize(s, les);
  const Eigen::RowVectorXd stp = (st * les).real();
  out.st_p = stp / stp.dot(out.s_p);
  pd.Lm = Mat::Zero(2, n + r);
  pd.Lm.block(0, 0, 1, n) = pd.l_p;
  pd.Lm.block(1, n, 1, r) = out.st_p;
  return out;
}

}  // namespace

PrincipalModel principal_model(const RelaxationSystem& sys) {
  PrincipalModel pm;
  pm.kind = "relaxation";
  const int n = sys.n, r = sys.r;
  pm.N = n + r;
  const auto nd = genuine_nonlinearity_and_diffusion(sys, sys.u0);
  pm.Lambda = nd.Lambda;
  pm.beta0 = nd.beta;
  const RelaxationBlocks b0 = relaxation_blocks(sys, sys.u0, sys.v0);
  double g_p = 0;
  const double gmin =
      min_abs_excluding_nearest_zero(Eigen::ComplexEigenSolver<CMat>(b0.H.cast<cplx>()).eigenvalues(), g_p);
  double a_p = 0;
  const double amin =
      min_abs_excluding_nearest_zero(Eigen::ComplexEigenSolver<CMat>(sys.Df_eq(sys.u0).cast<cplx>()).eigenvalues(), a_p);
  pm.fast_threshold = 0.5 * gmin;
  pm.expansion_radius = std::min(std::isfinite(gmin) ? 0.25 * gmin * gmin : kInf,
                                 std::isfinite(amin) ? 0.25 * amin * amin : kInf);
  const SpectralDecomposition ref = characteristic_decomposition(sys.Df_eq(sys.u0));
  pm.at = [sys, ref, n, r](const Vec& y, const Vec&) {
    return relaxation_principal(sys, ref, y.head(n), y.tail(r)).pd;
  };
  return pm;
}

KeyFacts relaxation_key_facts(const RelaxationSystem& sys, const Vec& u, const Vec& v) {
  const SpectralDecomposition ref = characteristic_decomposition(sys.Df_eq(sys.u0));
  const RelaxationPrincipal rp = relaxation_principal(sys, ref, u, v);
  const auto& b = rp.blocks;
  KeyFacts k;
  k.E_residual = (b.E * rp.s_p - rp.pd.r_p).norm();
  const Mat qvinv = sys.q_v(u, v).inverse();
  k.F_residual = (b.F * rp.s_p + qvinv * sys.q_u(u, v) * rp.pd.r_p).norm();
  const Eigen::RowVectorXd sH = rp.st_p * b.Ht;
  k.H_residual = (sH - rp.pd.l_p / rp.pd.beta).norm();
  k.H_residual_literal = (sH + rp.pd.l_p / rp.pd.beta).norm();
  const Vec gur = sys.gt_u(u, v) * rp.pd.r_p;
  k.gu_scale = gur.squaredNorm() > 0 ? rp.s_p.dot(gur) / gur.squaredNorm() : 0.0;
  return k;
}

std::string to_string(BlockKind k) {
  switch (k) {
    case BlockKind::NuMinus: return "nu-";
    case BlockKind::RhoMinus: return "rho-";
    case BlockKind::Principal: return "eta-z";
    case BlockKind::RhoPlus: return "rho+";
    case BlockKind::NuPlus: return "nu+";
  }
  return "?";
}

double BlockBasis::sup_biorthogonality_error() const {
  double e = 0;
  for (size_t i = 0; i < R.size(); ++i)
    e = std::max(e, (L[i] * R[i] - CMat::Identity(N, N)).cwiseAbs().maxCoeff());
  return e;
}

namespace {

struct LocalBasis {
  CMat R;
  CVec mu;
  std::vector<BlockKind> kinds;
};

LocalBasis local_basis(const EigenvalueSystem& es, const PrincipalModel& pm, const Vec& y, const Vec& dy,
                       cplx lambda, const LocalBasis* ref) {
  const CMat A = es.coefficient(y, dy, lambda);
  const int N = static_cast<int>(A.rows());
  Eigen::ComplexEigenSolver<CMat> ces(A);
  const CVec ev = ces.eigenvalues();
  const CMat V = ces.eigenvectors();
  const PrincipalData pd = pm.at(y, dy);
  const cplx disc = std::sqrt(pd.a_p * pd.a_p + 4.0 * pd.beta * lambda);
  const cplx p1 = (pd.a_p + disc) / (2 * pd.beta), p2 = (pd.a_p - disc) / (2 * pd.beta);
  int bi = 0, bj = 1;
  double best = kInf;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      if (i != j) {
        const double c = std::abs(ev[i] - p1) + std::abs(ev[j] - p2);
        if (c < best) best = c, bi = i, bj = j;
      }
  std::vector<int> trans;
  for (int i = 0; i < N; ++i)
    if (i != bi && i != bj) trans.push_back(i);

  LocalBasis out;
  out.R = CMat::Zero(N, N);
  out.mu = CVec::Zero(N);
  std::vector<int> column_of(N, -1);  // eigen index -> column
  if (ref) {
    out.kinds = ref->kinds;
    std::vector<bool> used(N, false);
    for (int c = 0; c < N; ++c) {
      if (ref->kinds[c] == BlockKind::Principal) continue;
      int pick = -1;
      double d = kInf;
      for (int i : trans)
        if (!used[i] && std::abs(ev[i] - ref->mu[c]) < d) d = std::abs(ev[i] - ref->mu[c]), pick = i;
      used[pick] = true;
      column_of[pick] = c;
    }
  } else {
    std::vector<std::pair<BlockKind, int>> cls;
    for (int i : trans) {
      const double re = ev[i].real();
      BlockKind k;
      if (std::abs(re) >= pm.fast_threshold)
        k = re > 0 ? BlockKind::NuPlus : BlockKind::NuMinus;
      else
        k = re >= 0 ? BlockKind::RhoPlus : BlockKind::RhoMinus;
      cls.emplace_back(k, i);
    }
    cls.emplace_back(BlockKind::Principal, -1);
    std::stable_sort(cls.begin(), cls.end(), [&](const auto& a, const auto& b) {
      if (a.first != b.first) return static_cast<int>(a.first) < static_cast<int>(b.first);
      if (a.second < 0 || b.second < 0) return false;
      return ev[a.second].real() < ev[b.second].real();
    });
    int c = 0;
    for (const auto& [k, i] : cls) {
      if (i < 0) {
        out.kinds.push_back(BlockKind::Principal);
        out.kinds.push_back(BlockKind::Principal);
        c += 2;
      } else {
        out.kinds.push_back(k);
        column_of[i] = c++;
      }
    }
  }
  int off = 0;
  while (out.kinds[off] != BlockKind::Principal) ++off;
  for (int i : trans) {
    const int c = column_of[i];
    CVec r = V.col(i);
    if (ref) {
      const CVec rr = ref->R.col(c);
      r /= (rr.adjoint() * r)(0) / rr.squaredNorm();
    } else {
      Eigen::Index m = 0;
      r.cwiseAbs().maxCoeff(&m);
      r *= std::abs(r[m]) / r[m] / r.norm();
    }
    out.R.col(c) = r;
    out.mu[c] = ev[i];
  }
  CMat Q(N, 2);
  Q << V.col(bi), V.col(bj);
  const CMat LmQ = pd.Lm.cast<cplx>() * Q;
  out.R.middleCols(off, 2) = Q * LmQ.inverse();
  return out;
}

std::array<int, 5> block_sizes(const std::vector<BlockKind>& kinds) {
  std::array<int, 5> s{};
  for (BlockKind k : kinds) ++s[static_cast<int>(k)];
  return s;
}

int center_index(const Vec& x) {
  Eigen::Index c = 0;
  x.cwiseAbs().minCoeff(&c);
  return static_cast<int>(c);
}

}  // namespace

BlockBasis build_block_basis(const EigenvalueSystem& es, const PrincipalModel& pm, cplx lambda,
                             int max_points) {
  if (!es.profile) throw std::invalid_argument("block bases need a profile-backed system");
  if (std::abs(lambda) > pm.expansion_radius) {
    std::ostringstream os;
    os << "|lambda| = " << std::abs(lambda) << " exceeds the expansion radius " << pm.expansion_radius;
    throw ExpansionDomainExceeded(os.str());
  }
  if (lambda == cplx(0)) throw DegenerateMode("principal and superslow modes coincide at lambda = 0");
  const ShockProfile& p = *es.profile;
  const int m = static_cast<int>(p.size());
  const int c0 = center_index(p.x);
  const int stride = std::max(1, (m + max_points - 1) / max_points);
  std::vector<int> idx;
  for (int i = c0 % stride; i < m; i += stride) idx.push_back(i);

  const LocalBasis base = local_basis(es, pm, p.Y.col(c0), p.dY.col(c0), lambda, nullptr);
  BlockBasis b;
  b.lambda = lambda;
  b.N = es.N;
  b.kinds = base.kinds;
  b.sizes = block_sizes(b.kinds);
  b.principal_offset = b.sizes[0] + b.sizes[1];
  const size_t K = idx.size();
  b.x.resize(K);
  b.R.resize(K);
  b.dR.resize(K);
  b.L.resize(K);
  b.mu.resize(K);
  // Chain rule R' = D_y R y' + D_y' R y'', each directional derivative taken with a unit state step.
  const double hs = 1e-4;
  auto directional = [&](const Vec& y, const Vec& dy, const Vec& dir, bool first_slot) -> CMat {
    const double nrm = dir.norm();
    if (!(nrm > 0)) return CMat::Zero(es.N, es.N);
    const Vec step = (hs / nrm) * dir;
    const LocalBasis f = first_slot ? local_basis(es, pm, y + step, dy, lambda, &base)
                                    : local_basis(es, pm, y, dy + step, lambda, &base);
    const LocalBasis g = first_slot ? local_basis(es, pm, y - step, dy, lambda, &base)
                                    : local_basis(es, pm, y, dy - step, lambda, &base);
    return (f.R - g.R) * (nrm / (2 * hs));
  };
  parallel_for(static_cast<int>(K), 0, [&](int k) {
    const int i = idx[k];
    const double x = p.x[i];
    const Vec y = p.Y.col(i), dy = p.dY.col(i), ddy = p.ddstate(x);
    const LocalBasis here = local_basis(es, pm, y, dy, lambda, &base);
    const CMat dR = directional(y, dy, dy, true) + directional(y, dy, ddy, false);
    b.x[k] = x;
    b.R[k] = here.R;
    b.dR[k] = dR;
    b.L[k] = here.R.inverse();
    b.mu[k] = here.mu;
  });
  return b;
}

namespace {

/// Block-diagonal part of the per-x derivative pairing L R' (scalars on transverse columns).
CMat pairing_blocks(const BlockBasis& b, size_t i) {
  const CMat K = b.L[i] * b.dR[i];
  CMat D = CMat::Zero(b.N, b.N);
  for (int c = 0; c < b.N; ++c) {
    if (b.kinds[c] != BlockKind::Principal) D(c, c) = K(c, c);
  }
  const int o = b.principal_offset;
  D.block(o, o, 2, 2) = K.block(o, o, 2, 2);
  return D;
}

}  // namespace

BlockBasis normalize_basis(const BlockBasis& basis) {
  BlockBasis b = basis;
  const size_t K = b.x.size();
  const int N = b.N;
  std::vector<CMat> Kd(K), alpha(K);
  for (size_t i = 0; i < K; ++i) Kd[i] = pairing_blocks(basis, i);
  const int c = center_index(b.x);
  alpha[c] = CMat::Identity(N, N);
  const CMat I = CMat::Identity(N, N);
  // Crank-Nicolson for alpha' = -K alpha; every block of K is block diagonal, so alpha stays so.
  auto step = [&](int from, int to) {
    const double h = b.x[to] - b.x[from];
    alpha[to] = (I + 0.5 * h * Kd[to]).partialPivLu().solve((I - 0.5 * h * Kd[from]) * alpha[from]);
  };
  for (int i = c + 1; i < static_cast<int>(K); ++i) step(i - 1, i);
  for (int i = c - 1; i >= 0; --i) step(i + 1, i);
  for (size_t i = 0; i < K; ++i) {
    const CMat& a = alpha[i];
    const CMat da = -Kd[i] * a;
    b.dR[i] = basis.dR[i] * a + basis.R[i] * da;
    b.R[i] = basis.R[i] * a;
    b.L[i] = a.partialPivLu().solve(basis.L[i]);
  }
  b.normalized = true;
  return b;
}

double normalization_defect(const BlockBasis& basis) {
  double d = 0;
  for (size_t i = 0; i < basis.R.size(); ++i) d = std::max(d, pairing_blocks(basis, i).cwiseAbs().maxCoeff());
  return d;
}

namespace {

/// Decay rate of y in |x| fitted on each tail (|x| beyond a quarter of the span); the slower side wins.
std::pair<double, double> fit_decay(const Vec& x, const Vec& y) {
  const double xmax = x.cwiseAbs().maxCoeff();
  double rate = std::numeric_limits<double>::infinity(), icpt = 0;
  for (int side : {-1, 1}) {
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double ax = std::abs(x[i]);
      if (side * x[i] < 0.25 * xmax || !(y[i] > 1e-300)) continue;
      const double ly = std::log(y[i]);
      n += 1, sx += ax, sy += ly, sxx += ax * ax, sxy += ax * ly;
    }
    if (n < 2) continue;
    const double slope = (sxy - sx * sy / n) / (sxx - sx * sx / n);
    if (-slope < rate) rate = -slope, icpt = (sy - slope * sx) / n;
  }
  if (!std::isfinite(rate)) return {0.0, 0.0};
  return {rate, icpt};
}

double envelope_constant(const Vec& x, const Vec& y, double theta) {
  double C = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) C = std::max(C, y[i] * std::exp(theta * std::abs(x[i])));
  return C;
}

}  // namespace

ReducedSystem block_diagonalize(const EigenvalueSystem& es, const PrincipalModel& pm, const BlockBasis& basis,
                                double eps) {
  const ShockProfile& p = *es.profile;
  ReducedSystem rs;
  rs.lambda = basis.lambda;
  rs.x = basis.x;
  rs.kinds = basis.kinds;
  rs.sizes = basis.sizes;
  rs.principal_offset = basis.principal_offset;
  const size_t K = basis.x.size();
  const int N = basis.N;
  rs.M.resize(K);
  rs.Theta.resize(K);
  rs.conjugated.resize(K);
  rs.delta.resize(K);
  for (size_t i = 0; i < K; ++i) {
    const double x = basis.x[i];
    const Vec y = p.state(x), dy = p.dstate(x);
    const CMat A = es.coefficient(y, dy, basis.lambda);
    const CMat LAR = basis.L[i] * A * basis.R[i];
    CMat M = CMat::Zero(N, N);
    for (int a = 0; a < N; ++a)
      for (int c = 0; c < N; ++c)
        if (basis.kinds[a] == basis.kinds[c]) M(a, c) = LAR(a, c);
    rs.conjugated[i] = LAR - basis.L[i] * basis.dR[i];
    const PrincipalData pd = pm.at(y, dy);
    const double d = std::abs(pd.l_p.dot(dy.head(pd.l_p.size())));
    rs.delta[i] = d;
    rs.M[i] = M;
    rs.Theta[i] = d > 1e-300 ? CMat((rs.conjugated[i] - M) / d) : CMat::Zero(N, N);
    rs.sup_theta = std::max(rs.sup_theta, rs.Theta[i].cwiseAbs().maxCoeff());
    rs.conjugacy_residual =
        std::max(rs.conjugacy_residual, (rs.conjugated[i] - (M + d * rs.Theta[i])).cwiseAbs().maxCoeff());
  }
  const auto [theta, icpt] = fit_decay(rs.x, rs.delta);
  (void)icpt;
  rs.theta_delta = theta;
  rs.C_delta = envelope_constant(rs.x, rs.delta, theta) / (eps * eps);
  return rs;
}

BurgersBlockReport compare_burgers_block(const ReducedSystem& reduced, const EigenvalueSystem& es,
                                         const PrincipalModel& pm) {
  BurgersBlockReport rep;
  rep.beta = pm.beta0;
  const ShockProfile& p = *es.profile;
  for (size_t i = 0; i < reduced.M.size(); ++i) {
    const double x = reduced.x[i];
    const PrincipalData pd = pm.at(p.state(x), p.dstate(x));
    CMat Mt(2, 2);
    Mt << 0.0, 1.0, reduced.lambda / pm.beta0, pd.a_p / pm.beta0;
    rep.sup_diff = rep.sup_diff.cwiseMax((reduced.M0(i) - Mt).cwiseAbs());
  }
  return rep;
}

Mat declared_block_orders(cplx lambda, double eps) {
  const double l = std::abs(lambda);
  Mat b(2, 2);
  b << l, l + eps, l * eps, l + eps * eps;
  return b;
}

RatioTest block_ratio_test(const Mat& d_eps, const Mat& d_half, const Mat& b_eps, const Mat& b_half,
                           double noise) {
  RatioTest t;
  t.measured = Mat::Zero(2, 2);
  t.declared = b_eps.cwiseQuotient(b_half);
  t.pass.resize(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const bool quiet = d_eps(i, j) < noise && d_half(i, j) < noise;
      t.measured(i, j) = d_half(i, j) > 0 ? d_eps(i, j) / d_half(i, j) : kInf;
      t.pass(i, j) = quiet || t.measured(i, j) >= 0.5 * t.declared(i, j);
      t.all_pass = t.all_pass && t.pass(i, j);
    }
  return t;
}

// Tracking

CMat TrackingResult::Phi2_at(double xq) const {
  const double h = x[1] - x[0];
  const double s = std::clamp((xq - x[0]) / h, 0.0, double(x.size() - 1));
  const size_t i = std::min<size_t>(static_cast<size_t>(s), x.size() - 2);
  const double t = s - i;
  return (1 - t) * Phi2[i] + t * Phi2[i + 1];
}

namespace {

struct Blocks {
  CMat M1, M2, T11, T12, T21, T22;
  double d;
};

Blocks blocks_at(const TrackingProblem& P, double x) {
  Blocks b;
  b.M1 = P.M1(x);
  b.M2 = P.M2(x);
  const CMat T = P.Theta(x);
  b.T11 = T.topLeftCorner(P.k1, P.k1);
  b.T12 = T.topRightCorner(P.k1, P.k2);
  b.T21 = T.bottomLeftCorner(P.k2, P.k1);
  b.T22 = T.bottomRightCorner(P.k2, P.k2);
  b.d = P.delta(x);
  return b;
}

/// Waveform fixed point for a Riccati graph: the linear part is integrated exactly by RK4 while the
/// coupling uses the previous iterate, Hermite-interpolated at stage points.
std::vector<CMat> riccati_fixed_point(const std::vector<Blocks>& grid, const std::vector<Blocks>& mids,
                                      double h, bool forward, bool second, const TrackingOptions& opt,
                                      int& iterations) {
  const size_t n = grid.size();
  auto lin = [&](const Blocks& b, const CMat& Phi) -> CMat {
    return second ? CMat(b.M2 * Phi - Phi * b.M1) : CMat(b.M1 * Phi - Phi * b.M2);
  };
  auto coupling = [&](const Blocks& b, const CMat& P) -> CMat {
    if (second) return b.d * (b.T21 + b.T22 * P - P * b.T11 - P * b.T12 * P);
    return b.d * (b.T12 + b.T11 * P - P * b.T22 - P * b.T21 * P);
  };
  const Eigen::Index r = second ? grid[0].M2.rows() : grid[0].M1.rows();
  const Eigen::Index c = second ? grid[0].M1.rows() : grid[0].M2.rows();
  std::vector<CMat> cur(n, CMat::Zero(r, c)), next(n);
  double prev_diff = kInf;
  for (int it = 1; it <= opt.max_iter; ++it) {
    std::vector<CMat> slope(n);
    for (size_t i = 0; i < n; ++i) slope[i] = lin(grid[i], cur[i]) + coupling(grid[i], cur[i]);
    const size_t start = forward ? 0 : n - 1;
    next[start] = CMat::Zero(r, c);
    const double s = forward ? h : -h;
    for (size_t k = 0; k + 1 < n; ++k) {
      const size_t i = forward ? k : n - 1 - k;
      const size_t j = forward ? k + 1 : n - 2 - k;
      const size_t m = std::min(i, j);
      const CMat Pm = 0.5 * (cur[i] + cur[j]) + (h / 8) * (slope[m] - slope[m + 1]);
      const CMat gi = coupling(grid[i], cur[i]), gj = coupling(grid[j], cur[j]);
      const CMat gm = coupling(mids[m], Pm);
      const CMat& y0 = next[i];
      const CMat k1 = lin(grid[i], y0) + gi;
      const CMat k2 = lin(mids[m], y0 + 0.5 * s * k1) + gm;
      const CMat k3 = lin(mids[m], y0 + 0.5 * s * k2) + gm;
      const CMat k4 = lin(grid[j], y0 + s * k3) + gj;
      next[j] = y0 + (s / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    double diff = 0, mag = 0;
    for (size_t i = 0; i < n; ++i) {
      diff = std::max(diff, (next[i] - cur[i]).cwiseAbs().maxCoeff());
      mag = std::max(mag, next[i].cwiseAbs().maxCoeff());
    }
    std::swap(cur, next);
    iterations = std::max(iterations, it);
    if (diff <= opt.tol * std::max(1.0, mag)) return cur;
    if (it > 3 && diff >= prev_diff && diff > 1e-12 * std::max(1.0, mag))
      throw NoContraction("graph iteration stalled at update " + std::to_string(diff));
    prev_diff = diff;
  }
  throw NoContraction("graph iteration did not converge in " + std::to_string(opt.max_iter) + " sweeps");
}

double spectral_norm(const CMat& A) {
  if (A.size() == 0) return 0;
  Eigen::JacobiSVD<CMat> svd(A);
  return svd.singularValues()(0);
}

}  // namespace

TrackingResult tracking_reduce(const TrackingProblem& P, const TrackingOptions& opt) {
  TrackingResult res;
  const int steps = std::max(2, static_cast<int>(std::ceil((P.x_hi - P.x_lo) / opt.h)));
  const double h = (P.x_hi - P.x_lo) / steps;
  res.x = Vec::LinSpaced(steps + 1, P.x_lo, P.x_hi);
  std::vector<Blocks> grid(steps + 1), mids(steps);
  for (int i = 0; i <= steps; ++i) grid[i] = blocks_at(P, res.x[i]);
  for (int i = 0; i < steps; ++i) mids[i] = blocks_at(P, res.x[i] + 0.5 * h);

  double eta = kInf;
  for (const Blocks* b : {&grid.front(), &grid.back()}) {
    Eigen::ComplexEigenSolver<CMat> e1(b->M1, false), e2(b->M2, false);
    eta = std::min(eta, e1.eigenvalues().real().minCoeff() - e2.eigenvalues().real().maxCoeff());
  }
  double dhat = 0;
  for (int i = 0; i <= steps; ++i) dhat = std::max(dhat, grid[i].d * spectral_norm(P.Theta(res.x[i])));
  res.eta_hat = eta;
  res.delta_hat = dhat;
  if (!(eta > 0) || dhat / eta >= opt.max_ratio) {
    std::ostringstream os;
    os << "delta-hat / eta-hat = " << dhat / eta << " with eta-hat = " << eta;
    throw GapTooSmall(os.str());
  }
  res.Phi2 = riccati_fixed_point(grid, mids, h, true, true, opt, res.iterations);
  res.Phi1 = riccati_fixed_point(grid, mids, h, false, false, opt, res.iterations);
  for (const auto& m : res.Phi2) res.sup_Phi2 = std::max(res.sup_Phi2, spectral_norm(m));
  for (const auto& m : res.Phi1) res.sup_Phi1 = std::max(res.sup_Phi1, spectral_norm(m));
  res.certified = std::max(res.sup_Phi1, res.sup_Phi2) <= opt.C * dhat / eta;
  return res;
}

TrackingProblem constant_tracking_example(double delta, double L) {
  TrackingProblem P;
  P.k1 = P.k2 = 1;
  P.x_lo = -L;
  P.x_hi = L;
  P.M1 = [](double) { return CMat::Constant(1, 1, 1.0); };
  P.M2 = [](double) { return CMat::Constant(1, 1, -1.0); };
  P.delta = [delta](double) { return delta; };
  P.Theta = [](double) {
    CMat T(2, 2);
    T << 0.0, 1.0, 1.0, 0.0;
    return T;
  };
  return P;
}

double constant_tracking_slope(double delta) {
  return delta == 0 ? 0.0 : (std::sqrt(1 + delta * delta) - 1) / delta;
}

TrackingProblem random_tracking_problem(std::mt19937_64& rng, double eta, double delta0) {
  std::uniform_real_distribution<double> U(-1.0, 1.0), P(0.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 2);
  TrackingProblem T;
  T.k1 = dim(rng);
  T.k2 = dim(rng);
  T.x_lo = -15;
  T.x_hi = 15;
  CVec d1(T.k1), d2(T.k2);
  for (int i = 0; i < T.k1; ++i) d1[i] = cplx(0.5 * eta + P(rng), U(rng));
  for (int i = 0; i < T.k2; ++i) d2[i] = cplx(-0.5 * eta - P(rng), U(rng));
  const int k = T.k1 + T.k2;
  CMat T0(k, k), T1(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      T0(i, j) = 0.5 * cplx(U(rng), U(rng)) / std::sqrt(2.0);
      T1(i, j) = 0.5 * cplx(U(rng), U(rng)) / std::sqrt(2.0);
    }
  T.M1 = [d1](double x) { return CMat((d1.array() + cplx(0, 0.3 * std::tanh(x))).matrix().asDiagonal()); };
  T.M2 = [d2](double x) { return CMat((d2.array() - cplx(0, 0.3 * std::tanh(x))).matrix().asDiagonal()); };
  T.delta = [delta0](double x) { return delta0 * std::exp(-std::abs(x)); };
  T.Theta = [T0, T1](double x) { return CMat(T0 + std::sin(x) * T1); };
  return T;
}

double graph_invariance_drift(const TrackingProblem& P, const TrackingResult& res, int samples,
                              std::mt19937_64& rng) {
  std::uniform_int_distribution<Eigen::Index> pick(0, res.x.size() - 2);
  std::normal_distribution<double> g;
  const int k = P.k1 + P.k2;
  auto full = [&](double x) {
    const Blocks b = blocks_at(P, x);
    CMat A = b.d * P.Theta(x);
    A.topLeftCorner(P.k1, P.k1) += b.M1;
    A.bottomRightCorner(P.k2, P.k2) += b.M2;
    return A;
  };
  double worst = 0;
  for (int s = 0; s < samples; ++s) {
    const Eigen::Index i = pick(rng);
    const double x = res.x[i], h = res.x[i + 1] - res.x[i];
    CVec z1(P.k1);
    for (int j = 0; j < P.k1; ++j) z1[j] = cplx(g(rng), g(rng));
    CVec z(k);
    z << z1, res.Phi2[i] * z1;
    const CMat A0 = full(x), Am = full(x + 0.5 * h), A1 = full(x + h);
    const CVec k1 = A0 * z, k2 = Am * (z + 0.5 * h * k1), k3 = Am * (z + 0.5 * h * k2), k4 = A1 * (z + h * k3);
    const CVec zn = z + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    const double dist = (zn.tail(P.k2) - res.Phi2[i + 1] * zn.head(P.k1)).norm() / zn.norm();
    worst = std::max(worst, dist);
  }
  return worst;
}

TrackingProblem tracking_problem(const ReducedSystem& rs, const std::vector<BlockKind>& first) {
  std::vector<int> perm1, perm2;
  for (int c = 0; c < static_cast<int>(rs.kinds.size()); ++c) {
    const bool in1 = std::find(first.begin(), first.end(), rs.kinds[c]) != first.end();
    (in1 ? perm1 : perm2).push_back(c);
  }
  std::vector<int> perm = perm1;
  perm.insert(perm.end(), perm2.begin(), perm2.end());
  const int N = static_cast<int>(perm.size());
  auto shared = std::make_shared<ReducedSystem>(rs);
  auto interp = [shared](double x, const std::vector<CMat>& v) -> CMat {
    const Vec& xs = shared->x;
    const double h = xs[1] - xs[0];
    const double s = std::clamp((x - xs[0]) / h, 0.0, double(xs.size() - 1));
    const size_t i = std::min<size_t>(static_cast<size_t>(s), xs.size() - 2);
    const double t = s - i;
    return (1 - t) * v[i] + t * v[i + 1];
  };
  auto reorder = [perm, N](const CMat& A) {
    CMat B(N, N);
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) B(a, b) = A(perm[a], perm[b]);
    return B;
  };
  TrackingProblem P;
  P.k1 = static_cast<int>(perm1.size());
  P.k2 = static_cast<int>(perm2.size());
  P.x_lo = rs.x[0];
  P.x_hi = rs.x[rs.x.size() - 1];
  const int k1 = P.k1, k2 = P.k2;
  P.M1 = [=](double x) { return CMat(reorder(interp(x, shared->M)).topLeftCorner(k1, k1)); };
  P.M2 = [=](double x) { return CMat(reorder(interp(x, shared->M)).bottomRightCorner(k2, k2)); };
  P.Theta = [=](double x) {
    const Vec& xs = shared->x;
    const double h = xs[1] - xs[0];
    const double s = std::clamp((x - xs[0]) / h, 0.0, double(xs.size() - 1));
    const size_t i = std::min<size_t>(static_cast<size_t>(s), xs.size() - 2);
    const double t = s - i;
    const double d = (1 - t) * shared->delta[i] + t * shared->delta[i + 1];
    const CMat dT = (1 - t) * shared->delta[i] * shared->Theta[i] + t * shared->delta[i + 1] * shared->Theta[i + 1];
    return d > 1e-300 ? CMat(reorder(dT) / d) : CMat::Zero(N, N);
  };
  P.delta = [=](double x) {
    const Vec& xs = shared->x;
    const double h = xs[1] - xs[0];
    const double s = std::clamp((x - xs[0]) / h, 0.0, double(xs.size() - 1));
    const size_t i = std::min<size_t>(static_cast<size_t>(s), xs.size() - 2);
    const double t = s - i;
    return (1 - t) * shared->delta[i] + t * shared->delta[i + 1];
  };
  return P;
}

// Regimes

std::string to_string(Regime r) {
  switch (r) {
    case Regime::I: return "I";
    case Regime::II: return "II";
    case Regime::III: return "III";
  }
  return "?";
}

RegimeReport regime_partition_and_normal_form(double eps, double C, double r_min, double R_max,
                                              const PrincipalModel& pm, const EigenvalueSystem* es,
                                              int samples) {
  if (!(eps > 0 && eps <= 0.25)) throw std::invalid_argument("regime analysis needs 0 < eps <= 0.25");
  if (!(C >= 4)) throw std::invalid_argument("regime analysis needs C >= 4");
  if (!(r_min > 0 && R_max > r_min)) throw std::invalid_argument("need 0 < r_min < R_max");
  RegimeReport rep;
  rep.C = C;
  RegimeSegment proto;
  proto.Lambda = std::abs(pm.Lambda);
  proto.beta = pm.beta0;
  proto.eps = eps;
  const double b1 = std::clamp(proto.lambda_from_hat(C).real(), r_min, R_max);
  const double b2 = std::clamp(proto.lambda_from_hat(C / eps).real(), r_min, R_max);
  const double cuts[4] = {r_min, b1, b2, R_max};
  const Regime tags[3] = {Regime::I, Regime::II, Regime::III};
  for (int k = 0; k < 3; ++k) {
    RegimeSegment s = proto;
    s.tag = tags[k];
    s.lo = cuts[k];
    s.hi = cuts[k + 1];
    s.hat_lo = s.lambda_to_hat(s.lo).real();
    s.hat_hi = s.lambda_to_hat(s.hi).real();
    rep.segments.push_back(s);
  }

  // Regime II: root gap of the rescaled Burgers block [[0, 1], [lambda-hat, eta-bar]].
  double gap = kInf;
  for (int k = 0; k <= 32; ++k) {
    const double mag = C * std::pow(1.0 / eps, k / 32.0);
    for (int a = 0; a <= 16; ++a) {
      const cplx lh = std::polar(mag, -M_PI / 2 + M_PI * a / 16);
      for (int e = 0; e <= 20; ++e) {
        const double eb = -1 + 0.1 * e;
        const cplx root_gap = std::sqrt(eb * eb + 4.0 * lh);
        gap = std::min(gap, std::abs(root_gap.real()) / std::sqrt(std::abs(lh)));
      }
    }
  }
  rep.burgers_root_gap = gap;

  if (!es) return rep;
  const RegimeSegment& s1 = rep.segments[0];
  for (int k = 0; k < samples; ++k) {
    const double ang = samples > 1 ? -M_PI / 2 + M_PI * k / (samples - 1) : 0.0;
    const cplx lh = std::polar(0.5 * C, ang);
    const cplx lam = s1.lambda_from_hat(lh);
    if (std::abs(lam) > pm.expansion_radius) continue;
    const BlockBasis b = build_block_basis(*es, pm, lam, 801);
    const ReducedSystem rs = block_diagonalize(*es, pm, b, eps);
    const size_t K = rs.x.size();
    Vec xr(K), coupling(K), forcing(K);
    double super = 0, at_inf = 0;
    for (size_t i = 0; i < K; ++i) {
      xr[i] = s1.x_to_hat(rs.x[i]);
      const CMat dT = rs.delta[i] * rs.Theta[i];
      coupling[i] = dT.cwiseAbs().maxCoeff() / ((1 + std::abs(lh)) * eps);
      double f = 0;
      for (int a = 0; a < b.N; ++a) {
        const bool rho = rs.kinds[a] == BlockKind::RhoMinus || rs.kinds[a] == BlockKind::RhoPlus;
        if (!rho) continue;
        for (int c = 0; c < b.N; ++c)
          if (rs.kinds[c] == BlockKind::Principal) f = std::max(f, std::abs(dT(a, c)));
        super = std::max(super, std::abs(s1.z_to_hat(rs.M[i](a, a))) / (eps * std::abs(lh)));
        if (i == 0 || i + 1 == K) at_inf = std::max(at_inf, dT.row(a).cwiseAbs().maxCoeff());
      }
      forcing[i] = f;
    }
    const auto [th, ic] = fit_decay(xr, coupling);
    (void)ic;
    rep.coupling_theta = k == 0 ? th : std::min(rep.coupling_theta, th);
    rep.coupling_C = std::max(rep.coupling_C, envelope_constant(xr, coupling, th));
    rep.forcing_C = std::max(rep.forcing_C, envelope_constant(xr, forcing, th));
    rep.superslow_C = std::max(rep.superslow_C, super);
    rep.phi_rho_infinity = std::max(rep.phi_rho_infinity, at_inf);
  }
  return rep;
}

}  // namespace evanskit
