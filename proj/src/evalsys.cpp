#include "evanskit/evalsys.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace evanskit {

std::string to_string(Formulation f) {
  switch (f) {
    case Formulation::IntegratedIdentityViscous: return "integrated-identity-viscous";
    case Formulation::UnintegratedViscous: return "unintegrated-viscous";
    case Formulation::IntegratedGeneralViscous: return "integrated-general-viscous";
    case Formulation::BalancedFluxRelaxation: return "balanced-flux-relaxation";
    case Formulation::MultidModel: return "multid-model";
    case Formulation::Synthetic: return "synthetic";
  }
  return "unknown";
}

EigenvalueSystem make_profile_system(std::string name, Formulation tag, int N,
                                     std::shared_ptr<const ShockProfile> profile,
                                     std::function<CMat(const Vec&, const Vec&, cplx)> coefficient) {
  EigenvalueSystem es;
  es.name = std::move(name);
  es.tag = tag;
  es.N = N;
  es.L = profile->L;
  es.profile = profile;
  es.coefficient = coefficient;
  const ShockProfile* p = profile.get();
  es.A = [p, coefficient](double x, cplx lambda) {
    return coefficient(p->state(x), p->dstate(x), lambda);
  };
  es.A_inf = [p, coefficient](int side, cplx lambda) {
    const Vec e = p->endpoint(side);
    return coefficient(e, Vec::Zero(e.size()), lambda);
  };
  certify_decay(es);
  return es;
}

namespace {

bool is_identity(const Mat& B, double tol = 1e-14) {
  return (B - Mat::Identity(B.rows(), B.cols())).lpNorm<Eigen::Infinity>() <= tol;
}

}  // namespace

EigenvalueSystem assemble_identity_viscous(std::shared_ptr<const ShockProfile> profile,
                                           const ViscousSystem& sys, bool integrated) {
  for (Eigen::Index i = 0; i < profile->size(); i += std::max<Eigen::Index>(1, profile->size() / 64))
    if (!is_identity(sys.B(profile->Y.col(i))))
      throw WrongFormulation("viscosity is not the identity along the profile");
  if (!is_identity(sys.B(profile->u_minus)) || !is_identity(sys.B(profile->u_plus)))
    throw WrongFormulation("viscosity is not the identity at the endpoints");
  const int n = sys.n;
  auto Df = sys.Df;
  std::function<CMat(const Vec&, const Vec&, cplx)> coeff;
  if (integrated) {
    coeff = [n, Df](const Vec& y, const Vec&, cplx lambda) {
      CMat A = CMat::Zero(2 * n, 2 * n);
      A.topRightCorner(n, n).setIdentity();
      A.bottomLeftCorner(n, n) = lambda * CMat::Identity(n, n);
      A.bottomRightCorner(n, n) = Df(y).cast<cplx>();
      return A;
    };
  } else {
    coeff = [n, Df](const Vec& y, const Vec&, cplx lambda) {
      CMat A = CMat::Zero(2 * n, 2 * n);
      A.topLeftCorner(n, n) = Df(y).cast<cplx>();
      A.topRightCorner(n, n).setIdentity();
      A.bottomLeftCorner(n, n) = lambda * CMat::Identity(n, n);
      return A;
    };
  }
  return make_profile_system(sys.name,
                             integrated ? Formulation::IntegratedIdentityViscous
                                        : Formulation::UnintegratedViscous,
                             2 * n, std::move(profile), coeff);
}

EigenvalueSystem assemble_general_viscous(std::shared_ptr<const ShockProfile> profile,
                                          const ViscousSystem& sys) {
  for (Eigen::Index i = 0; i < profile->size(); ++i) {
    Eigen::FullPivLU<Mat> lu(sys.B(profile->Y.col(i)));
    if (!lu.isInvertible())
      throw SingularViscosity("B(u) is singular at x = " + std::to_string(profile->x[i]));
  }
  const int n = sys.n;
  auto Df = sys.Df;
  auto B = sys.B;
  auto DB = sys.DB;
  auto coeff = [n, Df, B, DB](const Vec& y, const Vec& dy, cplx lambda) {
    const Mat Bm = B(y);
    Mat Aeps = Df(y);
    for (int j = 0; j < n; ++j) Aeps.col(j) -= DB(y, Vec::Unit(n, j)) * dy;
    const auto lu = Bm.partialPivLu();
    CMat A = CMat::Zero(2 * n, 2 * n);
    A.topRightCorner(n, n).setIdentity();
    A.bottomLeftCorner(n, n) = lambda * lu.inverse().cast<cplx>();
    A.bottomRightCorner(n, n) = lu.solve(Aeps).cast<cplx>();
    return A;
  };
  return make_profile_system(sys.name, Formulation::IntegratedGeneralViscous, 2 * n,
                             std::move(profile), coeff);
}

namespace {

Mat flux_inverse(const RelaxationSystem& sys, const Vec& u, const Vec& v) {
  const Mat A = sys.flux_jacobian(u, v);
  Eigen::FullPivLU<Mat> lu(A);
  if (!lu.isInvertible() || std::abs(A.determinant()) < 1e-14)
    throw SingularA("flux Jacobian is singular");
  return lu.inverse();
}

}  // namespace

CMat balanced_flux_coefficient(const RelaxationSystem& sys, const Vec& u, const Vec& v, cplx lambda) {
  const int n = sys.n, r = sys.r;
  const Mat Ai = flux_inverse(sys, u, v);
  Mat qq(r, n + r);
  qq << sys.q_u(u, v), sys.q_v(u, v);
  const Mat HH = qq * Ai;  // (H~, H)
  const Mat E = -Ai.topRows(n);
  const Mat F = -Ai.bottomRows(r);
  CMat A(n + r, n + r);
  A.topLeftCorner(n, n) = lambda * E.leftCols(n).cast<cplx>();
  A.topRightCorner(n, r) = E.rightCols(r).cast<cplx>();
  A.bottomLeftCorner(r, n) =
      lambda * HH.leftCols(n).cast<cplx>() + lambda * lambda * F.leftCols(n).cast<cplx>();
  A.bottomRightCorner(r, r) = HH.rightCols(r).cast<cplx>() + lambda * F.rightCols(r).cast<cplx>();
  return A;
}

CMat balanced_flux_definition(const RelaxationSystem& sys, const Vec& u, const Vec& v, cplx lambda) {
  const int n = sys.n, r = sys.r;
  const Mat Ai = flux_inverse(sys, u, v);
  CVec left(n + r), right(n + r);
  left << CVec::Constant(n, 1.0 / lambda), CVec::Ones(r);
  right << CVec::Constant(n, lambda), CVec::Ones(r);
  const CMat QmL = sys.source_jacobian(u, v).cast<cplx>() - lambda * CMat::Identity(n + r, n + r);
  return left.asDiagonal() * QmL * Ai.cast<cplx>() * right.asDiagonal();
}

CMat balanced_flux_simplified(const RelaxationSystem& sys, const Vec& u, const Vec& v, cplx lambda) {
  const int n = sys.n, r = sys.r;
  const Mat Ai = flux_inverse(sys, u, v);
  Mat P = Mat::Zero(n + r, n + r);
  P.topLeftCorner(n, n).setIdentity();
  P.bottomLeftCorner(r, n) = sys.q_u(u, v);
  P.bottomRightCorner(r, r) = sys.q_v(u, v);
  CVec right(n + r);
  right << CVec::Constant(n, lambda), CVec::Ones(r);
  return (P * Ai).cast<cplx>() * right.asDiagonal();
}

EigenvalueSystem assemble_relaxation_balanced_flux(std::shared_ptr<const ShockProfile> profile,
                                                   const RelaxationSystem& sys) {
  for (Eigen::Index i = 0; i < profile->size(); ++i)
    flux_inverse(sys, profile->Y.col(i).head(sys.n), profile->Y.col(i).tail(sys.r));
  const int n = sys.n, r = sys.r;
  auto coeff = [sys, n, r](const Vec& y, const Vec&, cplx lambda) {
    return balanced_flux_coefficient(sys, y.head(n), y.tail(r), lambda);
  };
  return make_profile_system(sys.name, Formulation::BalancedFluxRelaxation, n + r,
                             std::move(profile), coeff);
}

double multid_parabolicity_margin(const MultidBlocks& B) {
  double margin = std::numeric_limits<double>::infinity();
  const Mat C = B.B12 + B.B21;
  for (int k = 0; k < 256; ++k) {
    const double th = 2 * M_PI * k / 256;
    const double x1 = std::cos(th), x2 = std::sin(th);
    const Mat P = x1 * x1 * B.B11 + x1 * x2 * C + x2 * x2 * B.B22;
    const Mat S = 0.5 * (P + P.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
    margin = std::min(margin, es.eigenvalues().minCoeff());
  }
  return margin;
}

EigenvalueSystem assemble_multid_model(double eps, double xi2, double a, const MultidBlocks& B,
                                       double L) {
  const double theta = multid_parabolicity_margin(B);
  if (!(theta > 0)) throw NotParabolic("second-order symbol is not positive definite");
  if (std::abs(B.B11(0, 0) - 1.0) > 1e-14) throw NotParabolic("B11 must have unit (1,1) entry");
  if (L <= 0) L = default_domain_length(eps);
  auto profile = std::make_shared<const ShockProfile>(burgers_profile(eps, L));
  const cplx I(0, 1);
  const Mat A2{{0.0, 1.0}, {1.0, 0.0}};
  const CMat zeroth_const = (I * xi2 * A2.cast<cplx>() + xi2 * xi2 * B.B22.cast<cplx>()).eval();
  const CMat first_const = (I * xi2 * (B.B12 + B.B21).cast<cplx>()).eval();
  const CMat B11inv = B.B11.inverse().cast<cplx>();
  auto coeff = [=](const Vec& y, const Vec&, cplx lambda) {
    CMat A1 = CMat::Zero(2, 2);
    A1(0, 0) = y[0];
    A1(1, 1) = a;
    CMat A = CMat::Zero(4, 4);
    A.topRightCorner(2, 2).setIdentity();
    A.bottomLeftCorner(2, 2) = B11inv * (lambda * CMat::Identity(2, 2) + zeroth_const);
    A.bottomRightCorner(2, 2) = B11inv * (A1 + first_const);
    return A;
  };
  auto es = make_profile_system("multid-model", Formulation::MultidModel, 4, profile, coeff);
  es.real_coefficients = xi2 == 0.0;
  return es;
}

CMat asymptotic_matrix(const EigenvalueSystem& es, int side, cplx lambda) {
  return es.A_inf(side < 0 ? -1 : 1, lambda);
}

Splitting check_consistent_splitting(const EigenvalueSystem& es, cplx lambda, double tol) {
  Splitting s;
  for (int side : {+1, -1}) {
    const CMat M = asymptotic_matrix(es, side, lambda);
    Eigen::ComplexEigenSolver<CMat> ces(M, false);
    const double scale = std::max(1.0, M.norm());
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
      const cplx mu = ces.eigenvalues()[i];
      if (std::abs(mu.real()) <= tol * scale)
        throw SplittingFailure("eigenvalue " + std::to_string(mu.real()) + "+" +
                               std::to_string(mu.imag()) + "i of A" + (side > 0 ? "+" : "-") +
                               " lies on the imaginary axis");
      if (side > 0 && mu.real() < 0) ++s.k_plus;
      if (side < 0 && mu.real() > 0) ++s.k_minus;
    }
  }
  if (s.k_plus + s.k_minus != es.N)
    throw SplittingFailure("stable and unstable dimensions " + std::to_string(s.k_plus) + " + " +
                           std::to_string(s.k_minus) + " do not sum to " + std::to_string(es.N));
  return s;
}

namespace {

std::vector<std::pair<double, double>> decay_samples(const EigenvalueSystem& es, cplx lambda) {
  std::vector<std::pair<double, double>> out;
  const CMat Am = es.A_inf(-1, lambda), Ap = es.A_inf(+1, lambda);
  const Eigen::Index m = es.profile ? es.profile->size() : 201;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double x = es.profile ? es.profile->x[i] : -es.L + 2 * es.L * double(i) / (m - 1);
    const double d = (es.A(x, lambda) - (x < 0 ? Am : Ap)).norm();
    out.emplace_back(x, d);
  }
  return out;
}

}  // namespace

void certify_decay(EigenvalueSystem& es) {
  double rate = es.profile ? es.profile->tail_rate : 0.0;
  if (!(rate > 0)) rate = 1.0 / std::max(es.L, 1.0);
  es.C2 = 1.0 / (0.98 * rate);
  double c1 = 0;
  for (const auto& [x, d] : decay_samples(es, cplx(1.0)))
    c1 = std::max(c1, d * std::exp(std::abs(x) / es.C2));
  es.C1 = 1.1 * c1 + 1e-300;
}

double decay_certificate_ratio(const EigenvalueSystem& es, cplx lambda) {
  double worst = 0;
  for (const auto& [x, d] : decay_samples(es, lambda))
    worst = std::max(worst, d / (es.C1 * std::exp(-std::abs(x) / es.C2)));
  return worst;
}

double translational_residual(const EigenvalueSystem& es) {
  if (es.tag != Formulation::UnintegratedViscous)
    throw WrongFormulation("translational residual needs the unintegrated formulation");
  const ShockProfile& p = *es.profile;
  const int n = p.n;
  const Eigen::Index m = p.size();
  const double h = p.h();
  // W = (u', u'' - Df(u) u'), with Df read off the top-left block of A(x, 0).
  Mat W(2 * n, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double x = p.x[i];
    const Vec du = p.dY.col(i).head(n);
    const Vec ddu = p.ddstate(x).head(n);
    const Mat Df = es.A(x, 0.0).topLeftCorner(n, n).real();
    W.col(i) << du, ddu - Df * du;
  }
  double sum = 0;
  for (Eigen::Index i = 2; i + 2 < m; ++i) {
    const Vec dW = (W.col(i - 2) - 8 * W.col(i - 1) + 8 * W.col(i + 1) - W.col(i + 2)) / (12 * h);
    const CVec res = dW.cast<cplx>() - es.A(p.x[i], 0.0) * W.col(i).cast<cplx>();
    sum += res.squaredNorm() * h;
  }
  return std::sqrt(sum);
}

}  // namespace evanskit
