#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "evanskit/evalsys.hpp"

#include <random>

using namespace evanskit;

namespace {

std::shared_ptr<const ShockProfile> burgers(double eps = 1.0) {
  return std::make_shared<const ShockProfile>(burgers_profile(eps, default_domain_length(eps)));
}

std::shared_ptr<const ShockProfile> gnl(double eps, const Mat& B = Mat::Identity(2, 2)) {
  return std::make_shared<const ShockProfile>(
      solve_viscous_profile(systems::gnl2x2(B), Vec{{eps, 0.0}}, eps, default_domain_length(eps)));
}

std::shared_ptr<const ShockProfile> jx(double eps) {
  return std::make_shared<const ShockProfile>(
      solve_relaxation_profile(systems::jin_xin(), Vec::Constant(1, eps), eps, default_domain_length(eps)));
}

double max_abs(const CMat& M) { return M.cwiseAbs().maxCoeff(); }

/// Centered Cauchy-Riemann residual of every entry, relative to the entry scale.
double cauchy_riemann_residual(const EigenvalueSystem& es, double x, cplx lambda) {
  const double h = 1e-5;
  const CMat dre = (es.A(x, lambda + h) - es.A(x, lambda - h)) / (2 * h);
  const CMat dim = (es.A(x, lambda + cplx(0, h)) - es.A(x, lambda - cplx(0, h))) / cplx(0, 2 * h);
  return max_abs(dre - dim) / std::max(1.0, max_abs(dre));
}

std::vector<EigenvalueSystem> sample_systems() {
  Mat B{{1.0, 0.3}, {0.2, 1.5}};
  return {assemble_identity_viscous(burgers(), systems::burgers(), true),
          assemble_identity_viscous(gnl(0.1), systems::gnl2x2(), true),
          assemble_general_viscous(gnl(0.1, B), systems::gnl2x2(B)),
          assemble_relaxation_balanced_flux(jx(0.1), systems::jin_xin()),
          assemble_multid_model(1.0, 0.5, 1.0)};
}

}  // namespace

TEST_CASE("integrated Burgers coefficient at the center") {
  const auto es = assemble_identity_viscous(burgers(), systems::burgers(), true);
  const CMat A = es.A(0.0, 2.0);
  CHECK(max_abs(A - CMat{{0.0, 1.0}, {2.0, 0.0}}) < 1e-14);
  const cplx lam(0.4, -1.3);
  CHECK(max_abs(es.A_inf(+1, lam) - CMat{{0.0, 1.0}, {lam, -1.0}}) < 1e-14);
  CHECK(max_abs(es.A_inf(-1, lam) - CMat{{0.0, 1.0}, {lam, 1.0}}) < 1e-14);
}

TEST_CASE("identity viscous rejects non-identity viscosity") {
  Mat B{{1.0, 0.0}, {0.0, 2.0}};
  CHECK_THROWS_AS(assemble_identity_viscous(gnl(0.1, B), systems::gnl2x2(B), true), WrongFormulation);
}

TEST_CASE("declared decay follows the tanh tail") {
  for (double eps : {1.0, 0.2}) {
    auto es = assemble_identity_viscous(burgers(eps), systems::burgers(), true);
    // tanh(eps x / 2) approaches its limits like exp(-eps |x|)
    CHECK(es.C2 * eps == doctest::Approx(1.0).epsilon(0.05));
    for (cplx lam : {cplx(1.0), cplx(0.3, 2.0), cplx(5.0, -1.0)}) CHECK(decay_certificate_ratio(es, lam) <= 1.0);
    CHECK(max_abs(es.A(es.L, 0.7) - es.A_inf(+1, 0.7)) <= es.C1 * std::exp(-es.L / es.C2));
  }
}

TEST_CASE("general viscous assembly coincides with identity assembly when B = I") {
  const auto p = gnl(0.1);
  const auto a = assemble_identity_viscous(p, systems::gnl2x2(), true);
  const auto b = assemble_general_viscous(p, systems::gnl2x2());
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int k = 0; k < 50; ++k) {
    const double x = p->L * U(rng);
    const cplx lam(2 * U(rng), 2 * U(rng));
    CHECK(max_abs(a.A(x, lam) - b.A(x, lam)) < 1e-14);
  }
}

TEST_CASE("general viscous assembly with B = diag(1, 2)") {
  const Mat B{{1.0, 0.0}, {0.0, 2.0}};
  const auto sys = systems::gnl2x2(B);
  const auto p = gnl(0.1, B);
  const auto es = assemble_general_viscous(p, sys);
  const CMat A = es.A(0.0, 1.0);
  CHECK(max_abs(A.topLeftCorner(2, 2)) == 0.0);
  CHECK(max_abs(A.topRightCorner(2, 2) - CMat::Identity(2, 2)) == 0.0);
  CHECK(max_abs(A.bottomLeftCorner(2, 2) - CMat{{1.0, 0.0}, {0.0, 0.5}}) < 1e-15);
  // constant B: A^eps = Df(u), so the right block is B^{-1} Df(u(0))
  const Mat expected = B.inverse() * sys.Df(p->u(0.0));
  CHECK(max_abs(A.bottomRightCorner(2, 2) - expected.cast<cplx>()) < 1e-14);
  // |A^eps - Df(u)| <= C |u'| holds with C = 0 for constant viscosity
  for (double x : {-30.0, -3.0, 0.0, 7.0}) {
    const Mat Aeps = B * Mat(es.A(x, 1.0).bottomRightCorner(2, 2).real());
    CHECK((Aeps - sys.Df(p->u(x))).norm() <= 1e-14 * (1 + p->du(x).norm()));
  }
}

TEST_CASE("general viscous assembly needs an invertible viscosity") {
  const Mat B{{1.0, 0.0}, {0.0, 0.0}};
  CHECK_THROWS_AS(assemble_general_viscous(gnl(0.1), systems::gnl2x2(B)), SingularViscosity);
}

TEST_CASE("Jin-Xin balanced flux at the zero state") {
  const auto sys = systems::jin_xin();
  for (cplx lam : {cplx(1.0), cplx(0.7, 0.2), cplx(-0.1, 3.0)}) {
    const CMat expected{{0.0, -1.0}, {-lam * (1.0 + lam), 0.0}};
    CHECK(max_abs(balanced_flux_coefficient(sys, Vec::Zero(1), Vec::Zero(1), lam) - expected) < 1e-14);
    CHECK(max_abs(balanced_flux_definition(sys, Vec::Zero(1), Vec::Zero(1), lam) - expected) < 1e-14);
  }
}

TEST_CASE("Jin-Xin balanced flux is [[0, -1], [-lambda, f'(u)]] to leading order") {
  const auto sys = systems::jin_xin();
  const Vec u = Vec::Constant(1, 0.07), v = sys.vstar(u);
  for (double s : {1e-2, 1e-3, 1e-4}) {
    const cplx lam = s * cplx(0.6, 0.8);
    const CMat lead{{0.0, -1.0}, {-lam, 0.07}};
    const double d = max_abs(balanced_flux_coefficient(sys, u, v, lam) - lead);
    CHECK(d <= 1.0001 * std::norm(lam));
  }
  // the cancelled form is finite at lambda = 0
  CHECK(max_abs(balanced_flux_coefficient(sys, u, v, 0.0) - CMat{{0.0, -1.0}, {0.0, 0.07}}) < 1e-15);
}

TEST_CASE("simplified balanced flux display differs from the definition") {
  const auto sys = systems::jin_xin();
  const Vec u = Vec::Constant(1, 0.05), v = sys.vstar(u);
  const cplx lam(0.3, 0.4);
  CHECK(max_abs(balanced_flux_simplified(sys, u, v, lam) - balanced_flux_definition(sys, u, v, lam)) > 1e-2);
  CHECK(max_abs(balanced_flux_coefficient(sys, u, v, lam) - balanced_flux_definition(sys, u, v, lam)) < 1e-14);
}

TEST_CASE("Jin-Xin flux Jacobian has determinant -1 along the profile") {
  const auto sys = systems::jin_xin();
  const auto p = jx(0.1);
  for (Eigen::Index i = 0; i < p->size(); i += 97) {
    const Vec y = p->Y.col(i);
    CHECK(sys.flux_jacobian(y.head(1), y.tail(1)).determinant() == doctest::Approx(-1.0).epsilon(1e-14));
  }
}

TEST_CASE("Jin-Xin limiting matrix at the right state") {
  const auto es = assemble_relaxation_balanced_flux(jx(0.1), systems::jin_xin());
  const cplx lam(0.5, 0.25);
  const CMat expected{{0.0, -1.0}, {-lam * (1.0 + lam), -0.1}};
  CHECK(max_abs(asymptotic_matrix(es, +1, lam) - expected) < 1e-9);
}

TEST_CASE("multid model at xi2 = 0 decouples") {
  const auto es = assemble_multid_model(1.0, 0.0, 1.0);
  for (double x : {-5.0, 0.0, 2.0})
    for (cplx lam : {cplx(1.0), cplx(0.2, 0.7)}) {
      const CMat A = es.A(x, lam);
      for (int i : {0, 2})
        for (int j : {1, 3}) {
          CHECK(A(i, j) == 0.0);
          CHECK(A(j, i) == 0.0);
        }
      // the (w1, w1') block is the integrated Burgers coefficient
      const CMat burgers_block{{0.0, 1.0}, {lam, -std::tanh(x / 2)}};
      CMat sub(2, 2);
      sub << A(0, 0), A(0, 2), A(2, 0), A(2, 2);
      CHECK(max_abs(sub - burgers_block) < 1e-12);
    }
}

TEST_CASE("multid model assembly matches a hand-built matrix") {
  const double xi2 = 0.5, a = 1.0;
  const cplx lam = 1.0, I(0, 1);
  const auto es = assemble_multid_model(1.0, xi2, a);
  // B11 = B22 = I, B12 = B21 = 0, A2 = [[0, 1], [1, 0]], A1(0) = diag(u(0), a) = diag(0, a)
  CMat expected = CMat::Zero(4, 4);
  expected(0, 2) = expected(1, 3) = 1.0;
  expected(2, 0) = lam + xi2 * xi2;
  expected(3, 1) = lam + xi2 * xi2;
  expected(2, 1) = expected(3, 0) = I * xi2;
  expected(3, 3) = a;
  CHECK(max_abs(es.A(0.0, lam) - expected) < 1e-14);
}

TEST_CASE("multid symbol positivity and its failure") {
  CHECK(multid_parabolicity_margin(MultidBlocks{}) > 0);
  MultidBlocks bad;
  bad.B22 = -Mat::Identity(2, 2);
  CHECK_FALSE(multid_parabolicity_margin(bad) > 0);
  CHECK_THROWS_AS(assemble_multid_model(1.0, 1.0, 1.0, bad), NotParabolic);
}

TEST_CASE("Burgers limiting eigenvalues follow the quadratic formula") {
  const auto es = assemble_identity_viscous(burgers(), systems::burgers(), true);
  for (cplx lam : {cplx(1.0), cplx(0.3, 2.0), cplx(4.0, -0.5)}) {
    for (int side : {+1, -1}) {
      Eigen::ComplexEigenSolver<CMat> ces(asymptotic_matrix(es, side, lam));
      const cplx s = std::sqrt(1.0 + 4.0 * lam);
      const cplx m1 = (-double(side) + s) / 2.0, m2 = (-double(side) - s) / 2.0;
      const auto ev = ces.eigenvalues();
      const double d = std::min(std::abs(ev[0] - m1) + std::abs(ev[1] - m2), std::abs(ev[0] - m2) + std::abs(ev[1] - m1));
      CHECK(d < 1e-12);
    }
  }
}

TEST_CASE("consistent splitting for Burgers") {
  const auto es = assemble_identity_viscous(burgers(), systems::burgers(), true);
  const auto s = check_consistent_splitting(es, 1.0);
  CHECK(s.k_plus == 1);
  CHECK(s.k_minus == 1);
  CHECK_THROWS_AS(check_consistent_splitting(es, 0.0), SplittingFailure);
  CHECK_NOTHROW(check_consistent_splitting(es, cplx(0, 1)));
}

TEST_CASE("coefficients are analytic in lambda") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(-1, 1);
  for (const auto& es : sample_systems()) {
    for (int k = 0; k < 50; ++k) {
      const double x = es.L * U(rng);
      const cplx lam(1.5 + U(rng), 2 * U(rng));
      CHECK(cauchy_riemann_residual(es, x, lam) < 1e-6);
    }
  }
}

TEST_CASE("real systems satisfy conjugation symmetry") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> U(-1, 1);
  for (const auto& es : sample_systems()) {
    if (!es.real_coefficients) continue;
    for (int k = 0; k < 20; ++k) {
      const double x = es.L * U(rng);
      const cplx lam(U(rng), 3 * U(rng));
      CHECK(max_abs(es.A(x, std::conj(lam)).conjugate() - es.A(x, lam)) < 1e-14);
    }
  }
  CHECK_FALSE(assemble_multid_model(1.0, 0.5, 1.0).real_coefficients);
}

TEST_CASE("declared decay constants cover every grid point") {
  for (auto es : sample_systems()) {
    certify_decay(es);
    for (cplx lam : {cplx(1.0), cplx(0.1, 0.5)}) CHECK(decay_certificate_ratio(es, lam) <= 1.0);
  }
}

TEST_CASE("derivative of the profile solves the unintegrated equation at lambda = 0") {
  const auto b = assemble_identity_viscous(burgers(0.1), systems::burgers(), false);
  CHECK(translational_residual(b) <= 1e-6);
  const auto g = assemble_identity_viscous(gnl(0.1), systems::gnl2x2(), false);
  CHECK(translational_residual(g) <= 1e-6);
  CHECK_THROWS_AS(translational_residual(assemble_identity_viscous(burgers(), systems::burgers(), true)),
                  WrongFormulation);
}
