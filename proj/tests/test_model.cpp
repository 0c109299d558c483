#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "evanskit/model.hpp"

#include <Eigen/Eigenvalues>

#include <random>

using namespace evanskit;

namespace {

double binormalization_error(const SpectralDecomposition& d) {
  return (d.L * d.R - Mat::Identity(d.a.size(), d.a.size())).cwiseAbs().maxCoeff();
}

double eigen_residual(const Mat& A, const SpectralDecomposition& d) {
  double r = 0;
  for (Eigen::Index j = 0; j < d.a.size(); ++j)
    r = std::max(r, (A * d.R.col(j) - d.a[j] * d.R.col(j)).norm() / d.R.col(j).norm());
  return r / A.norm();
}

/// Jin-Xin with the relaxation source sign flipped, so q_v = +1.
RelaxationSystem unstable_equilibrium() {
  RelaxationSystem s = systems::jin_xin();
  s.q = [](const Vec& u, const Vec& v) { return Vec(v - 0.5 * u.cwiseProduct(u)); };
  s.q_u = [](const Vec& u, const Vec&) { return Mat(Mat::Constant(1, 1, -u[0])); };
  s.q_v = [](const Vec&, const Vec&) { return Mat(Mat::Identity(1, 1)); };
  return s;
}

}  // namespace

TEST_CASE("diagonal matrix decomposes into coordinate vectors") {
  const Mat A = Vec{{-1.0, 0.0, 2.0}}.asDiagonal();
  const auto d = characteristic_decomposition(A);
  CHECK((d.a - Vec{{-1.0, 0.0, 2.0}}).norm() == doctest::Approx(0.0));
  CHECK(d.p == 1);
  CHECK((d.R - Mat::Identity(3, 3)).norm() < 1e-14);
  CHECK((d.L - Mat::Identity(3, 3)).norm() < 1e-14);
}

TEST_CASE("lower triangular 2x2 matches the hand eigensolve") {
  const Mat A{{0.0, 0.0}, {1.0, 1.0}};
  const auto d = characteristic_decomposition(A);
  // a = 0: A r = 0 gives r = (1, -1); left row l A = 0 gives l = (1, 0).
  CHECK(d.a[0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(d.a[1] == doctest::Approx(1.0));
  CHECK(d.p == 0);
  CHECK((d.R.col(0) - Vec{{1.0, -1.0}}).norm() < 1e-12);
  CHECK((d.L.row(0) - Eigen::RowVector2d(1.0, 0.0)).norm() < 1e-12);
  CHECK(d.L.row(0).dot(d.R.col(0)) == doctest::Approx(1.0));
}

TEST_CASE("random symmetric 5x5 has small residual and binormalization error") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> N01;
  for (int trial = 0; trial < 10; ++trial) {
    Mat M(5, 5);
    for (auto& v : M.reshaped()) v = N01(rng);
    const Mat A = M + M.transpose();
    const auto d = characteristic_decomposition(A);
    CHECK(eigen_residual(A, d) < 1e-10);
    CHECK(binormalization_error(d) < 1e-10);
  }
}

TEST_CASE("decomposition agrees with an independent dense eigensolver on 200 random matrices") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 5;
    // Real distinct spectrum by construction: A = S diag(a) S^{-1} with well separated a.
    Vec a(n);
    for (int i = 0; i < n; ++i) a[i] = 2.0 * i - n + 0.3 * U(rng);
    Mat S(n, n);
    for (auto& v : S.reshaped()) v = U(rng);
    S += 2.0 * Mat::Identity(n, n);
    const Mat A = S * a.asDiagonal() * S.inverse();
    const auto d = characteristic_decomposition(A);
    Eigen::EigenSolver<Mat> ref(A);
    Vec ev = ref.eigenvalues().real();
    std::sort(ev.begin(), ev.end());
    CHECK((d.a - ev).norm() < 1e-9 * (1 + A.norm()));
    CHECK(eigen_residual(A, d) < 1e-10);
    CHECK(binormalization_error(d) < 1e-10);
    ++checked;
  }
  CHECK(checked == 200);
}

TEST_CASE("non-hyperbolic input is rejected") {
  CHECK_THROWS_AS(characteristic_decomposition(Mat{{0.0, 1.0}, {-1.0, 0.0}}), NotStrictlyHyperbolic);
  CHECK_THROWS_AS(characteristic_decomposition(Mat::Identity(2, 2)), NotStrictlyHyperbolic);
}

TEST_CASE("Burgers passes every viscous hypothesis") {
  const auto rep = check_hypotheses_viscous(systems::burgers());
  CHECK(rep.all_pass());
  CHECK(rep.Lambda == doctest::Approx(1.0));
  for (const auto& c : rep.checks) CHECK(c.margin >= 0);
}

TEST_CASE("gnl2x2 hypotheses") {
  const auto sys = systems::gnl2x2();
  const auto rep = check_hypotheses_viscous(sys);
  CHECK(rep.get("H2").pass);
  CHECK(rep.get("H4").pass);
  CHECK(rep.Lambda == doctest::Approx(1.0));
  const auto d = characteristic_decomposition(sys.Df(sys.u0));
  CHECK(d.a[0] == doctest::Approx(0.0));
  CHECK(d.a[1] == doctest::Approx(1.0));
}

TEST_CASE("symmetric linear flux fails genuine nonlinearity with a witness") {
  const auto rep = check_hypotheses_viscous(systems::symmetric_linear());
  CHECK_FALSE(rep.get("H4").pass);
  CHECK_FALSE(rep.get("H4").witness.empty());
  CHECK(rep.get("H4").margin == 0.0);
}

TEST_CASE("Jin-Xin relaxation hypotheses") {
  const auto rep = check_hypotheses_relaxation(systems::jin_xin());
  CHECK(rep.all_pass());
  CHECK(rep.get("H1").pass);
  CHECK(rep.get("subcharacteristic").margin == doctest::Approx(1.0));
  CHECK(rep.Lambda == doctest::Approx(1.0));
  const auto& sys = systems::jin_xin();
  Eigen::EigenSolver<Mat> es(sys.flux_jacobian(sys.u0, sys.v0));
  Vec ev = es.eigenvalues().real();
  std::sort(ev.begin(), ev.end());
  CHECK(ev[0] == doctest::Approx(-1.0));
  CHECK(ev[1] == doctest::Approx(1.0));
}

TEST_CASE("subcharacteristic violation is reported") {
  const auto rep = check_hypotheses_relaxation(systems::jin_xin(1.0, 1.5));
  CHECK_FALSE(rep.get("subcharacteristic").pass);
  CHECK_FALSE(rep.get("subcharacteristic").witness.empty());
  CHECK(rep.get("subcharacteristic").margin == 0.0);
  // B*(u0) = 1 - 1.5^2
  CHECK(chapman_enskog_viscosity(systems::jin_xin(1.0, 1.5), Vec::Constant(1, 1.5))(0, 0) ==
        doctest::Approx(1 - 2.25));
}

TEST_CASE("positive q_v fails equilibrium stability") {
  const auto rep = check_hypotheses_relaxation(unstable_equilibrium());
  CHECK_FALSE(rep.get("equilibrium_stability").pass);
  CHECK_FALSE(rep.get("equilibrium_stability").witness.empty());
}

TEST_CASE("genuine nonlinearity and diffusion constants") {
  auto b = genuine_nonlinearity_and_diffusion(systems::burgers(), Vec::Zero(1));
  CHECK(b.Lambda == doctest::Approx(1.0));
  CHECK(b.beta == doctest::Approx(1.0));
  auto g = genuine_nonlinearity_and_diffusion(systems::gnl2x2(), Vec::Zero(2));
  CHECK(g.Lambda == doctest::Approx(1.0));
  CHECK(g.beta == doctest::Approx(1.0));
  auto j = genuine_nonlinearity_and_diffusion(systems::jin_xin(), Vec::Zero(1));
  CHECK(j.Lambda == doctest::Approx(1.0));
  CHECK(j.beta == doctest::Approx(1.0));
  CHECK_THROWS_AS(genuine_nonlinearity_and_diffusion(systems::symmetric_linear(), Vec::Zero(2)), Error);
  CHECK_THROWS_AS(genuine_nonlinearity_and_diffusion(systems::gnl2x2(-Mat::Identity(2, 2)), Vec::Zero(2)),
                  NonDissipative);
}

TEST_CASE("Chapman-Enskog viscosity of Jin-Xin") {
  const auto sys = systems::jin_xin();
  CHECK(chapman_enskog_viscosity(sys, Vec::Zero(1))(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(chapman_enskog_viscosity(sys, Vec::Constant(1, 0.3))(0, 0) == doctest::Approx(0.91).epsilon(1e-14));
  RelaxationSystem singular = sys;
  singular.q_v = [](const Vec&, const Vec&) { return Mat(Mat::Zero(1, 1)); };
  CHECK_THROWS_AS(chapman_enskog_viscosity(singular, Vec::Zero(1)), SingularRelaxation);
}

TEST_CASE("Chapman-Enskog viscosity stays positive inside the subcharacteristic range") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-0.99, 0.99);
  for (double a : {1.0, 2.0}) {
    const auto sys = systems::jin_xin(a);
    for (int k = 0; k < 100; ++k) {
      const double u = a * U(rng);
      const double b = chapman_enskog_viscosity(sys, Vec::Constant(1, u))(0, 0);
      CHECK(b > 0);
      CHECK(b == doctest::Approx(a * a - u * u).epsilon(1e-12));
    }
  }
}

TEST_CASE("equilibrium slope matches a finite difference of v*") {
  const auto sys = systems::jin_xin();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(-0.8, 0.8);
  for (int k = 0; k < 50; ++k) {
    const Vec u = Vec::Constant(1, U(rng));
    const double h = 1e-6;
    const Mat fd = (sys.vstar(u + Vec::Constant(1, h)) - sys.vstar(u - Vec::Constant(1, h))) / (2 * h);
    const Mat analytic = sys.vstar_u(u);
    CHECK((fd - analytic).norm() < 1e-8);
    CHECK((sys.q_u(u, sys.vstar(u)) + sys.q_v(u, sys.vstar(u)) * fd).norm() < 1e-8);
  }
}

TEST_CASE("frequency grid is log spaced") {
  const auto g = log_grid(1e-2, 1e2, 64);
  CHECK(g.front() == doctest::Approx(1e-2));
  CHECK(g.back() == doctest::Approx(1e2));
  CHECK(g.size() == 4 * 64 + 1);
}
