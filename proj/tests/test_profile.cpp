#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "evanskit/profile.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

using namespace evanskit;

namespace {

ShockProfile gnl_profile(double eps) {
  return solve_viscous_profile(systems::gnl2x2(), Vec{{eps, 0.0}}, eps, default_domain_length(eps));
}

ShockProfile jx_profile(double eps) {
  return solve_relaxation_profile(systems::jin_xin(), Vec::Constant(1, eps), eps, default_domain_length(eps));
}

double sup_tanh_error(const ShockProfile& p, int row, double eps) {
  double e = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    e = std::max(e, std::abs(p.Y(row, i) + eps * std::tanh(eps * p.x[i] / 2)));
  return e;
}

}  // namespace

TEST_CASE("Burgers profile values") {
  const auto p = burgers_profile(1.0, 40.0);
  CHECK(std::abs(p.u(0.0)[0]) < 1e-15);
  CHECK(p.du(0.0)[0] == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(p.u_minus[0] == 1.0);
  CHECK(p.u_plus[0] == -1.0);
  const auto q = burgers_profile(0.2, 60.0);
  CHECK(std::abs(q.u(50.0)[0] + 0.2) < 0.2 * std::exp(-0.2 * 50 / 2) * 2);
}

TEST_CASE("Hugoniot endpoints") {
  const double eps = 0.1;
  CHECK(hugoniot_endpoint(systems::burgers(), Vec::Constant(1, eps), eps)[0] == doctest::Approx(-eps));
  const auto sys = systems::gnl2x2();
  const Vec up = hugoniot_endpoint(sys, Vec{{0.1, 0.0}}, 0.1);
  CHECK((up - Vec{{-0.1, 0.2}}).norm() < 1e-12);
  CHECK((sys.f(up) - sys.f(Vec{{0.1, 0.0}})).norm() < 1e-12);
  CHECK_THROWS_AS(hugoniot_endpoint(sys, Vec{{10.0 * sys.radius, 0.0}}, 10.0 * sys.radius), NoEndpoint);
}

TEST_CASE("viscous Burgers profile matches the closed form") {
  const auto p = solve_viscous_profile(systems::burgers(), Vec::Constant(1, 1.0), 1.0, default_domain_length(1.0));
  CHECK(sup_tanh_error(p, 0, 1.0) < 1e-8);
  CHECK(midpoint_residual(p) < 1e-8);
}

TEST_CASE("gnl2x2 first component decouples into a Burgers profile") {
  const auto p = gnl_profile(0.1);
  CHECK(sup_tanh_error(p, 0, 0.1) < 1e-7);
  CHECK(midpoint_residual(p) < 1e-8);
  // centering of the principal coordinate l_p = (1, 0)
  CHECK(std::abs(p.u(0.0)[0] - 0.5 * (p.u_minus[0] + p.u_plus[0])) < 1e-10);
}

TEST_CASE("reversed endpoints admit no connection") {
  CHECK_THROWS_AS(solve_viscous_profile(systems::burgers(), Vec::Constant(1, -0.1), 0.1, 50.0), NoConnection);
}

TEST_CASE("Jin-Xin profile has constant v") {
  const auto p = jx_profile(0.1);
  CHECK(sup_tanh_error(p, 0, 0.1) < 1e-7);
  for (Eigen::Index i = 0; i < p.size(); ++i) CHECK(std::abs(p.Y(1, i) - 0.005) < 1e-10);
  // amplitude of the v variation vanishes for every eps
  for (double eps : {0.2, 0.05}) {
    const auto q = jx_profile(eps);
    CHECK(q.Y.row(1).maxCoeff() - q.Y.row(1).minCoeff() < 1e-10);
  }
}

TEST_CASE("subcharacteristic violation blocks the relaxation profile") {
  CHECK_THROWS_AS(solve_relaxation_profile(systems::jin_xin(1.0, 1.5), Vec::Constant(1, 1.6), 0.1, 50.0),
                  NoConnection);
}

TEST_CASE("Burgers rescaling is exact for any amplitude") {
  for (double eps : {1.0, 0.3, 0.05}) {
    const auto p = burgers_profile(eps, default_domain_length(eps));
    const auto rep = rescale_and_compare(p, systems::burgers());
    CHECK(rep.sup_eta_error < 1e-10);
    CHECK(rep.monotone);
    // eta' = (eta^2 - 1) / 2 in rescaled units
    double res = 0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double eta = p.Y(0, i) / eps, deta = p.dY(0, i) / (eps * eps);
      res = std::max(res, std::abs(deta - 0.5 * (eta * eta - 1)));
    }
    CHECK(res < 1e-10);
  }
}

TEST_CASE("gnl2x2 rescaled error sits at roundoff because its principal coordinate is exact Burgers") {
  // The halving ratio cannot be measured: both errors are at the solver tolerance.
  const auto a = rescale_and_compare(gnl_profile(0.1), systems::gnl2x2());
  const auto b = rescale_and_compare(gnl_profile(0.05), systems::gnl2x2());
  CHECK(a.sup_eta_error < 1e-9);
  CHECK(b.sup_eta_error < 1e-9);
  CHECK(a.theta_hat > 0.5);
  CHECK(b.theta_hat > 0.5);
}

TEST_CASE("Jin-Xin principal speed error constant is stable under halving") {
  const double e1 = 0.1, e2 = 0.05;
  const auto a = rescale_and_compare(jx_profile(e1), systems::jin_xin());
  const auto b = rescale_and_compare(jx_profile(e2), systems::jin_xin());
  const double C1 = a.sup_speed_error / e1, C2 = b.sup_speed_error / e2;
  CHECK(C1 <= 1.0);
  CHECK(C2 <= 2.0 * std::max(C1, 1e-12));
}

TEST_CASE("solved profiles are monotone, endpoint consistent and have affine tails") {
  for (double eps : {0.2, 0.1, 0.05}) {
    const auto sys = systems::gnl2x2();
    const auto p = gnl_profile(eps);
    CHECK((sys.f(p.u_plus) - sys.f(p.u_minus)).norm() < 1e-10);
    CHECK(rescale_and_compare(p, sys).monotone);
    CHECK(p.tail_r2 > 0.99);
    CHECK(p.tail_rate > 0);
    const auto j = systems::jin_xin();
    const auto q = jx_profile(eps);
    CHECK((j.f_eq(q.u_plus) - j.f_eq(q.u_minus)).norm() < 1e-10);
    CHECK(rescale_and_compare(q, j).monotone);
    CHECK(q.tail_r2 > 0.99);
  }
}

TEST_CASE("tail reaches the endpoints within the domain") {
  const double eps = 0.1;
  const auto p = gnl_profile(eps);
  CHECK((p.state(p.L) - p.u_plus).norm() < 1e-3 * eps);
  CHECK((p.state(-p.L) - p.u_minus).norm() < 1e-3 * eps);
}

TEST_CASE("profile cache round trip") {
  const auto p = jx_profile(0.1);
  const auto path = (std::filesystem::temp_directory_path() / "evanskit_profile_roundtrip.txt").string();
  write_profile_cache(p, path);
  const auto q = read_profile_cache(path, relaxation_profile_rhs(systems::jin_xin()));
  std::filesystem::remove(path);
  CHECK(q.size() == p.size());
  CHECK((q.Y - p.Y).cwiseAbs().maxCoeff() == 0.0);
  CHECK((q.dY.topRows(1) - p.dY.topRows(1)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((q.u_plus - p.u_plus).norm() == 0.0);
  CHECK(q.eps == p.eps);
  CHECK((q.dstate(1.234) - p.dstate(1.234)).norm() < 1e-12);
}
