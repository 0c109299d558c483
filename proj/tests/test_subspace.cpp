#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "evanskit/subspace.hpp"

#include <random>

using namespace evanskit;

namespace {

const double kPi = std::acos(-1.0);

/// Limiting matrix of the integrated Burgers system at +infinity (eps = 1).
CMat burgers_plus(cplx lam) { return CMat{{0.0, 1.0}, {lam, -1.0}}; }

std::vector<cplx> arc(cplx center, double radius, double t0, double t1, int n) {
  std::vector<cplx> out;
  for (int i = 0; i <= n; ++i) out.push_back(center + radius * std::exp(cplx(0, t0 + (t1 - t0) * i / n)));
  return out;
}

}  // namespace

TEST_CASE("stable frame of a diagonal matrix") {
  const CMat M = Vec{{-2.0, -1.0, 3.0}}.cast<cplx>().asDiagonal();
  const auto f = stable_unstable_frames(M, true);
  CHECK(f.k() == 2);
  CMat E = CMat::Zero(3, 2);
  E(0, 0) = E(1, 1) = 1.0;
  CHECK(subspace_distance(f.V, E) < 1e-14);
  CHECK(stable_unstable_frames(M, false).k() == 1);
}

TEST_CASE("Burgers stable frame spans the decaying eigenvector") {
  const auto f = stable_unstable_frames(burgers_plus(1.0), true);
  const double mu = (-1 - std::sqrt(5.0)) / 2;
  CHECK(f.k() == 1);
  CHECK(subspace_distance(f.V, CVec{{1.0, mu}}) < 1e-14);
  CHECK(invariance_residual(burgers_plus(1.0), f.V) < 1e-8);
}

TEST_CASE("defective stable block gives a full rank frame") {
  const CMat M{{-1.0, 1.0}, {0.0, -1.0}};
  const auto f = stable_unstable_frames(M, true);
  CHECK(f.k() == 2);
  Eigen::JacobiSVD<CMat> svd(f.V);
  CHECK(svd.singularValues().minCoeff() > 1e-8);
}

TEST_CASE("frames on the imaginary axis are refused") {
  CHECK_THROWS_AS(stable_unstable_frames(CMat{{0.0, 1.0}, {0.0, -1.0}}, true), SplittingFailure);
}

TEST_CASE("constant family leaves the frame unchanged") {
  const CMat M{{-1.0, 2.0}, {0.0, 3.0}};
  const auto f = stable_unstable_frames(M, true);
  const auto g = continue_frame_to(f, [&](cplx) { return M; }, {0.0, cplx(1, 1), cplx(2, -1)});
  CHECK((g.V - f.V).norm() < 1e-12);
}

TEST_CASE("Burgers frame continued along the unit arc matches the direct frame") {
  const auto path = arc(0.0, 1.0, 0.0, kPi / 2, 64);
  const auto f = stable_unstable_frames(burgers_plus(path.front()), true);
  const auto g = continue_frame_to(f, burgers_plus, path);
  const auto direct = stable_unstable_frames(burgers_plus(path.back()), true);
  CHECK(subspace_distance(g.V, direct.V) < 1e-8);
  CHECK(invariance_residual(burgers_plus(path.back()), g.V) < 1e-8);
}

TEST_CASE("loop away from the branch point has trivial monodromy") {
  // branch point of sqrt(1 + 4 lambda) sits at -1/4
  const auto loop = arc(1.0, 0.8, 0.0, 2 * kPi, 128);
  const auto f = stable_unstable_frames(burgers_plus(loop.front()), true);
  const auto g = continue_frame_to(f, burgers_plus, loop);
  const cplx c = (f.V.adjoint() * g.V)(0, 0) / (f.V.adjoint() * f.V)(0, 0);
  CHECK(std::abs(c - 1.0) < 1e-8);
  CHECK(c.real() > 0);
}

TEST_CASE("collision along the path raises BranchCrossing") {
  // eigenvalues of [[0, 1], [lambda, 0]] collide at lambda = 0
  auto M = [](cplx l) { return CMat{{0.0, 1.0}, {l, 0.0}}; };
  const auto f = stable_unstable_frames(M(1.0), true);
  CHECK_THROWS_AS(continue_frame_to(f, M, {1.0, -1.0}), BranchCrossing);
}

TEST_CASE("transverse roots for identity viscosity") {
  ModeContext ctx;
  const auto m = transverse_mode_expansions(3.0, 4.0, ctx);
  REQUIRE(m.size() == 2);
  std::vector<double> mus{m[0].mu.real(), m[1].mu.real()};
  std::sort(mus.begin(), mus.end());
  CHECK(mus[0] == doctest::Approx(-1.0));
  CHECK(mus[1] == doctest::Approx(4.0));
  for (const auto& e : m) CHECK(std::abs(e.mu.imag()) < 1e-14);

  const auto s = transverse_mode_expansions(-1.0, 0.01, ctx);
  const auto slow = std::find_if(s.begin(), s.end(), [](const ModeExpansion& e) { return e.kind == "slow"; });
  REQUIRE(slow != s.end());
  CHECK(slow->mu.real() == doctest::Approx((-1.0 + std::sqrt(1.04)) / 2).epsilon(1e-14));
  CHECK(std::abs(slow->mu - 0.01) < 1e-3 * 0.1);
  CHECK_THROWS_AS(transverse_mode_expansions(0.0, 0.1, ctx), DegenerateMode);
}

TEST_CASE("characteristic residual and eigenvector pairing of exact roots") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> U(-1, 1);
  ModeContext ctx;
  for (int k = 0; k < 100; ++k) {
    const double a = (U(rng) > 0 ? 1 : -1) * (0.5 + 2.5 * std::abs(U(rng)));
    const cplx lam(U(rng), U(rng));
    for (const auto& e : transverse_mode_expansions(a, lam, ctx)) {
      CHECK(std::abs(e.mu * e.mu - a * e.mu - lam) < 1e-12);
      if (e.R.size()) CHECK(std::abs((e.Lrow * e.R)(0) - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("slow root expansion error is quadratic with a stable constant") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> U(0, 1), Ph(0, 2 * kPi);
  ModeContext ctx;
  auto slow_mu = [&](double a, cplx lam) {
    for (const auto& e : transverse_mode_expansions(a, lam, ctx))
      if (e.kind == "slow") return e.mu;
    return cplx(std::nan(""));
  };
  for (int k = 0; k < 100; ++k) {
    const double a = (U(rng) > 0.5 ? 1 : -1) * (0.5 + 2.5 * U(rng));
    const cplx dir = std::exp(cplx(0, Ph(rng)));
    double K[2];
    for (int j = 0; j < 2; ++j) {
      const cplx lam = (j == 0 ? 0.1 : 0.05) * dir;
      K[j] = std::abs(slow_mu(a, lam) + lam / a) / std::norm(lam);
    }
    CHECK(K[1] <= 2 * K[0]);
    CHECK(K[0] <= 2 * K[1]);
    CHECK(K[0] * std::pow(std::abs(a), 3) <= 2.0);
  }
}

TEST_CASE("general viscosity expansion satisfies the scalar dispersion relation to third order") {
  ModeContext ctx;
  ctx.kind = ModeContext::Kind::GeneralViscous;
  ctx.beta = 1.7;
  const double a = -0.8;
  for (double s : {1e-2, 5e-3}) {
    const cplx lam = s * cplx(0.6, 0.8);
    for (const auto& e : transverse_mode_expansions(a, lam, ctx)) {
      if (e.kind != "slow") continue;
      const double res = std::abs(ctx.beta * e.mu * e.mu - a * e.mu - lam);
      CHECK(res <= 50 * std::pow(s, 3));
    }
  }
}

TEST_CASE("frames at conjugate lambda are conjugate") {
  for (cplx lam : {cplx(1.0, 0.3), cplx(0.2, 2.0), cplx(5.0, -4.0)}) {
    const auto f = stable_unstable_frames(burgers_plus(lam), true);
    const auto g = stable_unstable_frames(burgers_plus(std::conj(lam)), true);
    CHECK(subspace_distance(CMat(f.V.conjugate()), g.V) < 1e-12);
  }
}

TEST_CASE("continuation follows the projector transport equation") {
  const cplx l0(0.8, 0.6);
  const double h = 1e-4;
  const auto f = stable_unstable_frames(burgers_plus(l0), true);
  const auto up = continue_frame_to(f, burgers_plus, {l0, l0 + h});
  const auto dn = continue_frame_to(f, burgers_plus, {l0, l0 - h});
  const CMat fd = (up.V - dn.V) / (2 * h);
  const auto split = spectral_split(burgers_plus(l0), 1, true);
  const CMat dM{{0.0, 0.0}, {1.0, 0.0}};
  const CMat predicted = projector_derivative(split, dM) * f.V;
  CHECK((fd - predicted).norm() < 1e-6);
}

TEST_CASE("continued square roots follow the branch") {
  std::vector<cplx> z;
  for (int i = 0; i <= 64; ++i) z.push_back(std::exp(cplx(0, 2 * kPi * i / 64)));
  const auto s = continued_sqrt(z);
  CHECK(std::abs(s.front() - 1.0) < 1e-14);
  CHECK(std::abs(s.back() + 1.0) < 1e-12);
}
