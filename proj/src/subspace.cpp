#include "evanskit/subspace.hpp"

#include "evanskit/ode.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace evanskit {

AnalyticFrame stable_unstable_frames(const CMat& M, bool stable, double tol) {
  const int N = static_cast<int>(M.rows());
  Eigen::ComplexEigenSolver<CMat> es(M, false);
  const double scale = std::max(1.0, M.norm());
  int k = 0;
  for (int i = 0; i < N; ++i) {
    const cplx mu = es.eigenvalues()[i];
    if (std::abs(mu.real()) <= tol * scale) {
      std::ostringstream os;
      os << "eigenvalue " << mu << " lies within tolerance of the imaginary axis";
      throw SplittingFailure(os.str());
    }
    if ((mu.real() < 0) == stable) ++k;
  }
  AnalyticFrame f;
  f.stable = stable;
  if (k == 0) {
    f.V = CMat(N, 0);
    return f;
  }
  const SpectralSplit sp = spectral_split(M, k, stable);
  if (M.imag().norm() == 0.0) {
    const Mat P = sp.projector().real();
    Eigen::ColPivHouseholderQR<Mat> qr(P);
    const Mat Q = qr.householderQ() * Mat::Identity(N, k);
    f.V = Q.cast<cplx>();
  } else {
    f.V = sp.basis();
  }
  return f;
}

double invariance_residual(const CMat& M, const CMat& V) {
  if (V.cols() == 0) return 0.0;
  const CMat C = V.completeOrthogonalDecomposition().solve(CMat(M * V));
  return (M * V - V * C).norm() / std::max(1.0, M.norm());
}

namespace {

struct TransportState {
  const MatrixFamily& M;
  int k;
  bool stable;
  const ContinuationOptions& opt;

  SpectralSplit split(cplx lambda, CMat* Mout = nullptr) const {
    const CMat m = M(lambda);
    SpectralSplit sp = spectral_split(m, k, stable);
    if (sp.separation < opt.collision_tol * std::max(1.0, m.norm())) {
      std::ostringstream os;
      os << "eigenvalues of the two groups approach within " << sp.separation << " at lambda = "
         << lambda;
      throw BranchCrossing(os.str());
    }
    if (Mout) *Mout = m;
    return sp;
  }

  CMat projector_rate(cplx lambda) const {
    const SpectralSplit sp = split(lambda);
    const double h = opt.fd_step * std::max(1.0, std::abs(lambda));
    const CMat dM = (M(lambda + h) - M(lambda - h)) / (2 * h);
    return projector_derivative(sp, dM);
  }
};

}  // namespace

std::vector<AnalyticFrame> continue_frame_along_path(const AnalyticFrame& frame, const MatrixFamily& M,
                                                     const std::vector<cplx>& path,
                                                     const ContinuationOptions& opt) {
  std::vector<AnalyticFrame> out;
  out.reserve(path.size());
  AnalyticFrame cur = frame;
  if (!path.empty()) cur.lambda = path.front();
  out.push_back(cur);
  const int N = static_cast<int>(frame.V.rows()), k = frame.k();
  if (k == 0 || k == N) {
    for (size_t i = 1; i < path.size(); ++i) {
      cur.lambda = path[i];
      out.push_back(cur);
    }
    return out;
  }
  TransportState ts{M, k, frame.stable, opt};
  OdeOptions ode;
  ode.rtol = opt.rtol;
  ode.atol = opt.atol;
  for (size_t seg = 1; seg < path.size(); ++seg) {
    const cplx a = path[seg - 1], b = path[seg], delta = b - a;
    double t = 0;
    while (t < 1.0 && delta != cplx(0)) {
      const cplx lam = a + t * delta;
      const double rate = ts.projector_rate(lam).norm() * std::abs(delta);
      const double dt = rate > 0 ? std::min(1.0 - t, opt.max_rotation / rate) : 1.0 - t;
      if (dt < opt.min_step && dt < 1.0 - t) {
        std::ostringstream os;
        os << "projector rate " << rate << " stalls the continuation near lambda = " << lam;
        throw BranchCrossing(os.str());
      }
      CVec y = Eigen::Map<const CVec>(cur.V.data(), N * k);
      auto rhs = [&](double s, const CVec& v) -> CVec {
        const CMat Pd = ts.projector_rate(a + s * delta);
        const CMat Vm = Eigen::Map<const CMat>(v.data(), N, k);
        const CMat dV = delta * (Pd * Vm);
        return Eigen::Map<const CVec>(dV.data(), N * k);
      };
      OdeStats st;
      y = integrate_dp45(rhs, y, t, t + dt, ode, &st);
      cur.steps += st.steps;
      t = (t + dt >= 1.0) ? 1.0 : t + dt;
      const cplx lam_end = a + t * delta;
      const SpectralSplit sp = ts.split(lam_end);
      CMat V = Eigen::Map<const CMat>(y.data(), N, k);
      if (subspace_distance(V, sp.basis()) > 1e-4) {
        std::ostringstream os;
        os << "transported frame left the tracked subspace near lambda = " << lam_end;
        throw BranchCrossing(os.str());
      }
      cur.V = sp.projector() * V;
      cur.path_variation += rate * dt;
    }
    cur.lambda = b;
    out.push_back(cur);
  }
  return out;
}

AnalyticFrame continue_frame_to(const AnalyticFrame& frame, const MatrixFamily& M,
                                const std::vector<cplx>& path, const ContinuationOptions& opt) {
  return continue_frame_along_path(frame, M, path, opt).back();
}

std::vector<cplx> continued_sqrt(const std::vector<cplx>& z) {
  std::vector<cplx> out;
  out.reserve(z.size());
  for (size_t i = 0; i < z.size(); ++i) {
    cplx s = std::sqrt(z[i]);
    if (i > 0 && std::abs(-s - out.back()) < std::abs(s - out.back())) s = -s;
    out.push_back(s);
  }
  return out;
}

std::vector<ModeExpansion> transverse_mode_expansions(double a, cplx lambda, const ModeContext& ctx) {
  if (std::abs(a) < 1e-8) throw DegenerateMode("characteristic speed vanishes: principal mode");
  std::vector<ModeExpansion> out;
  if (ctx.kind == ModeContext::Kind::IdentityViscous) {
    const cplx s = std::sqrt(a * a + 4.0 * lambda);
    const double sg = a > 0 ? 1.0 : -1.0;
    const cplx slow = 0.5 * (a - sg * s), fast = 0.5 * (a + sg * s);
    for (auto [mu, kind] : {std::pair{slow, "slow"}, std::pair{fast, "fast"}}) {
      ModeExpansion m{mu, kind, {}, {}};
      if (ctx.r.size() && ctx.l.size()) {
        const Eigen::Index n = ctx.r.size();
        m.R.resize(2 * n);
        m.R << ctx.r.cast<cplx>(), mu * ctx.r.cast<cplx>();
        m.Lrow.resize(2 * n);
        m.Lrow << (mu - a) * ctx.l.transpose().cast<cplx>(), ctx.l.transpose().cast<cplx>();
        m.Lrow /= (2.0 * mu - a);
      }
      out.push_back(m);
    }
    return out;
  }
  out.push_back({-lambda / a + lambda * lambda * ctx.beta / (a * a * a), "slow", {}, {}});
  for (size_t i = 0; i < ctx.gamma.size(); ++i) {
    const double dg = i < ctx.dgamma.size() ? ctx.dgamma[i] : 0.0;
    out.push_back({ctx.gamma[i] + lambda * dg, "fast", {}, {}});
  }
  return out;
}

}  // namespace evanskit
