#include "evanskit/evans.hpp"

#include "evanskit/ode.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace evanskit {

namespace {

cplx frame_rate_sum(const CMat& M, const CMat& V) {
  if (V.cols() == 0) return 0.0;
  const CMat C = V.completeOrthogonalDecomposition().solve(CMat(M * V));
  return C.trace();
}

struct SideResult {
  CMat Q;       ///< orthonormal frame at x = 0 (Drury) or empty
  CVec omega;   ///< exterior representative (exterior path)
  cplx zeta = 0;
  double logscale = 0;
  double err = 0;
  long steps = 0;
};

SideResult drury_side(const EigenvalueSystem& es, const CMat& V, double x0, cplx lambda, cplx musum,
                      const EvansOptions& opt) {
  SideResult out;
  const Eigen::Index N = V.rows(), k = V.cols();
  if (k == 0) {
    out.Q = CMat(N, 0);
    return out;
  }
  Eigen::HouseholderQR<CMat> qr(V);
  CMat Q = qr.householderQ() * CMat::Identity(N, k);
  cplx zeta = 0;
  for (Eigen::Index i = 0; i < k; ++i) zeta += std::log(qr.matrixQR()(i, i));
  CVec y(N * k + 1);
  y.head(N * k) = Eigen::Map<const CVec>(Q.data(), N * k);
  y[N * k] = zeta;
  auto rhs = [&](double x, const CVec& s) -> CVec {
    const Eigen::Map<const CMat> Qm(s.data(), N, k);
    const CMat A = es.A(x, lambda);
    const CMat AQ = A * Qm;
    const CMat C = Qm.adjoint() * AQ;
    CVec d(N * k + 1);
    Eigen::Map<CMat>(d.data(), N, k) = AQ - Qm * C;
    d[N * k] = C.trace() - musum;
    return d;
  };
  auto observer = [&](double, CVec& s) {
    Eigen::Map<CMat> Qm(s.data(), N, k);
    const double drift = (Qm.adjoint() * Qm - CMat::Identity(k, k)).norm();
    if (drift <= opt.reortho_tol) return false;
    Eigen::HouseholderQR<CMat> q2(Qm);
    const CMat Qn = q2.householderQ() * CMat::Identity(N, k);
    for (Eigen::Index i = 0; i < k; ++i) s[N * k] += std::log(q2.matrixQR()(i, i));
    Qm = Qn;
    return true;
  };
  OdeOptions o;
  o.rtol = opt.rtol;
  o.atol = opt.atol;
  o.hmax = std::max(es.L / 20, 1e-3);
  OdeStats st;
  y = integrate_dp45(rhs, y, x0, 0.0, o, &st, observer);
  out.Q = Eigen::Map<const CMat>(y.data(), N, k);
  out.zeta = y[N * k];
  // Final cleanup so the determinant sees an orthonormal frame.
  Eigen::HouseholderQR<CMat> q3(out.Q);
  for (Eigen::Index i = 0; i < k; ++i) out.zeta += std::log(q3.matrixQR()(i, i));
  out.Q = q3.householderQ() * CMat::Identity(N, k);
  out.err = st.max_error_estimate * opt.rtol;
  out.steps = st.steps;
  return out;
}

SideResult exterior_side(const EigenvalueSystem& es, const CMat& V, double x0, cplx lambda,
                         cplx musum, const EvansOptions& opt) {
  SideResult out;
  const int N = static_cast<int>(V.rows()), k = static_cast<int>(V.cols());
  CVec w = wedge_columns(V);
  auto rhs = [&](double x, const CVec& s) -> CVec {
    return additive_compound(es.A(x, lambda), k) * s - musum * s;
  };
  double ls = 0;
  auto observer = [&](double, CVec& s) {
    const double nrm = s.norm();
    if (nrm < 1e2 && nrm > 1e-2) return false;
    s /= nrm;
    ls += std::log(nrm);
    return true;
  };
  OdeOptions o;
  o.rtol = opt.rtol;
  o.atol = opt.atol;
  o.hmax = std::max(es.L / 20, 1e-3);
  OdeStats st;
  if (k > 0 && k < N) w = integrate_dp45(rhs, w, x0, 0.0, o, &st, observer);
  out.omega = w;
  out.logscale = ls;
  out.err = st.max_error_estimate * opt.rtol;
  out.steps = st.steps;
  return out;
}

}  // namespace

EvansFrames asymptotic_frames(const EigenvalueSystem& es, cplx lambda) {
  return {stable_unstable_frames(es.A_inf(+1, lambda), true).V,
          stable_unstable_frames(es.A_inf(-1, lambda), false).V};
}

EvansSample evans_evaluate(const EigenvalueSystem& es, cplx lambda, const EvansFrames& frames,
                           const EvansOptions& opt) {
  const int N = es.N;
  if (frames.plus.cols() + frames.minus.cols() != N)
    throw SplittingFailure("frame dimensions do not sum to N");
  const cplx mup = frame_rate_sum(es.A_inf(+1, lambda), frames.plus);
  const cplx mum = frame_rate_sum(es.A_inf(-1, lambda), frames.minus);
  EvansSample s;
  s.lambda = lambda;
  if (N <= 4 && !opt.force_exterior) {
    const SideResult p = drury_side(es, frames.plus, es.L, lambda, mup, opt);
    const SideResult m = drury_side(es, frames.minus, -es.L, lambda, mum, opt);
    CMat J(N, N);
    J << p.Q, m.Q;
    const cplx zeta = p.zeta + m.zeta;
    s.D = J.determinant() * std::exp(cplx(0, zeta.imag()));
    s.logscale = zeta.real();
    Eigen::JacobiSVD<CMat> svd(J);
    s.conditioning = svd.singularValues()(N - 1);
    s.error_estimate = p.err + m.err;
    s.steps = p.steps + m.steps;
  } else {
    const int k = static_cast<int>(frames.plus.cols());
    const SideResult p = exterior_side(es, frames.plus, es.L, lambda, mup, opt);
    const SideResult m = exterior_side(es, frames.minus, -es.L, lambda, mum, opt);
    s.D = wedge_pair(p.omega, m.omega, N, k);
    s.logscale = p.logscale + m.logscale;
    s.conditioning = std::abs(s.D) / std::max(1e-300, p.omega.norm() * m.omega.norm());
    s.error_estimate = p.err + m.err;
    s.steps = p.steps + m.steps;
  }
  if (!std::isfinite(s.D.real()) || !std::isfinite(s.D.imag()) || !std::isfinite(s.logscale))
    throw IntegrationFailure("non-finite Evans value");
  return s;
}

std::vector<cplx> Contour::points() const {
  std::vector<cplx> out;
  out.reserve(t.size());
  for (double ti : t) out.push_back(param(ti));
  return out;
}

namespace {

std::vector<double> uniform_t(int points) {
  std::vector<double> t(std::max(points, 4));
  for (size_t i = 0; i < t.size(); ++i) t[i] = double(i) / t.size();
  return t;
}

}  // namespace

Contour half_annulus(double r_min, double R_max, int points) {
  if (!(r_min > 0) || !(R_max > r_min)) throw std::invalid_argument("need 0 < r_min < R_max");
  Contour c;
  c.geometry = "half-annulus";
  c.parameters = {{"r_min", r_min}, {"R_max", R_max}};
  static constexpr double cut[6] = {0.0, 0.175, 0.425, 0.575, 0.825, 1.0};
  const cplx I(0, 1);
  c.param = [r_min, R_max, I](double t) -> cplx {
    if (t >= 1.0 || t <= 0.0) return R_max;
    int seg = 0;
    while (seg < 4 && t >= cut[seg + 1]) ++seg;
    const double s = (t - cut[seg]) / (cut[seg + 1] - cut[seg]);
    switch (seg) {
      case 0: return R_max * std::exp(I * (s * M_PI / 2));
      case 1: return I * R_max * std::pow(r_min / R_max, s);
      case 2: return r_min * std::exp(I * (M_PI / 2 - s * M_PI));
      case 3: return -I * r_min * std::pow(R_max / r_min, s);
      default: return R_max * std::exp(I * (-M_PI / 2 + s * M_PI / 2));
    }
  };
  c.t = uniform_t(points);
  return c;
}

Contour circle(cplx center, double radius, int points) {
  Contour c;
  c.geometry = "circle";
  c.parameters = {{"center_re", center.real()}, {"center_im", center.imag()}, {"radius", radius}};
  c.param = [center, radius](double t) -> cplx {
    if (t >= 1.0 || t <= 0.0) return center + radius;
    return center + radius * std::exp(cplx(0, 2 * M_PI * t));
  };
  c.t = uniform_t(points);
  return c;
}

Contour rectangle(cplx lo, cplx hi, int points) {
  Contour c;
  c.geometry = "rectangle";
  c.parameters = {{"re_lo", lo.real()}, {"im_lo", lo.imag()}, {"re_hi", hi.real()}, {"im_hi", hi.imag()}};
  const double w = hi.real() - lo.real(), h = hi.imag() - lo.imag();
  const double per = 2 * (w + h);
  c.param = [lo, hi, w, h, per](double t) -> cplx {
    const cplx start(hi.real(), lo.imag() + h / 2);
    if (t >= 1.0 || t <= 0.0) return start;
    double s = t * per;
    if (s < h / 2) return start + cplx(0, s);
    s -= h / 2;
    if (s < w) return cplx(hi.real() - s, hi.imag());
    s -= w;
    if (s < h) return cplx(lo.real(), hi.imag() - s);
    s -= h;
    if (s < w) return cplx(lo.real() + s, lo.imag());
    s -= w;
    return cplx(hi.real(), lo.imag() + s);
  };
  c.t = uniform_t(points);
  return c;
}

Contour refined(const Contour& c) {
  Contour r = c;
  r.t.clear();
  for (size_t i = 0; i < c.t.size(); ++i) {
    const double next = i + 1 < c.t.size() ? c.t[i + 1] : 1.0;
    r.t.push_back(c.t[i]);
    r.t.push_back(0.5 * (c.t[i] + next));
  }
  return r;
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min(jobs, std::max(n, 1));
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w)
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += jobs) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first) first = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

namespace {

struct Node {
  double t;
  cplx lambda;
  EvansFrames frames;
  EvansSample s;
  cplx g = 1.0;  ///< gauge value
};

double phase_step(const Node& a, const Node& b) {
  return std::arg((b.s.D * b.g) / (a.s.D * a.g));
}

/// Shared refinement loop: nodes hold samples at t in [0, 1); the closing node repeats node 0.
WindingResult run_winding(const Contour& contour, std::vector<Node> nodes,
                          const std::function<void(Node&)>& eval,
                          const std::function<Node(const Node&, double)>& make_mid,
                          const WindingOptions& opt) {
  parallel_for(static_cast<int>(nodes.size()), opt.jobs, [&](int i) { eval(nodes[i]); });
  auto closing = [&] {
    Node c = nodes.front();
    c.t = 1.0;
    return c;
  };
  auto check_floor = [&] {
    double maxlog = -std::numeric_limits<double>::infinity(), minlog = -maxlog;
    cplx at = 0;
    for (const auto& nd : nodes) {
      const double la = nd.s.log_abs() + std::log(std::abs(nd.g));
      maxlog = std::max(maxlog, la);
      if (la < minlog) {
        minlog = la;
        at = nd.lambda;
      }
    }
    const double rel = std::exp(minlog - maxlog);
    if (!(rel >= opt.zero_floor)) {
      std::ostringstream os;
      os << "relative |D| = " << rel << " below the zero floor at lambda = " << at;
      throw ZeroOnContour(os.str());
    }
  };
  int depth = 0;
  while (true) {
    check_floor();
    std::vector<Node> all = nodes;
    all.push_back(closing());
    std::vector<size_t> flagged;
    for (size_t i = 0; i + 1 < all.size(); ++i)
      if (std::abs(phase_step(all[i], all[i + 1])) >= M_PI / 2) flagged.push_back(i);
    if (flagged.empty()) break;
    if (++depth > opt.max_depth) {
      std::ostringstream os;
      os << "phase steps still exceed pi/2 after " << opt.max_depth << " bisection rounds near lambda = "
         << all[flagged.front()].lambda;
      throw ContourTooCoarse(os.str());
    }
    std::vector<Node> mids(flagged.size());
    parallel_for(static_cast<int>(flagged.size()), opt.jobs, [&](int j) {
      const size_t i = flagged[j];
      Node m = make_mid(all[i], 0.5 * (all[i].t + all[i + 1].t));
      eval(m);
      mids[j] = std::move(m);
    });
    std::vector<Node> merged;
    merged.reserve(nodes.size() + mids.size());
    size_t j = 0;
    for (size_t i = 0; i < nodes.size(); ++i) {
      merged.push_back(std::move(nodes[i]));
      if (j < flagged.size() && flagged[j] == i) merged.push_back(std::move(mids[j++]));
    }
    nodes = std::move(merged);
  }
  WindingResult res;
  res.depth = depth;
  double total = 0;
  for (size_t i = 0; i < nodes.size(); ++i)
    total += phase_step(nodes[i], i + 1 < nodes.size() ? nodes[i + 1] : nodes.front());
  res.phase_total = total;
  res.winding = static_cast<int>(std::lround(total / (2 * M_PI)));
  double maxlog = -std::numeric_limits<double>::infinity(), minlog = -maxlog;
  for (const auto& nd : nodes) {
    const double la = nd.s.log_abs() + std::log(std::abs(nd.g));
    maxlog = std::max(maxlog, la);
    if (la < minlog) {
      minlog = la;
      res.argmin_lambda = nd.lambda;
    }
  }
  res.max_log_abs_D = maxlog;
  res.min_abs_D = std::exp(minlog - maxlog);
  res.samples.reserve(nodes.size());
  for (auto& nd : nodes) res.samples.push_back(nd.s);
  (void)contour;
  return res;
}

}  // namespace

WindingResult winding_number(const EigenvalueSystem& es, const Contour& contour,
                             const WindingOptions& opt) {
  const std::vector<cplx> pts = contour.points();
  MatrixFamily Mp = [&es](cplx l) { return es.A_inf(+1, l); };
  MatrixFamily Mm = [&es](cplx l) { return es.A_inf(-1, l); };
  const EvansFrames f0 = asymptotic_frames(es, pts.front());
  AnalyticFrame fp{pts.front(), pts.front(), f0.plus, true, +1};
  AnalyticFrame fm{pts.front(), pts.front(), f0.minus, false, -1};
  std::vector<AnalyticFrame> plus, minus;
  // The two continuations are independent sequential phases.
  parallel_for(2, opt.jobs, [&](int side) {
    if (side == 0)
      plus = continue_frame_along_path(fp, Mp, pts, opt.continuation);
    else
      minus = continue_frame_along_path(fm, Mm, pts, opt.continuation);
  });
  std::vector<Node> nodes(pts.size());
  for (size_t i = 0; i < pts.size(); ++i)
    nodes[i] = Node{contour.t[i], pts[i], {plus[i].V, minus[i].V}, {}, 1.0};
  auto eval = [&](Node& nd) {
    nd.s = evans_evaluate(es, nd.lambda, nd.frames, opt.evans);
    if (opt.gauge) nd.g = opt.gauge(nd.lambda);
  };
  auto make_mid = [&](const Node& left, double tm) {
    const cplx lm = contour.param(tm);
    AnalyticFrame a{left.lambda, left.lambda, left.frames.plus, true, +1};
    AnalyticFrame b{left.lambda, left.lambda, left.frames.minus, false, -1};
    const std::vector<cplx> path{left.lambda, lm};
    return Node{tm, lm,
                {continue_frame_to(a, Mp, path, opt.continuation).V,
                 continue_frame_to(b, Mm, path, opt.continuation).V},
                {}, 1.0};
  };
  return run_winding(contour, std::move(nodes), eval, make_mid, opt);
}

WindingResult winding_number(const std::function<cplx(cplx)>& f, const Contour& contour,
                             const WindingOptions& opt) {
  std::vector<Node> nodes;
  for (double t : contour.t) nodes.push_back(Node{t, contour.param(t), {}, {}, 1.0});
  auto eval = [&](Node& nd) {
    nd.s.lambda = nd.lambda;
    nd.s.D = f(nd.lambda);
    if (opt.gauge) nd.g = opt.gauge(nd.lambda);
  };
  auto make_mid = [&](const Node&, double tm) { return Node{tm, contour.param(tm), {}, {}, 1.0}; };
  return run_winding(contour, std::move(nodes), eval, make_mid, opt);
}

std::string to_string(Verdict::Kind k) {
  switch (k) {
    case Verdict::Kind::Stable: return "stable";
    case Verdict::Kind::Unstable: return "unstable";
    case Verdict::Kind::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

double default_r_min(double eps) { return 1e-3 * std::min(1.0, eps * eps); }

double default_R_max(const EigenvalueSystem& es) {
  double sup = 0;
  auto consider = [&](double x) {
    Eigen::JacobiSVD<CMat> svd(es.A(x, 1.0));
    sup = std::max(sup, svd.singularValues()(0));
  };
  if (es.profile) {
    const Eigen::Index stride = std::max<Eigen::Index>(1, es.profile->size() / 400);
    for (Eigen::Index i = 0; i < es.profile->size(); i += stride) consider(es.profile->x[i]);
  } else {
    for (int i = 0; i <= 400; ++i) consider(-es.L + 2 * es.L * i / 400.0);
  }
  return 10 * (1 + sup * sup);
}

Verdict stability_verdict(const EigenvalueSystem& es, double eps, const VerdictOptions& opt) {
  Verdict v;
  v.r_min = opt.r_min > 0 ? opt.r_min : default_r_min(eps);
  v.R_max = opt.R_max > 0 ? opt.R_max : default_R_max(es);
  v.contour = half_annulus(v.r_min, v.R_max, opt.points);
  try {
    v.winding = winding_number(es, v.contour, opt.winding);
  } catch (const Error& e) {
    v.kind = Verdict::Kind::Inconclusive;
    v.message = e.what();
    return v;
  }
  double maxlog = v.winding.max_log_abs_D, minarc = std::numeric_limits<double>::infinity();
  for (const auto& s : v.winding.samples)
    if (std::abs(std::abs(s.lambda) - v.r_min) <= 1e-9 * v.r_min && s.lambda.real() >= 0)
      minarc = std::min(minarc, std::exp(s.log_abs() - maxlog));
  v.small_arc_min_abs_D = minarc;
  if (v.winding.winding == 0) {
    v.kind = Verdict::Kind::Stable;
    v.message = "winding 0 over the punctured half-disk boundary";
  } else if (v.winding.winding > 0) {
    v.kind = Verdict::Kind::Unstable;
    v.count = v.winding.winding;
    v.message = std::to_string(v.count) + " zero(s) enclosed";
  } else {
    v.kind = Verdict::Kind::Inconclusive;
    v.message = "negative winding " + std::to_string(v.winding.winding);
  }
  if (v.kind == Verdict::Kind::Stable && !(minarc >= opt.winding.zero_floor)) {
    v.kind = Verdict::Kind::Inconclusive;
    v.message = "|D| on the small arc falls below the zero floor";
  }
  return v;
}

namespace {

std::vector<cplx> evans_along(const EigenvalueSystem& es, const std::vector<cplx>& pts,
                              const WindingOptions& opt) {
  MatrixFamily Mp = [&es](cplx l) { return es.A_inf(+1, l); };
  MatrixFamily Mm = [&es](cplx l) { return es.A_inf(-1, l); };
  const EvansFrames f0 = asymptotic_frames(es, pts.front());
  const auto plus = continue_frame_along_path(AnalyticFrame{pts[0], pts[0], f0.plus, true, +1}, Mp,
                                              pts, opt.continuation);
  const auto minus = continue_frame_along_path(AnalyticFrame{pts[0], pts[0], f0.minus, false, -1},
                                               Mm, pts, opt.continuation);
  std::vector<cplx> out(pts.size());
  parallel_for(static_cast<int>(pts.size()), opt.jobs, [&](int i) {
    out[i] = evans_evaluate(es, pts[i], {plus[i].V, minus[i].V}, opt.evans).value();
  });
  return out;
}

}  // namespace

double fitted_order(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  const double den = sxx - sx * sx / n;
  return den > 0 ? (sxy - sx * sy / n) / den : 0.0;
}

ConvergenceReport evans_convergence_study(const std::vector<ConvergenceMember>& family,
                                          const EigenvalueSystem& limit, const Contour& contour,
                                          const WindingOptions& opt) {
  const std::vector<cplx> hat = contour.points();
  std::vector<cplx> d0 = evans_along(limit, hat, opt);
  const cplx a0 = d0.front();
  ConvergenceReport rep;
  for (const auto& m : family) {
    std::vector<cplx> pts(hat.size());
    for (size_t i = 0; i < hat.size(); ++i) pts[i] = m.lambda_scale * hat[i];
    const std::vector<cplx> de = evans_along(m.es, pts, opt);
    double sup = 0;
    for (size_t i = 0; i < hat.size(); ++i)
      sup = std::max(sup, std::abs(de[i] / de.front() - d0[i] / a0));
    rep.eps.push_back(m.eps);
    rep.sup_diff.push_back(sup);
  }
  rep.order = fitted_order(rep.eps, rep.sup_diff);
  return rep;
}

}  // namespace evanskit
