#include "evanskit/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <limits>
#include <numeric>

namespace evanskit {

namespace {

void givens(cplx f, cplx g, double& c, cplx& s) {
  if (g == cplx(0)) {
    c = 1;
    s = 0;
  } else if (f == cplx(0)) {
    c = 0;
    s = std::conj(g) / std::abs(g);
  } else {
    const double nf = std::abs(f);
    const double r = std::hypot(nf, std::abs(g));
    c = nf / r;
    s = (f / nf) * std::conj(g) / r;
  }
}

void rot(cplx& x, cplx& y, double c, cplx s) {
  const cplx tx = c * x + s * y;
  y = c * y - std::conj(s) * x;
  x = tx;
}

/// Swap the adjacent diagonal entries i, i+1 of the triangular factor.
void swap_adjacent(CMat& T, CMat& U, Eigen::Index i) {
  const Eigen::Index n = T.rows();
  const cplx t11 = T(i, i), t22 = T(i + 1, i + 1);
  double c;
  cplx s;
  givens(T(i, i + 1), t22 - t11, c, s);
  for (Eigen::Index col = i + 2; col < n; ++col) rot(T(i, col), T(i + 1, col), c, s);
  for (Eigen::Index row = 0; row < i; ++row) rot(T(row, i), T(row, i + 1), c, std::conj(s));
  T(i, i) = t22;
  T(i + 1, i + 1) = t11;
  for (Eigen::Index row = 0; row < n; ++row) rot(U(row, i), U(row, i + 1), c, std::conj(s));
}

}  // namespace

OrderedSchur ordered_schur(const CMat& M, int k, bool leading_stable) {
  const int n = static_cast<int>(M.rows());
  Eigen::ComplexSchur<CMat> cs(M);
  OrderedSchur out{cs.matrixU(), cs.matrixT(), k};
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    const double ra = out.T(a, a).real(), rb = out.T(b, b).real();
    return leading_stable ? ra < rb : ra > rb;
  });
  std::vector<char> sel(n, 0);
  for (int j = 0; j < k; ++j) sel[idx[j]] = 1;
  for (int target = 0; target < k; ++target) {
    int j = target;
    while (!sel[j]) ++j;
    for (int i = j - 1; i >= target; --i) {
      swap_adjacent(out.T, out.U, i);
      std::swap(sel[i], sel[i + 1]);
    }
  }
  // Clear roundoff below the diagonal.
  out.T.triangularView<Eigen::StrictlyLower>().setZero();
  return out;
}

int count_stable(const CMat& M) {
  Eigen::ComplexEigenSolver<CMat> es(M, false);
  int k = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()[i].real() < 0) ++k;
  return k;
}

SpectralSplit spectral_split(const CMat& M, int k, bool leading_stable) {
  SpectralSplit sp;
  sp.schur = ordered_schur(M, k, leading_stable);
  const CMat& T = sp.schur.T;
  const int n = static_cast<int>(T.rows());
  const CMat T11 = T.topLeftCorner(k, k);
  const CMat T22 = T.bottomRightCorner(n - k, n - k);
  const CMat T12 = T.topRightCorner(k, n - k);
  sp.Y = (k > 0 && k < n) ? solve_triangular_sylvester<cplx>(T11, T22, -T12)
                          : CMat(k, n - k);
  sp.leading_trace = T11.trace();
  sp.separation = std::numeric_limits<double>::infinity();
  double lead_max = -std::numeric_limits<double>::infinity();
  double trail_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) {
    const double r = leading_stable ? T(i, i).real() : -T(i, i).real();
    lead_max = std::max(lead_max, r);
    for (int j = k; j < n; ++j)
      sp.separation = std::min(sp.separation, std::abs(T(i, i) - T(j, j)));
  }
  for (int j = k; j < n; ++j)
    trail_min = std::min(trail_min, leading_stable ? T(j, j).real() : -T(j, j).real());
  sp.real_margin = trail_min - lead_max;
  return sp;
}

CMat SpectralSplit::projector() const {
  const int n = static_cast<int>(schur.T.rows()), k = schur.k;
  CMat inner = CMat::Zero(n, n);
  inner.topLeftCorner(k, k).setIdentity();
  inner.topRightCorner(k, n - k) = -Y;
  return schur.U * inner * schur.U.adjoint();
}

CMat SpectralSplit::S() const {
  const int n = static_cast<int>(schur.T.rows()), k = schur.k;
  CMat X = CMat::Identity(n, n);
  X.topRightCorner(k, n - k) = Y;
  return schur.U * X;
}

CMat SpectralSplit::S_inverse() const {
  const int n = static_cast<int>(schur.T.rows()), k = schur.k;
  CMat Xi = CMat::Identity(n, n);
  Xi.topRightCorner(k, n - k) = -Y;
  return Xi * schur.U.adjoint();
}

CMat projector_derivative(const SpectralSplit& sp, const CMat& dM) {
  const int n = static_cast<int>(dM.rows()), k = sp.schur.k;
  if (k == 0 || k == n) return CMat::Zero(n, n);
  const CMat S = sp.S(), Si = sp.S_inverse();
  const CMat Md = Si * dM * S;
  const CMat T11 = sp.schur.T.topLeftCorner(k, k);
  const CMat T22 = sp.schur.T.bottomRightCorner(n - k, n - k);
  const CMat Yd = solve_triangular_sylvester<cplx>(T11, T22, Md.topRightCorner(k, n - k));
  const CMat Zd = solve_triangular_sylvester<cplx>(T22, T11, CMat(-Md.bottomLeftCorner(n - k, k)));
  CMat inner = CMat::Zero(n, n);
  inner.topRightCorner(k, n - k) = Yd;
  inner.bottomLeftCorner(n - k, k) = Zd;
  return S * inner * Si;
}

std::vector<std::vector<int>> k_subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(k);
  std::iota(cur.begin(), cur.end(), 0);
  if (k > n) return out;
  while (true) {
    out.push_back(cur);
    int i = k - 1;
    while (i >= 0 && cur[i] == n - k + i) --i;
    if (i < 0) break;
    ++cur[i];
    for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

namespace {

int subset_index(const std::vector<std::vector<int>>& subsets, const std::vector<int>& s) {
  auto it = std::lower_bound(subsets.begin(), subsets.end(), s);
  return static_cast<int>(it - subsets.begin());
}

}  // namespace

CMat additive_compound(const CMat& A, int k) {
  const int n = static_cast<int>(A.rows());
  const auto subsets = k_subsets(n, k);
  const int m = static_cast<int>(subsets.size());
  CMat C = CMat::Zero(m, m);
  for (int J = 0; J < m; ++J) {
    const auto& sj = subsets[J];
    for (int p = 0; p < k; ++p) {
      const int j = sj[p];
      for (int i = 0; i < n; ++i) {
        if (A(i, j) == cplx(0)) continue;
        if (i == j) {
          C(J, J) += A(i, i);
          continue;
        }
        if (std::find(sj.begin(), sj.end(), i) != sj.end()) continue;
        std::vector<int> si = sj;
        si[p] = i;
        std::sort(si.begin(), si.end());
        const int q = static_cast<int>(std::find(si.begin(), si.end(), i) - si.begin());
        const double sign = ((p - q) % 2 == 0) ? 1.0 : -1.0;
        C(subset_index(subsets, si), J) += sign * A(i, j);
      }
    }
  }
  return C;
}

CVec wedge_columns(const CMat& V) {
  const int n = static_cast<int>(V.rows()), k = static_cast<int>(V.cols());
  const auto subsets = k_subsets(n, k);
  CVec w(subsets.size());
  CMat minor(k, k);
  for (size_t I = 0; I < subsets.size(); ++I) {
    for (int r = 0; r < k; ++r) minor.row(r) = V.row(subsets[I][r]);
    w[I] = k == 0 ? cplx(1) : minor.determinant();
  }
  return w;
}

cplx wedge_pair(const CVec& a, const CVec& b, int n, int k) {
  const auto sa = k_subsets(n, k);
  const auto sb = k_subsets(n, n - k);
  cplx total = 0;
  for (size_t I = 0; I < sa.size(); ++I) {
    std::vector<int> comp;
    for (int i = 0, p = 0; i < n; ++i) {
      if (p < k && sa[I][p] == i)
        ++p;
      else
        comp.push_back(i);
    }
    // Sign of the permutation (I, I^c): count inversions.
    int inv = 0;
    for (int x : sa[I])
      for (int y : comp)
        if (x > y) ++inv;
    const double sign = inv % 2 == 0 ? 1.0 : -1.0;
    total += sign * a[I] * b[subset_index(sb, comp)];
  }
  return total;
}

double subspace_distance(const CMat& A, const CMat& B) {
  const CMat Qa = Eigen::HouseholderQR<CMat>(A).householderQ() * CMat::Identity(A.rows(), A.cols());
  const CMat Qb = Eigen::HouseholderQR<CMat>(B).householderQ() * CMat::Identity(B.rows(), B.cols());
  const CMat resid = Qb - Qa * (Qa.adjoint() * Qb);
  Eigen::JacobiSVD<CMat> svd(resid);
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

}  // namespace evanskit
