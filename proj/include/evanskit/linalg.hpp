#pragma once

#include "evanskit/types.hpp"

#include <vector>

namespace evanskit {

/// Solve A X - X B = C for upper-triangular A (p x p) and B (q x q).
template <typename Scalar>
MatX<Scalar> solve_triangular_sylvester(const MatX<Scalar>& A,
                                        const MatX<Scalar>& B,
                                        const MatX<Scalar>& C) {
  const Eigen::Index p = A.rows(), q = B.rows();
  MatX<Scalar> X(p, q);
  for (Eigen::Index j = 0; j < q; ++j) {
    VecX<Scalar> rhs = C.col(j);
    for (Eigen::Index i = 0; i < j; ++i) rhs += X.col(i) * B(i, j);
    MatX<Scalar> shifted = A;
    shifted.diagonal().array() -= B(j, j);
    X.col(j) = shifted.template triangularView<Eigen::Upper>().solve(rhs);
  }
  return X;
}

/// Complex Schur form M = U T U^* with a chosen set of eigenvalues leading.
struct OrderedSchur {
  CMat U;
  CMat T;
  int k = 0;  ///< size of the leading block
};

/// Reorders so the k eigenvalues with the smallest real parts lead
/// (`leading_stable`), or the k with the largest real parts.
OrderedSchur ordered_schur(const CMat& M, int k, bool leading_stable);

/// Number of eigenvalues with negative real part.
int count_stable(const CMat& M);

/// Leading invariant subspace of an ordered Schur form together with the
/// block-diagonalizing change of basis S = U [[I, Y], [0, I]].
struct SpectralSplit {
  OrderedSchur schur;
  CMat Y;
  cplx leading_trace;      ///< sum of the leading eigenvalues
  double separation = 0;   ///< min distance between leading and trailing eigenvalues
  double real_margin = 0;  ///< gap in real parts between the two groups
  CMat basis() const { return schur.U.leftCols(schur.k); }
  CMat projector() const;
  CMat S() const;
  CMat S_inverse() const;
};

SpectralSplit spectral_split(const CMat& M, int k, bool leading_stable);

/// Derivative of the spectral projector of the leading block along dM.
CMat projector_derivative(const SpectralSplit& split, const CMat& dM);

/// Lexicographically ordered k-subsets of {0, ..., n-1}.
std::vector<std::vector<int>> k_subsets(int n, int k);

/// Matrix of the derivation induced by A on the k-th exterior power.
CMat additive_compound(const CMat& A, int k);

/// Plucker coordinates of the column span of V (all maximal minors).
CVec wedge_columns(const CMat& V);

/// Pairing a ^ b of a k-vector and an (n-k)-vector, equal to det[Va | Vb].
cplx wedge_pair(const CVec& a, const CVec& b, int n, int k);

/// Principal angles based distance between two column spans (largest sine).
double subspace_distance(const CMat& A, const CMat& B);

}  // namespace evanskit
