#pragma once

#include <vector>

#include "mrtr/types.hpp"

namespace mrtr {

/// LU factorization with partial pivoting, PA = LU.
///
/// Construction fails with SingularMatrix when a pivot falls below
/// 1e-14 times the largest entry magnitude of the input.
class LuFactorization {
 public:
  explicit LuFactorization(const Matrix& a);

  Index size() const noexcept { return lu_.matrixLU().rows(); }

  /// Packed L (unit lower, implicit diagonal) and U factors.
  const Matrix& factors() const noexcept { return lu_.matrixLU(); }

  /// Row permutation as an index sequence: row i of PA is row perm[i] of A.
  std::vector<Index> pivots() const;

  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;

 private:
  Eigen::PartialPivLU<Matrix> lu_;
};

inline LuFactorization lu_factor(const Matrix& a) { return LuFactorization(a); }

inline Vector lu_solve(const LuFactorization& f, const Vector& b) { return f.solve(b); }

enum class NormKind { one, two, inf };

/// one: max column abs sum; inf: max row abs sum; two: largest singular value.
double matrix_norm(const Matrix& a, NormKind kind);

/// max |lambda| over the (possibly complex) eigenvalues of a square real matrix.
double spectral_radius(const Matrix& a);

}  // namespace mrtr
