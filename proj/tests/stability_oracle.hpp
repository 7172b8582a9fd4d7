#pragma once

#include "mrtr/stability.hpp"

namespace mrtr::test {

/// Closed-form multirate amplification matrix with explicit selection,
/// embedding and projector matrices, independent of the block solver.
inline Matrix literal_multirate_amplification(const Matrix& a, double h, const ActivePartition& act,
                                              InterpolantKind kind) {
  const Index m = a.rows();
  const auto method = RationalMatrixMethod::trbdf2();
  const Matrix z = h * a;
  const Matrix r = method.amplification(z);
  if (act.empty()) return r;
  const ActivePartition lat = act.complement();
  const Matrix n_half = method.numerator_at(0.5 * z);
  const Matrix d_half = method.denominator_at(0.5 * z);
  const Matrix q = interpolation_matrix(a, h, kind);

  Matrix p = Matrix::Zero(act.size(), m);  // P
  for (Index k = 0; k < act.size(); ++k) p(k, act[k]) = 1.0;
  Matrix pl = Matrix::Zero(lat.size(), m);  // P-perp
  for (Index k = 0; k < lat.size(); ++k) pl(k, lat[k]) = 1.0;
  const Matrix e = p.transpose();                      // E
  const Matrix pi_l = pl.transpose() * pl;             // latent projector
  const Matrix n_aa = p * n_half * e, n_al = p * n_half * pl.transpose();
  const Matrix d_aa_inv = (p * d_half * e).inverse(), d_al = p * d_half * pl.transpose();

  const Matrix inner = d_aa_inv * n_aa * d_aa_inv * (p * n_half - d_al * pl * q) + d_aa_inv * n_al * pl * q -
                       d_aa_inv * d_al * pl * r;
  return e * inner + pi_l * r;
}

}  // namespace mrtr::test
