#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mrtr/dense_linalg.hpp"
#include "mrtr/interpolants.hpp"
#include "mrtr/ode_problem.hpp"

namespace mrtr {

/// One step method on y' = A y written as R(Z) = D(Z)^{-1} N(Z), Z = h A.
/// Coefficients are in ascending powers of Z.
struct RationalMatrixMethod {
  std::vector<double> numerator;
  std::vector<double> denominator;

  static RationalMatrixMethod trbdf2();

  Matrix numerator_at(const Matrix& z) const;
  Matrix denominator_at(const Matrix& z) const;
  /// D(Z)^{-1} N(Z); throws SingularMatrix if D(Z) cannot be factored.
  Matrix amplification(const Matrix& z) const;
};

/// Evaluates sum_k c_k Z^k by Horner's rule.
Matrix matrix_polynomial(const std::vector<double>& coeffs, const Matrix& z);

/// TR-BDF2 amplification matrix R(hA).
Matrix single_rate_amplification(const Matrix& a, double h);

/// Q_{1/2}: the interpolant at the macro midpoint applied to y' = A y.
Matrix interpolation_matrix(const Matrix& a, double h, InterpolantKind kind);

/// Constant macro step h with one refinement into two h/2 micro steps of the active components.
struct StabilitySetup {
  Matrix a;
  double h = 0.0;
  ActivePartition active;
  InterpolantKind kind = InterpolantKind::hermite;

  void validate() const;
};

/// R_mr with u^{n+1} = R_mr u^n, built by simulating the two micro steps blockwise.
Matrix multirate_amplification(const StabilitySetup& setup);

struct AmplificationRow {
  double rescaled_h = 0.0;  // h * max |lambda(A)|
  double h = 0.0;
  InterpolantKind kind = InterpolantKind::hermite;
  double norm1 = 0.0;
  double norm2 = 0.0;
  double norminf = 0.0;
  double spectral_radius = 0.0;
  double single_rate_norm1 = 0.0;
  double single_rate_norm2 = 0.0;
  double single_rate_norminf = 0.0;
  double single_rate_spectral_radius = 0.0;
};

struct AmplificationReport {
  std::string system;
  std::vector<Index> active;
  double max_abs_eigenvalue = 0.0;
  std::vector<AmplificationRow> rows;

  /// rescaled_h, kind, norm1, norm2, norminf, spectral_radius, single_rate_norm2
  void write_csv(std::ostream& out) const;
};

/// n logarithmically spaced points in [lo, hi].
std::vector<double> log_grid(double lo, double hi, int n);

/// 60 points from 1e-3 to 100 in units of h * max |lambda(A)|.
std::vector<double> default_rescaled_grid();

/// Sweeps the rescaled grid; h = r / max|lambda(A)|, or h = r when A has zero spectrum.
AmplificationReport norm_sweep(const Matrix& a, const ActivePartition& active, const std::vector<InterpolantKind>& kinds,
                               const std::vector<double>& rescaled_grid = default_rescaled_grid());

struct ModelSystem {
  std::string name;
  Matrix a;
  ActivePartition active;  // the fast components; the rest are latent
};

/// sys1, sys2, sys2_nofriction, heat40, advdiff40, adv40. Throws UnknownSystem.
ModelSystem model_system(const std::string& name);
std::vector<std::string> model_system_names();

/// Two-mass spring system: mass 1 on a wall spring k1, mass 2 tied to mass 1 by k2.
Matrix two_mass_system(double m1, double m2, double k1, double k2, double gamma1, double gamma2);

}  // namespace mrtr
