#include "mrtr/stability.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "mrtr/trbdf2.hpp"

namespace mrtr {

namespace {

constexpr double kGamma = TrBdf2Coefficients::gamma;

Matrix identity_like(const Matrix& z) { return Matrix::Identity(z.rows(), z.cols()); }

void require_square(const Matrix& a, const char* who) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw Error(ErrorCode::DimensionMismatch, std::string(who) + ": matrix must be square and non-empty");
}

Matrix rows_of(const Matrix& m, const ActivePartition& p) {
  Matrix out(p.size(), m.cols());
  for (Index k = 0; k < p.size(); ++k) out.row(k) = m.row(p[k]);
  return out;
}

Matrix block(const Matrix& m, const ActivePartition& r, const ActivePartition& c) {
  Matrix out(r.size(), c.size());
  for (Index i = 0; i < r.size(); ++i)
    for (Index j = 0; j < c.size(); ++j) out(i, j) = m(r[i], c[j]);
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Matrix matrix_polynomial(const std::vector<double>& coeffs, const Matrix& z) {
  require_square(z, "matrix_polynomial");
  const Matrix id = identity_like(z);
  Matrix acc = Matrix::Zero(z.rows(), z.cols());
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = z * acc + *it * id;
  return acc;
}

RationalMatrixMethod RationalMatrixMethod::trbdf2() {
  const double g = kGamma;
  return {{2.0 * (2.0 - g), 1.0 + (1.0 - g) * (1.0 - g)}, {2.0 * (2.0 - g), g * g - 2.0, (1.0 - g) * g}};
}

Matrix RationalMatrixMethod::numerator_at(const Matrix& z) const { return matrix_polynomial(numerator, z); }
Matrix RationalMatrixMethod::denominator_at(const Matrix& z) const { return matrix_polynomial(denominator, z); }

Matrix RationalMatrixMethod::amplification(const Matrix& z) const {
  return LuFactorization(denominator_at(z)).solve(numerator_at(z));
}

Matrix single_rate_amplification(const Matrix& a, double h) {
  require_square(a, "single_rate_amplification");
  return RationalMatrixMethod::trbdf2().amplification(h * a);
}

Matrix interpolation_matrix(const Matrix& a, double h, InterpolantKind kind) {
  require_square(a, "interpolation_matrix");
  const Matrix z = h * a;
  const Matrix id = identity_like(z);
  if (kind == InterpolantKind::linear) return 0.5 * (id + RationalMatrixMethod::trbdf2().amplification(z));

  // Hermite branch on [0, gamma h], evaluated at h/2.
  const double g = kGamma;
  const Matrix r_gamma = LuFactorization(id - 0.5 * g * z).solve(Matrix(id + 0.5 * g * z));
  const Matrix rm = r_gamma - id;
  const Matrix f = 3.0 * (rm - g * z) - g * z * rm;
  const Matrix gg = g * z * rm - 2.0 * (rm - g * z);
  const double beta = 1.0 / (2.0 * g);
  return id + beta * g * z + beta * beta * f + beta * beta * beta * gg;
}

void StabilitySetup::validate() const {
  require_square(a, "StabilitySetup");
  if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorCode::InvalidArgument, "StabilitySetup: h must be positive");
  if (active.dimension() != a.rows()) throw Error(ErrorCode::DimensionMismatch, "StabilitySetup: partition dimension");
}

Matrix multirate_amplification(const StabilitySetup& s) {
  s.validate();
  const auto method = RationalMatrixMethod::trbdf2();
  const Matrix z = s.h * s.a;
  const Matrix r = method.amplification(z);
  if (s.active.empty()) return r;

  const ActivePartition& act = s.active;
  const ActivePartition lat = act.complement();
  const Matrix d_half = method.denominator_at(0.5 * z);
  const Matrix n_half = method.numerator_at(0.5 * z);
  const Matrix q = interpolation_matrix(s.a, s.h, s.kind);

  const LuFactorization d_aa(block(d_half, act, act));
  const Matrix d_al = block(d_half, act, lat);
  const Matrix n_aa = block(n_half, act, act);
  const Matrix n_al = block(n_half, act, lat);
  const Matrix q_l = rows_of(q, lat);
  const Matrix r_l = rows_of(r, lat);

  // First half step: latent values at the midpoint come from Q_{1/2}.
  const Matrix x1 = d_aa.solve(Matrix(rows_of(n_half, act) - d_al * q_l));
  // Second half step: latent values at the end come from R.
  const Matrix x2 = d_aa.solve(Matrix(n_aa * x1 + n_al * q_l - d_al * r_l));

  Matrix out = r;
  for (Index k = 0; k < act.size(); ++k) out.row(act[k]) = x2.row(k);
  return out;
}

void AmplificationReport::write_csv(std::ostream& out) const {
  out << "rescaled_h,kind,norm1,norm2,norminf,spectral_radius,single_rate_norm2\n";
  for (const auto& r : rows) {
    out << fmt(r.rescaled_h) << ',' << to_string(r.kind) << ',' << fmt(r.norm1) << ',' << fmt(r.norm2) << ','
        << fmt(r.norminf) << ',' << fmt(r.spectral_radius) << ',' << fmt(r.single_rate_norm2) << '\n';
  }
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0 && hi > lo) || n < 2) throw Error(ErrorCode::InvalidArgument, "log_grid: need 0 < lo < hi, n >= 2");
  std::vector<double> g(static_cast<std::size_t>(n));
  const double a = std::log10(lo), b = std::log10(hi);
  for (int k = 0; k < n; ++k) g[static_cast<std::size_t>(k)] = std::pow(10.0, a + (b - a) * k / (n - 1));
  g.back() = hi;
  return g;
}

std::vector<double> default_rescaled_grid() { return log_grid(1e-3, 100.0, 60); }

AmplificationReport norm_sweep(const Matrix& a, const ActivePartition& active, const std::vector<InterpolantKind>& kinds,
                               const std::vector<double>& grid) {
  require_square(a, "norm_sweep");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] > 0.0) || (k > 0 && !(grid[k] > grid[k - 1])))
      throw Error(ErrorCode::InvalidArgument, "norm_sweep: grid must be positive and increasing");
  }
  AmplificationReport rep;
  rep.active.assign(active.indices().begin(), active.indices().end());
  rep.max_abs_eigenvalue = spectral_radius(a);
  const double scale = rep.max_abs_eigenvalue > 0.0 ? rep.max_abs_eigenvalue : 1.0;
  for (const InterpolantKind kind : kinds) {
    for (const double rescaled : grid) {
      const double h = rescaled / scale;
      const Matrix r = single_rate_amplification(a, h);
      const Matrix rmr = multirate_amplification({a, h, active, kind});
      AmplificationRow row;
      row.rescaled_h = rescaled;
      row.h = h;
      row.kind = kind;
      row.norm1 = matrix_norm(rmr, NormKind::one);
      row.norm2 = matrix_norm(rmr, NormKind::two);
      row.norminf = matrix_norm(rmr, NormKind::inf);
      row.spectral_radius = spectral_radius(rmr);
      row.single_rate_norm1 = matrix_norm(r, NormKind::one);
      row.single_rate_norm2 = matrix_norm(r, NormKind::two);
      row.single_rate_norminf = matrix_norm(r, NormKind::inf);
      row.single_rate_spectral_radius = spectral_radius(r);
      rep.rows.push_back(row);
    }
  }
  return rep;
}

Matrix two_mass_system(double m1, double m2, double k1, double k2, double gamma1, double gamma2) {
  if (!(m1 > 0.0 && m2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "two_mass_system: masses must be positive");
  Matrix a = Matrix::Zero(4, 4);
  a(0, 1) = 1.0;
  a(1, 0) = -k1 / m1;
  a(1, 1) = -gamma1;
  a(2, 3) = 1.0;
  a(3, 0) = k2 / m2;
  a(3, 2) = -k2 / m2;
  a(3, 3) = -gamma2;
  return a;
}

namespace {

// 40 cells on a unit grid, slow coefficients on the first 20.
constexpr Index kChain = 40;

ActivePartition fast_half() {
  std::vector<Index> idx;
  for (Index i = kChain / 2; i < kChain; ++i) idx.push_back(i);
  return ActivePartition(std::move(idx), kChain);
}

double cell_coefficient(Index i, double fast) { return i < kChain / 2 ? 1.0 : fast; }

// Flux form of (k u_x)_x - (v u)_x with centered fluxes. Face coefficients
// are harmonic means of the neighbouring cells, which keeps the diffusion
// operator symmetric across the coefficient jump. Non-periodic ends use zero
// ghost values.
Matrix chain_matrix(double diffusion_ratio, double velocity_ratio, bool diffusion, bool advection, bool periodic) {
  Matrix a = Matrix::Zero(kChain, kChain);
  auto face = [](Index i, Index j, double fast) {
    const double ci = cell_coefficient(i, fast), cj = cell_coefficient(j, fast);
    return 2.0 * ci * cj / (ci + cj);
  };
  for (Index i = 0; i < kChain; ++i) {
    for (const Index side : {Index{-1}, Index{1}}) {
      Index j = i + side;
      bool ghost = j < 0 || j >= kChain;
      if (ghost && periodic) {
        j = (j + kChain) % kChain;
        ghost = false;
      }
      const Index nb = ghost ? i : j;
      if (diffusion) {
        const double k = face(i, nb, diffusion_ratio);
        a(i, i) -= k;
        if (!ghost) a(i, j) += k;
      }
      if (advection) {
        // outflow through the right face, inflow through the left one
        const double f = (side > 0 ? -0.5 : 0.5) * face(i, nb, velocity_ratio);
        a(i, i) += f;
        if (!ghost) a(i, j) += f;
      }
    }
  }
  return a;
}

}  // namespace

std::vector<std::string> model_system_names() {
  return {"sys1", "sys2", "sys2_nofriction", "heat40", "advdiff40", "adv40"};
}

ModelSystem model_system(const std::string& name) {
  if (name == "sys1") {
    Matrix a(2, 2);
    a << -1.0, 1.0, -1000.0, -1000.0;
    return {name, a, ActivePartition({1}, 2)};
  }
  if (name == "sys2" || name == "sys2_nofriction") {
    const double gamma2 = name == "sys2" ? 100.0 : 0.0;
    return {name, two_mass_system(1.0, 1.0, 1.0, 1e6, 0.0, gamma2), ActivePartition({2, 3}, 4)};
  }
  if (name == "heat40") return {name, chain_matrix(1e6, 1.0, true, false, false), fast_half()};
  if (name == "advdiff40") return {name, chain_matrix(1e4, 1e4, true, true, false), fast_half()};
  if (name == "adv40") return {name, chain_matrix(1.0, 1e4, false, true, true), fast_half()};
  throw Error(ErrorCode::UnknownSystem, "unknown model system '" + name + "'");
}

}  // namespace mrtr
