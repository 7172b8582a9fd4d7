#include <cmath>
#include <complex>
#include <sstream>

#include "mrtr/stability.hpp"
#include "mrtr/trbdf2.hpp"
#include "stability_oracle.hpp"
#include "support.hpp"

using namespace mrtr;
using mrtr::test::Gen;

namespace {
double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }
Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }
}  // namespace

TEST_SUITE("stability_analyzer") {

TEST_CASE("rational method consistency") {
  const auto rm = RationalMatrixMethod::trbdf2();
  const Matrix z0 = Matrix::Zero(3, 3);
  CHECK(spectral_radius(rm.denominator_at(z0)) > 0.0);
  CHECK(max_abs(rm.amplification(z0) - Matrix::Identity(3, 3)) <= 1e-15);
  CHECK(max_abs(single_rate_amplification(z0, 1.0) - Matrix::Identity(3, 3)) <= 1e-15);
}

TEST_CASE("matrix polynomial Horner evaluation") {
  Matrix z(2, 2);
  z << 1, 2, 0, 3;
  const Matrix got = matrix_polynomial({1.0, -2.0, 0.5}, z);
  const Matrix expect = Matrix::Identity(2, 2) - 2.0 * z + 0.5 * z * z;
  CHECK(max_abs(got - expect) <= 1e-14);
}

TEST_CASE("single-rate amplification agrees with the scalar function") {
  CHECK(std::abs(single_rate_amplification(scalar(-1.0), 1.0)(0, 0) - stability_function(-1.0)) <= 1e-13);
  Gen g(51);
  for (int trial = 0; trial < 50; ++trial) {
    const double z = -g.log_uniform(1e-4, 1e8);
    CHECK(std::abs(single_rate_amplification(scalar(z), 1.0)(0, 0) - stability_function(z)) <= 1e-13);
  }
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << -0.5, -20.0, -4000.0;
  const Matrix r = single_rate_amplification(d, 0.3);
  for (Index i = 0; i < 3; ++i) CHECK(std::abs(r(i, i) - stability_function(0.3 * d(i, i))) <= 1e-13);
  CHECK(max_abs(r - Matrix(r.diagonal().asDiagonal())) == 0.0);
}

TEST_CASE("interpolation matrices") {
  for (const auto kind : {InterpolantKind::linear, InterpolantKind::hermite})
    CHECK(max_abs(interpolation_matrix(Matrix::Zero(2, 2), 1.0, kind) - Matrix::Identity(2, 2)) <= 1e-15);
  const double z = -0.7;
  CHECK(std::abs(interpolation_matrix(scalar(z), 1.0, InterpolantKind::linear)(0, 0) -
                 0.5 * (1.0 + stability_function(z))) <= 1e-15);
  for (const double zz : {0.1, 0.05, -0.1, -0.05}) {
    const double q = interpolation_matrix(scalar(zz), 1.0, InterpolantKind::hermite)(0, 0);
    CHECK(std::abs(q - std::exp(zz / 2)) <= 0.1 * std::abs(zz * zz * zz));
  }
}

TEST_CASE("degenerate partitions on random 5x5 systems") {
  Gen g(52);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = g.dissipative(5);
    const double h = g.log_uniform(1e-2, 1e2);
    const Matrix r = single_rate_amplification(a, h);
    const Matrix r_half = single_rate_amplification(a, 0.5 * h);
    for (const auto kind : {InterpolantKind::linear, InterpolantKind::hermite}) {
      CHECK(max_abs(multirate_amplification({a, h, ActivePartition::none(5), kind}) - r) <= 1e-12);
      CHECK(max_abs(multirate_amplification({a, h, ActivePartition::full(5), kind}) - r_half * r_half) <= 1e-10);
    }
  }
}

TEST_CASE("latent rows are exactly the single-rate rows") {
  Gen g(53);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = g.integer(2, 7);
    const Matrix a = g.dissipative(n);
    const double h = g.log_uniform(1e-2, 1e2);
    const ActivePartition act = g.partition(n);
    const Matrix r = single_rate_amplification(a, h);
    for (const auto kind : {InterpolantKind::linear, InterpolantKind::hermite}) {
      const Matrix rmr = multirate_amplification({a, h, act, kind});
      const ActivePartition lat = act.complement();
      for (const Index i : lat.indices()) CHECK(rmr.row(i) == r.row(i));
    }
  }
}

TEST_CASE("block assembly equals the closed-form expression") {
  Gen g(54);
  for (int trial = 0; trial < 40; ++trial) {
    const Matrix a = g.dissipative(4) * g.log_uniform(0.1, 100);
    const double h = g.log_uniform(1e-2, 10);
    const ActivePartition act = g.partition(4);
    for (const auto kind : {InterpolantKind::linear, InterpolantKind::hermite}) {
      const Matrix block = multirate_amplification({a, h, act, kind});
      const Matrix literal = test::literal_multirate_amplification(a, h, act, kind);
      CHECK(max_abs(block - literal) <= 1e-9 * std::max(1.0, max_abs(literal)));
    }
  }
}

TEST_CASE("scalar reduction") {
  for (const double z : {-0.1, -3.0, -250.0}) {
    const double r = stability_function(z), rh = stability_function(z / 2);
    for (const auto kind : {InterpolantKind::linear, InterpolantKind::hermite}) {
      CHECK(std::abs(multirate_amplification({scalar(z), 1.0, ActivePartition::none(1), kind})(0, 0) - r) <= 1e-14);
      CHECK(std::abs(multirate_amplification({scalar(z), 1.0, ActivePartition::full(1), kind})(0, 0) - rh * rh) <=
            1e-14);
    }
  }
}

TEST_CASE("setup validation") {
  CHECK_ERROR_CODE(multirate_amplification({Matrix::Zero(2, 3), 1.0, ActivePartition::none(2)}),
                   ErrorCode::DimensionMismatch);
  CHECK_ERROR_CODE(multirate_amplification({Matrix::Zero(2, 2), 0.0, ActivePartition::none(2)}),
                   ErrorCode::InvalidArgument);
  CHECK_ERROR_CODE(multirate_amplification({Matrix::Zero(2, 2), 1.0, ActivePartition::none(3)}),
                   ErrorCode::DimensionMismatch);
  CHECK_ERROR_CODE(log_grid(1.0, 0.5, 10), ErrorCode::InvalidArgument);
}

TEST_CASE("zero matrix sweep gives unit norms") {
  const auto rep = norm_sweep(Matrix::Zero(3, 3), ActivePartition({1}, 3),
                              {InterpolantKind::linear, InterpolantKind::hermite}, default_rescaled_grid());
  CHECK(rep.rows.size() == 120);
  for (const auto& row : rep.rows) {
    CHECK(row.norm1 == doctest::Approx(1.0));
    CHECK(row.norm2 == doctest::Approx(1.0));
    CHECK(row.norminf == doctest::Approx(1.0));
    CHECK(row.spectral_radius == doctest::Approx(1.0));
  }
}

TEST_CASE("grid") {
  const auto g = default_rescaled_grid();
  CHECK(g.size() == 60);
  CHECK(g.front() == doctest::Approx(1e-3));
  CHECK(g.back() == 100.0);
  for (std::size_t k = 1; k < g.size(); ++k) CHECK(g[k] > g[k - 1]);
}

TEST_CASE("model systems") {
  const auto s1 = model_system("sys1");
  Eigen::EigenSolver<Matrix> es1(s1.a);
  for (Index i = 0; i < 2; ++i) CHECK(es1.eigenvalues()(i).real() < 0.0);
  CHECK(s1.active == ActivePartition({1}, 2));

  const auto s2 = model_system("sys2");
  CHECK(s2.active == ActivePartition({2, 3}, 4));
  const Matrix free = two_mass_system(1, 1, 1, 1e6, 0, 0);
  Eigen::EigenSolver<Matrix> es2(free);
  for (Index i = 0; i < 4; ++i) CHECK(std::abs(es2.eigenvalues()(i).real()) <= 1e-9 * std::abs(es2.eigenvalues()(i)));
  CHECK(max_abs(model_system("sys2_nofriction").a - free) == 0.0);

  const auto heat = model_system("heat40");
  CHECK(heat.a.rows() == 40);
  for (const Index i : {3, 10, 17, 23, 30, 36}) CHECK(std::abs(heat.a.row(i).sum()) <= 1e-9 * std::abs(heat.a(i, i)));
  CHECK(heat.active.size() == 20);
  CHECK(heat.active[0] == 20);
  CHECK(model_system("adv40").a.sum() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK_ERROR_CODE(model_system("sys9"), ErrorCode::UnknownSystem);
  for (const auto& name : model_system_names()) CHECK(model_system(name).a.rows() > 0);
}

TEST_CASE("sys2 sweep: bounded spectral radius with large l-norms") {
  const auto s = model_system("sys2");
  const auto rep = norm_sweep(s.a, s.active, {InterpolantKind::linear, InterpolantKind::hermite},
                              default_rescaled_grid());
  double excess = 0.0;
  for (const auto& row : rep.rows) {
    CHECK(row.spectral_radius <= 1.0 + 1e-6);
    excess = std::max({excess, row.norm1, row.norminf});
  }
  CHECK(excess > 1.0);
}

TEST_CASE("heat40 norms stay at one") {
  const auto s = model_system("heat40");
  const auto rep = norm_sweep(s.a, s.active, {InterpolantKind::linear, InterpolantKind::hermite},
                              default_rescaled_grid());
  for (const auto& row : rep.rows)
    for (const double v : {row.norm1, row.norm2, row.norminf, row.spectral_radius}) CHECK(std::abs(v - 1.0) <= 1e-3);
}

TEST_CASE("report CSV") {
  const auto s = model_system("sys1");
  auto rep = norm_sweep(s.a, s.active, {InterpolantKind::linear}, log_grid(0.1, 10, 3));
  std::ostringstream os;
  rep.write_csv(os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "rescaled_h,kind,norm1,norm2,norminf,spectral_radius,single_rate_norm2");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    CHECK(line.find(",linear,") != std::string::npos);
  }
  CHECK(rows == 3);
  CHECK(rep.max_abs_eigenvalue == doctest::Approx(spectral_radius(s.a)));
}

}
