#include <cmath>
#include <complex>

#include "mrtr/multirate.hpp"
#include "mrtr/trbdf2.hpp"
#include "support.hpp"

using namespace mrtr;
using C = TrBdf2Coefficients;
using mrtr::test::linear_problem;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

// Embedded rational function from the third-order weights, for y' = lambda y.
double embedded_r(double z) {
  const double ug = (1.0 + C::d * z) / (1.0 - C::d * z);
  const double un = (1.0 + C::w * z + C::w * z * ug) / (1.0 - C::d * z);
  return 1.0 + C::b_star[0] * z + C::b_star[1] * z * ug + C::b_star[2] * z * un;
}

}  // namespace

TEST_SUITE("trbdf2_core") {

TEST_CASE("coefficients") {
  CHECK(std::abs(C::b[0] + C::b[1] + C::b[2] - 1.0) <= 1e-15);
  CHECK(std::abs(C::b_star[0] + C::b_star[1] + C::b_star[2] - 1.0) <= 1e-15);
  CHECK(C::gamma > 0.0);
  CHECK(C::gamma < 1.0);
}

TEST_CASE("zero right-hand side leaves the state untouched") {
  const OdeProblem p = linear_problem(Matrix::Zero(3, 3));
  const Vector u = Vector::LinSpaced(3, 1, 3);
  const StepResult r = step(p, 0.0, u, 0.5, std::nullopt, {});
  CHECK(r.u_gamma == u);
  CHECK(r.u_next == u);
  CHECK(r.eps_raw.cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.eps_mod.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("scalar linear step equals the stability function") {
  const OdeProblem p = linear_problem(scalar(-1.0));
  const StepResult r = step(p, 0.0, Vector::Ones(1), 0.1, std::nullopt, {});
  CHECK(std::abs(r.u_next(0) - stability_function(-0.1)) <= 1e-10);
}

TEST_CASE("fixed-step order 2 on y' = -y") {
  const OdeProblem p = linear_problem(scalar(-1.0));
  double prev = 0.0;
  for (const double h : {0.1, 0.05, 0.025}) {
    const auto res = integrate_fixed_step(p, 0.0, 1.0, Vector::Ones(1), h);
    const double err = std::abs(res.trajectory.final_state()(0) - std::exp(-1.0));
    if (prev > 0.0) {
      CHECK(prev / err >= 3.6);
      CHECK(prev / err <= 4.4);
    }
    prev = err;
  }
}

TEST_CASE("stability function examples") {
  CHECK(stability_function(0.0) == 1.0);
  CHECK(std::abs(stability_function(-1e6)) <= 1e-5);
  for (const double z : {0.1, -0.1, 0.01, -0.01}) {
    const double ratio = std::abs(stability_function(z) - std::exp(z)) / std::abs(z * z * z);
    CHECK(ratio < 0.1);
  }
  const std::complex<double> zc(-2.0, 3.0);
  const auto rc = stability_function(zc);
  CHECK(std::abs(rc) < 1.0);
}

TEST_CASE("pole detection") {
  // real roots of (1-g) g z^2 + (g^2 - 2) z + 2 (2 - g)
  const double a = (1 - C::gamma) * C::gamma, b = C::gamma * C::gamma - 2, c = 2 * (2 - C::gamma);
  const double root = (-b - std::sqrt(b * b - 4 * a * c)) / (2 * a);
  CHECK_ERROR_CODE(stability_function(root), ErrorCode::PoleEncountered);
}

TEST_CASE("L-stability and A-stability samples") {
  double prev = 2.0;
  for (int k = 2; k <= 8; ++k) {
    const double v = std::abs(stability_function(-std::pow(10.0, k)));
    CHECK(v < prev);
    prev = v;
  }
  for (int i = 0; i <= 240; ++i) {
    const double x = -std::pow(10.0, -4.0 + 12.0 * i / 240.0);
    CHECK(std::abs(stability_function(x)) <= 1.0);
  }
  for (int i = -500; i <= 500; ++i) {
    const std::complex<double> z(0.0, 2.0 * i);
    CHECK(std::abs(stability_function(z)) <= 1.0 + 1e-15);
  }
}

TEST_CASE("raw error estimate") {
  const Vector v = Vector::Constant(2, 0.37);
  CHECK(raw_error_estimate(v, v, v).cwiseAbs().maxCoeff() <= 1e-16);
  Vector zn(2);
  zn << 1, 0;
  const Vector e = raw_error_estimate(zn, Vector::Zero(2), Vector::Zero(2));
  CHECK(e(0) == doctest::Approx((1 - C::w) / 3 - C::w).epsilon(1e-15));
  CHECK(e(1) == 0.0);
  CHECK_ERROR_CODE(raw_error_estimate(zn, Vector::Zero(3), Vector::Zero(2)), ErrorCode::DimensionMismatch);
}

TEST_CASE("raw estimate matches the embedded rational function") {
  for (const double z : {-0.01, -0.3, -2.0, -40.0}) {
    const OdeProblem p = linear_problem(scalar(z));
    const StepResult r = step(p, 0.0, Vector::Ones(1), 1.0, std::nullopt, {1e-14, 25});
    INFO("z = " << z);
    CHECK(std::abs(std::abs(r.eps_raw(0)) - std::abs(embedded_r(z) - stability_function(z))) <= 1e-12);
  }
}

TEST_CASE("modified error estimate") {
  const Vector raw = Vector::Constant(1, 1.0);
  CHECK(modified_error_estimate(raw, scalar(0.0), 1.0)(0) == 1.0);
  CHECK(modified_error_estimate(raw, scalar(-1e6), 1.0)(0) == doctest::Approx(1.0 / (1.0 + C::d * 1e6)).epsilon(1e-12));
  const double e_small = modified_error_estimate(raw, scalar(-3.0), 1e-6)(0);
  CHECK(std::abs(e_small - 1.0) <= 1e-5);
}

TEST_CASE("step invariants: eps_mod residual, Newton count, stiff damping") {
  test::Gen g(31);
  const Matrix a = g.dissipative(5) * 50.0;
  const OdeProblem p = linear_problem(a);
  const double h = 0.2;
  const StepResult r = step(p, 0.0, g.vector(5), h, std::nullopt, {});
  const Matrix it = Matrix::Identity(5, 5) - C::d * h * r.jacobian;
  CHECK((it * r.eps_mod - r.eps_raw).norm() <= 1e-10 * r.eps_raw.norm());
  CHECK(r.newton_iterations[0] <= 2);
  CHECK(r.newton_iterations[1] <= 2);

  double prev_ratio = 1.0;
  for (const double lh : {-1e2, -1e4, -1e6}) {
    const StepResult s = step(linear_problem(scalar(lh)), 0.0, Vector::Ones(1), 1.0, std::nullopt, {});
    const double ratio = std::abs(s.eps_mod(0) / s.eps_raw(0));
    CHECK(ratio < prev_ratio);
    prev_ratio = ratio;
  }
  CHECK(prev_ratio < 1e-5);
}

TEST_CASE("FSAL stage is reused bitwise") {
  OdeProblem p = test::scalar_problem([](double t, double y) { return -y + std::cos(t); },
                                      [](double, double) { return -1.0; });
  const StepResult a = step(p, 0.0, Vector::Ones(1), 0.1, std::nullopt, {});
  const StepResult b = step(p, 0.1, a.u_next, 0.1, a.z_next, {});
  CHECK(b.z_n(0) == a.z_next(0));
  const StepResult c = step(p, 0.1, a.u_next, 0.1, std::nullopt, {});
  CHECK(std::abs(c.z_n(0) - a.z_next(0)) <= 1e-8);
}

TEST_CASE("Newton failure and singular iteration matrix") {
  // y' = y^2 from y=1 blows up at t=1; a huge step cannot converge
  const OdeProblem blow = test::scalar_problem([](double, double y) { return y * y; },
                                               [](double, double y) { return 2 * y; });
  bool failed = false;
  try {
    step(blow, 0.0, Vector::Ones(1), 50.0, std::nullopt, {1e-10, 25});
  } catch (const Error& e) {
    failed = e.code() == ErrorCode::NewtonDivergence || e.code() == ErrorCode::NonFiniteOutput ||
             e.code() == ErrorCode::SingularMatrix;
  }
  CHECK(failed);
  // I - d h J singular for J = 1/(d h)
  const double h = 1.0;
  CHECK_ERROR_CODE(step(linear_problem(scalar(1.0 / (C::d * h))), 0.0, Vector::Ones(1), h, std::nullopt, {}),
                   ErrorCode::SingularMatrix);
}

TEST_CASE("NewtonConfig validation") {
  CHECK_ERROR_CODE((NewtonConfig{0.0, 25}.validate()), ErrorCode::InvalidArgument);
  CHECK_ERROR_CODE((NewtonConfig{1e-8, 0}.validate()), ErrorCode::InvalidArgument);
}

}
