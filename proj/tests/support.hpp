#pragma once

#include <random>

#include "doctest.h"
#include "mrtr/ode_problem.hpp"
#include "mrtr/types.hpp"

namespace mrtr::test {

inline OdeProblem linear_problem(const Matrix& a, std::string name = "linear") {
  OdeProblem p;
  p.name = std::move(name);
  p.dimension = a.rows();
  p.rhs = [a](double, const Vector& y, Vector& dy) { dy = a * y; };
  p.jacobian = [a](double, const Vector&, Matrix& j) { j = a; };
  return p;
}

inline OdeProblem scalar_problem(std::function<double(double, double)> f, std::function<double(double, double)> df) {
  OdeProblem p;
  p.name = "scalar";
  p.dimension = 1;
  p.rhs = [f](double t, const Vector& y, Vector& dy) { dy(0) = f(t, y(0)); };
  if (df) p.jacobian = [df](double t, const Vector& y, Matrix& j) { j(0, 0) = df(t, y(0)); };
  return p;
}

// Fixed seeds keep every generated case reproducible.
struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  Index integer(Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(rng); }
  bool coin() { return integer(0, 1) == 1; }

  Matrix matrix(Index r, Index c, double lo = -1.0, double hi = 1.0) {
    Matrix m(r, c);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j) m(i, j) = uniform(lo, hi);
    return m;
  }
  Vector vector(Index n, double lo = -1.0, double hi = 1.0) { return matrix(n, 1, lo, hi); }

  /// Random matrix whose eigenvalues lie in the left half plane: -(B B^T + s I) + skew.
  Matrix dissipative(Index n) {
    const Matrix b = matrix(n, n);
    const Matrix s = matrix(n, n);
    return -(b * b.transpose() + 0.1 * Matrix::Identity(n, n)) + (s - s.transpose());
  }

  ActivePartition partition(Index m) {
    std::vector<Index> idx;
    for (Index i = 0; i < m; ++i)
      if (coin()) idx.push_back(i);
    return ActivePartition(std::move(idx), m);
  }
};

}  // namespace mrtr::test

#define CHECK_ERROR_CODE(expr, expected)                 \
  do {                                                   \
    bool thrown_ = false;                                \
    try {                                                \
      (void)(expr);                                      \
    } catch (const ::mrtr::Error& e_) {                  \
      thrown_ = true;                                    \
      CHECK(e_.code() == (expected));                    \
    }                                                    \
    CHECK_MESSAGE(thrown_, "expected an mrtr::Error");   \
  } while (0)
