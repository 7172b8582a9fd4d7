#include "mrtr/ode_problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mrtr {

ActivePartition::ActivePartition(std::vector<Index> active, Index dimension)
    : active_(std::move(active)), dimension_(dimension) {
  if (dimension < 0) throw Error(ErrorCode::InvalidArgument, "ActivePartition: negative dimension");
  for (std::size_t k = 0; k < active_.size(); ++k) {
    if (active_[k] < 0 || active_[k] >= dimension)
      throw Error(ErrorCode::InvalidArgument, "ActivePartition: index out of range");
    if (k > 0 && active_[k] <= active_[k - 1])
      throw Error(ErrorCode::InvalidArgument, "ActivePartition: indices must be strictly increasing");
  }
}

ActivePartition ActivePartition::full(Index dimension) {
  std::vector<Index> all(static_cast<std::size_t>(dimension));
  for (Index i = 0; i < dimension; ++i) all[static_cast<std::size_t>(i)] = i;
  return ActivePartition(std::move(all), dimension);
}

ActivePartition ActivePartition::none(Index dimension) { return ActivePartition({}, dimension); }

bool ActivePartition::contains(Index i) const { return std::binary_search(active_.begin(), active_.end(), i); }

bool ActivePartition::is_subset_of(const ActivePartition& other) const {
  return dimension_ == other.dimension_ &&
         std::includes(other.active_.begin(), other.active_.end(), active_.begin(), active_.end());
}

ActivePartition ActivePartition::complement() const {
  std::vector<Index> rest;
  rest.reserve(static_cast<std::size_t>(dimension_ - size()));
  auto it = active_.begin();
  for (Index i = 0; i < dimension_; ++i) {
    if (it != active_.end() && *it == i) {
      ++it;
    } else {
      rest.push_back(i);
    }
  }
  return ActivePartition(std::move(rest), dimension_);
}

Vector ActivePartition::gather(const Vector& full) const {
  if (full.size() != dimension_) throw Error(ErrorCode::DimensionMismatch, "gather: full vector size");
  Vector sub(size());
  for (Index k = 0; k < size(); ++k) sub(k) = full((*this)[k]);
  return sub;
}

void ActivePartition::scatter(const Vector& sub, Vector& full) const {
  if (sub.size() != size() || full.size() != dimension_)
    throw Error(ErrorCode::DimensionMismatch, "scatter: vector sizes");
  for (Index k = 0; k < size(); ++k) full((*this)[k]) = sub(k);
}

Matrix ActivePartition::gather(const Matrix& full) const {
  if (full.rows() != dimension_ || full.cols() != dimension_)
    throw Error(ErrorCode::DimensionMismatch, "gather: matrix size");
  Matrix sub(size(), size());
  for (Index c = 0; c < size(); ++c)
    for (Index r = 0; r < size(); ++r) sub(r, c) = full((*this)[r], (*this)[c]);
  return sub;
}

namespace {

void check_state(const OdeProblem& p, const Vector& y) {
  if (y.size() != p.dimension) throw Error(ErrorCode::DimensionMismatch, p.name + ": state size");
}

// Raw evaluation without accounting.
Vector rhs_raw(const OdeProblem& p, double t, const Vector& y) {
  Vector dydt(p.dimension);
  p.rhs(t, y, dydt);
  if (dydt.size() != p.dimension) throw Error(ErrorCode::DimensionMismatch, p.name + ": rhs output size");
  if (!dydt.allFinite()) throw Error(ErrorCode::NonFiniteOutput, p.name + ": rhs produced non-finite values");
  return dydt;
}

double fd_increment(double yj) {
  return std::sqrt(std::numeric_limits<double>::epsilon()) * std::max(std::abs(yj), 1.0);
}

}  // namespace

Vector eval_rhs(const OdeProblem& p, double t, const Vector& y, EvalStats* stats) {
  check_state(p, y);
  Vector f = rhs_raw(p, t, y);
  if (stats) {
    stats->scalar_evals += p.dimension;
    stats->rhs_calls += 1;
  }
  return f;
}

Matrix finite_difference_jacobian(const OdeProblem& p, double t, const Vector& y, EvalStats* stats) {
  check_state(p, y);
  const Vector f0 = eval_rhs(p, t, y, stats);
  Matrix jac(p.dimension, p.dimension);
  Vector yp = y;
  for (Index j = 0; j < p.dimension; ++j) {
    const double eps = fd_increment(y(j));
    yp(j) = y(j) + eps;
    const double step = yp(j) - y(j);
    jac.col(j) = (eval_rhs(p, t, yp, stats) - f0) / step;
    yp(j) = y(j);
  }
  return jac;
}

Matrix eval_jacobian(const OdeProblem& p, double t, const Vector& y, EvalStats* stats) {
  check_state(p, y);
  if (!p.jacobian) return finite_difference_jacobian(p, t, y, stats);
  Matrix jac = Matrix::Zero(p.dimension, p.dimension);
  p.jacobian(t, y, jac);
  if (jac.rows() != p.dimension || jac.cols() != p.dimension)
    throw Error(ErrorCode::DimensionMismatch, p.name + ": jacobian size");
  if (!jac.allFinite()) throw Error(ErrorCode::NonFiniteOutput, p.name + ": jacobian produced non-finite values");
  if (stats) stats->jacobian_evals += 1;
  return jac;
}

Vector eval_subsystem_rhs(const OdeProblem& p, double t, const Vector& x, const Vector& frozen,
                          const ActivePartition& part, EvalStats* stats) {
  check_state(p, frozen);
  if (part.dimension() != p.dimension) throw Error(ErrorCode::DimensionMismatch, "subsystem: partition dimension");
  if (x.size() != part.size()) throw Error(ErrorCode::DimensionMismatch, "subsystem: active state size");
  if (part.empty()) return Vector(0);
  Vector full = frozen;
  part.scatter(x, full);
  Vector f = rhs_raw(p, t, full);
  if (stats) {
    stats->scalar_evals += part.size();
    stats->rhs_calls += 1;
  }
  return part.gather(f);
}

Matrix subsystem_jacobian(const OdeProblem& p, double t, const Vector& y, const ActivePartition& part,
                          EvalStats* stats) {
  check_state(p, y);
  if (part.dimension() != p.dimension) throw Error(ErrorCode::DimensionMismatch, "subsystem: partition dimension");
  if (p.jacobian || part.is_full()) return part.gather(eval_jacobian(p, t, y, stats));

  // Forward differences restricted to the active columns; each column equals
  // the corresponding column of the full finite-difference Jacobian.
  const Vector f0 = part.gather(rhs_raw(p, t, y));
  Matrix jac(part.size(), part.size());
  Vector yp = y;
  for (Index c = 0; c < part.size(); ++c) {
    const Index j = part[c];
    yp(j) = y(j) + fd_increment(y(j));
    const double step = yp(j) - y(j);
    jac.col(c) = (part.gather(rhs_raw(p, t, yp)) - f0) / step;
    yp(j) = y(j);
  }
  if (stats) {
    stats->scalar_evals += part.size() * (part.size() + 1);
    stats->rhs_calls += part.size() + 1;
  }
  return jac;
}

Subsystem::Subsystem(const OdeProblem& problem, ActivePartition part, Vector frozen, LatentFill latent)
    : problem_(&problem), part_(std::move(part)), frozen_(std::move(frozen)), latent_(std::move(latent)) {
  if (part_.dimension() != problem.dimension || frozen_.size() != problem.dimension)
    throw Error(ErrorCode::DimensionMismatch, "Subsystem: partition or frozen state dimension");
}

Subsystem Subsystem::whole(const OdeProblem& problem) {
  return Subsystem(problem, ActivePartition::full(problem.dimension), Vector::Zero(problem.dimension));
}

Vector Subsystem::assemble(double t, const Vector& x) const {
  if (part_.is_full()) {
    if (x.size() != part_.size()) throw Error(ErrorCode::DimensionMismatch, "Subsystem: state size");
    return x;
  }
  Vector full = frozen_;
  if (latent_) latent_(t, full);
  part_.scatter(x, full);
  return full;
}

Vector Subsystem::rhs(double t, const Vector& x, EvalStats* stats) const {
  if (part_.is_full()) return eval_rhs(*problem_, t, x, stats);
  return eval_subsystem_rhs(*problem_, t, x, assemble(t, x), part_, stats);
}

Matrix Subsystem::jacobian(double t, const Vector& x, EvalStats* stats) const {
  return subsystem_jacobian(*problem_, t, assemble(t, x), part_, stats);
}

}  // namespace mrtr
