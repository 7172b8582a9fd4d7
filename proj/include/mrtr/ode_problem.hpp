#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mrtr/types.hpp"

namespace mrtr {

/// Initial value problem y' = f(t, y) of dimension m.
///
/// The right-hand side writes into a caller-owned output vector of size m.
/// When no analytic Jacobian is supplied, forward differences are used.
struct OdeProblem {
  using Rhs = std::function<void(double t, const Vector& y, Vector& dydt)>;
  using Jacobian = std::function<void(double t, const Vector& y, Matrix& jac)>;

  std::string name;
  Index dimension = 0;
  Rhs rhs;
  Jacobian jacobian;
};

/// Per-run evaluation counters. `scalar_evals` counts component evaluations:
/// m for a full right-hand-side call, |active| for a subsystem call.
struct EvalStats {
  std::int64_t scalar_evals = 0;
  std::int64_t rhs_calls = 0;
  std::int64_t jacobian_evals = 0;
};

/// Sorted set of active component indices within {0, ..., m-1}.
class ActivePartition {
 public:
  ActivePartition() = default;
  ActivePartition(std::vector<Index> active, Index dimension);

  static ActivePartition full(Index dimension);
  static ActivePartition none(Index dimension);

  Index dimension() const noexcept { return dimension_; }
  Index size() const noexcept { return static_cast<Index>(active_.size()); }
  bool empty() const noexcept { return active_.empty(); }
  bool is_full() const noexcept { return size() == dimension_; }

  std::span<const Index> indices() const noexcept { return active_; }
  Index operator[](Index k) const { return active_[static_cast<std::size_t>(k)]; }

  bool contains(Index i) const;
  bool is_subset_of(const ActivePartition& other) const;
  ActivePartition complement() const;

  /// Active components of a full-length vector.
  Vector gather(const Vector& full) const;
  /// Writes `sub` into the active positions of `full`, leaving others untouched.
  void scatter(const Vector& sub, Vector& full) const;
  /// Active rows and columns of a full m x m matrix.
  Matrix gather(const Matrix& full) const;

  friend bool operator==(const ActivePartition&, const ActivePartition&) = default;

 private:
  std::vector<Index> active_;
  Index dimension_ = 0;
};

Vector eval_rhs(const OdeProblem& p, double t, const Vector& y, EvalStats* stats = nullptr);

/// Analytic Jacobian when available, otherwise forward differences with
/// increments sqrt(eps) * max(|y_j|, 1).
Matrix eval_jacobian(const OdeProblem& p, double t, const Vector& y, EvalStats* stats = nullptr);

Matrix finite_difference_jacobian(const OdeProblem& p, double t, const Vector& y, EvalStats* stats = nullptr);

/// P f(t, x (+) frozen): scatters x into the frozen full state, evaluates f and
/// gathers the active components.
Vector eval_subsystem_rhs(const OdeProblem& p, double t, const Vector& x, const Vector& frozen,
                          const ActivePartition& part, EvalStats* stats = nullptr);

/// Active-row, active-column block of the full Jacobian at y.
Matrix subsystem_jacobian(const OdeProblem& p, double t, const Vector& y, const ActivePartition& part,
                          EvalStats* stats = nullptr);

/// Fills the non-active entries of a full state at time t.
using LatentFill = std::function<void(double t, Vector& full)>;

/// The subsystem S^V: the active components of a problem, with the remaining
/// components supplied by a frozen state optionally refreshed per stage time.
class Subsystem {
 public:
  Subsystem(const OdeProblem& problem, ActivePartition part, Vector frozen, LatentFill latent = {});

  /// The whole problem, nothing frozen.
  static Subsystem whole(const OdeProblem& problem);

  const OdeProblem& problem() const noexcept { return *problem_; }
  const ActivePartition& partition() const noexcept { return part_; }
  Index size() const noexcept { return part_.size(); }

  /// Full state at time t with x in the active slots.
  Vector assemble(double t, const Vector& x) const;

  Vector rhs(double t, const Vector& x, EvalStats* stats) const;
  Matrix jacobian(double t, const Vector& x, EvalStats* stats) const;

 private:
  const OdeProblem* problem_;
  ActivePartition part_;
  Vector frozen_;
  LatentFill latent_;
};

}  // namespace mrtr
