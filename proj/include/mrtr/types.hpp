#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mrtr {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  SingularMatrix,
  NonConvergence,
  NonFiniteOutput,
  NewtonDivergence,
  PoleEncountered,
  OffsetOutOfRange,
  DegenerateNodes,
  EmptyActiveSet,
  StepFloorReached,
  TooManyRejections,
  SafetyCapExceeded,
  UnknownSystem,
  MissingSpatialMetadata,
};

const char* to_string(ErrorCode code) noexcept;

/// All failures raised by the library carry a machine-readable code so that
/// callers (the integrator, the CLI) can decide between retrying and aborting.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mrtr
