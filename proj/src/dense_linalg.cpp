#include "mrtr/dense_linalg.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace mrtr {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::NonFiniteOutput: return "NonFiniteOutput";
    case ErrorCode::NewtonDivergence: return "NewtonDivergence";
    case ErrorCode::PoleEncountered: return "PoleEncountered";
    case ErrorCode::OffsetOutOfRange: return "OffsetOutOfRange";
    case ErrorCode::DegenerateNodes: return "DegenerateNodes";
    case ErrorCode::EmptyActiveSet: return "EmptyActiveSet";
    case ErrorCode::StepFloorReached: return "StepFloorReached";
    case ErrorCode::TooManyRejections: return "TooManyRejections";
    case ErrorCode::SafetyCapExceeded: return "SafetyCapExceeded";
    case ErrorCode::UnknownSystem: return "UnknownSystem";
    case ErrorCode::MissingSpatialMetadata: return "MissingSpatialMetadata";
  }
  return "Unknown";
}

namespace {

constexpr double kPivotThreshold = 1e-14;

void require_finite(const Matrix& a, const char* what) {
  if (!a.allFinite()) throw Error(ErrorCode::InvalidArgument, std::string(what) + ": non-finite entries");
}

}  // namespace

LuFactorization::LuFactorization(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw Error(ErrorCode::DimensionMismatch, "lu_factor: matrix must be square and non-empty");
  require_finite(a, "lu_factor");
  lu_.compute(a);
  const double scale = a.cwiseAbs().maxCoeff();
  const double floor = kPivotThreshold * scale;
  const auto& packed = lu_.matrixLU();
  for (Index i = 0; i < packed.rows(); ++i) {
    if (!(std::abs(packed(i, i)) > floor) || scale == 0.0)
      throw Error(ErrorCode::SingularMatrix, "lu_factor: pivot " + std::to_string(i) + " below threshold");
  }
}

std::vector<Index> LuFactorization::pivots() const {
  // P * A = L * U with P = permutationP(); invert to map PA rows back to A rows.
  const auto& p = lu_.permutationP().indices();
  std::vector<Index> rows(static_cast<std::size_t>(p.size()));
  for (Index i = 0; i < p.size(); ++i) rows[static_cast<std::size_t>(p(i))] = i;
  return rows;
}

Vector LuFactorization::solve(const Vector& b) const {
  if (b.size() != size()) throw Error(ErrorCode::DimensionMismatch, "lu_solve: right-hand side size");
  return lu_.solve(b);
}

Matrix LuFactorization::solve(const Matrix& b) const {
  if (b.rows() != size()) throw Error(ErrorCode::DimensionMismatch, "lu_solve: right-hand side rows");
  return lu_.solve(b);
}

double matrix_norm(const Matrix& a, NormKind kind) {
  require_finite(a, "matrix_norm");
  if (a.size() == 0) return 0.0;
  switch (kind) {
    case NormKind::one: return a.cwiseAbs().colwise().sum().maxCoeff();
    case NormKind::inf: return a.cwiseAbs().rowwise().sum().maxCoeff();
    case NormKind::two: {
      Eigen::JacobiSVD<Matrix> svd(a);
      return svd.singularValues()(0);
    }
  }
  return 0.0;
}

double spectral_radius(const Matrix& a) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::DimensionMismatch, "spectral_radius: matrix must be square");
  require_finite(a, "spectral_radius");
  if (a.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::NonConvergence, "spectral_radius: QR iteration failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace mrtr
