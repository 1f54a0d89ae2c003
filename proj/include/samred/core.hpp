#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace samred {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Matrix shapes do not line up (non-square where square required, etc.).
struct DimensionError : Error {
  using Error::Error;
};

/// An input violates a precondition (non-finite entries, negative time, ...).
struct InputError : Error {
  using Error::Error;
};

/// A continuous-time system matrix is not Hurwitz where stability is required.
struct NotHurwitzError : Error {
  double spectral_abscissa;
  NotHurwitzError(const std::string& what, double abscissa)
      : Error(what), spectral_abscissa(abscissa) {}
};

/// A reachability space turned out zero-dimensional; reduction is impossible.
struct ZeroSpaceError : Error {
  using Error::Error;
};

/// A combinatorial enumeration would exceed its configured budget.
struct BudgetError : Error {
  using Error::Error;
};

/// A projection basis does not span the space the reduction requires.
struct SpanError : Error {
  using Error::Error;
};

/// A matrix that must be inverted is numerically singular.
struct ConditioningError : Error {
  using Error::Error;
};

/// An identity the mathematics guarantees failed beyond tolerance;
/// indicates numerical breakdown, not a model property.
struct ConsistencyError : Error {
  using Error::Error;
};

/// BFR is undefined (constant reference output, zero denominator).
struct BfrUndefinedError : Error {
  using Error::Error;
};

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* name) {
  if (!m.allFinite()) {
    throw InputError(std::string(name) + ": matrix has non-finite entries");
  }
}

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& m, const char* name) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(name) + ": expected square matrix, got " +
                         std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  }
}

// Symmetry within the tolerance used for all symmetric-matrix arguments:
// max |S - S^T| <= 1e-12 * (1 + max |S|).
template <typename Derived>
void require_symmetric(const Eigen::MatrixBase<Derived>& s, const char* name) {
  require_square(s, name);
  require_finite(s, name);
  using Scalar = typename Derived::Scalar;
  if (s.rows() == 0) return;
  const Scalar scale = Scalar(1) + s.cwiseAbs().maxCoeff();
  const Scalar skew = (s - s.transpose()).cwiseAbs().maxCoeff();
  if (!(skew <= Scalar(1e-12) * scale)) {
    throw InputError(std::string(name) + ": matrix is not symmetric (max skew " +
                     std::to_string(static_cast<double>(skew)) + ")");
  }
}

}  // namespace detail

// Symmetrize exactly once validated; downstream algebra then sees S = S^T
// to the last bit.
template <typename Scalar>
MatrixX<Scalar> symmetrize(const MatrixX<Scalar>& s) {
  return ((s + s.transpose()) / Scalar(2)).eval();
}

namespace detail {

}  // namespace detail

}  // namespace samred
