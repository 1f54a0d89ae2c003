#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "samred/matops.hpp"

namespace samred {

/// Continuous-time LTI state-space model xdot = A x + B u, y = C x.
template <typename Scalar>
struct ContinuousLti {
  MatrixX<Scalar> A;  // n x n
  MatrixX<Scalar> B;  // n x m
  MatrixX<Scalar> C;  // p x n

  Index order() const { return A.rows(); }
  Index inputs() const { return B.cols(); }
  Index outputs() const { return C.rows(); }
};

/// Finite set of allowed sampling intervals, canonicalized ascending.
/// Mode index i always refers to the i-th interval of the sorted grid.
template <typename Scalar>
class SamplingGrid {
 public:
  SamplingGrid() = default;
  explicit SamplingGrid(std::vector<Scalar> intervals)
      : intervals_(std::move(intervals)) {
    std::sort(intervals_.begin(), intervals_.end());
  }

  const std::vector<Scalar>& intervals() const { return intervals_; }
  Index size() const { return static_cast<Index>(intervals_.size()); }
  Scalar operator[](Index i) const { return intervals_[static_cast<std::size_t>(i)]; }

 private:
  std::vector<Scalar> intervals_;
};

/// A continuous plant together with its allowed sampling intervals.
template <typename Scalar>
struct SampledDataSystem {
  ContinuousLti<Scalar> plant;
  SamplingGrid<Scalar> grid;
};

/// Discrete-time linear switched model with one (A_i, B_i) pair per mode and
/// a read-out map C shared by all modes. Mode indices are 0-based throughout
/// the library.
template <typename Scalar>
struct SwitchedLinear {
  std::vector<MatrixX<Scalar>> A;  // D matrices, n x n
  std::vector<MatrixX<Scalar>> B;  // D matrices, n x m
  MatrixX<Scalar> C;               // p x n

  Index mode_count() const { return static_cast<Index>(A.size()); }
  Index order() const { return A.empty() ? C.cols() : A.front().rows(); }
  Index inputs() const { return B.empty() ? 0 : B.front().cols(); }
  Index outputs() const { return C.rows(); }
};

using ContinuousLtid = ContinuousLti<double>;
using SamplingGridd = SamplingGrid<double>;
using SampledDataSystemd = SampledDataSystem<double>;
using SwitchedLineard = SwitchedLinear<double>;

/// One invariant violation; `code` is stable and machine-readable.
struct Violation {
  std::string code;
  std::string message;
};

namespace detail {

template <typename Derived>
void check_finite(const Eigen::MatrixBase<Derived>& m, const char* code,
                  const char* what, std::vector<Violation>& out) {
  if (!m.allFinite()) {
    out.push_back({code, std::string(what) + " has non-finite entries"});
  }
}

}  // namespace detail

/// Total validation: never throws, returns every violation found.
template <typename Scalar>
std::vector<Violation> validate(const ContinuousLti<Scalar>& sys) {
  std::vector<Violation> v;
  if (sys.A.rows() == 0) v.push_back({"lti.empty", "state dimension is zero"});
  if (sys.A.rows() != sys.A.cols()) {
    v.push_back({"lti.a_not_square",
                 "A is " + std::to_string(sys.A.rows()) + "x" +
                     std::to_string(sys.A.cols())});
  }
  if (sys.B.rows() != sys.A.rows()) {
    v.push_back({"lti.b_rows", "B row count does not match the order of A"});
  }
  if (sys.C.cols() != sys.A.rows()) {
    v.push_back({"lti.c_cols", "C column count does not match the order of A"});
  }
  if (sys.B.cols() == 0) v.push_back({"lti.no_inputs", "B has zero columns"});
  if (sys.C.rows() == 0) v.push_back({"lti.no_outputs", "C has zero rows"});
  detail::check_finite(sys.A, "lti.nonfinite", "A", v);
  detail::check_finite(sys.B, "lti.nonfinite", "B", v);
  detail::check_finite(sys.C, "lti.nonfinite", "C", v);
  return v;
}

template <typename Scalar>
std::vector<Violation> validate(const SamplingGrid<Scalar>& grid) {
  std::vector<Violation> v;
  const auto& h = grid.intervals();
  if (h.empty()) v.push_back({"grid.empty", "grid has no intervals"});
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(h[i] > Scalar(0)) || !std::isfinite(static_cast<double>(h[i]))) {
      v.push_back({"grid.nonpositive_interval",
                   "interval " + std::to_string(i) + " is not a positive real"});
    }
  }
  for (std::size_t i = 1; i < h.size(); ++i) {
    const Scalar scale = std::max(std::abs(h[i - 1]), std::abs(h[i]));
    if (std::abs(h[i] - h[i - 1]) <= Scalar(1e-12) * scale) {
      v.push_back({"grid.duplicate_interval",
                   "intervals " + std::to_string(i - 1) + " and " +
                       std::to_string(i) + " coincide within 1e-12 relative"});
    }
  }
  return v;
}

template <typename Scalar>
std::vector<Violation> validate(const SampledDataSystem<Scalar>& sd) {
  std::vector<Violation> v = validate(sd.plant);
  std::vector<Violation> g = validate(sd.grid);
  v.insert(v.end(), g.begin(), g.end());
  return v;
}

template <typename Scalar>
std::vector<Violation> validate(const SwitchedLinear<Scalar>& sys) {
  std::vector<Violation> v;
  if (sys.A.empty()) v.push_back({"ls.no_modes", "system has no modes"});
  if (sys.A.size() != sys.B.size()) {
    v.push_back({"ls.mode_count_mismatch",
                 "A and B mode counts differ: " + std::to_string(sys.A.size()) +
                     " vs " + std::to_string(sys.B.size())});
    return v;
  }
  const Index n = sys.order();
  const Index m = sys.inputs();
  for (std::size_t i = 0; i < sys.A.size(); ++i) {
    if (sys.A[i].rows() != n || sys.A[i].cols() != n) {
      v.push_back({"ls.dimension_mismatch",
                   "mode " + std::to_string(i) + " A is " +
                       std::to_string(sys.A[i].rows()) + "x" +
                       std::to_string(sys.A[i].cols()) + ", expected " +
                       std::to_string(n) + "x" + std::to_string(n)});
    }
    if (sys.B[i].rows() != n || sys.B[i].cols() != m) {
      v.push_back({"ls.dimension_mismatch",
                   "mode " + std::to_string(i) + " B is " +
                       std::to_string(sys.B[i].rows()) + "x" +
                       std::to_string(sys.B[i].cols())});
    }
    detail::check_finite(sys.A[i], "ls.nonfinite", "a mode matrix", v);
    detail::check_finite(sys.B[i], "ls.nonfinite", "a mode input matrix", v);
  }
  if (sys.C.cols() != n) {
    v.push_back({"ls.c_cols", "C column count does not match the order"});
  }
  if (sys.C.rows() == 0) v.push_back({"ls.no_outputs", "C has zero rows"});
  detail::check_finite(sys.C, "ls.nonfinite", "C", v);
  return v;
}

/// Throwing convenience used at operation entry points.
template <typename System>
void require_valid(const System& sys, const char* where) {
  const auto violations = validate(sys);
  if (!violations.empty()) {
    std::string msg = std::string(where) + ": invalid system:";
    for (const auto& v : violations) msg += " [" + v.code + "] " + v.message;
    throw InputError(msg);
  }
}

/// Strict Hurwitz test; marginal spectra (abscissa == 0) count as unstable.
template <typename Scalar>
struct HurwitzResult {
  bool hurwitz;
  double abscissa;
};

template <typename Scalar>
HurwitzResult<Scalar> is_hurwitz(const ContinuousLti<Scalar>& sys) {
  const double a = spectral_abscissa(sys.A);
  return {a < 0.0, a};
}

}  // namespace samred
