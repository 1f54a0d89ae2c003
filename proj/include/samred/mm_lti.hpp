#pragma once

#include <string>
#include <vector>

#include "samred/systems.hpp"

namespace samred {

/// Which left inverse a projection carries.
enum class LeftInverseKind { pseudoinverse, lyapunov_weighted };

/// A moment-matching projection: orthonormal V spanning an N-partial
/// reachability space, a left inverse with Vinv * V = I_r, and the horizon
/// it was built for.
template <typename Scalar>
struct ProjectionReduction {
  MatrixX<Scalar> V;     // n x r, orthonormal columns
  MatrixX<Scalar> Vinv;  // r x n, left inverse of V
  Index N = 0;           // moment horizon
  Index r = 0;           // reduced order
  LeftInverseKind left_inverse_kind = LeftInverseKind::pseudoinverse;
};

using ProjectionReductiond = ProjectionReduction<double>;

/// Markov parameters M_0 ... M_N of an LTI system, M_k = C A^k B.
template <typename Scalar>
using MarkovSequenceLti = std::vector<MatrixX<Scalar>>;

template <typename Scalar>
MarkovSequenceLti<Scalar> markov_parameters_lti(const ContinuousLti<Scalar>& sys,
                                                Index N) {
  require_valid(sys, "markov_parameters_lti");
  if (N < 0) throw InputError("markov_parameters_lti: N must be nonneg");
  MarkovSequenceLti<Scalar> seq;
  seq.reserve(static_cast<std::size_t>(N) + 1);
  MatrixX<Scalar> X = sys.B;  // A^k B, built by iterated multiplication
  seq.push_back(sys.C * X);
  for (Index k = 1; k <= N; ++k) {
    X = (sys.A * X).eval();
    seq.push_back(sys.C * X);
  }
  return seq;
}

namespace detail {

/// Level-by-level orthonormal basis of
///   span{ seeds } + sum_k maps[k] * (previous level),
/// grown for `levels` additional levels with modified Gram-Schmidt
/// (two passes) and per-candidate relative rank tolerance. New directions of
/// each level are recorded so callers can read dim R^N per level. Stops early
/// once a level contributes nothing: the recursion is stationary from there.
template <typename Scalar>
struct ReachabilityBasis {
  MatrixX<Scalar> basis;              // n x r, orthonormal
  std::vector<Index> dim_per_level;   // dim after levels 0, 1, ..., L
  bool saturated = false;             // a level added no new direction
};

template <typename Scalar>
ReachabilityBasis<Scalar> grow_reachability(
    const std::vector<const MatrixX<Scalar>*>& maps,
    const MatrixX<Scalar>& seeds, Index levels, Scalar rank_tol) {
  const Index n = seeds.rows();
  ReachabilityBasis<Scalar> out;
  out.basis.resize(n, 0);

  // Accepts `cand` into the basis if it carries a new direction.
  auto absorb = [&](VectorX<Scalar> cand) -> bool {
    const Scalar original_norm = cand.norm();
    if (!(original_norm > Scalar(0))) return false;
    for (int pass = 0; pass < 2; ++pass) {
      if (out.basis.cols() > 0) {
        cand -= out.basis * (out.basis.transpose() * cand).eval();
      }
    }
    const Scalar residual = cand.norm();
    if (residual <= rank_tol * original_norm) return false;
    out.basis.conservativeResize(n, out.basis.cols() + 1);
    out.basis.col(out.basis.cols() - 1) = cand / residual;
    return true;
  };

  MatrixX<Scalar> fresh(n, 0);  // directions new at the current level
  {
    MatrixX<Scalar> accepted(n, 0);
    for (Index c = 0; c < seeds.cols(); ++c) {
      if (absorb(seeds.col(c))) {
        accepted.conservativeResize(n, accepted.cols() + 1);
        accepted.col(accepted.cols() - 1) = out.basis.col(out.basis.cols() - 1);
      }
    }
    fresh = std::move(accepted);
  }
  out.dim_per_level.push_back(out.basis.cols());

  for (Index level = 1; level <= levels; ++level) {
    if (fresh.cols() == 0) {
      out.saturated = true;
      break;
    }
    MatrixX<Scalar> accepted(n, 0);
    for (const MatrixX<Scalar>* map : maps) {
      for (Index c = 0; c < fresh.cols(); ++c) {
        if (absorb((*map) * fresh.col(c))) {
          accepted.conservativeResize(n, accepted.cols() + 1);
          accepted.col(accepted.cols() - 1) =
              out.basis.col(out.basis.cols() - 1);
        }
      }
    }
    fresh = std::move(accepted);
    out.dim_per_level.push_back(out.basis.cols());
  }
  if (!out.saturated && fresh.cols() == 0) out.saturated = true;
  return out;
}

}  // namespace detail

/// Orthonormal basis of the N-partial reachability space
/// im([B, AB, ..., A^N B]), grown block by block.
template <typename Scalar>
MatrixX<Scalar> reachability_space_lti(const ContinuousLti<Scalar>& sys,
                                       Index N,
                                       Scalar rank_tol = Scalar(kDefaultRankTol)) {
  require_valid(sys, "reachability_space_lti");
  if (N < 0) throw InputError("reachability_space_lti: N must be nonneg");
  std::vector<const MatrixX<Scalar>*> maps = {&sys.A};
  auto grown = detail::grow_reachability<Scalar>(maps, sys.B, N, rank_tol);
  if (grown.basis.cols() == 0) {
    throw ZeroSpaceError(
        "reachability_space_lti: B is zero, the reachability space is "
        "trivial and no reduction exists");
  }
  return grown.basis;
}

/// Projection with the plain pseudoinverse left inverse V^T.
template <typename Scalar>
ProjectionReduction<Scalar> projection_from_basis(MatrixX<Scalar> V, Index N) {
  ProjectionReduction<Scalar> proj;
  proj.r = V.cols();
  proj.N = N;
  proj.Vinv = V.transpose();
  proj.V = std::move(V);
  proj.left_inverse_kind = LeftInverseKind::pseudoinverse;
  return proj;
}

namespace detail {

template <typename Scalar>
void require_projection(const ProjectionReduction<Scalar>& proj, Index n,
                        const char* where) {
  if (proj.V.rows() != n || proj.Vinv.cols() != n ||
      proj.Vinv.rows() != proj.V.cols() || proj.V.cols() != proj.r) {
    throw DimensionError(std::string(where) + ": projection shapes are off");
  }
  if (proj.r < 1) throw InputError(std::string(where) + ": empty projection");
  const Scalar ortho =
      (proj.V.transpose() * proj.V -
       MatrixX<Scalar>::Identity(proj.r, proj.r)).cwiseAbs().maxCoeff();
  if (!(ortho <= Scalar(1e-10))) {
    throw InputError(std::string(where) +
                     ": V does not have orthonormal columns (defect " +
                     std::to_string(static_cast<double>(ortho)) + ")");
  }
  const Scalar li =
      (proj.Vinv * proj.V -
       MatrixX<Scalar>::Identity(proj.r, proj.r)).cwiseAbs().maxCoeff();
  if (!(li <= Scalar(1e-10))) {
    throw InputError(std::string(where) + ": Vinv is not a left inverse of V "
                     "(defect " + std::to_string(static_cast<double>(li)) + ")");
  }
}

// im(V) must contain every column of X, to span_tol relative with the
// library's usual unit floor (columns contracted to negligible magnitude
// carry no usable direction).
template <typename Scalar>
void require_span_contains(const MatrixX<Scalar>& V, const MatrixX<Scalar>& X,
                           Scalar span_tol, const char* where) {
  for (Index c = 0; c < X.cols(); ++c) {
    const Scalar norm = X.col(c).norm();
    if (!(norm > Scalar(0))) continue;
    const Scalar residual =
        (X.col(c) - V * (V.transpose() * X.col(c)).eval()).norm();
    if (residual > span_tol * (Scalar(1) + norm)) {
      throw SpanError(std::string(where) +
                      ": projection basis misses a required direction "
                      "(residual " +
                      std::to_string(static_cast<double>(residual)) +
                      " on a column of norm " +
                      std::to_string(static_cast<double>(norm)) + ")");
    }
  }
}

}  // namespace detail

/// Projection reduction: Abar = Vinv A V, Bbar = Vinv B, Cbar = C V.
/// Requires im(V) to contain the N-partial reachability space; the result is
/// then an N-partial realization of `sys`.
template <typename Scalar>
ContinuousLti<Scalar> reduce_lti(const ContinuousLti<Scalar>& sys,
                                 const ProjectionReduction<Scalar>& proj,
                                 Scalar span_tol = Scalar(1e-8)) {
  require_valid(sys, "reduce_lti");
  detail::require_projection(proj, sys.order(), "reduce_lti");
  MatrixX<Scalar> block = sys.B;
  for (Index k = 0; k <= proj.N; ++k) {
    detail::require_span_contains(proj.V, block, span_tol, "reduce_lti");
    if (k < proj.N) block = (sys.A * block).eval();
  }
  ContinuousLti<Scalar> red;
  red.A = proj.Vinv * sys.A * proj.V;
  red.B = proj.Vinv * sys.B;
  red.C = sys.C * proj.V;
  return red;
}

/// Relative Frobenius distance with floor: ||X - Y||_F / (1 + ||X||_F).
template <typename Scalar>
Scalar relative_markov_residual(const MatrixX<Scalar>& X,
                                const MatrixX<Scalar>& Y) {
  return (X - Y).norm() / (Scalar(1) + X.norm());
}

}  // namespace samred
