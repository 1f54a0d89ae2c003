#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "samred/mm_lti.hpp"
#include "samred/simulate.hpp"

namespace samred {

/// One switched Markov parameter C A_{k_1} ... A_{k_M} B_j. The word holds
/// (k_1, ..., k_M) as 0-based mode indices; an empty word is the length-0
/// parameter C B_j.
template <typename Scalar>
struct SwitchedMarkovParameter {
  std::vector<Index> word;
  Index entry_mode = 0;
  MatrixX<Scalar> value;  // p x m
};

/// Number of parameters of length 0..N for D modes:
/// sum_{M=0}^{N} D^{M+1}. Returns -1 on overflow past `cap`.
inline std::int64_t switched_markov_count(Index D, Index N,
                                          std::int64_t cap = 1000000) {
  std::int64_t total = 0;
  std::int64_t words = 1;  // D^M
  for (Index M = 0; M <= N; ++M) {
    if (words > cap / D + 1) return -1;
    words *= D;  // now D^{M+1}
    total += words;
    if (total > cap) return -1;
  }
  return total;
}

/// All switched Markov parameters of length 0..N, enumerated by length,
/// then lexicographic word order, then entry mode. The enumeration refuses
/// to exceed `budget` parameters.
template <typename Scalar>
std::vector<SwitchedMarkovParameter<Scalar>> markov_parameters_ls(
    const SwitchedLinear<Scalar>& sys, Index N, std::int64_t budget = 1000000) {
  require_valid(sys, "markov_parameters_ls");
  if (N < 0) throw InputError("markov_parameters_ls: N must be nonneg");
  const Index D = sys.mode_count();
  const std::int64_t count = switched_markov_count(D, N, budget);
  if (count < 0) {
    throw BudgetError("markov_parameters_ls: enumeration of horizon N = " +
                      std::to_string(N) + " with D = " + std::to_string(D) +
                      " modes exceeds the budget of " + std::to_string(budget) +
                      " parameters");
  }

  std::vector<SwitchedMarkovParameter<Scalar>> out;
  out.reserve(static_cast<std::size_t>(count));

  // Prefix products C A_{k_1} ... A_{k_M}, extended level by level; within a
  // level the words are kept in lexicographic order by construction.
  std::vector<std::pair<std::vector<Index>, MatrixX<Scalar>>> level;
  level.emplace_back(std::vector<Index>{}, sys.C);
  for (Index M = 0; M <= N; ++M) {
    for (const auto& [word, prefix] : level) {
      for (Index j = 0; j < D; ++j) {
        SwitchedMarkovParameter<Scalar> param;
        param.word = word;
        param.entry_mode = j;
        param.value = prefix * sys.B[static_cast<std::size_t>(j)];
        out.push_back(std::move(param));
      }
    }
    if (M == N) break;
    std::vector<std::pair<std::vector<Index>, MatrixX<Scalar>>> next;
    next.reserve(level.size() * static_cast<std::size_t>(D));
    for (const auto& [word, prefix] : level) {
      for (Index k = 0; k < D; ++k) {
        std::vector<Index> extended = word;
        extended.push_back(k);
        next.emplace_back(std::move(extended),
                          prefix * sys.A[static_cast<std::size_t>(k)]);
      }
    }
    level = std::move(next);
  }
  return out;
}

/// Orthonormal basis of the N-partial reachability space of a switched
/// system, from the inductive recursion
///   R^0 = span of all mode input images,
///   R^N = R^0 + sum_k im(A_k R^{N-1}),
/// realized breadth-first with incremental orthogonalization; levels past
/// saturation are skipped because the recursion is then stationary.
template <typename Scalar>
MatrixX<Scalar> reachability_space_ls(const SwitchedLinear<Scalar>& sys,
                                      Index N,
                                      Scalar rank_tol = Scalar(kDefaultRankTol)) {
  require_valid(sys, "reachability_space_ls");
  if (N < 0) throw InputError("reachability_space_ls: N must be nonneg");
  const Index n = sys.order();
  const Index D = sys.mode_count();

  MatrixX<Scalar> seeds(n, D * sys.inputs());
  for (Index j = 0; j < D; ++j) {
    seeds.middleCols(j * sys.inputs(), sys.inputs()) =
        sys.B[static_cast<std::size_t>(j)];
  }
  std::vector<const MatrixX<Scalar>*> maps;
  maps.reserve(static_cast<std::size_t>(D));
  for (const auto& Ai : sys.A) maps.push_back(&Ai);

  auto grown = detail::grow_reachability<Scalar>(maps, seeds, N, rank_tol);
  if (grown.basis.cols() == 0) {
    throw ZeroSpaceError(
        "reachability_space_ls: every mode input matrix is zero; the "
        "reachability space is trivial");
  }
  return grown.basis;
}

/// Projection reduction, per mode: Abar_i = Vinv A_i V, Bbar_i = Vinv B_i,
/// Cbar = C V. Requires im(V) to contain R^N; the result is then an
/// N-partial realization of `sys`.
template <typename Scalar>
SwitchedLinear<Scalar> reduce_ls(const SwitchedLinear<Scalar>& sys,
                                 const ProjectionReduction<Scalar>& proj,
                                 Scalar span_tol = Scalar(1e-8)) {
  require_valid(sys, "reduce_ls");
  detail::require_projection(proj, sys.order(), "reduce_ls");

  // Walk the reachability levels and verify each lies in im(V). Each level
  // is projected onto im(V) and compressed before the next is formed, which
  // keeps the walk polynomial; the projection is sound because the residual
  // just verified is within span_tol.
  {
    const Index n = sys.order();
    MatrixX<Scalar> fresh(n, sys.mode_count() * sys.inputs());
    for (Index j = 0; j < sys.mode_count(); ++j) {
      fresh.middleCols(j * sys.inputs(), sys.inputs()) =
          sys.B[static_cast<std::size_t>(j)];
    }
    for (Index level = 0; level <= proj.N; ++level) {
      detail::require_span_contains(proj.V, fresh, span_tol, "reduce_ls");
      if (level == proj.N || fresh.cols() == 0) break;
      MatrixX<Scalar> projected =
          proj.V * (proj.V.transpose() * fresh).eval();
      MatrixX<Scalar> compressed =
          orthonormal_range<Scalar>(projected, Scalar(1e-13));
      MatrixX<Scalar> next(n, compressed.cols() * sys.mode_count());
      for (Index k = 0; k < sys.mode_count(); ++k) {
        next.middleCols(k * compressed.cols(), compressed.cols()) =
            sys.A[static_cast<std::size_t>(k)] * compressed;
      }
      fresh = std::move(next);
    }
  }

  SwitchedLinear<Scalar> red;
  red.C = sys.C * proj.V;
  red.A.reserve(sys.A.size());
  red.B.reserve(sys.B.size());
  for (std::size_t i = 0; i < sys.A.size(); ++i) {
    red.A.push_back(proj.Vinv * sys.A[i] * proj.V);
    red.B.push_back(proj.Vinv * sys.B[i]);
  }
  return red;
}

/// Empirical check of the horizon guarantee: an N-partial realization must
/// reproduce the original outputs for every k <= N, for every input and
/// switching sequence, from zero initial state. Deviations are recorded per
/// step, including beyond N where they are expected to grow.
template <typename Scalar>
struct HorizonCheckReport {
  bool passed = true;                        // all k <= N within tolerance
  Index N = 0;
  Index trials = 0;
  std::vector<Scalar> max_relative_deviation;  // indexed by k
  Scalar tolerance = Scalar(1e-7);
};

template <typename Scalar>
HorizonCheckReport<Scalar> output_match_horizon_check(
    const SwitchedLinear<Scalar>& original, const SwitchedLinear<Scalar>& reduced,
    Index N, Index trials, std::uint64_t seed = 20260808ULL,
    Index extra_steps = 5, Scalar tolerance = Scalar(1e-7)) {
  require_valid(original, "output_match_horizon_check");
  require_valid(reduced, "output_match_horizon_check");
  if (original.mode_count() != reduced.mode_count() ||
      original.inputs() != reduced.inputs() ||
      original.outputs() != reduced.outputs()) {
    throw DimensionError(
        "output_match_horizon_check: systems do not share (D, m, p)");
  }

  HorizonCheckReport<Scalar> report;
  report.N = N;
  report.trials = trials;
  report.tolerance = tolerance;
  const Index K = N + extra_steps;
  report.max_relative_deviation.assign(static_cast<std::size_t>(K) + 1,
                                       Scalar(0));

  const auto stimuli = generate_campaign_sequences<Scalar>(
      seed, K, original.mode_count(), original.inputs(), trials);
  for (const auto& trial : stimuli) {
    const auto y = simulate_ls(original, trial.input, trial.switching);
    const auto ybar = simulate_ls(reduced, trial.input, trial.switching);
    for (Index k = 0; k <= K; ++k) {
      const auto& yk = y.outputs[static_cast<std::size_t>(k)];
      const auto& bk = ybar.outputs[static_cast<std::size_t>(k)];
      const Scalar dev = (yk - bk).norm() / (Scalar(1) + yk.norm());
      auto& slot = report.max_relative_deviation[static_cast<std::size_t>(k)];
      slot = std::max(slot, dev);
      if (k <= N && dev > tolerance) report.passed = false;
    }
  }
  return report;
}

}  // namespace samred
