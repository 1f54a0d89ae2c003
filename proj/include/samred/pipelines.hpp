#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "samred/stability.hpp"

namespace samred {

enum class Approach { one, two };

/// What the caller wants from a reduction: either a fixed moment horizon N
/// (the order falls out of the space dimension) or an order budget r_max
/// (the pipeline picks the largest N whose space still fits).
struct ReductionRequest {
  enum class Kind { fixed_moments, max_order };
  Kind kind = Kind::max_order;
  Index value = 0;

  static ReductionRequest moments(Index N) {
    return {Kind::fixed_moments, N};
  }
  static ReductionRequest order(Index r_max) {
    return {Kind::max_order, r_max};
  }
};

template <typename Scalar>
struct PipelineOptions {
  // Auto: use the stability-preserving inverse whenever the plant is
  // Hurwitz.
  std::optional<bool> use_stable_inverse;
  Scalar rank_tol = Scalar(kDefaultRankTol);
  Scalar span_tol = Scalar(1e-8);
  std::int64_t markov_budget = 1000000;
  Scalar match_tol = Scalar(1e-8);  // self-check threshold for lengths <= N
};

/// Everything a reduction run reports besides the reduced model itself.
template <typename Scalar>
struct ReductionReport {
  Approach approach = Approach::one;
  Index n = 0, r = 0, N = 0, D = 0;
  SamplingGrid<Scalar> grid;
  LeftInverseKind left_inverse_kind = LeftInverseKind::pseudoinverse;

  bool certificate_present = false;
  StabilityCertificate<Scalar> certificate;
  std::string stability_note;

  // (moment length, max relative residual vs the original) pairs; lengths
  // <= N are verified against match_tol, the next length is diagnostic.
  std::vector<std::pair<Index, Scalar>> markov_match_residuals;
  Index verified_markov_depth = -1;

  struct Timings {
    double reduce_seconds = 0;
    double discretize_seconds = 0;
    double certify_seconds = 0;
  } timings;
};

template <typename Scalar>
struct PipelineResult {
  SwitchedLinear<Scalar> reduced_ls;
  std::optional<ContinuousLti<Scalar>> reduced_plant;  // approach 1 only
  ReductionReport<Scalar> report;
};

namespace detail {

inline double seconds_since(
    const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

/// Resolve a request against the level dimensions of a grown reachability
/// basis: pick (N, r) and slice the basis columns that span R^N.
template <typename Scalar>
std::pair<Index, MatrixX<Scalar>> resolve_request(
    const ReachabilityBasis<Scalar>& grown, const ReductionRequest& request,
    const char* where) {
  const auto& dims = grown.dim_per_level;
  if (dims.empty() || dims.front() == 0) {
    throw ZeroSpaceError(std::string(where) +
                         ": the reachability space is zero-dimensional");
  }
  if (request.kind == ReductionRequest::Kind::fixed_moments) {
    // The basis was grown exactly to the requested horizon (or saturated
    // earlier, in which case the space is already stationary).
    return {request.value, grown.basis};
  }
  if (dims.front() > request.value) {
    throw SpanError(std::string(where) + ": requested order " +
                    std::to_string(request.value) +
                    " is below dim R^0 = " + std::to_string(dims.front()) +
                    "; no moment-matching reduction fits");
  }
  Index chosen = 0;
  for (std::size_t l = 0; l < dims.size(); ++l) {
    if (dims[l] <= request.value) chosen = static_cast<Index>(l);
  }
  return {chosen,
          grown.basis.leftCols(dims[static_cast<std::size_t>(chosen)])};
}

}  // namespace detail

/// Reduce-then-discretize: moment matching on the continuous plant, then the
/// ZOH switched model of the reduced plant. A Hurwitz plant yields a
/// certificate from the reduced plant's own Lyapunov solution.
template <typename Scalar>
PipelineResult<Scalar> approach_one(const SampledDataSystem<Scalar>& sd,
                                    const ReductionRequest& request,
                                    const PipelineOptions<Scalar>& opts = {}) {
  require_valid(sd, "approach_one");
  const auto hw = is_hurwitz(sd.plant);
  const bool stable_inverse = opts.use_stable_inverse.value_or(hw.hurwitz);
  if (stable_inverse && !hw.hurwitz) {
    throw NotHurwitzError(
        "approach_one: the stability-preserving inverse needs a Hurwitz "
        "plant",
        hw.abscissa);
  }

  PipelineResult<Scalar> out;
  auto& rep = out.report;
  rep.approach = Approach::one;
  rep.n = sd.plant.order();
  rep.D = sd.grid.size();
  rep.grid = sd.grid;

  const auto t_reduce = std::chrono::steady_clock::now();
  const Index level_cap =
      request.kind == ReductionRequest::Kind::fixed_moments ? request.value
                                                            : sd.plant.order();
  std::vector<const MatrixX<Scalar>*> maps = {&sd.plant.A};
  const auto grown = detail::grow_reachability<Scalar>(
      maps, sd.plant.B, level_cap, opts.rank_tol);
  auto [N, V] = detail::resolve_request<Scalar>(grown, request, "approach_one");
  rep.N = N;
  rep.r = V.cols();

  ProjectionReduction<Scalar> proj;
  if (stable_inverse) {
    const MatrixX<Scalar> P = lyapunov_from_plant(sd.plant);
    proj = projection_with_lyapunov_inverse<Scalar>(std::move(V), P, N);
  } else {
    proj = projection_from_basis<Scalar>(std::move(V), N);
  }
  rep.left_inverse_kind = proj.left_inverse_kind;
  out.reduced_plant = reduce_lti(sd.plant, proj, opts.span_tol);
  rep.timings.reduce_seconds = detail::seconds_since(t_reduce);

  const auto t_disc = std::chrono::steady_clock::now();
  out.reduced_ls =
      build_switched_model<Scalar>({*out.reduced_plant, sd.grid});
  rep.timings.discretize_seconds = detail::seconds_since(t_disc);

  // Self-check: continuous moments up to N must match; N+1 is diagnostic.
  {
    const auto original = markov_parameters_lti(sd.plant, N + 1);
    const auto reduced = markov_parameters_lti(*out.reduced_plant, N + 1);
    for (Index k = 0; k <= N + 1; ++k) {
      const Scalar res = relative_markov_residual(
          original[static_cast<std::size_t>(k)],
          reduced[static_cast<std::size_t>(k)]);
      rep.markov_match_residuals.emplace_back(k, res);
      if (k <= N && !(res <= opts.match_tol)) {
        throw ConsistencyError(
            "approach_one: moment " + std::to_string(k) +
            " residual " + std::to_string(static_cast<double>(res)) +
            " exceeds tolerance; the projection basis is unsound");
      }
    }
    rep.verified_markov_depth = N;
  }

  const auto t_cert = std::chrono::steady_clock::now();
  const auto hw_red = is_hurwitz(*out.reduced_plant);
  if (hw_red.hurwitz) {
    const MatrixX<Scalar> Pbar = lyapunov_from_plant(*out.reduced_plant);
    rep.certificate = check_quadratic_stability(out.reduced_ls, Pbar);
    if (!rep.certificate.certified) {
      throw ConsistencyError(
          "approach_one: the reduced plant is Hurwitz yet its Lyapunov "
          "solution fails to certify the discretized modes; numerical "
          "breakdown");
    }
    rep.certificate_present = true;
  } else {
    rep.stability_note =
        "stability not preserved: reduced plant has spectral abscissa " +
        std::to_string(hw_red.abscissa) +
        (hw.hurwitz ? " (plain pseudoinverse reduction of a stable plant)"
                    : " (original plant is itself unstable)") +
        "; no certificate attached";
  }
  rep.timings.certify_seconds = detail::seconds_since(t_cert);
  return out;
}

/// Discretize-then-reduce: moment matching on the switched model itself.
/// A Hurwitz plant yields the weighted left inverse and a certificate for the
/// reduced switched system with Pbar = V^T P V.
template <typename Scalar>
PipelineResult<Scalar> approach_two(const SampledDataSystem<Scalar>& sd,
                                    const ReductionRequest& request,
                                    const PipelineOptions<Scalar>& opts = {}) {
  require_valid(sd, "approach_two");
  const auto hw = is_hurwitz(sd.plant);
  const bool stable_inverse = opts.use_stable_inverse.value_or(hw.hurwitz);
  if (stable_inverse && !hw.hurwitz) {
    throw NotHurwitzError(
        "approach_two: the stability-preserving inverse needs a Hurwitz "
        "plant",
        hw.abscissa);
  }

  PipelineResult<Scalar> out;
  auto& rep = out.report;
  rep.approach = Approach::two;
  rep.n = sd.plant.order();
  rep.D = sd.grid.size();
  rep.grid = sd.grid;

  const auto t_disc = std::chrono::steady_clock::now();
  const SwitchedLinear<Scalar> ls = build_switched_model(sd);
  rep.timings.discretize_seconds = detail::seconds_since(t_disc);

  const auto t_reduce = std::chrono::steady_clock::now();
  const Index level_cap =
      request.kind == ReductionRequest::Kind::fixed_moments ? request.value
                                                            : sd.plant.order();
  MatrixX<Scalar> seeds(ls.order(), ls.mode_count() * ls.inputs());
  for (Index j = 0; j < ls.mode_count(); ++j) {
    seeds.middleCols(j * ls.inputs(), ls.inputs()) =
        ls.B[static_cast<std::size_t>(j)];
  }
  std::vector<const MatrixX<Scalar>*> maps;
  for (const auto& Ai : ls.A) maps.push_back(&Ai);
  const auto grown =
      detail::grow_reachability<Scalar>(maps, seeds, level_cap, opts.rank_tol);
  auto [N, V] = detail::resolve_request<Scalar>(grown, request, "approach_two");
  rep.N = N;
  rep.r = V.cols();

  std::optional<MatrixX<Scalar>> P;
  ProjectionReduction<Scalar> proj;
  if (stable_inverse) {
    P = lyapunov_from_plant(sd.plant);
    proj = projection_with_lyapunov_inverse<Scalar>(std::move(V), *P, N);
  } else {
    proj = projection_from_basis<Scalar>(std::move(V), N);
  }
  rep.left_inverse_kind = proj.left_inverse_kind;
  out.reduced_ls = reduce_ls(ls, proj, opts.span_tol);
  rep.timings.reduce_seconds = detail::seconds_since(t_reduce);

  // Self-check: switched moments up to N must match; one more length is
  // reported when the word count stays within budget.
  {
    Index depth = -1;
    while (depth < N + 1 &&
           switched_markov_count(rep.D, depth + 1, opts.markov_budget) >= 0) {
      ++depth;
    }
    const Index verify_depth = std::min(N, depth);
    if (depth >= 0) {
      const auto original = markov_parameters_ls(ls, depth, opts.markov_budget);
      const auto reduced =
          markov_parameters_ls(out.reduced_ls, depth, opts.markov_budget);
      std::vector<Scalar> worst(static_cast<std::size_t>(depth) + 1, Scalar(0));
      for (std::size_t i = 0; i < original.size(); ++i) {
        const Index len = static_cast<Index>(original[i].word.size());
        worst[static_cast<std::size_t>(len)] =
            std::max(worst[static_cast<std::size_t>(len)],
                     relative_markov_residual(original[i].value,
                                              reduced[i].value));
      }
      for (Index len = 0; len <= depth; ++len) {
        rep.markov_match_residuals.emplace_back(
            len, worst[static_cast<std::size_t>(len)]);
        if (len <= verify_depth &&
            !(worst[static_cast<std::size_t>(len)] <= opts.match_tol)) {
          throw ConsistencyError(
              "approach_two: switched moments of length " +
              std::to_string(len) + " deviate by " +
              std::to_string(static_cast<double>(
                  worst[static_cast<std::size_t>(len)])) +
              "; the projection basis is unsound");
        }
      }
    }
    rep.verified_markov_depth = verify_depth;
  }

  const auto t_cert = std::chrono::steady_clock::now();
  if (stable_inverse) {
    rep.certificate = certify_reduction(ls, *P, proj);
    rep.certificate_present = true;
  } else {
    rep.stability_note =
        hw.hurwitz
            ? "no certificate attached: reduction used the plain "
              "pseudoinverse"
            : "no certificate available: plant is not Hurwitz (spectral "
              "abscissa " +
                  std::to_string(hw.abscissa) + ")";
  }
  rep.timings.certify_seconds = detail::seconds_since(t_cert);
  return out;
}

template <typename Scalar>
PipelineResult<Scalar> run_approach(Approach approach,
                                    const SampledDataSystem<Scalar>& sd,
                                    const ReductionRequest& request,
                                    const PipelineOptions<Scalar>& opts = {}) {
  return approach == Approach::one ? approach_one(sd, request, opts)
                                   : approach_two(sd, request, opts);
}

}  // namespace samred
