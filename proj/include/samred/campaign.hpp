#pragma once

#include <array>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "samred/pipelines.hpp"
#include "samred/simulate.hpp"

namespace samred {

/// Thread count for campaign trials: explicit argument wins, then the
/// SAMRED_THREADS environment variable, then the hardware concurrency.
/// The result never affects campaign output, only wall-clock time.
inline int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SAMRED_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

/// Per-candidate campaign statistics.
template <typename Scalar>
struct CampaignModelStats {
  std::string name;
  std::vector<Scalar> bfrs;  // one per trial, in trial order
  Scalar mean_bfr = Scalar(0);
  Scalar best_bfr = Scalar(0);
  Scalar worst_bfr = Scalar(0);
  Index representative_trial = 0;  // BFR closest to the mean
  // max over trials of ||y_k - ybar_k|| / (1 + ||y_k||), indexed by k
  std::vector<Scalar> max_relative_deviation;
};

/// Outcome of simulating the original model against two candidates on
/// `count` shared stimulus pairs.
template <typename Scalar>
struct CampaignResult {
  Index count = 0;
  std::uint64_t seed = 0;
  Scalar horizon = Scalar(0);
  std::vector<Index> trial_steps;  // K per trial (entries are K+1)
  Index overflow_trials = 0;       // trials with an output beyond 1e12
  std::array<CampaignModelStats<Scalar>, 2> models;
};

namespace detail {

/// The stimulus of one campaign trial, fully determined by (seed, trial).
/// The switching draw covers the horizon in K steps; one padding entry
/// keeps |u| = |sigma| = K + 1. Switching is drawn before the inputs.
template <typename Scalar>
TrialSequences<Scalar> campaign_trial_sequences(std::uint64_t seed,
                                                Index trial,
                                                const SamplingGrid<Scalar>& grid,
                                                Scalar horizon,
                                                Index input_dim) {
  CampaignRng rng = CampaignRng::stream(seed, static_cast<std::uint64_t>(trial));
  TrialSequences<Scalar> seqs;
  seqs.switching.values = draw_switching_until(grid, horizon, rng);
  seqs.switching.values.push_back(rng.uniform_index(grid.size()));
  const std::size_t entries = seqs.switching.values.size();
  seqs.input.values.resize(entries);
  for (auto& u : seqs.input.values) {
    u.resize(input_dim);
    for (Index j = 0; j < input_dim; ++j) {
      u(j) = static_cast<Scalar>(rng.gaussian());
    }
  }
  return seqs;
}

}  // namespace detail

/// Simulate the original switched model and two candidates on identical
/// (input, switching) pairs and score every candidate with the BFR. Trials
/// run in parallel; results are merged in trial order, so the outcome is
/// byte-identical for any thread count.
template <typename Scalar>
CampaignResult<Scalar> compare_models_campaign(
    const SwitchedLinear<Scalar>& original,
    const SwitchedLinear<Scalar>& candidate_a,
    const SwitchedLinear<Scalar>& candidate_b, const SamplingGrid<Scalar>& grid,
    Index count, std::uint64_t seed, Scalar horizon, int threads = 0) {
  require_valid(original, "compare_models_campaign");
  require_valid(candidate_a, "compare_models_campaign");
  require_valid(candidate_b, "compare_models_campaign");
  if (count < 1) throw InputError("compare_models_campaign: count < 1");
  if (grid.size() != original.mode_count()) {
    throw DimensionError(
        "compare_models_campaign: grid does not match the mode count");
  }
  for (const SwitchedLinear<Scalar>* cand : {&candidate_a, &candidate_b}) {
    if (cand->mode_count() != original.mode_count() ||
        cand->inputs() != original.inputs() ||
        cand->outputs() != original.outputs()) {
      throw DimensionError(
          "compare_models_campaign: candidate does not share (D, m, p) with "
          "the original");
    }
  }

  struct TrialOutcome {
    Index steps = 0;
    bool overflow = false;
    std::array<Scalar, 2> bfr{};
    std::array<std::vector<Scalar>, 2> deviation;
  };
  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(count));

  const std::array<const SwitchedLinear<Scalar>*, 2> candidates = {
      &candidate_a, &candidate_b};
  constexpr Scalar overflow_limit = Scalar(1e12);

  auto run_trial = [&](Index t) {
    const auto seqs = detail::campaign_trial_sequences<Scalar>(
        seed, t, grid, horizon, original.inputs());
    TrialOutcome& outcome = outcomes[static_cast<std::size_t>(t)];
    outcome.steps = seqs.switching.steps() - 1;

    const auto y = simulate_ls(original, seqs.input, seqs.switching,
                               VectorX<Scalar>::Zero(original.order()).eval(),
                               grid);
    for (const auto& yk : y.outputs) {
      if (yk.cwiseAbs().maxCoeff() > overflow_limit) outcome.overflow = true;
    }
    for (int c = 0; c < 2; ++c) {
      const auto ybar = simulate_ls(
          *candidates[static_cast<std::size_t>(c)], seqs.input, seqs.switching,
          VectorX<Scalar>::Zero(candidates[static_cast<std::size_t>(c)]->order())
              .eval(),
          grid);
      outcome.bfr[static_cast<std::size_t>(c)] = bfr(y, ybar);
      auto& dev = outcome.deviation[static_cast<std::size_t>(c)];
      dev.resize(y.outputs.size());
      for (std::size_t k = 0; k < y.outputs.size(); ++k) {
        dev[k] = (y.outputs[k] - ybar.outputs[k]).norm() /
                 (Scalar(1) + y.outputs[k].norm());
        if (ybar.outputs[k].cwiseAbs().maxCoeff() > overflow_limit) {
          outcome.overflow = true;
        }
      }
    }
  };

  const int workers = std::min<int>(resolve_thread_count(threads),
                                    static_cast<int>(count));
  if (workers <= 1) {
    for (Index t = 0; t < count; ++t) run_trial(t);
  } else {
    std::atomic<Index> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (Index t = next.fetch_add(1); t < count; t = next.fetch_add(1)) {
          run_trial(t);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  CampaignResult<Scalar> result;
  result.count = count;
  result.seed = seed;
  result.horizon = horizon;
  result.trial_steps.reserve(static_cast<std::size_t>(count));
  for (const auto& o : outcomes) {
    result.trial_steps.push_back(o.steps);
    if (o.overflow) ++result.overflow_trials;
  }
  for (int c = 0; c < 2; ++c) {
    auto& stats = result.models[static_cast<std::size_t>(c)];
    stats.bfrs.reserve(static_cast<std::size_t>(count));
    Scalar sum = Scalar(0);
    for (const auto& o : outcomes) {
      stats.bfrs.push_back(o.bfr[static_cast<std::size_t>(c)]);
      sum += o.bfr[static_cast<std::size_t>(c)];
    }
    stats.mean_bfr = sum / static_cast<Scalar>(count);
    stats.best_bfr = stats.bfrs.front();
    stats.worst_bfr = stats.bfrs.front();
    for (const Scalar b : stats.bfrs) {
      stats.best_bfr = std::max(stats.best_bfr, b);
      stats.worst_bfr = std::min(stats.worst_bfr, b);
    }
    Index rep = 0;
    Scalar rep_dist = std::abs(stats.bfrs.front() - stats.mean_bfr);
    for (Index t = 1; t < count; ++t) {
      const Scalar dist =
          std::abs(stats.bfrs[static_cast<std::size_t>(t)] - stats.mean_bfr);
      if (dist < rep_dist) {
        rep = t;
        rep_dist = dist;
      }
    }
    stats.representative_trial = rep;
    for (const auto& o : outcomes) {
      const auto& dev = o.deviation[static_cast<std::size_t>(c)];
      if (dev.size() > stats.max_relative_deviation.size()) {
        stats.max_relative_deviation.resize(dev.size(), Scalar(0));
      }
      for (std::size_t k = 0; k < dev.size(); ++k) {
        stats.max_relative_deviation[k] =
            std::max(stats.max_relative_deviation[k], dev[k]);
      }
    }
  }
  return result;
}

/// Re-simulate one trial and return the three traces (original and both
/// candidates); used to extract representative-trial traces after the
/// statistics are known. Deterministic by construction.
template <typename Scalar>
struct TrialTraces {
  Index trial = 0;
  OutputTrace<Scalar> original;
  std::array<OutputTrace<Scalar>, 2> candidates;
};

template <typename Scalar>
TrialTraces<Scalar> replay_campaign_trial(
    const SwitchedLinear<Scalar>& original,
    const SwitchedLinear<Scalar>& candidate_a,
    const SwitchedLinear<Scalar>& candidate_b, const SamplingGrid<Scalar>& grid,
    std::uint64_t seed, Scalar horizon, Index trial) {
  const auto seqs = detail::campaign_trial_sequences<Scalar>(
      seed, trial, grid, horizon, original.inputs());
  TrialTraces<Scalar> traces;
  traces.trial = trial;
  traces.original =
      simulate_ls(original, seqs.input, seqs.switching,
                  VectorX<Scalar>::Zero(original.order()).eval(), grid);
  traces.candidates[0] =
      simulate_ls(candidate_a, seqs.input, seqs.switching,
                  VectorX<Scalar>::Zero(candidate_a.order()).eval(), grid);
  traces.candidates[1] =
      simulate_ls(candidate_b, seqs.input, seqs.switching,
                  VectorX<Scalar>::Zero(candidate_b.order()).eval(), grid);
  return traces;
}

/// Full comparison campaign over both reduction approaches: reduce once,
/// then score both reduced models on `count` shared stimulus pairs.
template <typename Scalar>
struct ComparisonCampaignReport {
  CampaignResult<Scalar> comparison;
  ReductionReport<Scalar> approach_one_report;
  ReductionReport<Scalar> approach_two_report;
  // Horizon guarantee for the approach-2 reduction: max deviation over
  // trials for k <= N, against the 1e-7 relative tolerance.
  bool approach2_horizon_ok = false;
  Scalar approach2_horizon_max_dev = Scalar(0);
};

template <typename Scalar>
struct ComparisonCampaignOutput {
  ComparisonCampaignReport<Scalar> report;
  SwitchedLinear<Scalar> original_ls;
  SwitchedLinear<Scalar> reduced_one;
  SwitchedLinear<Scalar> reduced_two;
};

template <typename Scalar>
ComparisonCampaignOutput<Scalar> run_comparison_campaign(
    const SampledDataSystem<Scalar>& sd, const ReductionRequest& request,
    Index count, std::uint64_t seed, Scalar horizon,
    const PipelineOptions<Scalar>& opts = {}, int threads = 0) {
  require_valid(sd, "run_comparison_campaign");

  ComparisonCampaignOutput<Scalar> out;
  out.original_ls = build_switched_model(sd);

  auto one = approach_one(sd, request, opts);
  auto two = approach_two(sd, request, opts);
  out.reduced_one = std::move(one.reduced_ls);
  out.reduced_two = std::move(two.reduced_ls);
  out.report.approach_one_report = std::move(one.report);
  out.report.approach_two_report = std::move(two.report);

  out.report.comparison =
      compare_models_campaign(out.original_ls, out.reduced_one, out.reduced_two,
                              sd.grid, count, seed, horizon, threads);

  const auto& dev2 = out.report.comparison.models[1].max_relative_deviation;
  const Index N2 = out.report.approach_two_report.N;
  Scalar worst = Scalar(0);
  for (Index k = 0; k <= N2 && k < static_cast<Index>(dev2.size()); ++k) {
    worst = std::max(worst, dev2[static_cast<std::size_t>(k)]);
  }
  out.report.approach2_horizon_max_dev = worst;
  out.report.approach2_horizon_ok = worst <= Scalar(1e-7);
  return out;
}

}  // namespace samred
