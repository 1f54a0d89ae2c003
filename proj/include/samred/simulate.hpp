#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "samred/systems.hpp"

namespace samred {

/// Mode choices sigma_0 ... sigma_K (0-based mode indices).
struct SwitchingSequence {
  std::vector<Index> values;

  Index steps() const { return static_cast<Index>(values.size()); }
};

/// Inputs u_0 ... u_K, one m-vector per step.
template <typename Scalar>
struct InputSequence {
  std::vector<VectorX<Scalar>> values;

  Index steps() const { return static_cast<Index>(values.size()); }
};

/// Sampled trajectory: instants t_0 ... t_K (t_0 = 0), outputs y_0 ... y_K,
/// and optionally the states that produced them.
template <typename Scalar>
struct OutputTrace {
  std::vector<Scalar> instants;
  std::vector<VectorX<Scalar>> outputs;
  std::vector<VectorX<Scalar>> states;  // retained only on request

  Index length() const { return static_cast<Index>(outputs.size()); }
};

using InputSequenced = InputSequence<double>;
using OutputTraced = OutputTrace<double>;

/// Run the switched recursion x_{k+1} = A_{sigma_k} x_k + B_{sigma_k} u_k,
/// y_k = C x_k, from x0 (zero by default). The grid supplies the physical
/// instants t_{k+1} = t_k + h_{sigma_k}; pass an empty grid to get unit
/// spacing. The final input/switch entries pad the |u| = |sigma| contract
/// and do not influence any emitted output.
template <typename Scalar>
OutputTrace<Scalar> simulate_ls(const SwitchedLinear<Scalar>& sys,
                                const InputSequence<Scalar>& u,
                                const SwitchingSequence& sigma,
                                const VectorX<Scalar>& x0,
                                const SamplingGrid<Scalar>& grid = {},
                                bool keep_states = false) {
  require_valid(sys, "simulate_ls");
  if (u.steps() != sigma.steps()) {
    throw DimensionError("simulate_ls: |u| = " + std::to_string(u.steps()) +
                         " but |sigma| = " + std::to_string(sigma.steps()));
  }
  if (u.steps() == 0) throw InputError("simulate_ls: empty sequences");
  const Index n = sys.order();
  const Index m = sys.inputs();
  const Index d = sys.mode_count();
  if (x0.size() != n) {
    throw DimensionError("simulate_ls: x0 has size " +
                         std::to_string(x0.size()) + ", expected " +
                         std::to_string(n));
  }
  if (grid.size() != 0 && grid.size() != d) {
    throw DimensionError("simulate_ls: grid size does not match mode count");
  }

  const Index K = u.steps() - 1;
  OutputTrace<Scalar> trace;
  trace.instants.resize(static_cast<std::size_t>(K) + 1);
  trace.outputs.resize(static_cast<std::size_t>(K) + 1);
  if (keep_states) trace.states.resize(static_cast<std::size_t>(K) + 1);

  VectorX<Scalar> x = x0;
  Scalar t = Scalar(0);
  for (Index k = 0; k <= K; ++k) {
    trace.instants[static_cast<std::size_t>(k)] = t;
    trace.outputs[static_cast<std::size_t>(k)] = sys.C * x;
    if (keep_states) trace.states[static_cast<std::size_t>(k)] = x;
    if (k == K) break;
    const Index i = sigma.values[static_cast<std::size_t>(k)];
    if (i < 0 || i >= d) {
      throw InputError("simulate_ls: mode index " + std::to_string(i) +
                       " out of range [0, " + std::to_string(d) + ")");
    }
    const VectorX<Scalar>& uk = u.values[static_cast<std::size_t>(k)];
    if (uk.size() != m) {
      throw DimensionError("simulate_ls: input " + std::to_string(k) +
                           " has size " + std::to_string(uk.size()));
    }
    x = sys.A[static_cast<std::size_t>(i)] * x +
        sys.B[static_cast<std::size_t>(i)] * uk;
    t += grid.size() ? grid[i] : Scalar(1);
  }
  return trace;
}

template <typename Scalar>
OutputTrace<Scalar> simulate_ls(const SwitchedLinear<Scalar>& sys,
                                const InputSequence<Scalar>& u,
                                const SwitchingSequence& sigma) {
  return simulate_ls(sys, u, sigma, VectorX<Scalar>::Zero(sys.order()).eval());
}

/// Deterministic random stream for campaigns. mt19937_64 is fully specified
/// by the standard; uniforms and normals are derived from its raw output by
/// fixed arithmetic (53-bit shift, Box-Muller), so identical seeds give
/// identical sequences on every platform and build.
class CampaignRng {
 public:
  explicit CampaignRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (pairs cached).
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    constexpr double two_pi = 6.283185307179586476925286766559;
    spare_ = radius * std::sin(two_pi * u2);
    have_spare_ = true;
    return radius * std::cos(two_pi * u2);
  }

  /// Uniform mode index in [0, d).
  Index uniform_index(Index d) {
    const double u = uniform01();
    Index i = static_cast<Index>(u * static_cast<double>(d));
    return i >= d ? d - 1 : i;
  }

  /// Independent stream for trial `k` of a campaign seeded with `seed`:
  /// splitmix64 applied to (seed, k) so streams never overlap in practice.
  static CampaignRng stream(std::uint64_t seed, std::uint64_t k) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return CampaignRng(z ^ (z >> 31));
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Draw switching choices until the cumulative sampled time first reaches
/// T_total; returns the drawn indices (size K) and leaves K to the caller
/// as their size.
template <typename Scalar>
std::vector<Index> draw_switching_until(const SamplingGrid<Scalar>& grid,
                                        Scalar T_total, CampaignRng& rng) {
  if (!(T_total > Scalar(0))) {
    throw InputError("draw_switching_until: horizon must be positive");
  }
  std::vector<Index> sigma;
  Scalar t = Scalar(0);
  while (t < T_total) {
    const Index i = rng.uniform_index(grid.size());
    sigma.push_back(i);
    t += grid[i];
  }
  return sigma;
}

/// Number of steps a switching draw needs to cover [0, T_total].
template <typename Scalar>
Index horizon_to_length(const SamplingGrid<Scalar>& grid, Scalar T_total,
                        CampaignRng& rng) {
  return static_cast<Index>(draw_switching_until(grid, T_total, rng).size());
}

/// One trial's worth of stimulus: equal-length input and switching
/// sequences (trials always pair them with equal lengths).
template <typename Scalar>
struct TrialSequences {
  InputSequence<Scalar> input;
  SwitchingSequence switching;
};

/// Generate `count` independent (input, switching) pairs: inputs i.i.d.
/// standard normal per coordinate, switching i.i.d. uniform over the modes.
/// Each sequence carries K+1 entries. Fully determined by (seed, pair index).
template <typename Scalar>
std::vector<TrialSequences<Scalar>> generate_campaign_sequences(
    std::uint64_t seed, Index K, Index mode_count, Index input_dim,
    Index count) {
  if (count < 1) throw InputError("generate_campaign_sequences: count < 1");
  if (K < 0 || mode_count < 1 || input_dim < 1) {
    throw InputError("generate_campaign_sequences: bad shape arguments");
  }
  std::vector<TrialSequences<Scalar>> out;
  out.reserve(static_cast<std::size_t>(count));
  for (Index c = 0; c < count; ++c) {
    CampaignRng rng = CampaignRng::stream(seed, static_cast<std::uint64_t>(c));
    TrialSequences<Scalar> trial;
    trial.switching.values.resize(static_cast<std::size_t>(K) + 1);
    for (auto& s : trial.switching.values) s = rng.uniform_index(mode_count);
    trial.input.values.resize(static_cast<std::size_t>(K) + 1);
    for (auto& u : trial.input.values) {
      u.resize(input_dim);
      for (Index j = 0; j < input_dim; ++j) {
        u(j) = static_cast<Scalar>(rng.gaussian());
      }
    }
    out.push_back(std::move(trial));
  }
  return out;
}

/// Best fit rate in percent:
///   BFR = 100 * max(1 - sqrt(sum ||y_k - ybar_k||^2) /
///                       sqrt(sum ||y_k - y_mean||^2), 0).
/// A constant reference trace has zero denominator and no defined BFR.
template <typename Scalar>
Scalar bfr(const OutputTrace<Scalar>& y, const OutputTrace<Scalar>& ybar) {
  if (y.length() != ybar.length()) {
    throw DimensionError("bfr: traces have different lengths");
  }
  if (y.length() == 0) throw InputError("bfr: empty traces");
  const Index p = y.outputs.front().size();

  VectorX<Scalar> mean = VectorX<Scalar>::Zero(p);
  for (const auto& yk : y.outputs) {
    if (yk.size() != p) throw DimensionError("bfr: ragged reference trace");
    mean += yk;
  }
  mean /= static_cast<Scalar>(y.length());

  Scalar num = Scalar(0), den = Scalar(0);
  for (Index k = 0; k < y.length(); ++k) {
    const auto& yk = y.outputs[static_cast<std::size_t>(k)];
    const auto& bk = ybar.outputs[static_cast<std::size_t>(k)];
    if (bk.size() != p) throw DimensionError("bfr: ragged candidate trace");
    num += (yk - bk).squaredNorm();
    den += (yk - mean).squaredNorm();
  }
  if (!(den > Scalar(0))) {
    throw BfrUndefinedError(
        "bfr: reference trace is constant, denominator is zero");
  }
  const Scalar ratio = std::sqrt(num) / std::sqrt(den);
  return Scalar(100) * std::max(Scalar(1) - ratio, Scalar(0));
}

}  // namespace samred
