#pragma once

#include <string>

#include "samred/systems.hpp"

namespace samred {

/// Exact ZOH step matrices over one interval h:
///   Phi(h) = e^{A h} = I + A Theta(h),   Gamma(h) = Theta(h) B.
/// Both Phi formulas are evaluated from a single augmented exponential; their
/// disagreement is returned as `phi_identity_residual` and treated as a hard
/// error above 1e-10 * (1 + max|Phi|), since it can only mean the exponential
/// itself is inaccurate.
template <typename Scalar>
struct StepMatrices {
  MatrixX<Scalar> Phi;    // n x n
  MatrixX<Scalar> Gamma;  // n x m
  Scalar phi_identity_residual;
};

template <typename Scalar>
StepMatrices<Scalar> step_matrices(const ContinuousLti<Scalar>& plant,
                                   Scalar h) {
  require_valid(plant, "step_matrices");
  if (!(h > Scalar(0))) {
    throw InputError("step_matrices: interval must be positive");
  }
  const Index n = plant.order();

  // expm([[A, I], [0, 0]] h) = [[e^{A h}, Theta(h)], [0, I]].
  MatrixX<Scalar> aug = MatrixX<Scalar>::Zero(2 * n, 2 * n);
  aug.topLeftCorner(n, n) = plant.A;
  aug.topRightCorner(n, n) = MatrixX<Scalar>::Identity(n, n);
  const MatrixX<Scalar> E = expm<Scalar>(aug, h);

  StepMatrices<Scalar> out;
  out.Phi = E.topLeftCorner(n, n);
  const MatrixX<Scalar> theta = E.topRightCorner(n, n);
  out.Gamma = theta * plant.B;

  const MatrixX<Scalar> phi_from_theta =
      MatrixX<Scalar>::Identity(n, n) + plant.A * theta;
  out.phi_identity_residual =
      (out.Phi - phi_from_theta).cwiseAbs().maxCoeff();
  const Scalar scale = Scalar(1) + out.Phi.cwiseAbs().maxCoeff();
  if (!(out.phi_identity_residual <= Scalar(1e-10) * scale)) {
    throw ConsistencyError(
        "step_matrices: the two Phi formulas disagree by " +
        std::to_string(static_cast<double>(out.phi_identity_residual)) +
        " at h = " + std::to_string(static_cast<double>(h)));
  }
  return out;
}

/// Discretize a sampled-data system into its switched model: one mode per
/// grid interval, in sorted grid order, read-out map shared.
template <typename Scalar>
SwitchedLinear<Scalar> build_switched_model(
    const SampledDataSystem<Scalar>& sd) {
  require_valid(sd, "build_switched_model");
  SwitchedLinear<Scalar> ls;
  ls.C = sd.plant.C;
  ls.A.reserve(static_cast<std::size_t>(sd.grid.size()));
  ls.B.reserve(static_cast<std::size_t>(sd.grid.size()));
  for (Index i = 0; i < sd.grid.size(); ++i) {
    StepMatrices<Scalar> sm = step_matrices(sd.plant, sd.grid[i]);
    ls.A.push_back(std::move(sm.Phi));
    ls.B.push_back(std::move(sm.Gamma));
  }
  return ls;
}

/// Largest Phi-identity residual across the grid, for reporting.
template <typename Scalar>
Scalar discretization_self_check(const SampledDataSystem<Scalar>& sd) {
  Scalar worst = Scalar(0);
  for (Index i = 0; i < sd.grid.size(); ++i) {
    worst = std::max(worst, step_matrices(sd.plant, sd.grid[i])
                                .phi_identity_residual);
  }
  return worst;
}

}  // namespace samred
