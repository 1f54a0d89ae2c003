#pragma once

#include <string>
#include <type_traits>
#include <vector>

#include "samred/discretize.hpp"
#include "samred/mm_ls.hpp"

namespace samred {

/// Outcome of a quadratic-stability check. Margins are the raw values
/// lambda_max(A_i^T P A_i - P) per mode so callers can judge robustness;
/// a certificate requires every margin strictly negative and P > 0.
template <typename Scalar>
struct StabilityCertificate {
  bool certified = false;
  MatrixX<Scalar> P;             // symmetric candidate (certificate if valid)
  std::vector<Scalar> margins;   // lambda_max per mode
  Scalar p_min_eigenvalue = Scalar(0);
  Index failing_mode = -1;       // first offending mode when refuted
};

using StabilityCertificated = StabilityCertificate<double>;

/// Test a common quadratic Lyapunov candidate P against every mode:
/// certified iff P > 0 and A_i^T P A_i - P < 0 for all i.
template <typename Scalar>
StabilityCertificate<Scalar> check_quadratic_stability(
    const SwitchedLinear<Scalar>& sys,
    const std::type_identity_t<MatrixX<Scalar>>& P) {
  require_valid(sys, "check_quadratic_stability");
  detail::require_symmetric(P, "check_quadratic_stability: P");
  if (P.rows() != sys.order()) {
    throw DimensionError(
        "check_quadratic_stability: P order does not match the system");
  }
  StabilityCertificate<Scalar> cert;
  cert.P = symmetrize<Scalar>(P);

  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(cert.P,
                                                    Eigen::EigenvaluesOnly);
  cert.p_min_eigenvalue = es.eigenvalues().minCoeff();
  cert.certified = cert.p_min_eigenvalue > Scalar(0);

  cert.margins.reserve(sys.A.size());
  for (std::size_t i = 0; i < sys.A.size(); ++i) {
    const MatrixX<Scalar> S = symmetrize<Scalar>(
        (sys.A[i].transpose() * cert.P * sys.A[i] - cert.P).eval());
    const auto nd = is_negative_definite(S);
    cert.margins.push_back(nd.lambda_max);
    if (!nd.negative_definite && cert.failing_mode < 0) {
      cert.failing_mode = static_cast<Index>(i);
    }
  }
  if (cert.failing_mode >= 0) cert.certified = false;
  return cert;
}

/// Lyapunov candidate for a Hurwitz plant: the solution of
/// A^T P + P A = -I. Such a P certifies the discretized switched model of
/// the plant for every sampling grid, because x^T P x strictly decreases
/// along the continuous flow.
template <typename Scalar>
MatrixX<Scalar> lyapunov_from_plant(const ContinuousLti<Scalar>& plant) {
  require_valid(plant, "lyapunov_from_plant");
  const auto hw = is_hurwitz(plant);
  if (!hw.hurwitz) {
    throw NotHurwitzError(
        "lyapunov_from_plant: plant is not Hurwitz (spectral abscissa " +
            std::to_string(hw.abscissa) + ")",
        hw.abscissa);
  }
  const Index n = plant.order();
  return solve_continuous_lyapunov<Scalar>(
      plant.A, MatrixX<Scalar>::Identity(n, n));
}

/// The stability-preserving left inverse W = (V^T P V)^{-1} V^T P.
/// Satisfies W V = I and W P^{-1} W^T = (V^T P V)^{-1}.
template <typename Scalar>
MatrixX<Scalar> stability_preserving_left_inverse(
    const MatrixX<Scalar>& V, const std::type_identity_t<MatrixX<Scalar>>& P) {
  detail::require_finite(V, "stability_preserving_left_inverse: V");
  detail::require_symmetric(P, "stability_preserving_left_inverse: P");
  if (P.rows() != V.rows()) {
    throw DimensionError(
        "stability_preserving_left_inverse: P and V row counts differ");
  }
  if (V.cols() < 1 || V.cols() > V.rows()) {
    throw DimensionError(
        "stability_preserving_left_inverse: V must be tall with >= 1 column");
  }
  const MatrixX<Scalar> G = symmetrize<Scalar>((V.transpose() * P * V).eval());
  Eigen::LDLT<MatrixX<Scalar>> ldlt(G);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw ConditioningError(
        "stability_preserving_left_inverse: V^T P V is not positive "
        "definite; V is rank deficient or P is not a valid certificate");
  }
  const MatrixX<Scalar> W = ldlt.solve((V.transpose() * P).eval());
  const Scalar defect =
      (W * V - MatrixX<Scalar>::Identity(V.cols(), V.cols()))
          .cwiseAbs()
          .maxCoeff();
  if (!(defect <= Scalar(1e-8))) {
    throw ConditioningError(
        "stability_preserving_left_inverse: W V deviates from identity by " +
        std::to_string(static_cast<double>(defect)) +
        "; V^T P V is numerically singular");
  }
  return W;
}

/// Attach the stability-preserving inverse to an existing orthonormal basis.
template <typename Scalar>
ProjectionReduction<Scalar> projection_with_lyapunov_inverse(
    MatrixX<Scalar> V, const std::type_identity_t<MatrixX<Scalar>>& P,
    Index N) {
  ProjectionReduction<Scalar> proj;
  proj.r = V.cols();
  proj.N = N;
  proj.Vinv = stability_preserving_left_inverse<Scalar>(V, P);
  proj.V = std::move(V);
  proj.left_inverse_kind = LeftInverseKind::lyapunov_weighted;
  return proj;
}

/// Certify the reduction of a quadratically stable switched system. With
/// Vinv the stability-preserving inverse for P, Pbar = V^T P V certifies the
/// reduced system; a failed reduced margin is therefore a numerical
/// breakdown, reported as an error with the relevant condition numbers.
template <typename Scalar>
StabilityCertificate<Scalar> certify_reduction(
    const SwitchedLinear<Scalar>& original,
    const std::type_identity_t<MatrixX<Scalar>>& P,
    const ProjectionReduction<Scalar>& proj) {
  const auto original_cert = check_quadratic_stability(original, P);
  if (!original_cert.certified) {
    throw InputError(
        "certify_reduction: P does not certify the original system (mode " +
        std::to_string(original_cert.failing_mode) + " margin " +
        std::to_string(static_cast<double>(
            original_cert.failing_mode >= 0
                ? original_cert.margins[static_cast<std::size_t>(
                      original_cert.failing_mode)]
                : Scalar(0))) +
        ")");
  }
  {
    const MatrixX<Scalar> expected =
        stability_preserving_left_inverse<Scalar>(proj.V, P);
    const Scalar diff = (expected - proj.Vinv).cwiseAbs().maxCoeff();
    const Scalar scale = Scalar(1) + expected.cwiseAbs().maxCoeff();
    if (!(diff <= Scalar(1e-8) * scale)) {
      throw InputError(
          "certify_reduction: the projection does not carry the "
          "stability-preserving left inverse for this P");
    }
  }

  const SwitchedLinear<Scalar> reduced = reduce_ls(original, proj);
  const MatrixX<Scalar> Pbar =
      symmetrize<Scalar>((proj.V.transpose() * P * proj.V).eval());
  const auto reduced_cert = check_quadratic_stability(reduced, Pbar);
  if (!reduced_cert.certified) {
    const auto cond = [](const MatrixX<Scalar>& M) {
      Eigen::JacobiSVD<MatrixX<Scalar>> svd(M);
      const auto& sv = svd.singularValues();
      return sv(sv.size() - 1) > Scalar(0) ? sv(0) / sv(sv.size() - 1)
                                           : std::numeric_limits<Scalar>::infinity();
    };
    throw ConsistencyError(
        "certify_reduction: the reduced margins are not all negative even "
        "though the mathematics guarantees them; numerical breakdown "
        "(cond(P) = " + std::to_string(static_cast<double>(cond(P))) +
        ", cond(V^T P V) = " +
        std::to_string(static_cast<double>(cond(Pbar))) + ")");
  }
  return reduced_cert;
}

}  // namespace samred
