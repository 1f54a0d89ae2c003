#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "samred/core.hpp"

namespace samred {

namespace detail {

// Pade numerator coefficients for the [m/m] approximants used by expm.
template <typename Scalar>
const std::vector<Scalar>& pade_coefficients(int degree) {
  static const std::vector<Scalar> b3 = {120, 60, 12, 1};
  static const std::vector<Scalar> b5 = {30240, 15120, 3360, 420, 30, 1};
  static const std::vector<Scalar> b7 = {17297280, 8648640, 1995840, 277200,
                                         25200,    1512,    56,      1};
  static const std::vector<Scalar> b9 = {
      17643225600., 8821612800., 2075673600., 302702400., 30270240.,
      2162160.,     110880.,     3960.,       90.,        1.};
  static const std::vector<Scalar> b13 = {
      64764752532480000., 32382376266240000., 7771770303897600.,
      1187353796428800.,  129060195264000.,   10559470521600.,
      670442572800.,      33522128640.,       1323241920.,
      40840800.,          960960.,            16380.,
      182.,               1.};
  switch (degree) {
    case 3: return b3;
    case 5: return b5;
    case 7: return b7;
    case 9: return b9;
    default: return b13;
  }
}

// Evaluate the degree-m diagonal Pade approximant of exp(M).
template <typename Scalar>
MatrixX<Scalar> pade_approximant(const MatrixX<Scalar>& M, int degree) {
  const Index n = M.rows();
  const auto& b = pade_coefficients<Scalar>(degree);
  const MatrixX<Scalar> id = MatrixX<Scalar>::Identity(n, n);

  MatrixX<Scalar> U(n, n), V(n, n);
  if (degree == 13) {
    const MatrixX<Scalar> M2 = M * M;
    const MatrixX<Scalar> M4 = M2 * M2;
    const MatrixX<Scalar> M6 = M2 * M4;
    U = M * (M6 * (b[13] * M6 + b[11] * M4 + b[9] * M2) + b[7] * M6 +
             b[5] * M4 + b[3] * M2 + b[1] * id);
    V = M6 * (b[12] * M6 + b[10] * M4 + b[8] * M2) + b[6] * M6 + b[4] * M4 +
        b[2] * M2 + b[0] * id;
  } else {
    const MatrixX<Scalar> M2 = M * M;
    MatrixX<Scalar> Modd = id;  // M^0, then M^2, M^4, ...
    U.setZero();
    V.setZero();
    for (int j = 0; 2 * j + 1 <= degree; ++j) {
      V += b[2 * j] * Modd;
      U += b[2 * j + 1] * Modd;
      if (2 * j + 2 <= degree) Modd = (Modd * M2).eval();
    }
    U = (M * U).eval();
  }
  // exp(M) ~ (V - U)^{-1} (V + U)
  return (V - U).partialPivLu().solve(V + U);
}

}  // namespace detail

/// Matrix exponential e^{A t} by scaling-and-squaring with diagonal Pade
/// approximants (degrees 3/5/7/9/13 selected from the 1-norm of A t).
template <typename Scalar>
MatrixX<Scalar> expm(const MatrixX<Scalar>& A, Scalar t = Scalar(1)) {
  detail::require_square(A, "expm");
  detail::require_finite(A, "expm");
  if (!(t >= Scalar(0)) || !std::isfinite(static_cast<double>(t))) {
    throw InputError("expm: time must be finite and nonnegative, got " +
                     std::to_string(static_cast<double>(t)));
  }
  const Index n = A.rows();
  if (n == 0) return MatrixX<Scalar>(0, 0);

  MatrixX<Scalar> M = A * t;
  const double norm1 =
      static_cast<double>(M.cwiseAbs().colwise().sum().maxCoeff());

  // 1-norm thresholds for double precision (Higham 2005).
  constexpr double theta3 = 1.495585217958292e-2;
  constexpr double theta5 = 2.539398330063230e-1;
  constexpr double theta7 = 9.504178996162932e-1;
  constexpr double theta9 = 2.097847961257068e0;
  constexpr double theta13 = 5.371920351148152e0;

  if (norm1 <= theta3) return detail::pade_approximant(M, 3);
  if (norm1 <= theta5) return detail::pade_approximant(M, 5);
  if (norm1 <= theta7) return detail::pade_approximant(M, 7);
  if (norm1 <= theta9) return detail::pade_approximant(M, 9);

  int squarings = 0;
  if (norm1 > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    M /= Scalar(std::pow(2.0, squarings));
  }
  MatrixX<Scalar> E = detail::pade_approximant(M, 13);
  for (int i = 0; i < squarings; ++i) E = (E * E).eval();
  return E;
}

/// ZOH integral Theta(h) = integral of e^{A s} ds over [0, h], computed from
/// one exponential of the augmented block matrix [[A, I], [0, 0]] * h whose
/// top-right block is exactly Theta(h). Valid for singular A.
template <typename Scalar>
MatrixX<Scalar> zoh_integral(const MatrixX<Scalar>& A, Scalar h) {
  detail::require_square(A, "zoh_integral");
  detail::require_finite(A, "zoh_integral");
  if (!(h >= Scalar(0)) || !std::isfinite(static_cast<double>(h))) {
    throw InputError("zoh_integral: interval must be finite and nonnegative");
  }
  const Index n = A.rows();
  MatrixX<Scalar> aug = MatrixX<Scalar>::Zero(2 * n, 2 * n);
  aug.topLeftCorner(n, n) = A;
  aug.topRightCorner(n, n) = MatrixX<Scalar>::Identity(n, n);
  return expm<Scalar>(aug, h).topRightCorner(n, n);
}

/// Orthonormal basis of the numerical column space of M. Columns kept are
/// those whose singular value exceeds rank_tol * sigma_max. A zero (or empty)
/// M yields an n x 0 result; the caller decides whether that is an error.
template <typename Scalar>
MatrixX<Scalar> orthonormal_range(const MatrixX<Scalar>& M, Scalar rank_tol) {
  detail::require_finite(M, "orthonormal_range");
  if (!(rank_tol > Scalar(0) && rank_tol < Scalar(1))) {
    throw InputError("orthonormal_range: rank_tol must lie in (0, 1)");
  }
  if (M.cols() == 0) return MatrixX<Scalar>(M.rows(), 0);
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(M, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= Scalar(0)) return MatrixX<Scalar>(M.rows(), 0);
  Index r = 0;
  while (r < sv.size() && sv(r) > rank_tol * sv(0)) ++r;
  return svd.matrixU().leftCols(r);
}

/// Default relative rank tolerance shared by every rank decision in the
/// library; configurable per call.
inline constexpr double kDefaultRankTol = 1e-9;

/// Spectral abscissa (max real part of the eigenvalues) of a square matrix.
template <typename Scalar>
double spectral_abscissa(const MatrixX<Scalar>& A) {
  detail::require_square(A, "spectral_abscissa");
  detail::require_finite(A, "spectral_abscissa");
  if (A.rows() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<MatrixX<Scalar>> es(A, false);
  return static_cast<double>(es.eigenvalues().real().maxCoeff());
}

/// Solve A^T P + P A = -Q for symmetric positive definite Q and Hurwitz A.
/// Bartels-Stewart via the complex Schur form of A^T; O(n^3), adequate for
/// the dense desk-scale systems this library targets.
template <typename Scalar>
MatrixX<Scalar> solve_continuous_lyapunov(const MatrixX<Scalar>& A,
                                          const MatrixX<Scalar>& Q) {
  detail::require_square(A, "solve_continuous_lyapunov: A");
  detail::require_finite(A, "solve_continuous_lyapunov: A");
  detail::require_symmetric(Q, "solve_continuous_lyapunov: Q");
  if (A.rows() != Q.rows()) {
    throw DimensionError("solve_continuous_lyapunov: A and Q orders differ");
  }
  const Index n = A.rows();
  if (n == 0) return MatrixX<Scalar>(0, 0);

  {
    Eigen::LLT<MatrixX<Scalar>> llt(symmetrize<Scalar>(Q));
    if (llt.info() != Eigen::Success) {
      throw InputError(
          "solve_continuous_lyapunov: Q is not positive definite");
    }
  }

  using Complex = std::complex<Scalar>;
  using MatrixXc = MatrixX<Complex>;

  // With S = A^T the equation reads S P + P S^T = -Q.
  const MatrixX<Scalar> S = A.transpose();
  Eigen::ComplexSchur<MatrixX<Scalar>> schur(S);
  if (schur.info() != Eigen::Success) {
    throw ConsistencyError("solve_continuous_lyapunov: Schur iteration failed");
  }
  const MatrixXc& T = schur.matrixT();
  const MatrixXc& U = schur.matrixU();

  double worst = -std::numeric_limits<double>::infinity();
  for (Index k = 0; k < n; ++k) {
    worst = std::max(worst, static_cast<double>(T(k, k).real()));
  }
  if (!(worst < 0.0)) {
    throw NotHurwitzError(
        "solve_continuous_lyapunov: A is not Hurwitz (spectral abscissa " +
            std::to_string(worst) + ")",
        worst);
  }

  // T Y + Y T^H = -U^H Q U, solved column by column from the last.
  const MatrixXc C = U.adjoint() * Q.template cast<Complex>() * U;
  MatrixXc Y = MatrixXc::Zero(n, n);
  for (Index k = n - 1; k >= 0; --k) {
    VectorX<Complex> rhs = -C.col(k);
    for (Index j = k + 1; j < n; ++j) rhs -= std::conj(T(k, j)) * Y.col(j);
    MatrixXc lhs = T;
    lhs.diagonal().array() += std::conj(T(k, k));
    Y.col(k) = lhs.template triangularView<Eigen::Upper>().solve(rhs);
  }
  MatrixX<Scalar> P = (U * Y * U.adjoint()).real();
  P = symmetrize<Scalar>(P);

  const Scalar qscale = Q.cwiseAbs().maxCoeff();
  const Scalar residual =
      (A.transpose() * P + P * A + Q).cwiseAbs().maxCoeff();
  if (!(residual <= Scalar(1e-8) * qscale)) {
    throw ConsistencyError(
        "solve_continuous_lyapunov: residual " +
        std::to_string(static_cast<double>(residual)) +
        " exceeds tolerance; the problem is too ill-conditioned");
  }
  return P;
}

/// Strict negative-definiteness test with the largest eigenvalue as witness.
template <typename Scalar>
struct DefinitenessResult {
  bool negative_definite;
  Scalar lambda_max;
};

template <typename Scalar>
Scalar default_margin_tol(const MatrixX<Scalar>& S) {
  const Scalar scale = S.size() == 0 ? Scalar(0) : S.cwiseAbs().maxCoeff();
  return Scalar(1e-10) * (Scalar(1) + scale);
}

template <typename Scalar>
DefinitenessResult<Scalar> is_negative_definite(const MatrixX<Scalar>& S,
                                                Scalar margin_tol) {
  detail::require_symmetric(S, "is_negative_definite");
  if (S.rows() == 0) {
    return {true, -std::numeric_limits<Scalar>::infinity()};
  }
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(symmetrize<Scalar>(S),
                                                    Eigen::EigenvaluesOnly);
  const Scalar lambda_max = es.eigenvalues().maxCoeff();
  return {lambda_max < -margin_tol, lambda_max};
}

template <typename Scalar>
DefinitenessResult<Scalar> is_negative_definite(const MatrixX<Scalar>& S) {
  return is_negative_definite(S, default_margin_tol(S));
}

}  // namespace samred
