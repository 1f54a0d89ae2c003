#pragma once

#include <complex>
#include <string>
#include <vector>

#include "samred/simulate.hpp"
#include "samred/systems.hpp"

namespace samred {

/// Haar-like random orthogonal matrix: QR of a Gaussian matrix with the
/// sign convention diag(R) > 0, so the draw is deterministic in the stream.
template <typename Scalar>
MatrixX<Scalar> random_orthogonal(Index n, CampaignRng& rng) {
  MatrixX<Scalar> G(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) G(i, j) = static_cast<Scalar>(rng.gaussian());
  }
  Eigen::HouseholderQR<MatrixX<Scalar>> qr(G);
  MatrixX<Scalar> Q = qr.householderQ() * MatrixX<Scalar>::Identity(n, n);
  const MatrixX<Scalar> R =
      qr.matrixQR().template triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    if (R(j, j) < Scalar(0)) Q.col(j) = -Q.col(j);
  }
  return Q;
}

template <typename Scalar>
MatrixX<Scalar> random_gaussian(Index rows, Index cols, CampaignRng& rng) {
  MatrixX<Scalar> M(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) M(i, j) = static_cast<Scalar>(rng.gaussian());
  }
  return M;
}

/// Build a plant with the prescribed spectrum: block-diagonal real form
/// (1x1 blocks for real eigenvalues, [[a, b], [-b, a]] for conjugate pairs)
/// conjugated by a random orthogonal similarity; B and C are Gaussian.
/// The spectrum must be closed under conjugation.
template <typename Scalar>
ContinuousLti<Scalar> plant_from_spectrum(
    const std::vector<std::complex<double>>& spectrum, Index inputs,
    Index outputs, CampaignRng& rng) {
  const Index n = static_cast<Index>(spectrum.size());
  if (n < 1) throw InputError("plant_from_spectrum: empty spectrum");

  std::vector<std::complex<double>> pending = spectrum;
  MatrixX<Scalar> D = MatrixX<Scalar>::Zero(n, n);
  Index at = 0;
  constexpr double imag_tol = 1e-12;
  while (!pending.empty()) {
    const std::complex<double> ev = pending.front();
    pending.erase(pending.begin());
    if (std::abs(ev.imag()) <= imag_tol) {
      D(at, at) = static_cast<Scalar>(ev.real());
      at += 1;
      continue;
    }
    auto mate = pending.end();
    for (auto it = pending.begin(); it != pending.end(); ++it) {
      if (std::abs(it->real() - ev.real()) <= imag_tol &&
          std::abs(it->imag() + ev.imag()) <= imag_tol) {
        mate = it;
        break;
      }
    }
    if (mate == pending.end()) {
      throw InputError(
          "plant_from_spectrum: complex eigenvalue " +
          std::to_string(ev.real()) + (ev.imag() >= 0 ? "+" : "") +
          std::to_string(ev.imag()) + "i lacks its conjugate");
    }
    pending.erase(mate);
    const Scalar a = static_cast<Scalar>(ev.real());
    const Scalar b = static_cast<Scalar>(std::abs(ev.imag()));
    D(at, at) = a;
    D(at, at + 1) = b;
    D(at + 1, at) = -b;
    D(at + 1, at + 1) = a;
    at += 2;
  }

  const MatrixX<Scalar> Q = random_orthogonal<Scalar>(n, rng);
  ContinuousLti<Scalar> plant;
  plant.A = Q * D * Q.transpose();
  plant.B = random_gaussian<Scalar>(n, inputs, rng);
  plant.C = random_gaussian<Scalar>(outputs, n, rng);
  return plant;
}

/// Random stable plant: eigenvalues drawn with real parts in
/// [-abscissa_hi, -abscissa_lo], roughly half as conjugate pairs.
template <typename Scalar>
ContinuousLti<Scalar> random_stable_plant(Index n, Index inputs, Index outputs,
                                          CampaignRng& rng,
                                          double abscissa_lo = 0.2,
                                          double abscissa_hi = 2.5) {
  std::vector<std::complex<double>> spectrum;
  Index left = n;
  while (left > 0) {
    const double re =
        -(abscissa_lo + (abscissa_hi - abscissa_lo) * rng.uniform01());
    if (left >= 2 && rng.uniform01() < 0.5) {
      const double im = 0.2 + 3.0 * rng.uniform01();
      spectrum.emplace_back(re, im);
      spectrum.emplace_back(re, -im);
      left -= 2;
    } else {
      spectrum.emplace_back(re, 0.0);
      left -= 1;
    }
  }
  return plant_from_spectrum<Scalar>(spectrum, inputs, outputs, rng);
}

/// Random plant with a few unstable eigenvalues (positive real parts),
/// the rest stable; spectral abscissa lands in (0, unstable_hi].
template <typename Scalar>
ContinuousLti<Scalar> random_unstable_plant(Index n, Index inputs,
                                            Index outputs, CampaignRng& rng,
                                            Index unstable_modes = 1,
                                            double unstable_hi = 0.6) {
  std::vector<std::complex<double>> spectrum;
  for (Index i = 0; i < unstable_modes && i < n; ++i) {
    spectrum.emplace_back(0.05 + (unstable_hi - 0.05) * rng.uniform01(), 0.0);
  }
  Index left = n - static_cast<Index>(spectrum.size());
  while (left > 0) {
    const double re = -(0.2 + 2.0 * rng.uniform01());
    if (left >= 2 && rng.uniform01() < 0.5) {
      const double im = 0.2 + 3.0 * rng.uniform01();
      spectrum.emplace_back(re, im);
      spectrum.emplace_back(re, -im);
      left -= 2;
    } else {
      spectrum.emplace_back(re, 0.0);
      left -= 1;
    }
  }
  return plant_from_spectrum<Scalar>(spectrum, inputs, outputs, rng);
}

/// Random switched system with every mode spectral norm below `contraction`;
/// quadratically stable with P = I by construction when contraction < 1.
template <typename Scalar>
SwitchedLinear<Scalar> random_contractive_switched(Index n, Index inputs,
                                                   Index outputs, Index modes,
                                                   CampaignRng& rng,
                                                   double contraction = 0.9) {
  SwitchedLinear<Scalar> sys;
  sys.C = random_gaussian<Scalar>(outputs, n, rng);
  for (Index i = 0; i < modes; ++i) {
    MatrixX<Scalar> Ai = random_gaussian<Scalar>(n, n, rng);
    Eigen::JacobiSVD<MatrixX<Scalar>> svd(Ai);
    Ai *= static_cast<Scalar>(contraction) / svd.singularValues()(0);
    sys.A.push_back(std::move(Ai));
    sys.B.push_back(random_gaussian<Scalar>(n, inputs, rng));
  }
  return sys;
}

}  // namespace samred
