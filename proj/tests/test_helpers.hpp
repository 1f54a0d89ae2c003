// Test-only oracles: independent computation routes for the quantities the
// library produces. These deliberately avoid the library's own algorithms
// (scaling-and-squaring, Schur solves, incremental orthogonalization) so a
// match is evidence, not tautology.
#pragma once

#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "samred/samred.hpp"

namespace oracle {

using samred::Index;
using samred::MatrixX;
using samred::VectorX;

/// Plain Taylor summation of e^{A t}.
inline MatrixX<double> expm_taylor(const MatrixX<double>& A, double t,
                                   int terms = 60) {
  const Index n = A.rows();
  MatrixX<double> sum = MatrixX<double>::Identity(n, n);
  MatrixX<double> term = MatrixX<double>::Identity(n, n);
  for (int k = 1; k <= terms; ++k) {
    term = (term * A * (t / k)).eval();
    sum += term;
  }
  return sum;
}

/// Adaptive Simpson quadrature of a matrix-valued integrand, refining until
/// the max-norm Richardson estimate drops below tol.
inline MatrixX<double> adaptive_simpson(
    const std::function<MatrixX<double>(double)>& f, double a, double b,
    double tol, int depth = 20) {
  const MatrixX<double> fa = f(a), fm = f((a + b) / 2), fb = f(b);
  const MatrixX<double> whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);

  std::function<MatrixX<double>(double, double, const MatrixX<double>&,
                                const MatrixX<double>&, const MatrixX<double>&,
                                const MatrixX<double>&, double, int)>
      recurse = [&](double lo, double hi, const MatrixX<double>& flo,
                    const MatrixX<double>& fmid, const MatrixX<double>& fhi,
                    const MatrixX<double>& coarse, double eps,
                    int level) -> MatrixX<double> {
    const double mid = (lo + hi) / 2;
    const MatrixX<double> fq1 = f((lo + mid) / 2);
    const MatrixX<double> fq3 = f((mid + hi) / 2);
    const MatrixX<double> left = (mid - lo) / 6.0 * (flo + 4.0 * fq1 + fmid);
    const MatrixX<double> right = (hi - mid) / 6.0 * (fmid + 4.0 * fq3 + fhi);
    const MatrixX<double> err = left + right - coarse;
    if (level <= 0 || err.cwiseAbs().maxCoeff() < 15.0 * eps) {
      return left + right + err / 15.0;
    }
    return recurse(lo, mid, flo, fq1, fmid, left, eps / 2, level - 1) +
           recurse(mid, hi, fmid, fq3, fhi, right, eps / 2, level - 1);
  };
  return recurse(a, b, fa, fm, fb, whole, tol, depth);
}

/// Lyapunov solve by Kronecker vectorization:
/// (I (x) A^T + A^T (x) I) vec(P) = -vec(Q).
inline MatrixX<double> kron_lyapunov(const MatrixX<double>& A,
                                     const MatrixX<double>& Q) {
  const Index n = A.rows();
  MatrixX<double> K = MatrixX<double>::Zero(n * n, n * n);
  const MatrixX<double> At = A.transpose();
  for (Index j = 0; j < n; ++j) {
    K.block(j * n, j * n, n, n) += At;  // I (x) A^T
  }
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      // A^T (x) I: entry At(i, j) scales an identity block
      K.block(i * n, j * n, n, n) +=
          At(i, j) * MatrixX<double>::Identity(n, n);
    }
  }
  VectorX<double> vecQ(n * n);
  for (Index j = 0; j < n; ++j) vecQ.segment(j * n, n) = Q.col(j);
  const VectorX<double> vecP = K.partialPivLu().solve((-vecQ).eval());
  MatrixX<double> P(n, n);
  for (Index j = 0; j < n; ++j) P.col(j) = vecP.segment(j * n, n);
  return ((P + P.transpose()) / 2.0).eval();
}

/// High-accuracy RK4 integration of xdot = A x + B u with u held constant
/// over each sampling interval; returns the state at every sampling instant.
inline std::vector<VectorX<double>> rk4_sampled(
    const samred::ContinuousLtid& plant, const VectorX<double>& x0,
    const std::vector<VectorX<double>>& inputs,
    const std::vector<double>& intervals, int substeps) {
  std::vector<VectorX<double>> states;
  states.push_back(x0);
  VectorX<double> x = x0;
  for (std::size_t k = 0; k < intervals.size(); ++k) {
    const VectorX<double> drive = plant.B * inputs[k];
    const double dt = intervals[k] / substeps;
    for (int s = 0; s < substeps; ++s) {
      const VectorX<double> k1 = plant.A * x + drive;
      const VectorX<double> k2 = plant.A * (x + dt / 2 * k1) + drive;
      const VectorX<double> k3 = plant.A * (x + dt / 2 * k2) + drive;
      const VectorX<double> k4 = plant.A * (x + dt * k3) + drive;
      x += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    states.push_back(x);
  }
  return states;
}

/// Final state of the switched recursion as a functional fold over the
/// per-step affine maps.
inline VectorX<double> fold_final_state(const samred::SwitchedLineard& sys,
                                        const samred::InputSequenced& u,
                                        const samred::SwitchingSequence& sigma,
                                        const VectorX<double>& x0,
                                        Index steps) {
  std::vector<Index> ks(static_cast<std::size_t>(steps));
  std::iota(ks.begin(), ks.end(), Index{0});
  return std::accumulate(
      ks.begin(), ks.end(), x0, [&](VectorX<double> x, Index k) {
        const Index i = sigma.values[static_cast<std::size_t>(k)];
        return VectorX<double>(sys.A[static_cast<std::size_t>(i)] * x +
                               sys.B[static_cast<std::size_t>(i)] *
                                   u.values[static_cast<std::size_t>(k)]);
      });
}

/// C A^k B with the n x n power formed explicitly.
inline MatrixX<double> markov_via_power(const samred::ContinuousLtid& sys,
                                        Index k) {
  MatrixX<double> power =
      MatrixX<double>::Identity(sys.order(), sys.order());
  for (Index i = 0; i < k; ++i) power = (power * sys.A).eval();
  return sys.C * power * sys.B;
}

/// C A_{w_1} ... A_{w_M} B_j with every product formed from scratch.
inline MatrixX<double> switched_markov_via_product(
    const samred::SwitchedLineard& sys, const std::vector<Index>& word,
    Index entry_mode) {
  MatrixX<double> prod =
      MatrixX<double>::Identity(sys.order(), sys.order());
  for (const Index k : word) {
    prod = (prod * sys.A[static_cast<std::size_t>(k)]).eval();
  }
  return sys.C * prod * sys.B[static_cast<std::size_t>(entry_mode)];
}

/// All mode words of length exactly M, in lexicographic order.
inline std::vector<std::vector<Index>> words_of_length(Index D, Index M) {
  std::vector<std::vector<Index>> words = {{}};
  for (Index level = 0; level < M; ++level) {
    std::vector<std::vector<Index>> next;
    next.reserve(words.size() * static_cast<std::size_t>(D));
    for (const auto& w : words) {
      for (Index k = 0; k < D; ++k) {
        auto e = w;
        e.push_back(k);
        next.push_back(std::move(e));
      }
    }
    words = std::move(next);
  }
  return words;
}

/// The stacked matrix of every word product A_{w} B_j for |w| <= N; its
/// numerical rank is the dimension of the N-partial reachability space.
inline MatrixX<double> stacked_reachability_matrix(
    const samred::SwitchedLineard& sys, Index N) {
  const Index n = sys.order();
  std::vector<MatrixX<double>> cols;
  for (Index M = 0; M <= N; ++M) {
    for (const auto& w : words_of_length(sys.mode_count(), M)) {
      MatrixX<double> prod = MatrixX<double>::Identity(n, n);
      for (const Index k : w) {
        prod = (prod * sys.A[static_cast<std::size_t>(k)]).eval();
      }
      for (Index j = 0; j < sys.mode_count(); ++j) {
        cols.push_back(prod * sys.B[static_cast<std::size_t>(j)]);
      }
    }
  }
  Index total = 0;
  for (const auto& c : cols) total += c.cols();
  MatrixX<double> stacked(n, total);
  Index at = 0;
  for (const auto& c : cols) {
    stacked.middleCols(at, c.cols()) = c;
    at += c.cols();
  }
  return stacked;
}

inline Index svd_rank(const MatrixX<double>& M, double rank_tol) {
  Eigen::JacobiSVD<MatrixX<double>> svd(M);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0) return 0;
  Index r = 0;
  while (r < sv.size() && sv(r) > rank_tol * sv(0)) ++r;
  return r;
}

/// Shared deterministic stream for test-data generation.
inline samred::CampaignRng rng(std::uint64_t seed) {
  return samred::CampaignRng(seed);
}

}  // namespace oracle
