#include <doctest.h>

#include "test_helpers.hpp"

using namespace samred;
using oracle::rng;

namespace {

SwitchedLineard one_mode_ls(const ContinuousLtid& sys) {
  SwitchedLineard ls;
  ls.A = {sys.A};
  ls.B = {sys.B};
  ls.C = sys.C;
  return ls;
}

}  // namespace

TEST_CASE("switched parameter count formula") {
  CHECK(switched_markov_count(1, 3) == 4);
  CHECK(switched_markov_count(2, 2) == 2 + 4 + 8);
  CHECK(switched_markov_count(4, 3) == 4 + 16 + 64 + 256);
  CHECK(switched_markov_count(6, 7) == -1);  // 6^8 > 1e6
}

TEST_CASE("single mode degenerates to the LTI Markov sequence") {
  auto r = rng(61);
  const ContinuousLtid sys = random_stable_plant<double>(4, 2, 2, r);
  const auto ls_params = markov_parameters_ls(one_mode_ls(sys), 3);
  const auto lti_params = markov_parameters_lti(sys, 3);
  REQUIRE(ls_params.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK((ls_params[k].value - lti_params[k]).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(ls_params[k].word.size() == k);
  }
}

TEST_CASE("zero mode matrices leave only length-0 parameters") {
  auto r = rng(62);
  SwitchedLineard sys;
  sys.C = random_gaussian<double>(1, 3, r);
  for (int i = 0; i < 2; ++i) {
    sys.A.push_back(MatrixX<double>::Zero(3, 3));
    sys.B.push_back(random_gaussian<double>(3, 1, r));
  }
  const auto params = markov_parameters_ls(sys, 2);
  for (const auto& p : params) {
    if (p.word.empty()) {
      CHECK(p.value.cwiseAbs().maxCoeff() > 1e-6);  // generically nonzero
    } else {
      CHECK(p.value.cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("parameters match the explicit word-product oracle") {
  auto r = rng(63);
  const SwitchedLineard sys =
      random_contractive_switched<double>(3, 1, 1, 2, r);
  const auto params = markov_parameters_ls(sys, 2);
  REQUIRE(params.size() == 14);  // 2 + 4 + 8
  for (const auto& p : params) {
    const MatrixX<double> expect =
        oracle::switched_markov_via_product(sys, p.word, p.entry_mode);
    CHECK((p.value - expect).cwiseAbs().maxCoeff() <=
          1e-10 * (1.0 + expect.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("enumeration is lexicographic within each length") {
  auto r = rng(64);
  const SwitchedLineard sys =
      random_contractive_switched<double>(2, 1, 1, 3, r);
  const auto params = markov_parameters_ls(sys, 2);
  std::size_t at = 0;
  for (Index M = 0; M <= 2; ++M) {
    std::vector<std::vector<Index>> words = oracle::words_of_length(3, M);
    for (const auto& w : words) {
      for (Index j = 0; j < 3; ++j) {
        REQUIRE(at < params.size());
        CHECK(params[at].word == w);
        CHECK(params[at].entry_mode == j);
        ++at;
      }
    }
  }
  CHECK(at == params.size());
}

TEST_CASE("budget errors fire before enumerating") {
  auto r = rng(65);
  const SwitchedLineard sys =
      random_contractive_switched<double>(2, 1, 1, 6, r);
  CHECK_THROWS_AS(markov_parameters_ls(sys, 7), BudgetError);
}

TEST_CASE("reachability at N = 0 spans the joint input image") {
  auto r = rng(66);
  const SwitchedLineard sys =
      random_contractive_switched<double>(6, 1, 1, 3, r);
  const MatrixX<double> V = reachability_space_ls(sys, 0);
  REQUIRE(V.cols() == 3);
  for (const auto& Bj : sys.B) {
    CHECK((Bj - V * (V.transpose() * Bj)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("single-mode reachability equals the LTI space") {
  auto r = rng(67);
  const ContinuousLtid sys = random_stable_plant<double>(6, 2, 1, r);
  for (Index N = 0; N <= 3; ++N) {
    const MatrixX<double> Vls = reachability_space_ls(one_mode_ls(sys), N);
    const MatrixX<double> Vlti = reachability_space_lti(sys, N);
    REQUIRE(Vls.cols() == Vlti.cols());
    // Same span: cross-projection is lossless.
    CHECK((Vls - Vlti * (Vlti.transpose() * Vls)).cwiseAbs().maxCoeff() <
          1e-9);
  }
}

TEST_CASE("reachability dimension matches the stacked-word oracle") {
  auto r = rng(68);
  const SwitchedLineard sys =
      random_contractive_switched<double>(6, 1, 1, 2, r);
  for (Index N = 0; N <= 2; ++N) {
    const MatrixX<double> V = reachability_space_ls(sys, N);
    const MatrixX<double> stacked =
        oracle::stacked_reachability_matrix(sys, N);
    CHECK(V.cols() == oracle::svd_rank(stacked, 1e-9));
    // And the basis really spans the stack.
    CHECK((stacked - V * (V.transpose() * stacked)).cwiseAbs().maxCoeff() <=
          1e-8 * (1.0 + stacked.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("zero input matrices raise the zero-space error") {
  SwitchedLineard sys;
  sys.A = {MatrixX<double>::Identity(3, 3)};
  sys.B = {MatrixX<double>::Zero(3, 1)};
  sys.C = MatrixX<double>::Ones(1, 3);
  CHECK_THROWS_AS(reachability_space_ls(sys, 1), ZeroSpaceError);
}

TEST_CASE("dimension bound min(n, m sum D^{M+1})") {
  // Level M contributes at most m D^{M+1} directions (every word of length
  // M extended by every entry mode).
  auto r = rng(69);
  const SwitchedLineard sys =
      random_contractive_switched<double>(9, 2, 1, 2, r);
  for (Index N = 0; N <= 3; ++N) {
    Index cols = 0, power = sys.mode_count();
    for (Index M = 0; M <= N; ++M) {
      cols += power;
      power *= sys.mode_count();
    }
    const Index bound = std::min<Index>(9, 2 * cols);
    CHECK(reachability_space_ls(sys, N).cols() <= bound);
  }
}

TEST_CASE("identity projection reproduces the switched system") {
  auto r = rng(70);
  const SwitchedLineard sys =
      random_contractive_switched<double>(4, 1, 1, 2, r);
  const auto red = reduce_ls(
      sys, projection_from_basis<double>(MatrixX<double>::Identity(4, 4), 1));
  for (std::size_t i = 0; i < sys.A.size(); ++i) {
    CHECK((red.A[i] - sys.A[i]).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((red.B[i] - sys.B[i]).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("common invariant subspace reduces exactly at every length") {
  auto r = rng(71);
  // Block upper-triangular modes sharing the invariant subspace
  // span{e_1, e_2} that contains both input columns.
  SwitchedLineard sys;
  const Index n = 5;
  sys.C = random_gaussian<double>(1, n, r);
  for (int i = 0; i < 2; ++i) {
    MatrixX<double> Ai = random_gaussian<double>(n, n, r);
    Ai.bottomLeftCorner(3, 2).setZero();
    Ai *= 0.3;
    sys.A.push_back(Ai);
    MatrixX<double> Bi = MatrixX<double>::Zero(n, 1);
    Bi(0, 0) = r.gaussian();
    Bi(1, 0) = r.gaussian();
    sys.B.push_back(Bi);
  }
  const MatrixX<double> V = reachability_space_ls(sys, 6);
  REQUIRE(V.cols() == 2);
  const auto red = reduce_ls(sys, projection_from_basis<double>(V, 6));

  const auto orig_params = markov_parameters_ls(sys, 5);
  const auto red_params = markov_parameters_ls(red, 5);
  for (std::size_t i = 0; i < orig_params.size(); ++i) {
    CHECK(relative_markov_residual(orig_params[i].value,
                                   red_params[i].value) < 1e-9);
  }
}

TEST_CASE("order-4 zero-horizon reduction matches length 0 but not length 1") {
  auto r = rng(72);
  const SwitchedLineard sys =
      random_contractive_switched<double>(10, 1, 1, 4, r);
  const MatrixX<double> V = reachability_space_ls(sys, 0);
  REQUIRE(V.cols() == 4);
  const auto red = reduce_ls(sys, projection_from_basis<double>(V, 0));

  const auto orig_params = markov_parameters_ls(sys, 1);
  const auto red_params = markov_parameters_ls(red, 1);
  double worst0 = 0, worst1 = 0;
  for (std::size_t i = 0; i < orig_params.size(); ++i) {
    const double res = relative_markov_residual(orig_params[i].value,
                                                red_params[i].value);
    (orig_params[i].word.empty() ? worst0 : worst1) =
        std::max(orig_params[i].word.empty() ? worst0 : worst1, res);
  }
  CHECK(worst0 < 1e-10);
  CHECK(worst1 > 1e-6);
}

TEST_CASE("one-mode reduce_ls recovers reduce_lti") {
  auto r = rng(73);
  const ContinuousLtid sys = random_stable_plant<double>(8, 1, 1, r);
  const Index N = 2;
  const MatrixX<double> V = reachability_space_lti(sys, N);
  const auto proj = projection_from_basis<double>(V, N);
  const auto red_lti = reduce_lti(sys, proj);
  const auto red_ls = reduce_ls(one_mode_ls(sys), proj);
  const auto seq_a = markov_parameters_lti(red_lti, 6);
  const ContinuousLtid red_as_lti{red_ls.A[0], red_ls.B[0], red_ls.C};
  const auto seq_b = markov_parameters_lti(red_as_lti, 6);
  for (std::size_t k = 0; k < seq_a.size(); ++k) {
    CHECK(relative_markov_residual(seq_a[k], seq_b[k]) < 1e-9);
  }
}

TEST_CASE("basis invariance of the reduced switched moments") {
  auto r = rng(74);
  const SwitchedLineard sys =
      random_contractive_switched<double>(7, 1, 1, 2, r);
  const Index N = 1;
  const MatrixX<double> V = reachability_space_ls(sys, N);
  const MatrixX<double> T = random_orthogonal<double>(V.cols(), r);
  const auto red1 = reduce_ls(sys, projection_from_basis<double>(V, N));
  const auto red2 =
      reduce_ls(sys, projection_from_basis<double>((V * T).eval(), N));
  const auto p1 = markov_parameters_ls(red1, N);
  const auto p2 = markov_parameters_ls(red2, N);
  for (std::size_t i = 0; i < p1.size(); ++i) {
    CHECK(relative_markov_residual(p1[i].value, p2[i].value) < 1e-8);
  }
}

TEST_CASE("horizon check: identical systems never deviate") {
  auto r = rng(75);
  const SwitchedLineard sys =
      random_contractive_switched<double>(5, 1, 1, 3, r);
  const auto report = output_match_horizon_check(sys, sys, 3, 20);
  CHECK(report.passed);
  for (const double dev : report.max_relative_deviation) {
    CHECK(dev == 0.0);
  }
}

TEST_CASE("horizon check certifies an N-partial realization, tail deviates") {
  auto r = rng(76);
  const SwitchedLineard sys =
      random_contractive_switched<double>(12, 1, 1, 2, r);
  const Index N = 1;
  const MatrixX<double> V = reachability_space_ls(sys, N);
  REQUIRE(V.cols() < 12);
  const auto red = reduce_ls(sys, projection_from_basis<double>(V, N));
  const auto report = output_match_horizon_check(sys, red, N, 50);
  CHECK(report.passed);
  CHECK(report.max_relative_deviation[0] <= 1e-7);
  CHECK(report.max_relative_deviation[1] <= 1e-7);
  // Beyond the horizon the outputs genuinely part ways.
  double tail = 0;
  for (std::size_t k = 2; k < report.max_relative_deviation.size(); ++k) {
    tail = std::max(tail, report.max_relative_deviation[k]);
  }
  CHECK(tail > 1e-7);
}
