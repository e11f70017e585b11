#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "qfreq/errors.hpp"
#include "qfreq/fock_space.hpp"

using namespace qfreq;

namespace {

const cplx kMinusOne{-1.0, 0.0};

template <class Fn>
void expect_kind(Fn fn, ErrorKind kind) {
  try {
    fn();
    ADD_FAILURE() << "no exception";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

double fact(int n) { return n <= 1 ? 1.0 : n * fact(n - 1); }

// Permanent by summing over all permutations; fine for <= 4 photons.
cplx permanent(const Eigen::MatrixXcd& m) {
  std::vector<int> p(static_cast<std::size_t>(m.rows()));
  std::iota(p.begin(), p.end(), 0);
  cplx total{0.0, 0.0};
  do {
    cplx prod{1.0, 0.0};
    for (int i = 0; i < m.rows(); ++i) prod *= m(i, p[static_cast<std::size_t>(i)]);
    total += prod;
  } while (std::next_permutation(p.begin(), p.end()));
  return total;
}

// <out| U |in> for a^dag_k -> sum_j U(k, j) b^dag_j, from the permanent of
// the photon-indexed submatrix.
cplx transition(const Eigen::MatrixXcd& u, const std::vector<int>& in, const std::vector<int>& out) {
  std::vector<int> rows, cols;
  double norm_in = 1.0, norm_out = 1.0;
  for (int k = 0; k < static_cast<int>(in.size()); ++k) {
    for (int c = 0; c < in[k]; ++c) rows.push_back(k);
    norm_in *= fact(in[k]);
  }
  for (int j = 0; j < static_cast<int>(out.size()); ++j) {
    for (int c = 0; c < out[j]; ++c) cols.push_back(j);
    norm_out *= fact(out[j]);
  }
  if (rows.size() != cols.size()) return 0.0;
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXcd sub(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) sub(r, c) = u(rows[r], cols[c]);
  }
  return permanent(sub) / std::sqrt(norm_in * norm_out);
}

Eigen::MatrixXcd random_unitary(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXcd z(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) z(i, j) = cplx(normal(rng), normal(rng));
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
  return qr.householderQ();
}

}  // namespace

TEST(Fock, VacuumBasics) {
  const auto reg = make_registry({"a", "b"});
  const auto v = vacuum(reg, 4);
  EXPECT_DOUBLE_EQ(norm(v), 1.0);
  EXPECT_EQ(inner(v, v), cplx(1.0, 0.0));
  EXPECT_DOUBLE_EQ(norm(annihilate(v, "a")), 0.0);
  const auto one = create(v, "a");
  EXPECT_EQ(one.amplitude({{"a", 1}}), cplx(1.0, 0.0));
  EXPECT_NEAR(create(one, "a").amplitude({{"a", 2}}).real(), std::sqrt(2.0), 1e-15);
  EXPECT_EQ(inner(one, create(v, "b")), cplx(0.0, 0.0));
}

TEST(Fock, UnknownLabelRejected) {
  const auto v = vacuum(make_registry({"a"}), 4);
  expect_kind([&] { create(v, "zz"); }, ErrorKind::kUnknownMode);
}

TEST(Fock, CommutatorsOnRandomState) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  const auto reg = make_registry({"a", "b", "c"});
  MultimodeFockState psi(reg, 4);
  for (int a = 0; a <= 2; ++a) {
    for (int b = 0; a + b <= 2; ++b) {
      psi.add({static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b), static_cast<std::uint8_t>(2 - a - b)},
              cplx(normal(rng), normal(rng)));
    }
  }
  for (const std::string m : {"a", "b", "c"}) {
    for (const std::string n : {"a", "b", "c"}) {
      const auto c = annihilate(create(psi, n), m) + kMinusOne * create(annihilate(psi, m), n);
      const double expected_norm = m == n ? norm(psi) : 0.0;
      EXPECT_NEAR(norm(m == n ? c + kMinusOne * psi : c), 0.0, 1e-12) << m << n;
      EXPECT_NEAR(norm(c), expected_norm, 1e-12);
    }
  }
}

TEST(Fock, TruncationLedgerRecordsDroppedWeight) {
  const auto reg = make_registry({"a"});
  auto s = vacuum(reg, 1);
  s = create(s, "a");
  EXPECT_DOUBLE_EQ(s.truncated_weight(), 0.0);
  s = create(s, "a");
  EXPECT_TRUE(s.terms().empty());
  EXPECT_NEAR(s.truncated_weight(), 2.0, 1e-14);
}

TEST(Fock, WeakCoherentAmplitudesAndNorm) {
  const auto reg = make_registry({"g1"});
  const cplx alpha(0.1, 0.0);
  const auto s = weak_coherent(reg, "g1", alpha, 2);
  EXPECT_EQ(s.amplitude(Occupation{0}), cplx(1.0, 0.0));
  EXPECT_NEAR(std::abs(s.amplitude({{"g1", 1}}) - alpha), 0.0, 1e-16);
  EXPECT_NEAR(std::abs(s.amplitude({{"g1", 2}}) - alpha * alpha / std::sqrt(2.0)), 0.0, 1e-16);
  const double a2 = std::norm(alpha);
  EXPECT_NEAR(norm(s), std::sqrt(1.0 + a2 + a2 * a2 / 2.0), 1e-15);
  EXPECT_NEAR(norm(weak_coherent(reg, "g1", 0.0, 2)), 1.0, 1e-15);
}

TEST(Fock, WeakCoherentMeanPhotonNumber) {
  const auto reg = make_registry({"g1"});
  const auto s = weak_coherent(reg, "g1", 0.2, 3);
  const std::vector<std::string> labels{"g1"};
  EXPECT_NEAR(mean_photons(s, labels), 0.04, 1e-4);
}

TEST(Fock, WeakCoherentGuards) {
  const auto reg = make_registry({"g1"});
  expect_kind([&] { weak_coherent(reg, "g1", 0.1, 3, 2); }, ErrorKind::kInvalidOrder);
  expect_kind([&] { weak_coherent(reg, "g1", 1.2, 2); }, ErrorKind::kPerturbativeValidity);
}

TEST(Fock, SqueezerMatchedAndOrthogonalCoherent) {
  const auto reg = make_registry({"g1", "g2", "i0"});
  const double gamma = 0.01;
  const cplx alpha(0.05, 0.0);
  const auto coh = weak_coherent(reg, "g1", alpha, 2);

  SqueezerSpec matched{gamma, 0, {"g1", "g2"}, ModeProjection{{1.0, 0.0}, 0.0, std::nullopt}, std::nullopt, "i0"};
  const auto m = apply_squeezer(coh, matched);
  EXPECT_NEAR(std::abs(m.amplitude({{"g1", 2}, {"i0", 1}}) - std::sqrt(2.0) * gamma * alpha), 0.0, 1e-15);

  SqueezerSpec orth{gamma, 0, {"g1", "g2"}, ModeProjection{{0.0, 1.0}, 0.0, std::nullopt}, std::nullopt, "i0"};
  const auto o = apply_squeezer(coh, orth);
  EXPECT_NEAR(std::abs(o.amplitude({{"g1", 1}, {"g2", 1}, {"i0", 1}}) - gamma * alpha), 0.0, 1e-15);
  EXPECT_EQ(o.amplitude({{"g1", 2}, {"i0", 1}}), cplx(0.0, 0.0));
  EXPECT_EQ(o.amplitude({{"g2", 2}, {"i0", 1}}), cplx(0.0, 0.0));

  const auto first = apply_squeezer(vacuum(reg, 4), orth);
  EXPECT_NEAR(std::abs(first.amplitude({{"g2", 1}, {"i0", 1}}) - gamma), 0.0, 1e-16);
}

TEST(Fock, SqueezerInverseToThirdOrder) {
  const auto reg = make_registry({"s", "i"});
  const double gamma = 0.02;
  SqueezerSpec plus{gamma, 0, {"s"}, ModeProjection{{1.0}, 0.0, std::nullopt}, std::nullopt, "i"};
  SqueezerSpec minus = plus;
  minus.gain = -gamma;
  const auto v = vacuum(reg, 4);
  const auto r = apply_squeezer(apply_squeezer(v, plus), minus);
  EXPECT_LE(norm(r + kMinusOne * v), 10.0 * gamma * gamma * gamma);
}

TEST(Fock, SqueezersOnDistinctModesCommute) {
  const auto reg = make_registry({"g1", "g2", "e0", "e1", "i0", "i1"});
  SqueezerSpec s0{0.03, 0, {"g1", "g2"}, ModeProjection{{0.6, 0.0}, 0.8, std::nullopt}, "e0", "i0"};
  SqueezerSpec s1{0.01, 1, {"g1", "g2"}, ModeProjection{{0.0, 0.6}, 0.8, std::nullopt}, "e1", "i1"};
  const auto coh = weak_coherent(reg, "g1", 0.02, 2);
  const auto ab = apply_squeezer(apply_squeezer(coh, s0), s1);
  const auto ba = apply_squeezer(apply_squeezer(coh, s1), s0);
  EXPECT_LT(norm(ab + kMinusOne * ba), 1e-16);
}

TEST(Fock, SqueezerGuard) {
  const auto reg = make_registry({"s", "i"});
  SqueezerSpec bad{0.6, 0, {"s"}, ModeProjection{{1.0}, 0.0, std::nullopt}, std::nullopt, "i"};
  expect_kind([&] { apply_squeezer(vacuum(reg, 4), bad); }, ErrorKind::kPerturbativeValidity);
  SqueezerSpec missing{0.1, 0, {"s"}, ModeProjection{{0.6}, 0.8, std::nullopt}, std::nullopt, "i"};
  expect_kind([&] { apply_squeezer(vacuum(reg, 4), missing); }, ErrorKind::kUnknownMode);
}

TEST(BasisChangeTest, HomIdentity) {
  const auto reg = make_registry({"a1", "a2", "b1", "b2"});
  const double h = 1.0 / std::sqrt(2.0);
  BasisChange bc{{"a1", "a2"}, {"b1", "b2"}, Eigen::MatrixXcd(2, 2)};
  bc.matrix << h, -h, h, h;
  const auto psi = change_basis(create(create(vacuum(reg, 4), "a1"), "a2"), bc);
  EXPECT_LT(std::abs(psi.amplitude({{"b1", 1}, {"b2", 1}})), 1e-12);
  EXPECT_NEAR(std::abs(psi.amplitude({{"b1", 2}})), h, 1e-15);
  EXPECT_NEAR(std::abs(psi.amplitude({{"b2", 2}})), h, 1e-15);
}

TEST(BasisChangeTest, MatchesPermanentOracle) {
  const auto reg = make_registry({"a0", "a1", "a2", "b0", "b1", "b2"});
  const Eigen::MatrixXcd u = random_unitary(3, 21);
  BasisChange bc{{"a0", "a1", "a2"}, {"b0", "b1", "b2"}, u};
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  MultimodeFockState psi(reg, 4);
  std::vector<std::pair<std::vector<int>, cplx>> input;
  for (int x = 0; x <= 3; ++x) {
    for (int y = 0; x + y <= 3; ++y) {
      const std::vector<int> occ{x, y, 3 - x - y};
      const cplx c(normal(rng), normal(rng));
      input.emplace_back(occ, c);
      psi.add({static_cast<std::uint8_t>(occ[0]), static_cast<std::uint8_t>(occ[1]),
               static_cast<std::uint8_t>(occ[2]), 0, 0, 0},
              c);
    }
  }
  const auto out = change_basis(psi, bc);
  EXPECT_NEAR(norm(out), norm(psi), 1e-10);
  for (int x = 0; x <= 3; ++x) {
    for (int y = 0; x + y <= 3; ++y) {
      const std::vector<int> o{x, y, 3 - x - y};
      cplx expected{0.0, 0.0};
      for (const auto& [occ, c] : input) expected += c * transition(u, occ, o);
      const auto got = out.amplitude({0, 0, 0, static_cast<std::uint8_t>(o[0]), static_cast<std::uint8_t>(o[1]),
                                      static_cast<std::uint8_t>(o[2])});
      EXPECT_NEAR(std::abs(got - expected), 0.0, 1e-12) << x << y;
    }
  }
}

TEST(BasisChangeTest, IdentityAndRoundTrip) {
  const auto reg = make_registry({"a", "b", "c", "d"});
  const Eigen::MatrixXcd u = random_unitary(2, 8);
  auto psi = create(create(weak_coherent(reg, "a", cplx(0.1, 0.05), 2), "b"), "a");
  BasisChange id{{"a", "b"}, {"a", "b"}, Eigen::MatrixXcd::Identity(2, 2)};
  EXPECT_LT(norm(change_basis(psi, id) + kMinusOne * psi), 1e-15);
  BasisChange fwd{{"a", "b"}, {"c", "d"}, u};
  BasisChange back{{"c", "d"}, {"a", "b"}, u.adjoint()};
  EXPECT_LT(norm(change_basis(change_basis(psi, fwd), back) + kMinusOne * psi), 1e-10);
}

TEST(BasisChangeTest, NonUnitaryRejected) {
  const auto reg = make_registry({"a", "b"});
  BasisChange bc{{"a"}, {"b"}, Eigen::MatrixXcd::Constant(1, 1, cplx(1.001, 0.0))};
  expect_kind([&] { change_basis(create(vacuum(reg, 4), "a"), bc); }, ErrorKind::kInvalidUnitary);
}

TEST(Fock, DebugDumpGolden) {
  const auto reg = make_registry({"g1", "i0"});
  SqueezerSpec s{0.1, 0, {"g1"}, ModeProjection{{1.0}, 0.0, std::nullopt}, std::nullopt, "i0"};
  const auto psi = apply_squeezer(vacuum(reg, 4), s);
  EXPECT_EQ(debug_dump(psi),
            "0 0 : +1.000000000000e+00 +0.000000000000e+00\n"
            "1 1 : +1.000000000000e-01 +0.000000000000e+00\n"
            "2 2 : +1.000000000000e-02 +0.000000000000e+00\n");
}

TEST(BinUnitaryTest, BalancedPiStepIsFiftyFifty) {
  const auto g = make_grid(2.27e15, 4e14, 2048);
  const auto g2 = gaussian_mode(g, g.center(), 3e13, 0.0);
  const double cut = energy_quantile_cut(g2, 0.5);
  const auto g1 = pi_step_mode(g2, cut, lower_energy_fraction(g2, cut));
  const std::vector<SpectralMode> modes{g1, g2};
  const std::vector<std::string> labels{"g1", "g2"};
  const auto b = build_bin_unitary(modes, cut, labels);
  ASSERT_EQ(b.change.matrix.rows(), 2);
  ASSERT_EQ(b.change.matrix.cols(), 2);
  for (Eigen::Index i = 0; i < 2; ++i) {
    for (Eigen::Index j = 0; j < 2; ++j) EXPECT_NEAR(std::abs(b.change.matrix(i, j)), 1.0 / std::sqrt(2.0), 1e-12);
  }
  EXPECT_LT(b.change.unitarity_error(), 1e-12);
}

TEST(BinUnitaryTest, UnbalancedSplitFollowsQuadrature) {
  const auto g = make_grid(2.27e15, 4e14, 4096);
  const auto g2 = gaussian_mode(g, g.center(), 3e13, 0.0);
  const double cut = energy_quantile_cut(g2, 0.7);
  const double lo = lower_energy_fraction(g2, cut);
  const auto g1 = pi_step_mode(g2, cut, lo);
  const std::vector<SpectralMode> modes{g1, g2};
  const std::vector<std::string> labels{"g1", "g2"};
  const auto b = build_bin_unitary(modes, cut, labels);
  // Weight of g1 above the cut, by direct summation.
  double above = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.omega(k) >= cut) above += std::norm(g1[k]) * g.omega_step();
  }
  double g1_short = 0.0;
  for (std::size_t j = 0; j < b.bins.size(); ++j) {
    if (b.bins[j] == Bin::kShort) g1_short += std::norm(b.change.matrix(0, static_cast<Eigen::Index>(j)));
  }
  EXPECT_NEAR(g1_short, above, 1e-12);
  EXPECT_NEAR(g1_short, lo, 1e-12);
}
