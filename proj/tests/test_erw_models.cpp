#include <gtest/gtest.h>

#include <cmath>

#include "mclt/erw_models.hpp"
#include "mclt/error.hpp"
#include "mclt/variance.hpp"
#include "oracles.hpp"

using namespace mclt;
using namespace mclt::erw;

namespace {

const double kPGrid[] = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

}  // namespace

TEST(ErwParams, Validation) {
  EXPECT_NO_THROW(ErwParams::make(1, 0.0));
  EXPECT_THROW(ErwParams::make(0, 0.5), Error);
  EXPECT_THROW(ErwParams::make(3, 1.0), Error);
  EXPECT_THROW(ErwParams::make(3, -0.1), Error);
  EXPECT_THROW(build_disordered(ErwParams{2, 1.0}), Error);
}

// --- disordered memory -----------------------------------------------------

TEST(BuildDisordered, IndexingRoundTrip) {
  const auto params = ErwParams::make(4, 0.3);
  for (std::size_t idx = 0; idx < 8; ++idx) EXPECT_EQ(disordered_index(params, disordered_state(params, idx)), idx);
  EXPECT_EQ(disordered_label(disordered_state(params, 0)), "-1,0");
  EXPECT_EQ(disordered_label(disordered_state(params, 7)), "+1,4");
  EXPECT_THROW(disordered_index(params, {1, 0}), Error);
  EXPECT_THROW(disordered_index(params, {-1, 4}), Error);
}

TEST(BuildDisordered, LengthOne) {
  const double p = 0.35;
  const auto chain = build_disordered(ErwParams::make(1, p));
  ASSERT_EQ(chain.P.size(), 2u);
  // index 0 = (-1,0), index 1 = (+1,1)
  EXPECT_DOUBLE_EQ(chain.P(0, 1), 1 - p);
  EXPECT_DOUBLE_EQ(chain.P(0, 0), p);
  EXPECT_DOUBLE_EQ(chain.P(1, 1), p);
  EXPECT_DOUBLE_EQ(chain.P(1, 0), 1 - p);
  EXPECT_EQ(chain.step[0], -1.0);
  EXPECT_EQ(chain.step[1], 1.0);
}

TEST(BuildDisordered, LengthTwoNoAcceptance) {
  const auto params = ErwParams::make(2, 0.0);
  const auto chain = build_disordered(params);
  const auto from = disordered_index(params, {1, 1});
  EXPECT_DOUBLE_EQ(chain.P(from, disordered_index(params, {1, 2})), 0.5);
  EXPECT_DOUBLE_EQ(chain.P(from, disordered_index(params, {-1, 0})), 0.5);
  EXPECT_DOUBLE_EQ(chain.P(from, disordered_index(params, {1, 1})), 0.0);
  EXPECT_DOUBLE_EQ(chain.P(from, disordered_index(params, {-1, 1})), 0.0);
}

TEST(DisorderedStationary, ClosedFormMatchesSolver) {
  for (int L = 1; L <= 8; ++L)
    for (double p : {0.0, 0.25, 0.5, 0.9}) {
      const auto params = ErwParams::make(L, p);
      const auto closed = disordered_stationary(params);
      const auto solved = stationary(build_disordered(params).P);
      for (std::size_t i = 0; i < closed.size(); ++i) EXPECT_NEAR(closed[i], solved[i], 1e-10) << L << " " << p;
    }
  const auto two = disordered_stationary(ErwParams::make(2, 0.7));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(two[i], 0.25, 1e-15);
}

TEST(DisorderedStationary, SumsToOne) {
  for (int L = 1; L <= 20; ++L) {
    const auto pi = disordered_stationary(ErwParams::make(L, 0.4));
    double s = 0.0;
    for (double w : pi.weights()) s += w;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(DisorderedVariance, ClosedForm) {
  EXPECT_DOUBLE_EQ(disordered_variance(ErwParams::make(5, 0.5)), 1.0);
  EXPECT_DOUBLE_EQ(disordered_variance(ErwParams::make(5, 0.0)), 0.0);
  EXPECT_DOUBLE_EQ(disordered_variance(ErwParams::make(3, 0.75)), 3.0);
  const auto chain = build_disordered(ErwParams::make(3, 0.75));
  EXPECT_NEAR(asymptotic_variance(chain.P, chain.step).sigma2, 3.0, 1e-9);
}

TEST(DisorderedVariance, GridMatchesMatrixRoute) {
  for (int L = 1; L <= 8; ++L)
    for (double p : kPGrid) {
      const auto params = ErwParams::make(L, p);
      const auto chain = build_disordered(params);
      ASSERT_TRUE(is_irreducible(chain.P));
      EXPECT_NEAR(asymptotic_variance(chain.P, chain.step).sigma2, disordered_variance(params), 1e-9) << L << " " << p;
    }
}

TEST(DisorderedPotential, SolvesPoissonEquation) {
  for (int L = 1; L <= 8; ++L)
    for (double p : {0.0, 0.3, 0.5, 0.8}) {
      const auto params = ErwParams::make(L, p);
      const auto chain = build_disordered(params);
      const auto pi = disordered_stationary(params);
      const auto u = disordered_potential(params);
      const auto pu = chain.P.apply(u);
      EXPECT_NEAR(pi.expect(u), 0.0, 1e-10);
      for (std::size_t i = 0; i < u.size(); ++i) {
        EXPECT_NEAR(u[i] - pu[i], chain.step[i], 1e-10);
      }
    }
  const auto half = disordered_potential(ErwParams::make(4, 0.5));
  const auto chain = build_disordered(ErwParams::make(4, 0.5));
  for (std::size_t i = 0; i < half.size(); ++i) EXPECT_DOUBLE_EQ(half[i], chain.step[i]);
}

// --- ordered memory --------------------------------------------------------

TEST(BuildOrdered, TwoSuccessorsPerRow) {
  for (int L = 1; L <= 6; ++L) {
    const auto chain = build_ordered(ErwParams::make(L, 0.37));
    for (std::size_t i = 0; i < chain.P.size(); ++i) {
      int nonzero = 0;
      double sum = 0.0;
      for (double v : chain.P.row(i)) {
        nonzero += v > 0.0 ? 1 : 0;
        sum += v;
      }
      EXPECT_LE(nonzero, 2);
      EXPECT_NEAR(sum, 1.0, 1e-15);
    }
  }
}

TEST(BuildOrdered, LengthOneMatchesDisordered) {
  for (double p : kPGrid) {
    const auto params = ErwParams::make(1, p);
    const auto ordered = build_ordered(params);
    const auto disordered = build_disordered(params);
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_EQ(ordered.step[i], disordered.step[i]);
      for (std::size_t j = 0; j < 2; ++j) EXPECT_DOUBLE_EQ(ordered.P(i, j), disordered.P(i, j));
    }
    EXPECT_DOUBLE_EQ(ordered_variance(params), disordered_variance(params));
  }
}

TEST(BuildOrdered, AppendProbability) {
  const auto params = ErwParams::make(2, 0.3);
  const auto chain = build_ordered(params);
  const std::size_t both = 0b11;
  EXPECT_NEAR(chain.P(both, 0b11), 0.3, 1e-15);  // shift keeps bit 1 -> bit 0, append 1
  EXPECT_NEAR(chain.P(both, 0b01), 0.7, 1e-15);
  EXPECT_EQ(chain.P.label(0b01), "10");
  // Shift convention: the oldest entry eta(0) is dropped.
  const auto p4 = build_ordered(ErwParams::make(4, 0.6));
  const std::size_t w = 0b0110;
  EXPECT_GT(p4.P(w, 0b1011), 0.0);
  EXPECT_GT(p4.P(w, 0b0011), 0.0);
}

TEST(BuildOrdered, SizeLimit) {
  try {
    build_ordered(ErwParams::make(kOrderedMaxMatrixL + 1, 0.5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::StateSpaceTooLarge);
  }
}

TEST(OrderedStationary, ClosedFormMatchesSolver) {
  for (int L = 1; L <= 10; ++L)
    for (double p : {0.0, 0.25, 0.75}) {
      const auto params = ErwParams::make(L, p);
      const auto closed = ordered_stationary(params);
      const auto solved = stationary(build_ordered(params).P);
      for (std::size_t i = 0; i < closed.size(); ++i) EXPECT_NEAR(closed[i], solved[i], 1e-10) << L << " " << p;
    }
}

TEST(OrderedStationary, UniformAtHalfAndPopcountOnly) {
  const auto uni = ordered_stationary(ErwParams::make(5, 0.5));
  for (double w : uni.weights()) EXPECT_NEAR(w, 1.0 / 32.0, 1e-15);
  const auto params = ErwParams::make(5, 0.2);
  const auto pi = ordered_stationary(params);
  for (std::uint64_t a = 0; a < 32; ++a)
    for (std::uint64_t b = 0; b < 32; ++b)
      if (OrderedState{a}.popcount() == OrderedState{b}.popcount()) EXPECT_DOUBLE_EQ(pi[a], pi[b]);
}

TEST(OrderedVariance, ClosedForm) {
  for (int L = 1; L <= 20; ++L) EXPECT_NEAR(ordered_variance(ErwParams::make(L, 0.5)), 1.0, 1e-15);
  EXPECT_NEAR(ordered_variance(ErwParams::make(3, 0.0)), 0.2, 1e-15);
  EXPECT_NEAR(ordered_variance(ErwParams::make(2, 0.3)), 10.0 / 21.0, 1e-15);
  for (int L = 2; L <= 9; ++L)
    EXPECT_NEAR(ordered_variance(ErwParams::make(L, 0.0)), (L - 1.0) / (4.0 * L - 2.0), 1e-15);
}

TEST(OrderedVariance, MatrixRoutesForSmallMemory) {
  const auto params = ErwParams::make(2, 0.3);
  const auto chain = build_ordered(params);
  EXPECT_NEAR(asymptotic_variance(chain.P, chain.step).sigma2, 10.0 / 21.0, 1e-10);
  EXPECT_NEAR(4.0 * asymptotic_variance(chain.P, ordered_front_observable(params)).sigma2, 10.0 / 21.0, 1e-10);
  for (int L = 1; L <= 8; ++L)
    for (double p : kPGrid) {
      const auto prm = ErwParams::make(L, p);
      const auto c = build_ordered(prm);
      ASSERT_TRUE(is_irreducible(c.P));
      EXPECT_NEAR(asymptotic_variance(c.P, c.step).sigma2, ordered_variance(prm), 1e-9) << L << " " << p;
    }
}

TEST(OrderedVariance, LargeMemoryLimit) {
  for (double p : {0.0, 0.25, 0.5, 0.75})
    for (int L : {100, 1000, 10000}) {
      const double limit = 1.0 / (4.0 * (1.0 - p) * (1.0 - p));
      EXPECT_LE(std::abs(ordered_variance(ErwParams::make(L, p)) - limit), 2.5 / L);
    }
}

// --- correlations ----------------------------------------------------------

TEST(RhoBar, FirstLag) {
  EXPECT_EQ(rho_bar_one(ErwParams::make(4, 0.5)), 0.0);
  EXPECT_NEAR(rho_bar_one(ErwParams::make(2, 0.3)), -1.0 / 24.0, 1e-16);
  for (int L = 1; L <= 10; ++L)
    for (double p : {0.0, 0.3, 0.6, 0.9}) {
      const auto params = ErwParams::make(L, p);
      const auto q = build_ordered(params).P;
      const auto direct = oracle::rho_bar_by_matrix_powers(q, ordered_stationary(params).weights(), 1);
      EXPECT_NEAR(direct[0], 0.25, 1e-12);
      EXPECT_NEAR(rho_bar_one(params), direct[1], 1e-10) << L << " " << p;
    }
}

TEST(RhoBar, SequenceMatchesMatrixPowers) {
  for (int L = 1; L <= 8; ++L)
    for (double p : {0.0, 0.2, 0.5, 0.85}) {
      const auto params = ErwParams::make(L, p);
      const auto series = rho_bar_sequence(params, 30);
      ASSERT_EQ(series.rho_bar.size(), 31u);
      const auto direct =
          oracle::rho_bar_by_matrix_powers(build_ordered(params).P, ordered_stationary(params).weights(), 30);
      for (std::size_t n = 0; n <= 30; ++n) EXPECT_NEAR(series.rho_bar[n], direct[n], 1e-10) << L << " " << p << " " << n;
    }
}

TEST(RhoBar, ZeroAtHalfAndFlatBeforeL) {
  const auto half = rho_bar_sequence(ErwParams::make(5, 0.5), 40);
  EXPECT_EQ(half.rho_bar[0], 0.25);
  for (std::size_t n = 1; n <= 40; ++n) EXPECT_EQ(half.rho_bar[n], 0.0);
  const auto params = ErwParams::make(6, 0.2);
  const auto s = rho_bar_sequence(params, 10);
  for (std::size_t n = 1; n < 6; ++n) EXPECT_EQ(s.rho_bar[n], rho_bar_one(params));
}

TEST(RhoBar, DecaysExponentially) {
  for (int L = 2; L <= 10; ++L)
    for (double p : {0.0, 0.1, 0.3, 0.7, 0.9}) {
      const auto params = ErwParams::make(L, p);
      const double radius = recursion_spectral_check(params);
      const auto s = rho_bar_sequence(params, 2000);
      // Past the transient the terms fall off at the companion's spectral radius.
      double worst = 0.0;
      for (std::size_t n = 1990; n <= 2000; ++n) worst = std::max(worst, std::abs(s.rho_bar[n]));
      EXPECT_LT(worst, 1e-12) << L << " " << p;
      EXPECT_LT(radius, 1.0);
    }
}

TEST(RhoBar, SeriesIdentity) {
  for (int L = 1; L <= 10; ++L)
    for (double p : kPGrid) {
      const auto params = ErwParams::make(L, p);
      EXPECT_NEAR(0.25 + 2.0 * rho_bar_tail_sum(params), ordered_variance(params) / 4.0, 1e-8) << L << " " << p;
    }
}

TEST(RecursionSpectral, Examples) {
  EXPECT_EQ(recursion_spectral_check(ErwParams::make(4, 0.5)), 0.0);
  EXPECT_NEAR(recursion_spectral_check(ErwParams::make(2, 0.0)), std::sqrt(0.5), 1e-9);
  for (int L = 2; L <= 6; ++L)
    for (double p : {0.0, 0.1, 0.25, 0.4, 0.6, 0.75, 0.9}) {
      const auto params = ErwParams::make(L, p);
      const double roots = oracle::recursion_root_radius(L, (2.0 * p - 1.0) / L);
      EXPECT_NEAR(recursion_spectral_check(params), roots, 1e-8) << L << " " << p;
    }
}
