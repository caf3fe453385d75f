#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fracon/bounds.hpp"
#include "test_support.hpp"

using namespace fracon;
using namespace fracon::testing;

constexpr double pi = std::numbers::pi;

TEST(Theorem1Bound, ExampleGraph) {
    // pi / (2 * 2^(1/0.9)) with dmax = 1
    EXPECT_NEAR(theorem1_bound(example_graph(), 1.0, 0.9), pi / (2.0 * std::pow(2.0, 1.0 / 0.9)), 1e-15);
    EXPECT_NEAR(theorem1_bound(example_graph(), 1.0, 0.9), 0.7271803, 1e-6);
    EXPECT_NEAR(theorem1_bound(example_graph(), 1.19, 0.9), 0.5993783, 1e-6);
}

TEST(Theorem1Bound, UnitDegreeIntegerOrder) {
    const Edge edge[] = {{1, 0, 1.0}};
    EXPECT_NEAR(theorem1_bound(Digraph::from_edges(2, edge), 1.0, 1.0), pi / 4.0, 1e-15);
}

TEST(Theorem1Bound, Errors) {
    EXPECT_THROW(theorem1_bound(Digraph(Matrix::Zero(3, 3)), 1.0, 0.9), InvalidArgument);
    EXPECT_THROW(theorem1_bound(example_graph(), 0.0, 0.9), InvalidArgument);
    EXPECT_THROW(theorem1_bound(example_graph(), 1.0, 1.1), InvalidArgument);
}

TEST(Theorem1Bound, StrictlyDecreasingInGainAndDegree) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> value(1e-3, 10.0);
    std::uniform_real_distribution<double> order(0.05, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const double a = order(rng);
        double g1 = value(rng), g2 = value(rng);
        double d1 = value(rng), d2 = value(rng);
        if (g1 == g2 || d1 == d2)
            continue;
        if (g1 > g2)
            std::swap(g1, g2);
        if (d1 > d2)
            std::swap(d1, d2);
        const Edge e1[] = {{1, 0, d1}};
        const Edge e2[] = {{1, 0, d2}};
        const auto lo_deg = Digraph::from_edges(2, e1);
        const auto hi_deg = Digraph::from_edges(2, e2);
        EXPECT_GT(theorem1_bound(lo_deg, g1, a), theorem1_bound(lo_deg, g2, a));
        EXPECT_GT(theorem1_bound(lo_deg, g1, a), theorem1_bound(hi_deg, g1, a));
    }
}

TEST(MaxGainForDelay, InvertsTheorem1) {
    const double gain = max_gain_for_delay(example_graph(), 0.6, 0.9);
    EXPECT_NEAR(gain, 1.189, 0.01);
    EXPECT_NEAR(theorem1_bound(example_graph(), gain, 0.9), 0.6, 1e-12);
}

TEST(Corollary1Bound, TwoNodeExamples) {
    EXPECT_NEAR(corollary1_bound(symmetric_pair(), 1.0, 1.0), pi / 4.0, 1e-12);
    EXPECT_NEAR(corollary1_bound(symmetric_pair(), 2.0, 1.0), pi / 8.0, 1e-12);
    EXPECT_NEAR(corollary1_bound(symmetric_pair(), 0.5, 0.5), pi / 2.0, 1e-12);
}

TEST(Corollary1Bound, RejectsAsymmetricOrRootless) {
    EXPECT_THROW(corollary1_bound(example_graph(), 1.0, 0.9), InapplicableBound);
    Matrix w = Matrix::Zero(4, 4);
    w(0, 1) = w(1, 0) = 1.0;
    w(2, 3) = w(3, 2) = 1.0; // two components
    EXPECT_THROW(corollary1_bound(Digraph(w), 1.0, 1.0), InapplicableBound);
}

TEST(Corollary2Bound, TwoNodeExamples) {
    EXPECT_NEAR(corollary2_bound(symmetric_pair(), 1.0), pi / 4.0, 1e-12);
    EXPECT_NEAR(corollary2_bound(symmetric_pair(), 2.0), pi / 8.0, 1e-12);
    EXPECT_THROW(corollary2_bound(example_graph(), 1.0), InapplicableBound);
}

TEST(Corollary3Bound, TwoNodeExamples) {
    EXPECT_NEAR(corollary3_bound(symmetric_pair(), 1.0), pi / 4.0, 1e-12);
    EXPECT_THROW(corollary3_bound(example_graph(), 1.0), InapplicableBound);
    // doubling every weight doubles rho and halves the bound
    EXPECT_NEAR(corollary3_bound(symmetric_pair(2.0), 1.0), 0.5 * corollary3_bound(symmetric_pair(), 1.0), 1e-12);
}

TEST(Corollary3Bound, ClassicalIntegerMarginAtUnitGain) {
    // tau < pi / (2 lambda_max) for the symmetric integer-order protocol at gain 1
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const auto g = random_symmetric_digraph(rng, 2 + static_cast<std::size_t>(trial % 6), 0.7);
        if (!has_spanning_root(g))
            continue;
        EXPECT_NEAR(corollary3_bound(g, 1.0), pi / (2.0 * spectrum(g).max_real_eigenvalue), 1e-9);
    }
}

TEST(CorollaryBounds, Corollary1EqualsCorollary2AtIntegerOrder) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> gain(0.1, 5.0);
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto g = random_symmetric_digraph(rng, 2 + static_cast<std::size_t>(trial % 7), 0.6);
        if (!has_spanning_root(g))
            continue;
        const double k = gain(rng);
        EXPECT_NEAR(corollary1_bound(g, k, 1.0), corollary2_bound(g, k), 1e-9);
        ++checked;
    }
    EXPECT_GT(checked, 50);
}

TEST(Bounds, InvariantUnderRelabeling) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial % 6);
        const auto g = random_symmetric_digraph(rng, n, 0.7);
        if (!has_spanning_root(g))
            continue;
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        const auto p = g.permuted(perm);
        EXPECT_DOUBLE_EQ(theorem1_bound(g, 1.3, 0.8), theorem1_bound(p, 1.3, 0.8));
        EXPECT_NEAR(corollary1_bound(g, 1.3, 0.8), corollary1_bound(p, 1.3, 0.8), 1e-9);
        EXPECT_NEAR(corollary2_bound(g, 1.3), corollary2_bound(p, 1.3), 1e-9);
        EXPECT_NEAR(corollary3_bound(g, 1.3), corollary3_bound(p, 1.3), 1e-9);
    }
}

TEST(BoundReport, ExampleScenarioMarksCorollariesInapplicable) {
    const auto r = bound_report(example_scenario());
    EXPECT_DOUBLE_EQ(r.order_used, 0.9);
    EXPECT_NEAR(r.theorem1, 0.7271803, 1e-6);
    EXPECT_FALSE(r.corollary1.applicable());
    EXPECT_FALSE(r.corollary2.applicable());
    EXPECT_FALSE(r.corollary3.applicable());
    EXPECT_FALSE(r.corollary1.reason.empty());
}

TEST(BoundReport, SymmetricIntegerScenarioHasAllBounds) {
    const auto r = bound_report(two_agent_scenario(0.3));
    EXPECT_DOUBLE_EQ(r.order_used, 1.0);
    ASSERT_TRUE(r.corollary1.applicable());
    ASSERT_TRUE(r.corollary2.applicable());
    ASSERT_TRUE(r.corollary3.applicable());
    EXPECT_NEAR(*r.corollary2.value, pi / 4.0, 1e-12);

    auto mixed = two_agent_scenario(0.3);
    mixed.agents[1].delay = 0.4;
    EXPECT_FALSE(bound_report(mixed).corollary3.applicable());
    EXPECT_TRUE(bound_report(mixed).corollary2.applicable());
}

TEST(GainDelayCurve, ExampleReadoffs) {
    const auto single = gain_delay_curve(example_graph(), 0.9, 1.0, 1.19, 2);
    ASSERT_EQ(single.size(), 2u);
    EXPECT_DOUBLE_EQ(single[0].gain, 1.0);
    EXPECT_NEAR(single[0].tau_bound, 0.7272, 1e-4);
    EXPECT_DOUBLE_EQ(single[1].gain, 1.19);
    EXPECT_NEAR(single[1].tau_bound, 0.5994, 1e-4);
}

TEST(GainDelayCurve, StrictlyDecreasingAndEvenlySpaced) {
    const auto curve = gain_delay_curve(example_graph(), 0.9, 0.2, 2.0, 50);
    ASSERT_EQ(curve.size(), 50u);
    EXPECT_DOUBLE_EQ(curve.front().gain, 0.2);
    EXPECT_DOUBLE_EQ(curve.back().gain, 2.0);
    for (std::size_t i = 1; i < curve.size(); ++i) {
        EXPECT_LT(curve[i].tau_bound, curve[i - 1].tau_bound);
        EXPECT_NEAR(curve[i].gain - curve[i - 1].gain, 1.8 / 49.0, 1e-12);
    }
}

TEST(GainDelayCurve, DoublingGainHalvesIntegerOrderBound) {
    const auto curve = gain_delay_curve(example_graph(), 1.0, 0.5, 1.0, 2);
    EXPECT_NEAR(curve[1].tau_bound, 0.5 * curve[0].tau_bound, 1e-14);
}

TEST(GainDelayCurve, RejectsBadRange) {
    EXPECT_THROW(gain_delay_curve(example_graph(), 0.9, 0.0, 1.0, 5), InvalidArgument);
    EXPECT_THROW(gain_delay_curve(example_graph(), 0.9, 2.0, 1.0, 5), InvalidArgument);
    EXPECT_THROW(gain_delay_curve(example_graph(), 0.9, 0.5, 1.0, 1), InvalidArgument);
}
