#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "overlap_ifs/symbolic_measure.hpp"

using namespace overlap_ifs;

namespace {

constexpr Symbol S1 = 0;
constexpr Symbol S2 = 1;

}  // namespace

TEST(SampleWord, Deterministic) {
    const ProbabilityVector p({0.3, 0.7});
    for (std::uint64_t i = 0; i < 50; ++i) {
        EXPECT_EQ(sample_word(p, 40, 77, i).word, sample_word(p, 40, 77, i).word);
    }
    EXPECT_NE(sample_word(p, 40, 77, 0).word, sample_word(p, 40, 78, 0).word);
    EXPECT_NE(sample_word(p, 40, 77, 0).word, sample_word(p, 40, 77, 1).word);
}

TEST(SampleWord, PrefixStableUnderDepth) {
    const auto p = ProbabilityVector::uniform(3);
    const auto short_w = sample_word(p, 10, 5, 3);
    const auto long_w = sample_word(p, 25, 5, 3);
    for (std::size_t j = 0; j < 10; ++j) EXPECT_EQ(short_w.word[j], long_w.word[j]);
}

TEST(SampleWord, UniformSymbolFrequency) {
    const auto p = ProbabilityVector::uniform(2);
    const int depth = 50;
    const std::uint64_t n = 100000;
    std::uint64_t ones = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
        for (Symbol s : sample_word(p, depth, 2024, i).word.symbols) ones += s;
    }
    const double total = static_cast<double>(n) * depth;
    const double band = 4.0 * std::sqrt(0.25 / total);
    EXPECT_NEAR(static_cast<double>(ones) / total, 0.5, band);
}

TEST(SampleWord, BiasedSymbolFrequency) {
    const ProbabilityVector p({0.2, 0.5, 0.3});
    const int depth = 20;
    const std::uint64_t n = 50000;
    std::vector<std::uint64_t> counts(3, 0);
    for (std::uint64_t i = 0; i < n; ++i) {
        for (Symbol s : sample_word(p, depth, 9, i).word.symbols) ++counts[s];
    }
    const double total = static_cast<double>(n) * depth;
    for (std::size_t j = 0; j < 3; ++j) {
        const double sd = std::sqrt(p[j] * (1.0 - p[j]) / total);
        EXPECT_NEAR(static_cast<double>(counts[j]) / total, p[j], 4.0 * sd);
    }
}

TEST(SampleWord, RejectsBadDepth) {
    EXPECT_THROW(sample_word(ProbabilityVector::uniform(2), 0, 1, 0), DomainError);
}

TEST(DrawSymbol, InvertsCumulative) {
    const ProbabilityVector p({0.25, 0.5, 0.25});
    EXPECT_EQ(draw_symbol(p, 0.0), 0u);
    EXPECT_EQ(draw_symbol(p, 0.2499), 0u);
    EXPECT_EQ(draw_symbol(p, 0.25), 1u);
    EXPECT_EQ(draw_symbol(p, 0.7499), 1u);
    EXPECT_EQ(draw_symbol(p, 0.75), 2u);
    EXPECT_EQ(draw_symbol(p, std::nextafter(1.0, 0.0)), 2u);
}

TEST(CodePoint, AllSecondMapCodesItsFixedPoint) {
    const auto sys = IfsSystem::bernoulli_convolution(0.6);
    const Word w(std::vector<Symbol>(30, S2));
    const auto c = code_point(sys, w);
    EXPECT_LE(std::abs(c.value - 2.5), c.error_bound);
}

TEST(CodePoint, DepthTwoCylinder) {
    // S_1(S_2([-4,4])) = S_1([-2,4]) = [-2.5,2]
    const auto sys = IfsSystem::bernoulli_convolution(0.75);
    const auto c = code_point(sys, Word{S1, S2});
    EXPECT_NEAR(c.value, -0.25, 1e-15);
    EXPECT_NEAR(c.error_bound, 2.25, 1e-15);
}

TEST(CodePoint, NestedTruncations) {
    const IfsSystem sys({SimilarityMap(-0.45, 0.2), SimilarityMap(0.6, 1.0),
                         SimilarityMap(0.3, -0.8)});
    const auto p = ProbabilityVector::uniform(3);
    for (std::uint64_t i = 0; i < 300; ++i) {
        const auto deep = sample_word(p, 40, 13, i);
        for (int m : {1, 5, 12, 25}) {
            const auto shallow = sample_word(p, m, 13, i);
            const auto a = code_point(sys, shallow);
            const auto b = code_point(sys, sample_word(p, m + 10, 13, i));
            EXPECT_LE(std::abs(a.value - b.value), a.error_bound * (1 + 1e-12) + 1e-15);
            EXPECT_LE(std::abs(a.value - code_point(sys, deep).value),
                      a.error_bound * (1 + 1e-12) + 1e-15);
        }
    }
}

TEST(CodePoint, DepthForFuzz) {
    const auto sys = IfsSystem::bernoulli_convolution(0.75);
    const double fuzz = 1e-6;
    const int m = coding_depth_for(sys, fuzz);
    const double diam = sys.hull().length();
    EXPECT_LT(std::pow(0.75, m) * diam, fuzz / 10.0 * (1 + 1e-12));
    EXPECT_GE(std::pow(0.75, m - 1) * diam, fuzz / 10.0);
}

TEST(Lift, FixedPointIsPreserved) {
    const auto sys = IfsSystem::bernoulli_convolution(0.6);
    LiftState st{Word{S2, S1, S1}, 0, 2.5};
    st = lift_step(sys, st);
    EXPECT_EQ(st.head, 1u);
    EXPECT_NEAR(st.x, 2.5, 1e-15);
}

TEST(Lift, ReversedOrder) {
    const auto sys = IfsSystem::bernoulli_convolution(0.6);
    const LiftState start{Word{S1, S2, S1}, 0, 0.0};
    // S_2(S_1(0)) = S_2(-1) = 0.4, while apply_word((S_1, S_2), 0) = -0.4
    EXPECT_NEAR(lift(sys, start, 2).x, 0.4, 1e-15);
    EXPECT_NEAR(apply_word(sys, Word{S1, S2}, 0.0), -0.4, 1e-15);
    EXPECT_EQ(lift(sys, start, 2).head, 2u);
}

TEST(Lift, ExhaustedWindow) {
    const auto sys = IfsSystem::bernoulli_convolution(0.6);
    LiftState st{Word{S1}, 1, 0.0};
    EXPECT_THROW(lift_step(sys, st), ExhaustedError);
    EXPECT_THROW(lift(sys, LiftState{Word{S1}, 0, 0.0}, 2), ExhaustedError);
}

TEST(Lift, ReversedPrefixIdentityAndHullInvariance) {
    const IfsSystem sys({SimilarityMap(-0.45, 0.2), SimilarityMap(0.6, 1.0),
                         SimilarityMap(0.3, -0.8)});
    const auto p = ProbabilityVector::uniform(3);
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> xs(sys.hull().lo, sys.hull().hi);
    for (std::uint64_t i = 0; i < 200; ++i) {
        const auto w = sample_word(p, 20, 4, i).word;
        const double x = xs(rng);
        LiftState st{w, 0, x};
        for (std::size_t k = 1; k <= 20; ++k) {
            st = lift_step(sys, st);
            ASSERT_TRUE(sys.hull().contains(st.x));
            const Word prefix(std::vector<Symbol>(w.symbols.begin(),
                                                  w.symbols.begin() + static_cast<long>(k)));
            EXPECT_NEAR(st.x, apply_word(sys, reversed(prefix), x), 1e-12);
        }
    }
}

TEST(KsStatistic, HandComputed) {
    EXPECT_DOUBLE_EQ(ks_statistic({1, 2, 3}, {1, 2, 3}), 0.0);
    EXPECT_DOUBLE_EQ(ks_statistic({1, 2}, {3, 4}), 1.0);
    // F_a jumps at 1,3 and F_b at 2,4: largest gap 1/2
    EXPECT_DOUBLE_EQ(ks_statistic({1, 3}, {2, 4}), 0.5);
    EXPECT_NEAR(ks_critical_value(100, 100, 0.001), std::sqrt(-std::log(0.0005) / 2.0) * std::sqrt(0.02),
                1e-15);
}

TEST(ProjectionTest, SameMeasurePasses) {
    const auto sys = IfsSystem::bernoulli_convolution(0.618);
    const auto rep = projection_equality_test(sys, ProbabilityVector::uniform(2), 100000, 60, 3);
    EXPECT_TRUE(rep.pass) << rep.ks << " vs " << rep.threshold;
    EXPECT_EQ(rep.samples, 100000u);
}

TEST(ProjectionTest, MismatchedMeasureFails) {
    const auto sys = IfsSystem::bernoulli_convolution(0.618);
    const auto rep = projection_equality_test(sys, ProbabilityVector::uniform(2),
                                              ProbabilityVector({0.7, 0.3}), 100000, 60, 3);
    EXPECT_FALSE(rep.pass) << rep.ks << " vs " << rep.threshold;
}

TEST(ProjectionTest, SingleMapIsDegenerate) {
    const IfsSystem single({SimilarityMap(0.5, 1.0)});
    const auto rep = projection_equality_test(single, ProbabilityVector({1.0}), 1000, 10, 1);
    EXPECT_EQ(rep.ks, 0.0);
    EXPECT_TRUE(rep.pass);
}
