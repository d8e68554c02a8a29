#include <gtest/gtest.h>

#include <cmath>

#include "overlap_ifs/overlap_estimator.hpp"

using namespace overlap_ifs;

namespace {

IfsSystem identical_maps() { return IfsSystem({SimilarityMap(0.5, 1.0), SimilarityMap(0.5, 1.0)}); }

/// Exact expectation of log beta_n over depth-q atoms, with beta_n read off
/// the swept multiplicity profile instead of the pruned counter.
double profile_quadrature(const IfsSystem& sys, const ProbabilityVector& p, int n, int q) {
    const auto prof = multiplicity_profile(sys, n);
    const std::size_t k = sys.alphabet_size();
    const double mid = sys.hull().midpoint();
    double total = 0.0;
    std::uint64_t atoms = word_count(k, q);
    for (std::uint64_t code = 0; code < atoms; ++code) {
        Word w(std::vector<Symbol>(static_cast<std::size_t>(q)));
        double pw = 1.0;
        std::uint64_t c = code;
        for (int j = q - 1; j >= 0; --j) {
            w.symbols[static_cast<std::size_t>(j)] = static_cast<Symbol>(c % k);
            pw *= p[static_cast<Symbol>(c % k)];
            c /= k;
        }
        const double x = apply_word(sys, w, mid);
        total += pw * std::log(static_cast<double>(prof.count_at(x)));
    }
    return total / n;
}

}  // namespace

TEST(EstimateMc, DisjointSystemIsOne) {
    const auto est = estimate_overlap_mc(IfsSystem::bernoulli_convolution(0.4),
                                         ProbabilityVector::uniform(2), 10, 10000, std::nullopt, 1);
    EXPECT_EQ(est.a_n, 0.0);
    EXPECT_EQ(est.o_hat, 1.0);
    EXPECT_EQ(est.upper_variant, 1.0);
    EXPECT_EQ(est.std_err, 0.0);
    // points within the fuzz of a cylinder edge straddle a gap and are flagged
    EXPECT_LE(est.flagged, 10u);
}

TEST(EstimateMc, IdenticalMapsIsTwo) {
    const auto est = estimate_overlap_mc(identical_maps(), ProbabilityVector::uniform(2), 10, 100,
                                         std::nullopt, 1);
    EXPECT_EQ(est.o_hat, 2.0);
    EXPECT_EQ(est.a_n, std::log(2.0));
    EXPECT_EQ(est.std_err, 0.0);
}

TEST(EstimateExact, TrivialSystems) {
    const auto disjoint = estimate_overlap_exact(IfsSystem::bernoulli_convolution(0.4),
                                                 ProbabilityVector::uniform(2), 6, 12);
    EXPECT_EQ(disjoint.a_n, 0.0);
    const auto dup = estimate_overlap_exact(identical_maps(), ProbabilityVector::uniform(2), 6, 6);
    EXPECT_DOUBLE_EQ(dup.o_hat, 2.0);
    EXPECT_THROW(estimate_overlap_exact(identical_maps(), ProbabilityVector::uniform(2), 6, 5),
                 DomainError);
}

TEST(EstimateExact, AgreesWithProfileQuadrature) {
    for (double lambda : {0.618, 0.7, 0.8}) {
        const auto sys = IfsSystem::bernoulli_convolution(lambda);
        for (const auto& p : {ProbabilityVector::uniform(2), ProbabilityVector({0.7, 0.3})}) {
            const auto est = estimate_overlap_exact(sys, p, 6, 12);
            EXPECT_NEAR(est.a_n, profile_quadrature(sys, p, 6, 12), 1e-12) << lambda;
        }
    }
}

TEST(EstimateMc, AgreesWithQuadrature) {
    const auto sys = IfsSystem::bernoulli_convolution(0.75);
    const auto p = ProbabilityVector::uniform(2);
    const auto exact = estimate_overlap_exact(sys, p, 8, 16);
    const auto mc = estimate_overlap_mc(sys, p, 8, 100000, std::nullopt, 11);
    EXPECT_LE(std::abs(mc.a_n - exact.a_n), 3.0 * mc.std_err)
        << "mc " << mc.a_n << " exact " << exact.a_n << " se " << mc.std_err;
}

TEST(EstimateMc, DeterministicAcrossThreadCounts) {
    const auto sys = IfsSystem::bernoulli_convolution(0.7);
    const ProbabilityVector p({0.6, 0.4});
    EstimatorOptions one;
    one.threads = 1;
    EstimatorOptions four;
    four.threads = 4;
    const auto a = estimate_overlap_mc(sys, p, 10, 3000, 0.1, 99, one);
    const auto b = estimate_overlap_mc(sys, p, 10, 3000, 0.1, 99, four);
    EXPECT_EQ(a.a_n, b.a_n);
    EXPECT_EQ(a.std_err, b.std_err);
    EXPECT_EQ(a.upper_variant, b.upper_variant);
    EXPECT_EQ(a.non_generic, b.non_generic);
    EXPECT_GT(a.non_generic, 0u);
    const auto c = estimate_overlap_mc(sys, p, 10, 3000, 0.1, 100, one);
    EXPECT_NE(a.a_n, c.a_n);
}

TEST(EstimateMc, GenericSamplesAlwaysHaveAChain) {
    const auto sys = IfsSystem::bernoulli_convolution(0.7);
    const ProbabilityVector p({0.8, 0.2});
    for (double tau : {0.05, 0.2}) {
        const auto est = estimate_overlap_mc(sys, p, 12, 2000, tau, 8);
        EXPECT_EQ(est.flagged, 0u);
        EXPECT_GE(est.lower_variant, 1.0);
        EXPECT_LT(est.non_generic, est.samples);
    }
}

TEST(EstimateExact, FilteredAgreesWithMc) {
    const auto sys = IfsSystem::bernoulli_convolution(0.7);
    const ProbabilityVector p({0.7, 0.3});
    const double tau = 0.1;
    const auto exact = estimate_overlap_exact(sys, p, 8, 16, tau);
    const auto mc = estimate_overlap_mc(sys, p, 8, 50000, tau, 21);
    EXPECT_GT(exact.non_generic, 0u);
    EXPECT_LE(std::abs(mc.a_n - exact.a_n), 3.0 * mc.std_err)
        << "mc " << mc.a_n << " exact " << exact.a_n << " se " << mc.std_err;
}

TEST(EstimateMc, UniformFilterMatchesUnfiltered) {
    const auto sys = IfsSystem::bernoulli_convolution(0.65);
    const auto p = ProbabilityVector::uniform(2);
    const auto plain = estimate_overlap_mc(sys, p, 10, 2000, std::nullopt, 5);
    for (double tau : {0.01, 0.1, 1.0}) {
        const auto filt = estimate_overlap_mc(sys, p, 10, 2000, tau, 5);
        EXPECT_EQ(filt.a_n, plain.a_n);
        EXPECT_EQ(filt.upper_variant, plain.upper_variant);
    }
}

TEST(EstimateMc, Invariants) {
    for (double lambda = 0.55; lambda < 0.96; lambda += 0.1) {
        const auto sys = IfsSystem::bernoulli_convolution(lambda);
        for (const auto& p : {ProbabilityVector::uniform(2), ProbabilityVector({0.8, 0.2})}) {
            const std::optional<double> tau =
                p.is_uniform() ? std::nullopt : std::optional<double>(4.0 / std::sqrt(10.0));
            const auto est = estimate_overlap_mc(sys, p, 10, 500, tau, 3);
            EXPECT_GE(est.lower_variant, 1.0);
            EXPECT_LE(est.lower_variant, est.upper_variant);
            EXPECT_LE(est.upper_variant, 2.0);
            EXPECT_LE(est.ci_lo, est.o_hat);
            EXPECT_LE(est.o_hat, est.ci_hi);
            EXPECT_EQ(est.lower_variant, est.o_hat);
        }
    }
}

TEST(EstimateMc, FlaggedSamplesAreAnError) {
    // query width 1 exceeds every depth-5 cylinder, so no image contains it
    EstimatorOptions opts;
    opts.fuzz = 0.5;
    EXPECT_THROW(estimate_overlap_mc(IfsSystem::bernoulli_convolution(0.4),
                                     ProbabilityVector::uniform(2), 5, 100, std::nullopt, 1, opts),
                 FlaggedSampleError);
}

TEST(EstimateMc, BudgetIsPropagated) {
    EstimatorOptions opts;
    opts.budget = 100;
    EXPECT_THROW(estimate_overlap_mc(IfsSystem::bernoulli_convolution(0.9),
                                     ProbabilityVector::uniform(2), 14, 10, std::nullopt, 1, opts),
                 BudgetError);
}

TEST(EstimateMc, RejectsBadArguments) {
    const auto sys = IfsSystem::bernoulli_convolution(0.7);
    EXPECT_THROW(estimate_overlap_mc(sys, ProbabilityVector::uniform(2), 0, 10, std::nullopt, 1),
                 DomainError);
    EXPECT_THROW(estimate_overlap_mc(sys, ProbabilityVector::uniform(3), 4, 10, std::nullopt, 1),
                 AlphabetError);
}

TEST(ConvergenceScan, TrivialSystemsHaveFlatTrend) {
    const std::vector<int> ns{4, 6, 8};
    const auto p = ProbabilityVector::uniform(2);
    const auto disjoint = convergence_scan(IfsSystem::bernoulli_convolution(0.4), p, ns, 200, 1);
    for (const auto& e : disjoint.estimates) EXPECT_EQ(e.a_n, 0.0);
    EXPECT_EQ(disjoint.trend_slope, 0.0);
    const auto dup = convergence_scan(identical_maps(), p, ns, 50, 1);
    for (const auto& e : dup.estimates) EXPECT_NEAR(e.a_n, std::log(2.0), 1e-15);
    EXPECT_NEAR(dup.trend_slope, 0.0, 1e-12);
    EXPECT_NEAR(dup.trend_intercept, std::log(2.0), 1e-12);
    EXPECT_EQ(dup.headline().n, 8);
}

TEST(ConvergenceScan, RejectsUnsortedN) {
    const std::vector<int> ns{8, 6};
    EXPECT_THROW(convergence_scan(identical_maps(), ProbabilityVector::uniform(2), ns, 10, 1),
                 DomainError);
}

TEST(ConvergenceScan, TauSchedules) {
    EXPECT_FALSE(TauSchedule::none().at(9).has_value());
    EXPECT_EQ(*TauSchedule::fixed(0.2).at(9), 0.2);
    EXPECT_DOUBLE_EQ(*TauSchedule::clt_scaled(3.0).at(9), 1.0);
}

TEST(Statistics, FitLineRecoversLine) {
    const std::vector<double> x{0.1, 0.2, 0.5, 1.0};
    std::vector<double> y;
    for (double v : x) y.push_back(0.3 - 2.0 * v);
    const auto [intercept, slope] = fit_line(x, y);
    EXPECT_NEAR(intercept, 0.3, 1e-14);
    EXPECT_NEAR(slope, -2.0, 1e-14);
}

TEST(Statistics, StableMeanOfConstantIsExact) {
    const std::vector<double> v(12345, 0.1 * 3);
    EXPECT_EQ(detail::stable_mean(v), 0.1 * 3);
    EXPECT_EQ(detail::sample_variance(v, detail::stable_mean(v)), 0.0);
}
