#pragma once

// Estimates of the overlap number
//
//   o(S, p) = exp( lim (1/n) E_{w ~ nu_p} log beta_n(pi w [, tau, p]) )
//
// at finite n, by Monte Carlo over coded sample points or by exact
// summation over the atoms phi_w(midpoint), |w| = quad_depth.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "overlap_ifs/chain_counter.hpp"
#include "overlap_ifs/errors.hpp"
#include "overlap_ifs/ifs_core.hpp"
#include "overlap_ifs/symbolic_measure.hpp"

namespace overlap_ifs {

inline constexpr double kZ99 = 2.5758293035489004;  // two-sided 99% normal quantile

struct EstimatorOptions {
    std::optional<double> fuzz;        // default 1e-9 * diam(hull)
    std::optional<int> coding_depth;   // default from fuzz
    std::uint64_t budget = kDefaultNodeBudget;
    unsigned threads = 0;              // 0 = hardware concurrency
    double max_flagged_fraction = 1e-3;
};

struct OverlapEstimate {
    int n = 0;
    std::uint64_t samples = 0;
    std::optional<double> tau;
    double mean_log_beta = 0.0;  // mean of log(lower count)
    double a_n = 0.0;
    double o_hat = 1.0;
    double std_err = 0.0;        // of a_n
    double ci_lo = 1.0;
    double ci_hi = 1.0;
    double lower_variant = 1.0;
    double upper_variant = 1.0;
    std::uint64_t flagged = 0;
    std::uint64_t non_generic = 0;  // samples whose own prefix fails the tau filter
    double fuzz = 0.0;
    int coding_depth = 0;

    /// Delta-method standard error of o_hat.
    [[nodiscard]] double std_err_o() const { return o_hat * std_err; }
};

namespace detail {

/// Pairwise sum; the result depends only on the input order.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

/// Mean computed as v[0] + mean(v - v[0]) so that constant inputs are exact.
inline double stable_mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    std::vector<double> dev(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) dev[i] = v[i] - v[0];
    return v[0] + pairwise_sum(dev) / static_cast<double>(v.size());
}

inline double sample_variance(std::span<const double> v, double mean) {
    if (v.size() < 2) return 0.0;
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
    return pairwise_sum(sq) / static_cast<double>(v.size() - 1);
}

inline unsigned resolve_threads(unsigned requested) {
    if (requested != 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Runs body(begin, end) over contiguous chunks of [0, count).
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(
                                                           std::max<std::size_t>(count, 1))));
    if (threads == 1) {
        body(std::size_t{0}, count);
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (count + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t begin = std::min(count, t * chunk);
            const std::size_t end = std::min(count, begin + chunk);
            pool.emplace_back([&, t, begin, end] {
                try {
                    body(begin, end);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

inline ChainCount count_for(const IfsSystem& sys, int n, double x, double fuzz,
                            const ProbabilityVector& p, std::optional<double> tau,
                            std::uint64_t budget) {
    return tau ? count_chains_generic(sys, n, x, fuzz, p, *tau, budget)
               : count_chains(sys, n, x, fuzz, budget);
}

inline OverlapEstimate summarise(int n, std::uint64_t samples, std::optional<double> tau,
                                 double fuzz, int depth, const std::vector<double>& lo,
                                 const std::vector<double>& up, std::uint64_t flagged,
                                 std::uint64_t non_generic,
                                 double max_flagged_fraction) {
    if (static_cast<double>(flagged) > max_flagged_fraction * static_cast<double>(samples)) {
        throw FlaggedSampleError(std::to_string(flagged) + " of " + std::to_string(samples) +
                                 " samples had no certified chain; reduce the fuzz or "
                                 "increase the coding depth");
    }
    OverlapEstimate est;
    est.n = n;
    est.samples = samples;
    est.tau = tau;
    est.flagged = flagged;
    est.non_generic = non_generic;
    est.fuzz = fuzz;
    est.coding_depth = depth;
    est.mean_log_beta = stable_mean(lo);
    est.a_n = est.mean_log_beta / n;
    est.o_hat = std::exp(est.a_n);
    const double var = sample_variance(lo, est.mean_log_beta);
    est.std_err = lo.empty() ? 0.0 : std::sqrt(var / static_cast<double>(lo.size())) / n;
    est.ci_lo = std::exp(est.a_n - kZ99 * est.std_err);
    est.ci_hi = std::exp(est.a_n + kZ99 * est.std_err);
    est.lower_variant = est.o_hat;
    est.upper_variant = std::exp(stable_mean(up) / n);
    return est;
}

}  // namespace detail

/// Monte Carlo estimate over N coded points drawn from nu_p.
/// Without tau the count is unfiltered (beta_n), which is the right choice
/// for uniform p. With tau the average is over samples whose own length-n
/// prefix is tau-generic; the rest are tallied in `non_generic`.
inline OverlapEstimate estimate_overlap_mc(const IfsSystem& sys, const ProbabilityVector& p,
                                           int n, std::uint64_t samples,
                                           std::optional<double> tau, std::uint64_t seed,
                                           const EstimatorOptions& opts = {}) {
    if (n < 1) throw DomainError("estimator needs n >= 1");
    if (samples < 1) throw DomainError("estimator needs at least one sample");
    if (p.size() != sys.alphabet_size()) {
        throw AlphabetError("probability vector length differs from alphabet size");
    }
    const double fuzz = opts.fuzz.value_or(default_fuzz(sys));
    int depth = opts.coding_depth.value_or(coding_depth_for(sys, fuzz));
    // the genericity test reads the first n symbols of each sample
    if (tau) depth = std::max(depth, n);

    // 0 = counted, 1 = flagged, 2 = non-generic prefix
    std::vector<double> lo(samples);
    std::vector<double> up(samples);
    std::vector<unsigned char> status(samples, 0);
    detail::parallel_for(samples, detail::resolve_threads(opts.threads),
                         [&](std::size_t begin, std::size_t end) {
                             for (std::size_t i = begin; i < end; ++i) {
                                 const auto w = sample_word(p, depth, seed, i);
                                 if (tau && !is_generic(p, w.word.view().first(
                                                                static_cast<std::size_t>(n)),
                                                        *tau)) {
                                     status[i] = 2;
                                     continue;
                                 }
                                 const double x = code_point(sys, w).value;
                                 const auto c =
                                     detail::count_for(sys, n, x, fuzz, p, tau, opts.budget);
                                 if (c.lower == 0) {
                                     status[i] = 1;
                                     continue;
                                 }
                                 lo[i] = std::log(static_cast<double>(c.lower));
                                 up[i] = std::log(static_cast<double>(c.upper));
                             }
                         });

    std::vector<double> good_lo;
    std::vector<double> good_up;
    good_lo.reserve(samples);
    good_up.reserve(samples);
    std::uint64_t flagged = 0;
    std::uint64_t non_generic = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        if (status[i] == 1) {
            ++flagged;
        } else if (status[i] == 2) {
            ++non_generic;
        } else {
            good_lo.push_back(lo[i]);
            good_up.push_back(up[i]);
        }
    }
    return detail::summarise(n, samples, tau, fuzz, depth, good_lo, good_up, flagged,
                             non_generic, opts.max_flagged_fraction);
}

/// Exact expectation of log beta_n over the atomic measure
/// sum_{|w| = quad_depth} p_w delta_{phi_w(midpoint)}.
inline OverlapEstimate estimate_overlap_exact(const IfsSystem& sys, const ProbabilityVector& p,
                                              int n, int quad_depth,
                                              std::optional<double> tau = std::nullopt,
                                              const EstimatorOptions& opts = {}) {
    if (n < 1) throw DomainError("estimator needs n >= 1");
    if (quad_depth < n) throw DomainError("quad_depth must be at least n");
    if (p.size() != sys.alphabet_size()) {
        throw AlphabetError("probability vector length differs from alphabet size");
    }
    std::vector<double> ratios;
    std::vector<double> offsets;
    enumerate_word_maps(sys, quad_depth, kProfileLimit, ratios, offsets);

    const std::size_t k = sys.alphabet_size();
    const std::size_t atoms = ratios.size();
    // atoms are enumerated with the first symbol most significant
    std::vector<double> weight(atoms);
    std::vector<unsigned char> generic(atoms, 1);
    std::vector<Symbol> digits(static_cast<std::size_t>(quad_depth));
    for (std::size_t w = 0; w < atoms; ++w) {
        double pw = 1.0;
        std::size_t code = w;
        for (int j = quad_depth - 1; j >= 0; --j) {
            digits[static_cast<std::size_t>(j)] = static_cast<Symbol>(code % k);
            pw *= p[code % k];
            code /= k;
        }
        weight[w] = pw;
        if (tau) {
            generic[w] = is_generic(p, std::span<const Symbol>(digits).first(
                                           static_cast<std::size_t>(n)), *tau);
        }
    }

    const double fuzz = opts.fuzz.value_or(default_fuzz(sys));
    const double mid = sys.hull().midpoint();
    std::vector<double> lo(atoms, 0.0);
    std::vector<double> up(atoms, 0.0);
    std::vector<unsigned char> bad(atoms, 0);
    detail::parallel_for(atoms, detail::resolve_threads(opts.threads),
                         [&](std::size_t begin, std::size_t end) {
                             for (std::size_t w = begin; w < end; ++w) {
                                 if (!generic[w]) continue;
                                 const double x = ratios[w] * mid + offsets[w];
                                 const auto c =
                                     detail::count_for(sys, n, x, fuzz, p, tau, opts.budget);
                                 if (c.lower == 0) {
                                     bad[w] = 1;
                                     continue;
                                 }
                                 lo[w] = std::log(static_cast<double>(c.lower));
                                 up[w] = std::log(static_cast<double>(c.upper));
                             }
                         });

    std::vector<double> wlo;
    std::vector<double> wup;
    std::vector<double> wts;
    std::uint64_t flagged = 0;
    std::uint64_t non_generic = 0;
    for (std::size_t w = 0; w < atoms; ++w) {
        if (!generic[w]) {
            ++non_generic;
            continue;
        }
        if (bad[w]) {
            ++flagged;
            continue;
        }
        wlo.push_back(weight[w] * lo[w]);
        wup.push_back(weight[w] * up[w]);
        wts.push_back(weight[w]);
    }
    if (static_cast<double>(flagged) > opts.max_flagged_fraction * static_cast<double>(atoms)) {
        throw FlaggedSampleError(std::to_string(flagged) + " of " + std::to_string(atoms) +
                                 " quadrature atoms had no certified chain");
    }
    const double total_w = detail::pairwise_sum(wts);
    OverlapEstimate est;
    est.n = n;
    est.samples = atoms;
    est.tau = tau;
    est.flagged = flagged;
    est.non_generic = non_generic;
    est.fuzz = fuzz;
    est.coding_depth = quad_depth;
    est.mean_log_beta = total_w > 0.0 ? detail::pairwise_sum(wlo) / total_w : 0.0;
    est.a_n = est.mean_log_beta / n;
    est.o_hat = std::exp(est.a_n);
    est.std_err = 0.0;
    est.ci_lo = est.o_hat;
    est.ci_hi = est.o_hat;
    est.lower_variant = est.o_hat;
    est.upper_variant =
        std::exp((total_w > 0.0 ? detail::pairwise_sum(wup) / total_w : 0.0) / n);
    return est;
}

/// Filter window as a function of n: none, a fixed tau, or c / sqrt(n).
struct TauSchedule {
    enum class Kind { kNone, kFixed, kCltScaled };
    Kind kind = Kind::kNone;
    double value = 0.0;

    static TauSchedule none() { return {}; }
    static TauSchedule fixed(double tau) { return {Kind::kFixed, tau}; }
    static TauSchedule clt_scaled(double c) { return {Kind::kCltScaled, c}; }

    [[nodiscard]] std::optional<double> at(int n) const {
        switch (kind) {
            case Kind::kNone:
                return std::nullopt;
            case Kind::kFixed:
                return value;
            case Kind::kCltScaled:
                return value / std::sqrt(static_cast<double>(n));
        }
        return std::nullopt;
    }
};

struct ConvergenceReport {
    std::vector<OverlapEstimate> estimates;
    double trend_slope = 0.0;      // least-squares slope of a_n against 1/n
    double trend_intercept = 0.0;  // a_n extrapolated to 1/n = 0

    [[nodiscard]] const OverlapEstimate& headline() const { return estimates.back(); }
};

/// Least-squares line y = intercept + slope * x.
inline std::pair<double, double> fit_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t m = x.size();
    if (m == 0) return {0.0, 0.0};
    if (m == 1) return {y[0], 0.0};
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(m);
    my /= static_cast<double>(m);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    return {my - slope * mx, slope};
}

inline ConvergenceReport convergence_scan(const IfsSystem& sys, const ProbabilityVector& p,
                                          std::span<const int> n_values, std::uint64_t samples,
                                          std::uint64_t seed,
                                          TauSchedule tau = TauSchedule::none(),
                                          const EstimatorOptions& opts = {}) {
    if (n_values.empty()) throw DomainError("convergence scan needs at least one n");
    for (std::size_t i = 1; i < n_values.size(); ++i) {
        if (n_values[i] <= n_values[i - 1]) {
            throw DomainError("convergence scan needs strictly increasing n values");
        }
    }
    ConvergenceReport rep;
    std::vector<double> inv_n;
    std::vector<double> a;
    for (int n : n_values) {
        rep.estimates.push_back(estimate_overlap_mc(sys, p, n, samples, tau.at(n), seed, opts));
        inv_n.push_back(1.0 / n);
        a.push_back(rep.estimates.back().a_n);
    }
    const auto [intercept, slope] = fit_line(inv_n, a);
    rep.trend_slope = slope;
    rep.trend_intercept = intercept;
    return rep;
}

}  // namespace overlap_ifs
