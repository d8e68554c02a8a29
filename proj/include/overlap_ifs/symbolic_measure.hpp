#pragma once

// Bernoulli sampling on the one-sided shift, the truncated coding map and
// the lift Phi(w, x) = (sigma w, phi_{w_1}(x)).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "overlap_ifs/errors.hpp"
#include "overlap_ifs/ifs_core.hpp"
#include "overlap_ifs/philox.hpp"

namespace overlap_ifs {

struct SampledWord {
    Word word;
    std::uint64_t stream_id = 0;  // sample index

    [[nodiscard]] std::size_t depth() const { return word.size(); }
};

/// Symbol drawn by inverting the cumulative distribution of p.
inline Symbol draw_symbol(const ProbabilityVector& p, double u) {
    double cum = 0.0;
    const std::size_t last = p.size() - 1;
    for (std::size_t j = 0; j < last; ++j) {
        cum += p[j];
        if (u < cum) return static_cast<Symbol>(j);
    }
    return static_cast<Symbol>(last);
}

/// Prefix of a nu_p-distributed sequence; a pure function of
/// (p, depth, seed, index, stream).
inline SampledWord sample_word(const ProbabilityVector& p, int depth, std::uint64_t seed,
                               std::uint64_t index, std::uint32_t stream = 0) {
    if (depth < 1) throw DomainError("sample depth must be at least 1");
    const CounterRng rng(seed, stream, index);
    std::vector<Symbol> symbols(static_cast<std::size_t>(depth));
    for (std::size_t j = 0; j < symbols.size(); ++j) {
        symbols[j] = draw_symbol(p, rng.uniform(j));
    }
    return {Word(std::move(symbols)), index};
}

struct CodedPoint {
    double value = 0.0;
    double error_bound = 0.0;  // |value - pi(w)| <= error_bound
};

/// phi_{w_1...w_m}(hull midpoint) with the contraction-product error bound.
inline CodedPoint code_point(const IfsSystem& sys, const Word& w) {
    if (w.empty()) throw DomainError("coding needs a nonempty word");
    const Interval& hull = sys.hull();
    double contraction = 1.0;
    for (Symbol s : w.symbols) {
        if (s >= sys.alphabet_size()) throw AlphabetError("symbol outside alphabet");
        contraction *= std::abs(sys.maps()[s].ratio);
    }
    return {apply_word(sys, w, hull.midpoint()), contraction * hull.length() / 2.0};
}

inline CodedPoint code_point(const IfsSystem& sys, const SampledWord& w) {
    return code_point(sys, w.word);
}

/// Smallest depth m with max|r|^m * diam / 2 below fuzz / 10.
inline int coding_depth_for(const IfsSystem& sys, double fuzz) {
    const double diam = sys.hull().length();
    if (diam == 0.0) return 1;
    if (!(fuzz > 0.0)) throw DomainError("coding depth needs a positive fuzz");
    const double m = std::log(fuzz / (10.0 * diam)) / std::log(sys.max_contraction());
    return std::max(1, static_cast<int>(std::ceil(m)));
}

/// A point of Sigma^+ x hull; the symbolic part is the unread tail of `window`.
struct LiftState {
    Word window;
    std::size_t head = 0;
    double x = 0.0;

    [[nodiscard]] std::size_t remaining() const { return window.size() - head; }
};

/// Phi(w, x) = (sigma w, phi_{w_1}(x)).
inline LiftState lift_step(const IfsSystem& sys, LiftState state) {
    if (state.remaining() == 0) throw ExhaustedError("lift window exhausted");
    const Symbol s = state.window[state.head];
    if (s >= sys.alphabet_size()) throw AlphabetError("symbol outside alphabet");
    state.x = apply(sys.maps()[s], state.x);
    ++state.head;
    return state;
}

/// Phi^steps; x becomes phi_{w_steps} o ... o phi_{w_1}(x).
inline LiftState lift(const IfsSystem& sys, LiftState state, std::size_t steps) {
    if (steps > state.remaining()) throw ExhaustedError("lift window exhausted");
    check_word(sys, state.window.view());
    const auto& maps = sys.maps();
    for (std::size_t k = 0; k < steps; ++k) {
        state.x = apply(maps[state.window[state.head]], state.x);
        ++state.head;
    }
    return state;
}

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw DomainError("KS statistic needs nonempty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

/// Asymptotic two-sample critical value at significance alpha:
/// sqrt(-ln(alpha/2)/2) * sqrt((n+m)/(n m)).
inline double ks_critical_value(std::size_t n, std::size_t m, double alpha) {
    const double c = std::sqrt(-std::log(alpha / 2.0) / 2.0);
    const double dn = static_cast<double>(n);
    const double dm = static_cast<double>(m);
    return c * std::sqrt((dn + dm) / (dn * dm));
}

struct ProjectionTestReport {
    double ks = 0.0;
    double threshold = 0.0;
    std::size_t samples = 0;
    int depth = 0;
    bool pass = false;
};

/// Compares pi_* nu_p (coded points) with the second-coordinate law of
/// Phi^depth(w, midpoint), w ~ nu_q. For q = p both are the same measure;
/// passing a different q gives a negative control.
inline ProjectionTestReport projection_equality_test(const IfsSystem& sys,
                                                     const ProbabilityVector& p,
                                                     const ProbabilityVector& q, std::size_t n,
                                                     int depth, std::uint64_t seed,
                                                     double quantile = 0.999) {
    if (n < 1000) throw DomainError("projection test needs at least 1000 samples");
    if (p.size() != sys.alphabet_size() || q.size() != sys.alphabet_size()) {
        throw AlphabetError("probability vector length differs from alphabet size");
    }
    std::vector<double> coded(n);
    std::vector<double> lifted(n);
    const double mid = sys.hull().midpoint();
    for (std::size_t i = 0; i < n; ++i) {
        coded[i] = code_point(sys, sample_word(p, depth, seed, i, 1)).value;
        LiftState st{sample_word(q, depth, seed, i, 2).word, 0, mid};
        lifted[i] = lift(sys, std::move(st), static_cast<std::size_t>(depth)).x;
    }
    ProjectionTestReport rep;
    rep.samples = n;
    rep.depth = depth;
    rep.ks = ks_statistic(std::move(coded), std::move(lifted));
    rep.threshold = ks_critical_value(n, n, 1.0 - quantile);
    rep.pass = rep.ks < rep.threshold;
    return rep;
}

inline ProjectionTestReport projection_equality_test(const IfsSystem& sys,
                                                     const ProbabilityVector& p, std::size_t n,
                                                     int depth, std::uint64_t seed) {
    return projection_equality_test(sys, p, p, n, depth, seed);
}

}  // namespace overlap_ifs
