#pragma once

// Counting n-chains that reach a point x: the number of words w of length n
// with x in phi_w(hull).
//
// The pruned counter pulls the query interval [x - fuzz, x + fuzz] back
// through the prefix maps. Since phi_i(hull) is inside hull for every i, a
// prefix whose pulled-back query misses the hull has no extension whose image
// meets the query, so the branch is cut. `lower` counts words whose image
// contains the whole query interval, `upper` those whose image meets it.

#include <algorithm>
#include <cmath>
#include <iterator>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "overlap_ifs/errors.hpp"
#include "overlap_ifs/ifs_core.hpp"

namespace overlap_ifs {

inline constexpr std::uint64_t kDefaultNodeBudget = std::uint64_t{1} << 26;
inline constexpr std::uint64_t kBruteForceLimit = std::uint64_t{1} << 24;
inline constexpr std::uint64_t kProfileLimit = std::uint64_t{1} << 22;

struct ChainCount {
    int n = 0;
    std::uint64_t lower = 0;
    std::uint64_t upper = 0;
    double fuzz = 0.0;

    friend bool operator==(const ChainCount&, const ChainCount&) = default;
};

/// Default counting fuzz: 1e-9 times the hull diameter.
inline double default_fuzz(const IfsSystem& sys) { return 1e-9 * sys.hull().length(); }

/// |I|^n, saturating at uint64 max.
inline std::uint64_t word_count(std::size_t alphabet, int n) {
    std::uint64_t total = 1;
    for (int i = 0; i < n; ++i) {
        if (total > std::numeric_limits<std::uint64_t>::max() / alphabet) {
            return std::numeric_limits<std::uint64_t>::max();
        }
        total *= alphabet;
    }
    return total;
}

namespace detail {

inline void check_count_args(int n, double fuzz) {
    if (n < 0) throw DomainError("chain length must be nonnegative");
    if (!(fuzz >= 0.0) || !std::isfinite(fuzz)) throw DomainError("fuzz must be finite and >= 0");
}

/// Depth-first pullback search shared by the counting variants.
///
/// `Tag` carries per-branch bookkeeping (log-probability, number of zeros):
///   Tag step(Tag, Symbol) const;
///   bool admissible(const Tag&, int depth) const;
///   void leaf(const Tag&, bool lower_hit, bool upper_hit);
template <class Policy>
class PullbackSearch {
public:
    PullbackSearch(const IfsSystem& sys, int n, std::uint64_t budget, Policy& policy)
        : maps_(sys.maps()), lo_(sys.hull().lo), hi_(sys.hull().hi), n_(n), budget_(budget),
          policy_(policy) {}

    template <class Tag>
    void run(double x, double fuzz, Tag root) {
        descend(x - fuzz, x + fuzz, 0, root);
    }

    [[nodiscard]] std::uint64_t visits() const { return visits_; }

private:
    template <class Tag>
    void descend(double a, double b, int depth, const Tag& tag) {
        if (depth == n_) {
            const bool upper_hit = b >= lo_ && a <= hi_;
            const bool lower_hit = a >= lo_ && b <= hi_;
            policy_.leaf(tag, lower_hit, upper_hit);
            return;
        }
        if (depth == 0 && !(b >= lo_ && a <= hi_)) {
            return;
        }
        for (std::size_t i = 0; i < maps_.size(); ++i) {
            if (++visits_ > budget_) {
                throw BudgetError("chain search exceeded node budget of " +
                                  std::to_string(budget_) + " visits");
            }
            const auto& m = maps_[i];
            double pa = (a - m.offset) / m.ratio;
            double pb = (b - m.offset) / m.ratio;
            if (pb < pa) std::swap(pa, pb);
            if (pb < lo_ || pa > hi_) {
                continue;
            }
            Tag next = policy_.step(tag, static_cast<Symbol>(i));
            if (!policy_.admissible(next, depth + 1)) {
                continue;
            }
            descend(pa, pb, depth + 1, next);
        }
    }

    const std::vector<SimilarityMap>& maps_;
    double lo_;
    double hi_;
    int n_;
    std::uint64_t budget_;
    std::uint64_t visits_ = 0;
    Policy& policy_;
};

struct EmptyTag {};

struct PlainPolicy {
    std::uint64_t lower = 0;
    std::uint64_t upper = 0;
    EmptyTag step(EmptyTag, Symbol) const { return {}; }
    bool admissible(const EmptyTag&, int) const { return true; }
    void leaf(const EmptyTag&, bool lo, bool up) {
        lower += lo ? 1 : 0;
        upper += up ? 1 : 0;
    }
};

/// Keeps words with |(1/n) sum_j log p_{w_j} - h(p)| < tau.
struct GenericPolicy {
    std::vector<double> log_p;
    double min_log = 0.0;
    double max_log = 0.0;
    double window_lo = 0.0;  // n (h - tau)
    double window_hi = 0.0;  // n (h + tau)
    double h = 0.0;
    double tau = 0.0;
    int n = 0;
    std::uint64_t lower = 0;
    std::uint64_t upper = 0;

    double step(double s, Symbol i) const { return s + log_p[i]; }

    bool admissible(double s, int depth) const {
        const double remaining = n - depth;
        // slack keeps rounding in the running sum from cutting a valid branch
        const double slack = 1e-9 * (1.0 + std::abs(window_lo) + std::abs(window_hi));
        const double best_lo = s + remaining * min_log;
        const double best_hi = s + remaining * max_log;
        return best_hi > window_lo - slack && best_lo < window_hi + slack;
    }

    void leaf(double s, bool lo, bool up) {
        if (n > 0 && !(std::abs(s / n - h) < tau)) return;
        lower += lo ? 1 : 0;
        upper += up ? 1 : 0;
    }
};

struct OnesPolicy {
    std::vector<std::uint64_t> by_k;
    int step(int k, Symbol i) const { return k + (i == 0 ? 1 : 0); }
    bool admissible(int, int) const { return true; }
    void leaf(int k, bool lo, bool) {
        if (lo) ++by_k[static_cast<std::size_t>(k)];
    }
};

}  // namespace detail

/// beta_n(x) with certified lower/upper counts under the given fuzz.
inline ChainCount count_chains(const IfsSystem& sys, int n, double x, double fuzz,
                               std::uint64_t budget = kDefaultNodeBudget) {
    detail::check_count_args(n, fuzz);
    detail::PlainPolicy policy;
    detail::PullbackSearch<detail::PlainPolicy> search(sys, n, budget, policy);
    search.run(x, fuzz, detail::EmptyTag{});
    return {n, policy.lower, policy.upper, fuzz};
}

/// Reference implementation: enumerate every word and compose forward.
inline ChainCount count_chains_brute(const IfsSystem& sys, int n, double x, double fuzz) {
    detail::check_count_args(n, fuzz);
    const std::size_t k = sys.alphabet_size();
    const std::uint64_t total = word_count(k, n);
    if (total > kBruteForceLimit) {
        throw BudgetError("brute force enumeration of " + std::to_string(k) + "^" +
                          std::to_string(n) + " words exceeds 2^24");
    }
    const Interval query{x - fuzz, x + fuzz};
    const Interval& hull = sys.hull();
    ChainCount out{n, 0, 0, fuzz};
    Word w(std::vector<Symbol>(static_cast<std::size_t>(n), 0));
    for (std::uint64_t code = 0; code < total; ++code) {
        std::uint64_t c = code;
        for (int j = n - 1; j >= 0; --j) {
            w.symbols[static_cast<std::size_t>(j)] = static_cast<Symbol>(c % k);
            c /= k;
        }
        const Interval image = apply_word(sys, w, hull);
        if (image.contains(query)) ++out.lower;
        if (image.intersects(query)) ++out.upper;
    }
    return out;
}

/// Whether a word is tau-generic for p. Summation order matches the filtered
/// counter, so a sampled word and its own chain are classified alike.
inline bool is_generic(const ProbabilityVector& p, std::span<const Symbol> word, double tau) {
    if (word.empty()) return true;
    double s = 0.0;
    for (Symbol i : word) s += std::log(p[i]);
    return std::abs(s / static_cast<double>(word.size()) - p.entropy_sum()) < tau;
}

/// beta_n(x, tau, p): chains whose mean log-probability is within tau of h(p).
inline ChainCount count_chains_generic(const IfsSystem& sys, int n, double x, double fuzz,
                                       const ProbabilityVector& p, double tau,
                                       std::uint64_t budget = kDefaultNodeBudget) {
    detail::check_count_args(n, fuzz);
    if (!(tau > 0.0)) throw DomainError("tau must be positive");
    if (p.size() != sys.alphabet_size()) {
        throw AlphabetError("probability vector length differs from alphabet size");
    }
    detail::GenericPolicy policy;
    policy.log_p.reserve(p.size());
    for (double v : p.probs()) policy.log_p.push_back(std::log(v));
    policy.min_log = *std::min_element(policy.log_p.begin(), policy.log_p.end());
    policy.max_log = *std::max_element(policy.log_p.begin(), policy.log_p.end());
    policy.h = p.entropy_sum();
    policy.tau = tau;
    policy.n = n;
    if (std::isfinite(tau)) {
        policy.window_lo = n * (policy.h - tau);
        policy.window_hi = n * (policy.h + tau);
    } else {
        policy.window_lo = -std::numeric_limits<double>::infinity();
        policy.window_hi = std::numeric_limits<double>::infinity();
    }
    detail::PullbackSearch<detail::GenericPolicy> search(sys, n, budget, policy);
    search.run(x, fuzz, 0.0);
    return {n, policy.lower, policy.upper, fuzz};
}

/// Card W(x, n, k) for k = 0..n, k = number of occurrences of symbol 0.
/// Uses the lower (certified) count.
inline std::vector<std::uint64_t> count_by_ones(const IfsSystem& sys, int n, double x, double fuzz,
                                                std::uint64_t budget = kDefaultNodeBudget) {
    if (sys.alphabet_size() != 2) {
        throw UnsupportedError("count_by_ones needs a two-map system");
    }
    if (n < 1) throw DomainError("count_by_ones needs n >= 1");
    detail::check_count_args(n, fuzz);
    detail::OnesPolicy policy;
    policy.by_k.assign(static_cast<std::size_t>(n) + 1, 0);
    detail::PullbackSearch<detail::OnesPolicy> search(sys, n, budget, policy);
    search.run(x, fuzz, 0);
    return policy.by_k;
}

/// Coverage multiplicity of the depth-n images phi_w(hull) as a step function.
struct MultiplicityProfile {
    int n = 0;
    std::vector<double> breakpoints;
    std::vector<std::uint64_t> counts;  // counts[i] covers (breakpoints[i], breakpoints[i+1])

    [[nodiscard]] std::size_t gaps() const { return counts.size(); }

    /// Count on the open gap containing x; 0 outside the breakpoint range.
    /// A degenerate profile (all images one point) is a single gap [b, b].
    [[nodiscard]] std::uint64_t count_at(double x) const {
        if (breakpoints.size() == 2 && breakpoints[0] == breakpoints[1]) {
            return x == breakpoints[0] ? counts[0] : 0;
        }
        if (breakpoints.size() < 2 || x <= breakpoints.front() || x >= breakpoints.back()) {
            return 0;
        }
        const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
        return counts[static_cast<std::size_t>(it - breakpoints.begin()) - 1];
    }

    [[nodiscard]] std::uint64_t max_count() const {
        std::uint64_t m = 0;
        for (auto c : counts) m = std::max(m, c);
        return m;
    }

    /// Sum over gaps of length * count.
    [[nodiscard]] double weighted_length() const {
        double total = 0.0;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            total += (breakpoints[i + 1] - breakpoints[i]) * static_cast<double>(counts[i]);
        }
        return total;
    }
};

/// Affine coefficients (ratio, offset) of phi_w for every word of length n,
/// in lexicographic order with the first symbol most significant.
inline void enumerate_word_maps(const IfsSystem& sys, int n, std::uint64_t limit,
                                std::vector<double>& ratios, std::vector<double>& offsets) {
    const std::size_t k = sys.alphabet_size();
    const std::uint64_t total = word_count(k, n);
    if (total > limit) {
        throw BudgetError(std::to_string(k) + "^" + std::to_string(n) +
                          " words exceed the enumeration limit of " + std::to_string(limit));
    }
    ratios.assign(1, 1.0);
    offsets.assign(1, 0.0);
    std::vector<double> nr;
    std::vector<double> no;
    for (int d = 0; d < n; ++d) {
        nr.resize(ratios.size() * k);
        no.resize(ratios.size() * k);
        for (std::size_t w = 0; w < ratios.size(); ++w) {
            for (std::size_t i = 0; i < k; ++i) {
                // phi_{w i} = phi_w o phi_i
                const auto& m = sys.maps()[i];
                nr[w * k + i] = ratios[w] * m.ratio;
                no[w * k + i] = ratios[w] * m.offset + offsets[w];
            }
        }
        ratios.swap(nr);
        offsets.swap(no);
    }
}

inline MultiplicityProfile multiplicity_profile(const IfsSystem& sys, int n) {
    if (n < 0) throw DomainError("depth must be nonnegative");
    std::vector<double> ratios;
    std::vector<double> offsets;
    enumerate_word_maps(sys, n, kProfileLimit, ratios, offsets);

    const Interval& hull = sys.hull();
    std::vector<double> los(ratios.size());
    std::vector<double> his(ratios.size());
    for (std::size_t w = 0; w < ratios.size(); ++w) {
        const double a = ratios[w] * hull.lo + offsets[w];
        const double b = ratios[w] * hull.hi + offsets[w];
        los[w] = std::min(a, b);
        his[w] = std::max(a, b);
    }
    std::sort(los.begin(), los.end());
    std::sort(his.begin(), his.end());

    MultiplicityProfile prof;
    prof.n = n;
    prof.breakpoints.reserve(2 * los.size());
    std::merge(los.begin(), los.end(), his.begin(), his.end(),
               std::back_inserter(prof.breakpoints));
    prof.breakpoints.erase(std::unique(prof.breakpoints.begin(), prof.breakpoints.end()),
                           prof.breakpoints.end());
    if (prof.breakpoints.size() == 1) {
        prof.breakpoints.push_back(prof.breakpoints.front());
        prof.counts.assign(1, los.size());
        return prof;
    }

    // Sweep: intervals covering gap (b_i, b_{i+1}) are those with lo <= b_i < hi.
    prof.counts.resize(prof.breakpoints.size() - 1);
    std::size_t opened = 0;
    std::size_t closed = 0;
    for (std::size_t g = 0; g + 1 < prof.breakpoints.size(); ++g) {
        const double b = prof.breakpoints[g];
        while (opened < los.size() && los[opened] <= b) ++opened;
        while (closed < his.size() && his[closed] <= b) ++closed;
        prof.counts[g] = opened - closed;
    }
    return prof;
}

}  // namespace overlap_ifs
