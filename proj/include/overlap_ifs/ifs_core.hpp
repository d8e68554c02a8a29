#pragma once

// Similarity maps on the real line, systems of them, words over the
// alphabet, and Bernoulli probability vectors.
//
// Word convention: the first symbol is the outermost map, so the word
// (i_1, ..., i_m) acts as phi_{i_1} o phi_{i_2} o ... o phi_{i_m}.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "overlap_ifs/errors.hpp"

namespace overlap_ifs {

using Symbol = std::uint32_t;

inline constexpr double kDefaultHullTolerance = 1e-13;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
        if (!(lo <= hi)) {
            throw InvariantError("interval requires lo <= hi");
        }
    }

    [[nodiscard]] double length() const { return hi - lo; }
    [[nodiscard]] double midpoint() const { return lo + 0.5 * (hi - lo); }
    [[nodiscard]] bool contains(double x) const { return lo <= x && x <= hi; }
    [[nodiscard]] bool contains(const Interval& other) const {
        return lo <= other.lo && other.hi <= hi;
    }
    [[nodiscard]] bool intersects(const Interval& other) const {
        return other.lo <= hi && lo <= other.hi;
    }

    friend bool operator==(const Interval&, const Interval&) = default;
};

/// x -> ratio * x + offset with 0 < |ratio| < 1.
struct SimilarityMap {
    double ratio = 0.5;
    double offset = 0.0;

    SimilarityMap() = default;
    SimilarityMap(double ratio_, double offset_) : ratio(ratio_), offset(offset_) {
        if (!std::isfinite(ratio) || !std::isfinite(offset)) {
            throw InvariantError("similarity map coefficients must be finite");
        }
        if (!(std::abs(ratio) > 0.0 && std::abs(ratio) < 1.0)) {
            throw InvariantError("similarity map ratio must satisfy 0 < |ratio| < 1");
        }
    }

    [[nodiscard]] double fixed_point() const { return offset / (1.0 - ratio); }

    friend bool operator==(const SimilarityMap&, const SimilarityMap&) = default;
};

inline double apply(const SimilarityMap& map, double x) { return map.ratio * x + map.offset; }

inline double inverse_apply(const SimilarityMap& map, double x) {
    return (x - map.offset) / map.ratio;
}

/// Image of an interval; orientation-reversing maps swap the endpoints.
inline Interval apply(const SimilarityMap& map, const Interval& iv) {
    const double a = apply(map, iv.lo);
    const double b = apply(map, iv.hi);
    return a <= b ? Interval{a, b} : Interval{b, a};
}

/// Smallest interval H with hull(U_i phi_i(H)) = H, to within `tol`.
///
/// Iterates H <- hull(U_i phi_i(H)) from the span of the map fixed points
/// inflated by a factor 2. The converged endpoints are then replaced by the
/// exact solution of the endpoint equations selected by the iterate, and
/// widened until the floating point images of H lie inside H.
inline Interval attractor_hull(std::span<const SimilarityMap> maps,
                               double tol = kDefaultHullTolerance) {
    if (maps.empty()) {
        throw InvariantError("attractor_hull needs at least one map");
    }
    if (!(tol > 0.0)) {
        throw DomainError("attractor_hull tolerance must be positive");
    }
    for (const auto& m : maps) {
        // re-run the constructor check; aggregates may have been mutated
        SimilarityMap checked(m.ratio, m.offset);
        (void)checked;
    }

    double fp_lo = std::numeric_limits<double>::infinity();
    double fp_hi = -std::numeric_limits<double>::infinity();
    for (const auto& m : maps) {
        fp_lo = std::min(fp_lo, m.fixed_point());
        fp_hi = std::max(fp_hi, m.fixed_point());
    }
    const double centre = 0.5 * (fp_lo + fp_hi);
    const double half = 0.5 * (fp_hi - fp_lo);
    double lo = centre - 2.0 * half;
    double hi = centre + 2.0 * half;
    const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
    double rmax = 0.0;
    for (const auto& m : maps) rmax = std::max(rmax, std::abs(m.ratio));

    auto image_hull = [&](double a, double b) {
        double nlo = std::numeric_limits<double>::infinity();
        double nhi = -std::numeric_limits<double>::infinity();
        for (const auto& m : maps) {
            const double u = apply(m, a);
            const double v = apply(m, b);
            nlo = std::min({nlo, u, v});
            nhi = std::max({nhi, u, v});
        }
        return std::pair{nlo, nhi};
    };

    constexpr int kMaxIterations = 10'000'000;
    for (int it = 0; it < kMaxIterations; ++it) {
        const auto [nlo, nhi] = image_hull(lo, hi);
        const double moved = std::max(std::abs(nlo - lo), std::abs(nhi - hi));
        lo = nlo;
        hi = nhi;
        // remaining distance to the fixed interval is at most moved * rmax / (1 - rmax)
        if (moved < tol * scale * (1.0 - rmax)) {
            break;
        }
    }

    // Each endpoint is the image of an endpoint under one map. With the active
    // choices read off the converged iterate, the pair solves a 2x2 linear system.
    struct Active {
        const SimilarityMap* map;
        bool from_hi;
    };
    auto pick = [&](bool want_hi) {
        Active best{&maps[0], false};
        double best_val = want_hi ? -std::numeric_limits<double>::infinity()
                                  : std::numeric_limits<double>::infinity();
        for (const auto& m : maps) {
            for (bool from_hi : {false, true}) {
                const double v = apply(m, from_hi ? hi : lo);
                if (want_hi ? v > best_val : v < best_val) {
                    best_val = v;
                    best = Active{&m, from_hi};
                }
            }
        }
        return best;
    };
    const Active a = pick(false);
    const Active b = pick(true);
    const double ra = a.map->ratio;
    const double ca = a.map->offset;
    const double rb = b.map->ratio;
    const double cb = b.map->offset;
    double exact_lo = lo;
    double exact_hi = hi;
    if (!a.from_hi && b.from_hi) {
        exact_lo = ca / (1.0 - ra);
        exact_hi = cb / (1.0 - rb);
    } else if (a.from_hi && !b.from_hi) {
        exact_lo = (ra * cb + ca) / (1.0 - ra * rb);
        exact_hi = rb * exact_lo + cb;
    } else if (!a.from_hi && !b.from_hi) {
        exact_lo = ca / (1.0 - ra);
        exact_hi = rb * exact_lo + cb;
    } else {
        exact_hi = cb / (1.0 - rb);
        exact_lo = ra * exact_hi + ca;
    }
    const double snap_tol = 1e3 * tol * scale;
    if (std::abs(exact_lo - lo) <= snap_tol && std::abs(exact_hi - hi) <= snap_tol) {
        lo = exact_lo;
        hi = exact_hi;
    }
    if (hi < lo) {
        std::swap(lo, hi);
    }

    for (int guard = 0; guard < 256; ++guard) {
        const auto [ilo, ihi] = image_hull(lo, hi);
        if (ilo >= lo && ihi <= hi) {
            break;
        }
        if (ilo < lo) {
            lo = std::nextafter(std::min(ilo, lo), -std::numeric_limits<double>::infinity());
        }
        if (ihi > hi) {
            hi = std::nextafter(std::max(ihi, hi), std::numeric_limits<double>::infinity());
        }
    }
    return Interval{lo, hi};
}

/// A finite word over the alphabet {0, ..., |I|-1}.
struct Word {
    std::vector<Symbol> symbols;

    Word() = default;
    explicit Word(std::vector<Symbol> s) : symbols(std::move(s)) {}
    Word(std::initializer_list<Symbol> s) : symbols(s) {}

    [[nodiscard]] std::size_t size() const { return symbols.size(); }
    [[nodiscard]] bool empty() const { return symbols.empty(); }
    Symbol operator[](std::size_t i) const { return symbols[i]; }
    [[nodiscard]] std::span<const Symbol> view() const { return symbols; }

    friend bool operator==(const Word&, const Word&) = default;
};

inline Word concat(const Word& u, const Word& v) {
    Word out = u;
    out.symbols.insert(out.symbols.end(), v.symbols.begin(), v.symbols.end());
    return out;
}

inline Word reversed(const Word& w) {
    return Word(std::vector<Symbol>(w.symbols.rbegin(), w.symbols.rend()));
}

class IfsSystem {
public:
    explicit IfsSystem(std::vector<SimilarityMap> maps, double hull_tol = kDefaultHullTolerance)
        : maps_(std::move(maps)) {
        if (maps_.empty()) {
            throw InvariantError("an IFS needs at least one map");
        }
        hull_ = attractor_hull(maps_, hull_tol);
    }

    /// S_1(x) = lambda x - 1, S_2(x) = lambda x + 1 (symbols 0 and 1).
    static IfsSystem bernoulli_convolution(double lambda) {
        if (!(lambda > 0.0 && lambda < 1.0)) {
            throw DomainError("bernoulli convolution needs lambda in (0, 1)");
        }
        IfsSystem sys({SimilarityMap{lambda, -1.0}, SimilarityMap{lambda, 1.0}});
        sys.bernoulli_lambda_ = lambda;
        return sys;
    }

    [[nodiscard]] const std::vector<SimilarityMap>& maps() const { return maps_; }
    [[nodiscard]] const SimilarityMap& map(Symbol i) const { return maps_.at(i); }
    [[nodiscard]] const Interval& hull() const { return hull_; }
    [[nodiscard]] std::size_t alphabet_size() const { return maps_.size(); }
    [[nodiscard]] std::optional<double> bernoulli_lambda() const { return bernoulli_lambda_; }

    [[nodiscard]] double max_contraction() const {
        double r = 0.0;
        for (const auto& m : maps_) r = std::max(r, std::abs(m.ratio));
        return r;
    }

private:
    std::vector<SimilarityMap> maps_;
    Interval hull_;
    std::optional<double> bernoulli_lambda_;
};

inline void check_word(const IfsSystem& sys, std::span<const Symbol> w) {
    for (Symbol s : w) {
        if (s >= sys.alphabet_size()) {
            throw AlphabetError("symbol " + std::to_string(s) + " outside alphabet of size " +
                                std::to_string(sys.alphabet_size()));
        }
    }
}

/// phi_{w_1} o ... o phi_{w_n}(x); the last symbol is applied first.
inline double apply_word(const IfsSystem& sys, std::span<const Symbol> w, double x) {
    check_word(sys, w);
    const auto& maps = sys.maps();
    for (auto it = w.rbegin(); it != w.rend(); ++it) {
        x = apply(maps[*it], x);
    }
    return x;
}

inline double apply_word(const IfsSystem& sys, const Word& w, double x) {
    return apply_word(sys, w.view(), x);
}

inline Interval apply_word(const IfsSystem& sys, const Word& w, const Interval& iv) {
    const double a = apply_word(sys, w, iv.lo);
    const double b = apply_word(sys, w, iv.hi);
    return a <= b ? Interval{a, b} : Interval{b, a};
}

class ProbabilityVector {
public:
    explicit ProbabilityVector(std::vector<double> probs) : probs_(std::move(probs)) {
        if (probs_.empty()) {
            throw InvariantError("probability vector must be nonempty");
        }
        double total = 0.0;
        for (double p : probs_) {
            if (!(p > 0.0) || !std::isfinite(p)) {
                throw InvariantError("probabilities must be strictly positive");
            }
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-12) {
            throw InvariantError("probabilities must sum to 1");
        }
        entropy_sum_ = 0.0;
        for (double p : probs_) entropy_sum_ += p * std::log(p);
    }

    static ProbabilityVector uniform(std::size_t k) {
        return ProbabilityVector(std::vector<double>(k, 1.0 / static_cast<double>(k)));
    }

    [[nodiscard]] std::size_t size() const { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_[i]; }
    [[nodiscard]] const std::vector<double>& probs() const { return probs_; }
    /// h(p) = sum_j p_j log p_j (non-positive).
    [[nodiscard]] double entropy_sum() const { return entropy_sum_; }

    [[nodiscard]] bool is_uniform() const {
        return std::all_of(probs_.begin(), probs_.end(),
                           [&](double p) { return p == probs_.front(); });
    }

private:
    std::vector<double> probs_;
    double entropy_sum_ = 0.0;
};

struct ValidationReport {
    bool contractions_ok = true;
    bool hull_invariant = true;  // union of phi_i(hull) inside hull
    bool hull_minimal = true;    // hull of the images equals the hull
    bool overlap = false;        // some phi_i(hull) and phi_j(hull), i != j, intersect
    bool covers_hull = false;    // images cover the hull without gaps (attractor = hull)
    std::vector<std::pair<Symbol, Symbol>> overlapping_pairs;
    std::vector<std::string> notes;

    [[nodiscard]] bool ok() const { return contractions_ok && hull_invariant && hull_minimal; }
};

inline ValidationReport validate_system(const IfsSystem& sys, double tol = 1e-9) {
    ValidationReport rep;
    const auto& h = sys.hull();
    const double scale = std::max({1.0, std::abs(h.lo), std::abs(h.hi)});

    std::vector<Interval> images;
    for (const auto& m : sys.maps()) {
        if (!(std::abs(m.ratio) > 0.0 && std::abs(m.ratio) < 1.0)) {
            rep.contractions_ok = false;
        }
        images.push_back(apply(m, h));
    }
    double ulo = images.front().lo;
    double uhi = images.front().hi;
    for (const auto& im : images) {
        ulo = std::min(ulo, im.lo);
        uhi = std::max(uhi, im.hi);
        if (im.lo < h.lo - tol * scale || im.hi > h.hi + tol * scale) {
            rep.hull_invariant = false;
        }
    }
    if (std::abs(ulo - h.lo) > tol * scale || std::abs(uhi - h.hi) > tol * scale) {
        rep.hull_minimal = false;
    }
    for (std::size_t i = 0; i < images.size(); ++i) {
        for (std::size_t j = i + 1; j < images.size(); ++j) {
            if (images[i].intersects(images[j])) {
                rep.overlap = true;
                rep.overlapping_pairs.emplace_back(static_cast<Symbol>(i), static_cast<Symbol>(j));
            }
        }
    }

    auto sorted = images;
    std::sort(sorted.begin(), sorted.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    double reach = sorted.front().hi;
    rep.covers_hull = sorted.front().lo <= h.lo;
    for (const auto& im : sorted) {
        if (im.lo > reach) {
            rep.covers_hull = false;
        }
        reach = std::max(reach, im.hi);
    }
    rep.covers_hull = rep.covers_hull && reach >= h.hi;

    if (!rep.contractions_ok) rep.notes.emplace_back("some map is not a contraction");
    if (!rep.hull_invariant) rep.notes.emplace_back("images of the hull leave the hull");
    if (!rep.hull_minimal) rep.notes.emplace_back("hull is not the minimal invariant interval");
    if (!rep.covers_hull && h.length() > 0.0) {
        rep.notes.emplace_back(
            "images leave gaps: the attractor is a Cantor-type set and hull-based chain counts "
            "are upper bounds for counts against the attractor");
    }
    return rep;
}

}  // namespace overlap_ifs
