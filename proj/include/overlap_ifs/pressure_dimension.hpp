#pragma once

// Pressure P(t) = log sum_i |r_i|^t - alpha of a similarity system with a
// Bernoulli-type potential, its zero, and the dimension bounds that follow
// for Bernoulli convolutions:
//
//   HD(nu_lambda) <= log(2 / o) / |log lambda|,   o <= 2 lambda^HD.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "overlap_ifs/errors.hpp"
#include "overlap_ifs/ifs_core.hpp"

namespace overlap_ifs {

inline constexpr double kDefaultPressureTolerance = 1e-13;

struct PressureParams {
    std::vector<double> log_ratios;  // log|r_i| < 0
    double alpha = 0.0;              // log of an overlap number, >= 0

    PressureParams(std::vector<double> logs, double alpha_)
        : log_ratios(std::move(logs)), alpha(alpha_) {
        if (log_ratios.empty()) throw InvariantError("pressure needs at least one ratio");
        for (double l : log_ratios) {
            if (!(l < 0.0) || !std::isfinite(l)) {
                throw InvariantError("log ratios must be finite and negative");
            }
        }
        if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
            throw InvariantError("alpha must be finite and nonnegative");
        }
    }

    static PressureParams from_system(const IfsSystem& sys, double alpha) {
        std::vector<double> logs;
        for (const auto& m : sys.maps()) logs.push_back(std::log(std::abs(m.ratio)));
        return PressureParams(std::move(logs), alpha);
    }
};

struct DimensionBound {
    double t_zero = 0.0;
    double effective_bound = 0.0;  // clamp(t_zero, 0, 1)
    double residual = 0.0;         // |P(t_zero)|
};

inline double clamp_dimension(double t) { return std::min(std::max(t, 0.0), 1.0); }

/// log(sum_i exp(t log|r_i|)) - alpha, stabilised by the largest term.
inline double pressure(const PressureParams& params, double t) {
    double peak = -std::numeric_limits<double>::infinity();
    for (double l : params.log_ratios) peak = std::max(peak, t * l);
    double acc = 0.0;
    for (double l : params.log_ratios) acc += std::exp(t * l - peak);
    return peak + std::log(acc) - params.alpha;
}

/// Unique zero of the strictly decreasing pressure, by bisection.
inline DimensionBound pressure_zero(const PressureParams& params,
                                    double tol = kDefaultPressureTolerance) {
    if (!(tol > 0.0)) throw DomainError("pressure tolerance must be positive");
    double a = 0.0;
    double b = 0.0;
    const double p0 = pressure(params, 0.0);
    if (p0 == 0.0) {
        return {0.0, 0.0, 0.0};
    }
    // P -> -inf as t -> +inf and P -> +inf as t -> -inf
    double step = 1.0;
    if (p0 > 0.0) {
        b = step;
        while (pressure(params, b) > 0.0) {
            a = b;
            step *= 2.0;
            b += step;
        }
    } else {
        a = -step;
        while (pressure(params, a) < 0.0) {
            b = a;
            step *= 2.0;
            a -= step;
        }
    }
    double t = 0.5 * (a + b);
    double pt = pressure(params, t);
    for (int it = 0; it < 2000 && std::abs(pt) > tol; ++it) {
        if (pt > 0.0) {
            a = t;
        } else {
            b = t;
        }
        const double mid = 0.5 * (a + b);
        if (mid == a || mid == b) break;
        t = mid;
        pt = pressure(params, t);
    }
    return {t, clamp_dimension(t), std::abs(pt)};
}

namespace detail {

inline void check_lambda(double lambda) {
    if (!(lambda > 0.5 && lambda < 1.0)) throw DomainError("lambda must lie in (1/2, 1)");
}

inline void check_overlap_value(double o) {
    if (!(o >= 1.0 && o <= 2.0)) throw DomainError("overlap number must lie in [1, 2]");
}

}  // namespace detail

/// log(2 / o) / |log lambda| for S_lambda = {lambda x - 1, lambda x + 1}.
inline DimensionBound hd_bound_bernoulli_convolution(double lambda, double o_value) {
    detail::check_lambda(lambda);
    detail::check_overlap_value(o_value);
    const double log_lambda = std::log(lambda);
    const double t = std::log(2.0 / o_value) / std::abs(log_lambda);
    const PressureParams params({log_lambda, log_lambda}, std::log(o_value));
    return {t, clamp_dimension(t), std::abs(pressure(params, t))};
}

/// 2 lambda^hd.
inline double overlap_upper_from_hd(double lambda, double hd_value) {
    detail::check_lambda(lambda);
    if (!(hd_value >= 0.0 && hd_value <= 1.0)) throw DomainError("dimension must lie in [0, 1]");
    return 2.0 * std::pow(lambda, hd_value);
}

/// Same bound with the overlap number of a biased measure nu_{(p, 1-p)}.
inline DimensionBound hd_bound_biased(double lambda, double o_biased) {
    return hd_bound_bernoulli_convolution(lambda, o_biased);
}

}  // namespace overlap_ifs
