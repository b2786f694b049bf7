#pragma once

// Exponential rank-visibility model p(r) = A * exp(-rate * r), calibrated so
// that the top slice of a timeline carries a target share of total attention.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "error.hpp"

namespace oonaudit {

struct DecayModel {
    double amplitude = 1.0;
    double rate = 0.0;  // per rank
    int reference_length = 0;
    double top_fraction = 0.2;
    double attention_fraction = 0.7;

    /// A * exp(-rate * rank), rank is 1-based. Capped at 1 so the unit
    /// amplitude policy cannot overshoot by an ulp at rank 1.
    double visibility(int rank) const { return std::min(1.0, amplitude * std::exp(-rate * rank)); }

    int top_count() const { return static_cast<int>(std::floor(top_fraction * reference_length)); }
};

inline double visibility(const DecayModel& model, int rank) { return model.visibility(rank); }

/// Share of attention held by ranks 1..top_count out of 1..length.
/// The geometric sums cancel down to a ratio of two (1 - e^-x) terms.
inline double attention_ratio(double rate, int top_count, int length) {
    return std::expm1(-rate * top_count) / std::expm1(-rate * length);
}

inline double calibration_residual(const DecayModel& m) {
    return attention_ratio(m.rate, m.top_count(), m.reference_length) - m.attention_fraction;
}

inline constexpr double kCalibrationRateLow = 1e-12;
inline constexpr double kCalibrationRateHigh = 10.0;
inline constexpr double kDegenerateMargin = 1e-6;
inline constexpr int kCalibrationMaxIterations = 200;

/// Solves for the decay rate by bisection. With no explicit amplitude,
/// A = e^rate so that rank 1 has visibility exactly 1.
inline DecayModel calibrate(int length, double top_fraction, double attention_fraction,
                            std::optional<double> explicit_amplitude = std::nullopt) {
    if (length < 5) throw ConfigError("calibrate: reference length must be >= 5");
    if (!(top_fraction > 0.0 && top_fraction < attention_fraction && attention_fraction < 1.0)) {
        if (top_fraction > 0.0 && attention_fraction < 1.0 && attention_fraction <= top_fraction) {
            throw DegenerateConstraintError(
                "calibrate: attention fraction must exceed top fraction");
        }
        throw ConfigError("calibrate: require 0 < top_fraction < attention_fraction < 1");
    }

    DecayModel m;
    m.reference_length = length;
    m.top_fraction = top_fraction;
    m.attention_fraction = attention_fraction;
    const int k = m.top_count();
    if (k < 1) throw ConfigError("calibrate: top slice is empty at this length");

    // The ratio rises monotonically from k/L (rate -> 0) towards 1.
    const double uniform_limit = static_cast<double>(k) / length;
    if (attention_fraction <= top_fraction + kDegenerateMargin ||
        attention_fraction <= uniform_limit + kDegenerateMargin) {
        throw DegenerateConstraintError(
            "calibrate: attention constraint degenerates to the uniform limit");
    }
    double lo = kCalibrationRateLow;
    double hi = kCalibrationRateHigh;
    if (attention_ratio(hi, k, length) < attention_fraction) {
        throw DegenerateConstraintError("calibrate: attention fraction unreachable");
    }
    for (int i = 0; i < kCalibrationMaxIterations && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (attention_ratio(mid, k, length) < attention_fraction) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    m.rate = 0.5 * (lo + hi);

    if (explicit_amplitude) {
        if (!(*explicit_amplitude > 0.0)) throw ConfigError("calibrate: amplitude must be positive");
        if (*explicit_amplitude * std::exp(-m.rate) > 1.0 + 1e-12) {
            throw ConfigError("calibrate: amplitude puts visibility above 1 at rank 1");
        }
        m.amplitude = *explicit_amplitude;
    } else {
        m.amplitude = std::exp(m.rate);
    }
    return m;
}

/// Model with fixed published constants, bypassing calibration.
inline DecayModel fixed_decay(double amplitude, double rate, int reference_length) {
    DecayModel m;
    m.amplitude = amplitude;
    m.rate = rate;
    m.reference_length = reference_length;
    return m;
}

}  // namespace oonaudit
