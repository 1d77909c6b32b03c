#pragma once

// Coherent-state overlap geometry, photon-number statistics, and the
// binary-channel information quantities used by the analytic and
// simulation layers. All functions are pure.

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace qkd {

// Mean photon number mu = |alpha|^2 of a weak coherent pulse.
struct MeanPhotonNumber {
    double mu;

    explicit MeanPhotonNumber(double value) : mu(value) {
        if (!std::isfinite(value) || value < 0.0)
            throw std::domain_error("mean photon number must be finite and >= 0, got " +
                                    std::to_string(value));
    }
};

// Angle delta between the two signal states: cos(delta) = |<alpha|-alpha>| = e^{-2 mu}.
struct OverlapAngle {
    double delta;      // radians, in [0, pi/2]
    double cos_delta;  // cached overlap, in [0, 1]

    double sin_delta() const { return std::sin(delta); }
};

inline OverlapAngle overlap_angle(MeanPhotonNumber mu) {
    const double cd = std::exp(-2.0 * mu.mu);
    return OverlapAngle{std::acos(cd), cd};
}

inline void check_angle(const OverlapAngle& a) {
    constexpr double half_pi = 1.57079632679489661923;
    if (!(a.delta >= 0.0 && a.delta <= half_pi))
        throw std::domain_error("overlap angle out of [0, pi/2]");
}

// Error probability of the symmetric orthogonal projection: q = (1 - sin delta)/2.
inline double sym_projection_error(const OverlapAngle& a) {
    check_angle(a);
    return (1.0 - a.sin_delta()) / 2.0;
}

// Shannon entropy of a binary variable, in bits. 0*log(0) = 0 by continuity.
inline double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::domain_error("binary_entropy: p outside [0,1]");
    if (p == 0.0 || p == 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

// Maximum information extractable from two states with overlap cos(delta):
// 1 - H2((1 - sin delta)/2).
inline double max_extractable_info(const OverlapAngle& a) {
    return 1.0 - binary_entropy(sym_projection_error(a));
}

enum class PhotonStats { Poisson, Thermal };

struct PhotonDistribution {
    PhotonStats kind;
    MeanPhotonNumber mean;
};

inline double photon_number_pmf(const PhotonDistribution& dist, unsigned n) {
    const double mu = dist.mean.mu;
    if (dist.kind == PhotonStats::Poisson) {
        if (mu == 0.0) return n == 0 ? 1.0 : 0.0;
        // e^{-mu} mu^n / n!, in log space to survive large n
        double log_p = -mu + n * std::log(mu) - std::lgamma(n + 1.0);
        return std::exp(log_p);
    }
    // Bose-Einstein: mu^n / (1+mu)^{n+1}
    if (mu == 0.0) return n == 0 ? 1.0 : 0.0;
    return std::exp(n * std::log(mu) - (n + 1.0) * std::log1p(mu));
}

// P(n = 0) and P(n = 1) in closed form.
inline double vacuum_prob(const PhotonDistribution& dist) {
    return photon_number_pmf(dist, 0);
}

struct MultiphotonFraction {
    double p_multi;                          // P(n >= 2)
    std::optional<double> given_nonzero;     // P(n >= 2 | n >= 1); empty when mu = 0
};

inline MultiphotonFraction multiphoton_fraction(const PhotonDistribution& dist) {
    const double p0 = photon_number_pmf(dist, 0);
    const double p1 = photon_number_pmf(dist, 1);
    double p_multi = 1.0 - p0 - p1;
    if (p_multi < 0.0) p_multi = 0.0;  // round-off at tiny mu
    if (dist.mean.mu == 0.0) return {0.0, std::nullopt};
    return {p_multi, p_multi / (1.0 - p0)};
}

}  // namespace qkd
