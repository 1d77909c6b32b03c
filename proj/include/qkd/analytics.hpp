#pragma once

// Closed-form transmission rates, error rates and mutual-information
// formulas for the 4-state, 2-state and 4+2 protocols, the normalized
// information-vs-rate comparison curves, and the lossy-line leakage bounds.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qkd/quantum_math.hpp"

namespace qkd {

enum class ProtocolKind { FourState, TwoState, FourPlusTwo };

inline const char* protocol_name(ProtocolKind k) {
    switch (k) {
        case ProtocolKind::FourState:   return "4-state";
        case ProtocolKind::TwoState:    return "2-state";
        case ProtocolKind::FourPlusTwo: return "4+2";
    }
    return "?";
}

struct EavesdropFraction {
    double eta;
    explicit EavesdropFraction(double value) : eta(value) {
        if (!(value >= 0.0 && value <= 1.0))
            throw std::domain_error("eavesdrop fraction must be in [0,1]");
    }
};

struct InfoReport {
    double i_ae = 0.0;  // Alice-Eve mutual information, bits per sifted bit
    double i_eb = 0.0;  // Eve-Bob mutual information, bits per sifted bit
    ProtocolKind protocol;
};

// --- transmission rates -----------------------------------------------------

// 4-state: half the non-empty pulses survive basis sifting.
inline double rate_4(MeanPhotonNumber mu) {
    return (1.0 - std::exp(-mu.mu)) / 2.0;
}

// Probability of an inconclusive result at the interferometric receiver;
// equals the overlap between the two signal states.
inline double inconclusive_prob(MeanPhotonNumber mu) {
    return std::exp(-2.0 * mu.mu);
}

// 2-state: everything conclusive is kept.
inline double rate_2(MeanPhotonNumber mu) {
    return 1.0 - inconclusive_prob(mu);
}

// 4+2: conclusive and matched-basis, i.e. exactly half of rate_2.
inline double rate_42(MeanPhotonNumber mu) {
    return rate_2(mu) / 2.0;
}

// --- error rates and information under intercept/resend ----------------------

// 4-state with interception fraction eta: Q = eta/4, I_AE = I_EB = 2Q.
inline InfoReport info_4(double qber) {
    if (!(qber >= 0.0))
        throw std::domain_error("info_4: negative error rate");
    if (qber > 0.25 + 1e-12)
        throw std::domain_error("info_4: Q > 1/4 is infeasible for intercept/resend");
    return {2.0 * qber, 2.0 * qber, ProtocolKind::FourState};
}

inline double qber_2(EavesdropFraction eta, const OverlapAngle& delta) {
    return eta.eta * sym_projection_error(delta);
}

inline InfoReport info_2(double qber, const OverlapAngle& delta) {
    const double q = sym_projection_error(delta);
    const double eta_implied = q > 0.0 ? qber / q : 0.0;
    if (eta_implied > 1.0 + 1e-9)
        throw std::domain_error("info_2: error rate implies eta > 1");
    const double scale = 2.0 * qber / (1.0 - delta.sin_delta());  // = eta_implied
    return {scale * max_extractable_info(delta), scale, ProtocolKind::TwoState};
}

inline double qber_42(EavesdropFraction eta, const OverlapAngle& delta) {
    return (eta.eta / 2.0) * (1.0 - delta.sin_delta() / 2.0);
}

inline InfoReport info_42(double qber, const OverlapAngle& delta) {
    const double per_eta = 0.5 * (1.0 - delta.sin_delta() / 2.0);  // Q at eta = 1
    if (qber > per_eta + 1e-9)
        throw std::domain_error("info_42: error rate implies eta > 1");
    const double scale = qber / (1.0 - delta.sin_delta() / 2.0);  // = eta/2
    return {scale * max_extractable_info(delta), scale, ProtocolKind::FourPlusTwo};
}

// --- normalized comparison curves -------------------------------------------

// One point of the information-vs-rate comparison. Ratios are taken against
// the 4-state value 2Q at equal error rate, so the eta dependence cancels.
struct InfoCurvePoint {
    double t = 0.0;
    double norm_i_ae = 0.0;
    double norm_i_eb = 0.0;
    bool feasible = false;  // false when t is outside the protocol's rate range
};

// Invert the rate formula to the overlap angle at which the protocol
// reaches transmission rate t.
inline OverlapAngle angle_at_rate(ProtocolKind protocol, double t) {
    double cd;
    switch (protocol) {
        case ProtocolKind::TwoState:    cd = 1.0 - t; break;
        case ProtocolKind::FourPlusTwo: cd = 1.0 - 2.0 * t; break;
        default:
            throw std::domain_error("angle_at_rate: rate is not invertible for 4-state");
    }
    if (!(cd > 0.0 && cd < 1.0))
        throw std::domain_error("angle_at_rate: t outside invertible range");
    return OverlapAngle{std::acos(cd), cd};
}

inline InfoCurvePoint curve_point(ProtocolKind protocol, double t) {
    InfoCurvePoint p;
    p.t = t;
    try {
        const OverlapAngle d = angle_at_rate(protocol, t);
        const double s = d.sin_delta();
        const double denom = protocol == ProtocolKind::TwoState ? (1.0 - s) : (2.0 - s);
        p.norm_i_ae = max_extractable_info(d) / denom;
        p.norm_i_eb = 1.0 / denom;
        p.feasible = true;
    } catch (const std::domain_error&) {
        p.feasible = false;
    }
    return p;
}

struct Fig3Row {
    double t;
    InfoCurvePoint two_state;
    InfoCurvePoint four_plus_two;
};

inline std::vector<Fig3Row> fig3_curves(const std::vector<double>& t_grid) {
    std::vector<Fig3Row> rows;
    rows.reserve(t_grid.size());
    for (double t : t_grid)
        rows.push_back({t, curve_point(ProtocolKind::TwoState, t),
                        curve_point(ProtocolKind::FourPlusTwo, t)});
    return rows;
}

// Default grid for the comparison curves: log-spaced to resolve the low-t
// regime where the 2-state advantage lives.
inline std::vector<double> default_fig3_grid(std::size_t n = 50,
                                             double t_lo = 1e-4,
                                             double t_hi = 0.4) {
    std::vector<double> g(n);
    const double l0 = std::log(t_lo), l1 = std::log(t_hi);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = std::exp(l0 + (l1 - l0) * static_cast<double>(i) / (n - 1));
    return g;
}

// --- lossy-line leakage bounds ----------------------------------------------

struct PnsLeakage {
    double eve_known_fraction;  // of Bob's received bits
    double induced_qber;        // always 0: the attack causes no errors
    double bob_receive_rate;    // per pulse sent, first order in mu
};

// Photon-number splitting against polarization encoding: Eve keeps one photon
// of every multiphoton pulse and forwards the rest losslessly. First-order
// model: Bob's receive rate is (1 - loss) * P(n >= 1).
inline PnsLeakage pns_leakage(const PhotonDistribution& dist, double loss_fraction) {
    if (!(loss_fraction >= 0.0 && loss_fraction < 1.0))
        throw std::domain_error("pns_leakage: loss fraction must be in [0,1)");
    const auto mf = multiphoton_fraction(dist);
    const double p0 = vacuum_prob(dist);
    const double bob_rate = (1.0 - loss_fraction) * (1.0 - p0);
    double fraction = 0.0;
    if (bob_rate > 0.0) fraction = std::min(1.0, mf.p_multi / bob_rate);
    return {fraction, 0.0, bob_rate};
}

// Beam-splitting against phase encoding: Eve diverts a fraction equal to the
// line loss and measures after basis disclosure. Returns her per-bit
// information bound, the extractable-information bound at her retained intensity.
inline double beamsplit_leakage(MeanPhotonNumber mu, double loss_fraction) {
    if (!(loss_fraction >= 0.0 && loss_fraction < 1.0))
        throw std::domain_error("beamsplit_leakage: loss fraction must be in [0,1)");
    const MeanPhotonNumber mu_eve(mu.mu * loss_fraction);
    return max_extractable_info(overlap_angle(mu_eve));
}

}  // namespace qkd
