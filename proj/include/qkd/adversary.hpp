#pragma once

// Eavesdropping strategies. Each consumes the frame leaving Alice, records
// what Eve learned (or stored for later), and returns the frame forwarded
// towards the fiber. Strategies are stateless per pulse; the EveRecord
// ledger is merged by pulse index.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>

#include "qkd/analytics.hpp"
#include "qkd/protocol_sim.hpp"
#include "qkd/quantum_math.hpp"
#include "qkd/rng.hpp"

namespace qkd {

enum class StrategyKind {
    None,
    InterceptResendConjugate,
    InterceptResendSymmetric,
    PovmMimic,
    BlockOnInconclusive,
    BeamSplit,
    PhotonNumberSplit,
};

struct StrategyConfig {
    StrategyKind kind = StrategyKind::None;
    double eta = 1.0;             // fraction of pulses attacked
    double split_fraction = 0.0;  // BeamSplit: intensity fraction diverted
    double loss_budget = 0.0;     // PhotonNumberSplit: line loss Eve hides behind
    bool reference_free = false;  // BlockOnInconclusive: scheme without strong reference
};

enum class DeferredKind { None, StoredPhoton, StoredAmplitude };

struct EveRecord {
    std::size_t pulse_index = 0;
    bool attacked = false;
    bool blocked = false;
    std::optional<int> guess;
    std::optional<Basis> basis_used;
    // Stratum of Eve's side information known after basis disclosure
    // (basis match for conjugate interception, conclusiveness for POVM
    // strategies). Used by the stratified information estimator.
    int stratum = 0;
    DeferredKind deferred = DeferredKind::None;
    double deferred_mu = 0.0;  // StoredAmplitude: Eve's retained intensity
    int true_bit = 0;          // hidden until eve_decode_after_disclosure
};

namespace detail {

inline int phase_bit(const PulseFrame& f) {
    // bit 1 states are -alpha (B0) and -i*alpha (B1)
    const double re = f.signal.real(), im = f.signal.imag();
    return (std::abs(re) >= std::abs(im) ? re < 0 : im < 0) ? 1 : 0;
}

inline Basis phase_basis(const PulseFrame& f) {
    return std::abs(f.signal.real()) >= std::abs(f.signal.imag()) ? Basis::B0
                                                                  : Basis::B1;
}

inline int polarization_bit(const PulseFrame& f, Basis basis) {
    const double axis = basis == Basis::B0 ? 0.0 : M_PI / 4.0;
    const double c = std::cos(f.pol_angle - axis);
    return c * c > 0.5 ? 0 : 1;
}

}  // namespace detail

// Intercept/resend in the conjugate bases used by Alice and Bob. For the
// 4-state protocol Eve projects every photon in her basis; for 4+2 she uses
// the symmetric projection within her basis (wrong basis gives her a coin
// flip and injects an uncorrelated state).
inline PulseFrame intercept_resend_conjugate(const PulseFrame& pulse,
                                             ProtocolKind protocol,
                                             const SourceModel& source,
                                             double eta, EveRecord& rec,
                                             std::mt19937_64& rng) {
    if (protocol == ProtocolKind::TwoState)
        throw std::invalid_argument("conjugate interception needs two bases");
    if (!std::bernoulli_distribution(eta)(rng)) return pulse;
    rec.attacked = true;
    const Basis eve_basis =
        std::bernoulli_distribution(0.5)(rng) ? Basis::B1 : Basis::B0;
    rec.basis_used = eve_basis;

    if (protocol == ProtocolKind::FourState) {
        if (pulse.photon_count == 0) {
            // nothing to measure; forward the vacuum untouched
            rec.stratum = 0;
            return pulse;
        }
        const double axis = eve_basis == Basis::B0 ? 0.0 : M_PI / 4.0;
        const double p_bit0 = std::pow(std::cos(pulse.pol_angle - axis), 2);
        bool saw0 = false, saw1 = false;
        for (int k = 0; k < pulse.photon_count; ++k)
            (std::bernoulli_distribution(p_bit0)(rng) ? saw0 : saw1) = true;
        int guess;
        if (saw0 && saw1)
            guess = std::bernoulli_distribution(0.5)(rng) ? 1 : 0;
        else
            guess = saw1 ? 1 : 0;
        rec.guess = guess;
        const Basis alice_basis =
            std::abs(std::remainder(pulse.pol_angle, M_PI / 2.0)) < 1e-9 ? Basis::B0
                                                                         : Basis::B1;
        rec.stratum = eve_basis == alice_basis ? 1 : 0;
        // Resend with the photon count she measured: a fresh Poisson draw
        // would be mostly vacuum and visibly depress Bob's rate.
        PulseFrame resend;
        resend.encoding = Encoding::PolarizationPair;
        resend.origin = Origin::Eve;
        resend.photon_count = pulse.photon_count;
        resend.pol_angle = polarization_angle({guess, eve_basis});
        return resend;
    }

    // 4+2: right basis reduces to the 2-state symmetric projection, wrong
    // basis yields an unbiased coin uncorrelated with Alice.
    const Basis alice_basis = detail::phase_basis(pulse);
    int guess;
    if (eve_basis == alice_basis) {
        const double mu = std::norm(pulse.signal);
        const double q = sym_projection_error(overlap_angle(MeanPhotonNumber(mu)));
        guess = detail::phase_bit(pulse) ^ (std::bernoulli_distribution(q)(rng) ? 1 : 0);
        rec.stratum = 1;
    } else {
        guess = std::bernoulli_distribution(0.5)(rng) ? 1 : 0;
        rec.stratum = 0;
    }
    rec.guess = guess;
    return emit_pulse(protocol, {guess, eve_basis}, source, rng, Origin::Eve);
}

// Symmetric-projection interception of the 2-state protocol: Eve reads the
// bit with error probability q = (1 - sin delta)/2 and resends the nominal
// state for her guess.
inline PulseFrame intercept_resend_symmetric(const PulseFrame& pulse,
                                             const SourceModel& source,
                                             double eta, EveRecord& rec,
                                             std::mt19937_64& rng) {
    if (pulse.encoding != Encoding::PhasePair)
        throw std::invalid_argument("symmetric projection needs phase encoding");
    if (!std::bernoulli_distribution(eta)(rng)) return pulse;
    rec.attacked = true;
    rec.basis_used = Basis::B0;
    const double mu = std::norm(pulse.signal);
    const double q = sym_projection_error(overlap_angle(MeanPhotonNumber(mu)));
    const int guess =
        detail::phase_bit(pulse) ^ (std::bernoulli_distribution(q)(rng) ? 1 : 0);
    rec.guess = guess;
    return emit_pulse(ProtocolKind::TwoState, {guess, Basis::B0}, source, rng,
                      Origin::Eve);
}

// Eve mimics Bob's receiver. Conclusive outcomes are resent faithfully;
// inconclusive ones force her to guess and resend the guess.
inline PulseFrame povm_mimic(const PulseFrame& pulse, ProtocolKind protocol,
                             const SourceModel& source, double eta, EveRecord& rec,
                             std::mt19937_64& rng) {
    if (pulse.encoding != Encoding::PhasePair)
        throw std::invalid_argument("povm_mimic needs phase encoding");
    if (!std::bernoulli_distribution(eta)(rng)) return pulse;
    rec.attacked = true;
    const Basis eve_basis =
        protocol == ProtocolKind::FourPlusTwo
            ? (std::bernoulli_distribution(0.5)(rng) ? Basis::B1 : Basis::B0)
            : Basis::B0;
    rec.basis_used = eve_basis;
    const DetectionOutcome out = detect(pulse, eve_basis, DetectorModel{}, rng);
    int guess;
    if (out.result == BitResult::Inconclusive) {
        guess = std::bernoulli_distribution(0.5)(rng) ? 1 : 0;
        rec.stratum = 0;
    } else {
        guess = out.result == BitResult::Bit1 ? 1 : 0;
        rec.stratum = 1;
    }
    rec.guess = guess;
    return emit_pulse(protocol, {guess, eve_basis}, source, rng, Origin::Eve);
}

// Eve resends only what she decoded unambiguously. Against the
// reference-free scheme she vanishes inconclusive pulses (no error, lower
// rate); with a parallel reference she must still forward the strong pulse,
// which produces random clicks at Bob.
inline PulseFrame block_on_inconclusive(const PulseFrame& pulse,
                                        ProtocolKind protocol,
                                        const SourceModel& source,
                                        bool reference_free, EveRecord& rec,
                                        std::mt19937_64& rng) {
    if (pulse.encoding != Encoding::PhasePair)
        throw std::invalid_argument("block_on_inconclusive needs phase encoding");
    rec.attacked = true;
    rec.basis_used = Basis::B0;
    const DetectionOutcome out = detect(pulse, Basis::B0, DetectorModel{}, rng);
    if (out.result != BitResult::Inconclusive) {
        const int guess = out.result == BitResult::Bit1 ? 1 : 0;
        rec.guess = guess;
        rec.stratum = 1;
        return emit_pulse(protocol, {guess, Basis::B0}, source, rng, Origin::Eve);
    }
    rec.stratum = 0;
    rec.blocked = true;
    PulseFrame fwd;
    fwd.encoding = Encoding::PhasePair;
    fwd.origin = Origin::Eve;
    if (!reference_free)  // strong pulse must still arrive at Bob
        fwd.reference = std::sqrt(source.beta_intensity_ratio * source.mu);
    return fwd;
}

// Eve taps a fixed fraction of every pulse's intensity and substitutes a
// lossless line, deferring her measurement to after basis disclosure.
inline PulseFrame beam_split(const PulseFrame& pulse, double split_fraction,
                             EveRecord& rec, std::mt19937_64&) {
    if (!(split_fraction >= 0.0 && split_fraction < 1.0))
        throw std::domain_error("beam_split: split fraction must be in [0,1)");
    if (pulse.encoding != Encoding::PhasePair)
        throw std::invalid_argument("beam_split models the phase protocols");
    if (split_fraction == 0.0) return pulse;
    rec.attacked = true;
    rec.deferred = DeferredKind::StoredAmplitude;
    rec.deferred_mu = split_fraction * std::norm(pulse.signal);
    rec.true_bit = detail::phase_bit(pulse);
    PulseFrame fwd = pulse;
    const double keep = std::sqrt(1.0 - split_fraction);
    fwd.signal *= keep;
    fwd.reference *= keep;
    fwd.lossless_line = true;
    return fwd;
}

// Per-pulse survival probability Eve applies to single-photon pulses so that
// Bob's overall receive rate matches the honest lossy line at first order
// in mu: (1 - loss) * P(n >= 1).
inline double pns_single_photon_survival(const PhotonDistribution& dist,
                                         double loss_budget) {
    const double p0 = photon_number_pmf(dist, 0);
    const double p1 = photon_number_pmf(dist, 1);
    const double p_multi = multiphoton_fraction(dist).p_multi;
    const double target = (1.0 - loss_budget) * (1.0 - p0);
    if (p1 == 0.0) return 0.0;
    return std::clamp((target - p_multi) / p1, 0.0, 1.0);
}

// Photon-number splitting against polarization encoding. Multiphoton pulses:
// Eve keeps one photon (read with certainty after disclosure) and forwards
// the rest losslessly. Single photons are thinned to hide inside the loss
// budget. Phase encodings reject the strategy: selecting photon number
// randomizes the phase.
inline PulseFrame photon_number_split(const PulseFrame& pulse,
                                      const PhotonDistribution& source_dist,
                                      double loss_budget, EveRecord& rec,
                                      std::mt19937_64& rng) {
    if (pulse.encoding != Encoding::PolarizationPair)
        throw std::invalid_argument(
            "photon_number_split applies to polarization encoding only");
    rec.attacked = pulse.photon_count >= 2;
    PulseFrame fwd = pulse;
    fwd.lossless_line = true;  // Eve owns the line
    if (pulse.photon_count >= 2) {
        rec.deferred = DeferredKind::StoredPhoton;
        rec.true_bit = detail::polarization_bit(
            pulse, std::abs(std::remainder(pulse.pol_angle, M_PI / 2.0)) < 1e-9
                       ? Basis::B0
                       : Basis::B1);
        fwd.photon_count = pulse.photon_count - 1;
        return fwd;
    }
    const double survival = pns_single_photon_survival(source_dist, loss_budget);
    if (pulse.photon_count == 1 && !std::bernoulli_distribution(survival)(rng)) {
        fwd.photon_count = 0;
        rec.blocked = true;
    }
    return fwd;
}

// After Alice and Bob disclose bases, Eve measures her stored material.
// Kept photons decode with certainty; stored amplitudes decode through the
// symmetric projection at the retained intensity.
inline void eve_decode_after_disclosure(std::vector<EveRecord>& records,
                                        std::uint64_t decode_seed) {
    for (auto& rec : records) {
        if (rec.deferred == DeferredKind::None) continue;
        auto rng = pulse_rng(decode_seed, rec.pulse_index);
        if (rec.deferred == DeferredKind::StoredPhoton) {
            rec.guess = rec.true_bit;
        } else {
            if (rec.deferred_mu == 0.0) {
                rec.guess = std::bernoulli_distribution(0.5)(rng) ? 1 : 0;
            } else {
                const double q = sym_projection_error(
                    overlap_angle(MeanPhotonNumber(rec.deferred_mu)));
                rec.guess =
                    rec.true_bit ^ (std::bernoulli_distribution(q)(rng) ? 1 : 0);
            }
        }
    }
}

}  // namespace qkd
