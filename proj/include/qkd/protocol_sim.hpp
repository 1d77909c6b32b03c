#pragma once

// Event-level model of one QKD transmission: Alice's source, the fiber,
// and Bob's receiver (polarization analyzer for the 4-state protocol,
// interferometric comparison against a strong reference for the phase
// protocols), plus sifting and the empirical estimators.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "qkd/analytics.hpp"
#include "qkd/quantum_math.hpp"
#include "qkd/rng.hpp"

namespace qkd {

enum class Encoding { PhasePair, PolarizationPair };
enum class Origin { Alice, Eve };
enum class Basis { B0, B1 };

struct AliceChoice {
    int bit = 0;      // 0 or 1
    Basis basis = Basis::B0;  // always B0 for the 2-state protocol
};

// One transmitted quantum signal. Phase encodings carry a weak signal
// amplitude together with the strong reference; polarization encoding
// carries a sampled photon count and a polarization angle.
struct PulseFrame {
    Encoding encoding = Encoding::PhasePair;
    Origin origin = Origin::Alice;
    std::complex<double> signal{0.0, 0.0};     // units sqrt(photon)
    std::complex<double> reference{0.0, 0.0};  // beta, 0 for polarization
    int photon_count = 0;                      // polarization encoding only
    double pol_angle = 0.0;                    // radians
    bool lossless_line = false;  // Eve substituted the fiber downstream
};

struct SourceModel {
    double mu = 0.1;
    PhotonStats stats = PhotonStats::Poisson;  // photon sampling, 4-state only
    double beta_intensity_ratio = 100.0;       // |beta|^2 / mu
};

inline double polarization_angle(const AliceChoice& c) {
    // B0: 0 / pi/2 (vertical / horizontal), B1: pi/4 / 3pi/4 (diagonals)
    const double base = c.basis == Basis::B0 ? 0.0 : M_PI / 4.0;
    return base + (c.bit ? M_PI / 2.0 : 0.0);
}

inline int sample_photon_count(const PhotonDistribution& dist, std::mt19937_64& rng) {
    const double mu = dist.mean.mu;
    if (mu == 0.0) return 0;
    if (dist.kind == PhotonStats::Poisson)
        return std::poisson_distribution<int>(mu)(rng);
    // Bose-Einstein pmf mu^n/(1+mu)^{n+1} is geometric with p = 1/(1+mu)
    return std::geometric_distribution<int>(1.0 / (1.0 + mu))(rng);
}

// Signal phase for each (basis, bit) in the phase protocols:
// B0 -> {0, pi}, B1 -> {pi/2, 3pi/2}.
inline std::complex<double> phase_state_amplitude(const AliceChoice& c, double mu) {
    const double amp = std::sqrt(mu);
    static const std::array<std::complex<double>, 4> units = {
        std::complex<double>{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    const int idx = (c.basis == Basis::B1 ? 2 : 0) + c.bit;
    return amp * units[idx];
}

inline PulseFrame emit_pulse(ProtocolKind protocol, const AliceChoice& choice,
                             const SourceModel& source, std::mt19937_64& rng,
                             Origin origin = Origin::Alice) {
    if (protocol == ProtocolKind::TwoState && choice.basis != Basis::B0)
        throw std::invalid_argument("emit_pulse: 2-state protocol has a single basis");
    PulseFrame f;
    f.origin = origin;
    if (protocol == ProtocolKind::FourState) {
        f.encoding = Encoding::PolarizationPair;
        f.pol_angle = polarization_angle(choice);
        f.photon_count = sample_photon_count(
            {source.stats, MeanPhotonNumber(source.mu)}, rng);
        return f;
    }
    f.encoding = Encoding::PhasePair;
    f.signal = phase_state_amplitude(choice, source.mu);
    f.reference = std::sqrt(source.beta_intensity_ratio * source.mu);
    return f;
}

// --- channel ------------------------------------------------------------------

struct FiberModel {
    double length_km = 0.0;
    double attenuation_db_per_km = 0.2;
    bool substituted_by_eve = false;

    double loss_fraction() const {
        if (substituted_by_eve) return 0.0;
        return 1.0 - std::pow(10.0, -(length_km * attenuation_db_per_km) / 10.0);
    }
};

inline FiberModel fiber_with_loss(double loss_fraction) {
    if (!(loss_fraction >= 0.0 && loss_fraction < 1.0))
        throw std::domain_error("fiber_with_loss: loss must be in [0,1)");
    FiberModel f;
    f.attenuation_db_per_km = -10.0 * std::log10(1.0 - loss_fraction);
    f.length_km = 1.0;
    return f;
}

inline PulseFrame transmit(const PulseFrame& pulse, const FiberModel& fiber,
                           std::mt19937_64& rng) {
    const double loss = pulse.lossless_line ? 0.0 : fiber.loss_fraction();
    if (loss == 0.0) return pulse;
    PulseFrame out = pulse;
    if (pulse.encoding == Encoding::PhasePair) {
        const double surv = std::sqrt(1.0 - loss);
        out.signal *= surv;
        out.reference *= surv;
    } else if (pulse.photon_count > 0) {
        out.photon_count =
            std::binomial_distribution<int>(pulse.photon_count, 1.0 - loss)(rng);
    }
    return out;
}

// --- receiver -------------------------------------------------------------------

enum class BitResult { Bit0, Bit1, Inconclusive };

struct DetectionOutcome {
    BitResult result = BitResult::Inconclusive;
    bool d2 = false;
    bool d3 = false;
    bool double_click = false;
};

struct DetectorModel {
    double tap_amplitude_ratio = 0.1;  // local amplitude = tap * reference
    double dark_prob = 0.0;            // per detector per pulse
};

// Intensities at the two output ports of the interferometer, for a given
// receiver phase setting. Port 2 collects the phase-0 component.
inline std::pair<double, double> port_intensities(const PulseFrame& pulse,
                                                  Basis bob_basis,
                                                  const DetectorModel& det) {
    const std::complex<double> local = pulse.reference * det.tap_amplitude_ratio;
    const std::complex<double> shift =
        bob_basis == Basis::B1 ? std::complex<double>{0, 1} : std::complex<double>{1, 0};
    const std::complex<double> a2 = (pulse.signal + local * shift) / std::sqrt(2.0);
    const std::complex<double> a3 = (pulse.signal - local * shift) / std::sqrt(2.0);
    return {std::norm(a2), std::norm(a3)};
}

inline DetectionOutcome resolve_clicks(bool d2, bool d3, std::mt19937_64& rng) {
    DetectionOutcome out;
    out.d2 = d2;
    out.d3 = d3;
    if (d2 && d3) {
        out.double_click = true;
        out.result = std::bernoulli_distribution(0.5)(rng) ? BitResult::Bit1
                                                           : BitResult::Bit0;
    } else if (d2) {
        out.result = BitResult::Bit0;
    } else if (d3) {
        out.result = BitResult::Bit1;
    }
    return out;
}

inline DetectionOutcome detect(const PulseFrame& pulse, Basis bob_basis,
                               const DetectorModel& det, std::mt19937_64& rng) {
    bool d2 = false, d3 = false;
    if (pulse.encoding == Encoding::PhasePair) {
        const auto [i2, i3] = port_intensities(pulse, bob_basis, det);
        d2 = std::bernoulli_distribution(1.0 - std::exp(-i2))(rng);
        d3 = std::bernoulli_distribution(1.0 - std::exp(-i3))(rng);
    } else {
        // Analyzer projection photon by photon, Malus-law probabilities.
        const double axis = bob_basis == Basis::B0 ? 0.0 : M_PI / 4.0;
        const double c = std::cos(pulse.pol_angle - axis);
        const double p_bit0 = c * c;
        for (int k = 0; k < pulse.photon_count; ++k) {
            if (std::bernoulli_distribution(p_bit0)(rng))
                d2 = true;
            else
                d3 = true;
        }
    }
    if (det.dark_prob > 0.0) {
        std::bernoulli_distribution dark(det.dark_prob);
        d2 = d2 || dark(rng);
        d3 = d3 || dark(rng);
    }
    return resolve_clicks(d2, d3, rng);
}

// --- sifting and estimators ------------------------------------------------------

struct PulseRecord {
    AliceChoice alice;
    Basis bob_basis = Basis::B0;
    DetectionOutcome outcome;
};

struct SiftedKey {
    std::vector<std::uint8_t> alice_bits;
    std::vector<std::uint8_t> bob_bits;
    std::vector<std::size_t> indices;  // positions in the original record stream
};

inline bool basis_matched(ProtocolKind protocol, const PulseRecord& r) {
    return protocol == ProtocolKind::TwoState || r.alice.basis == r.bob_basis;
}

inline SiftedKey sift(ProtocolKind protocol, const std::vector<PulseRecord>& records) {
    SiftedKey key;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.outcome.result == BitResult::Inconclusive) continue;
        if (!basis_matched(protocol, r)) continue;
        key.alice_bits.push_back(static_cast<std::uint8_t>(r.alice.bit));
        key.bob_bits.push_back(r.outcome.result == BitResult::Bit1 ? 1 : 0);
        key.indices.push_back(i);
    }
    return key;
}

inline double empirical_qber(const SiftedKey& key) {
    if (key.alice_bits.empty())
        throw std::domain_error("empirical_qber: empty sifted key");
    std::size_t errors = 0;
    for (std::size_t i = 0; i < key.alice_bits.size(); ++i)
        errors += key.alice_bits[i] != key.bob_bits[i];
    return static_cast<double>(errors) / static_cast<double>(key.alice_bits.size());
}

// Plug-in mutual information of a 2x2 joint count table, in bits.
// Degenerate marginals contribute zero.
inline double empirical_mutual_info(const std::array<std::array<std::uint64_t, 2>, 2>& counts) {
    double total = 0;
    for (const auto& row : counts)
        for (auto c : row) total += static_cast<double>(c);
    if (total == 0.0)
        throw std::domain_error("empirical_mutual_info: empty table");
    std::array<double, 2> px{}, py{};
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            px[x] += counts[x][y] / total;
            py[y] += counts[x][y] / total;
        }
    double info = 0.0;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            const double pxy = counts[x][y] / total;
            if (pxy > 0.0) info += pxy * std::log2(pxy / (px[x] * py[y]));
        }
    return std::max(0.0, info);
}

}  // namespace qkd
