#pragma once

// One Monte Carlo QKD session: pulses stream through
// emit -> adversary -> fiber -> detect, then sifting, Eve's deferred
// decoding, and the empirical estimators. Per-pulse RNG streams make the
// result independent of the worker count.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <thread>
#include <vector>

#include "qkd/adversary.hpp"
#include "qkd/analytics.hpp"
#include "qkd/protocol_sim.hpp"
#include "qkd/rng.hpp"

namespace qkd {

struct ProtocolConfig {
    ProtocolKind protocol = ProtocolKind::TwoState;
    SourceModel source;
    FiberModel fiber;
    DetectorModel detector;
    StrategyConfig strategy;
    std::uint64_t n_pulses = 0;
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

struct SessionReport {
    std::uint64_t pulses_sent = 0;
    std::uint64_t sifted_length = 0;
    std::uint64_t inconclusive_count = 0;
    std::uint64_t double_click_count = 0;
    std::uint64_t attacked_sifted = 0;
    std::uint64_t blocked_count = 0;
    double empirical_qber = std::numeric_limits<double>::quiet_NaN();
    // Session-level informations: per sifted bit, Eve's side information
    // (basis match / conclusiveness, disclosed after sifting) conditioned in.
    double empirical_i_ae = 0.0;
    double empirical_i_eb = 0.0;
    // Same quantities per attacked sifted bit.
    double i_ae_attacked = 0.0;
    double i_eb_attacked = 0.0;
    // Fraction of the sifted key Eve knows with certainty (deferred decoders).
    double eve_known_fraction = 0.0;
    std::uint64_t seed = 0;
};

namespace detail {

struct PulseTrace {
    PulseRecord record;
    EveRecord eve;
};

inline PulseTrace simulate_pulse(const ProtocolConfig& cfg, std::uint64_t index) {
    auto rng = pulse_rng(cfg.seed, index);
    PulseTrace trace;
    trace.eve.pulse_index = index;

    AliceChoice& choice = trace.record.alice;
    choice.bit = std::bernoulli_distribution(0.5)(rng) ? 1 : 0;
    choice.basis = cfg.protocol == ProtocolKind::TwoState
                       ? Basis::B0
                       : (std::bernoulli_distribution(0.5)(rng) ? Basis::B1 : Basis::B0);
    trace.record.bob_basis =
        cfg.protocol == ProtocolKind::TwoState
            ? Basis::B0
            : (std::bernoulli_distribution(0.5)(rng) ? Basis::B1 : Basis::B0);

    PulseFrame frame = emit_pulse(cfg.protocol, choice, cfg.source, rng);

    switch (cfg.strategy.kind) {
        case StrategyKind::None:
            break;
        case StrategyKind::InterceptResendConjugate:
            frame = intercept_resend_conjugate(frame, cfg.protocol, cfg.source,
                                               cfg.strategy.eta, trace.eve, rng);
            break;
        case StrategyKind::InterceptResendSymmetric:
            frame = intercept_resend_symmetric(frame, cfg.source, cfg.strategy.eta,
                                               trace.eve, rng);
            break;
        case StrategyKind::PovmMimic:
            frame = povm_mimic(frame, cfg.protocol, cfg.source, cfg.strategy.eta,
                               trace.eve, rng);
            break;
        case StrategyKind::BlockOnInconclusive:
            frame = block_on_inconclusive(frame, cfg.protocol, cfg.source,
                                          cfg.strategy.reference_free, trace.eve, rng);
            break;
        case StrategyKind::BeamSplit:
            frame = beam_split(frame, cfg.strategy.split_fraction, trace.eve, rng);
            break;
        case StrategyKind::PhotonNumberSplit:
            frame = photon_number_split(
                frame, {cfg.source.stats, MeanPhotonNumber(cfg.source.mu)},
                cfg.strategy.loss_budget, trace.eve, rng);
            break;
    }

    frame = transmit(frame, cfg.fiber, rng);
    trace.record.outcome = detect(frame, trace.record.bob_basis, cfg.detector, rng);
    return trace;
}

// A binary channel tally per stratum of Eve's side information. The pairs
// in one stratum form a binary symmetric channel, so the information per
// bit is the BSC capacity 1 - H2(disagreement rate); this is exact (not
// just asymptotic) for the error-free channels the attacks produce.
struct ChannelTally {
    std::uint64_t n = 0;
    std::uint64_t disagree = 0;

    double info() const {
        if (n == 0) return 0.0;
        return 1.0 - binary_entropy(static_cast<double>(disagree) /
                                    static_cast<double>(n));
    }
};

struct StratifiedTables {
    std::map<int, ChannelTally> ae;  // Alice bit vs Eve guess
    std::map<int, ChannelTally> eb;  // Eve guess vs Bob bit
    std::uint64_t total = 0;
};

// Information averaged over the strata: sum_s w_s * I_s.
inline double stratified_info(const std::map<int, ChannelTally>& tallies,
                              std::uint64_t total) {
    if (total == 0) return 0.0;
    double info = 0.0;
    for (const auto& [stratum, tally] : tallies)
        info += (static_cast<double>(tally.n) / static_cast<double>(total)) *
                tally.info();
    return info;
}

}  // namespace detail

inline SessionReport run_session(const ProtocolConfig& cfg) {
    SessionReport report;
    report.pulses_sent = cfg.n_pulses;
    report.seed = cfg.seed;
    if (cfg.n_pulses == 0) return report;

    std::vector<detail::PulseTrace> traces(cfg.n_pulses);
    const unsigned workers = std::max(1u, cfg.workers);
    if (workers == 1) {
        for (std::uint64_t i = 0; i < cfg.n_pulses; ++i)
            traces[i] = detail::simulate_pulse(cfg, i);
    } else {
        std::vector<std::thread> pool;
        const std::uint64_t chunk = (cfg.n_pulses + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::uint64_t lo = w * chunk;
            const std::uint64_t hi = std::min(cfg.n_pulses, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([&, lo, hi] {
                for (std::uint64_t i = lo; i < hi; ++i)
                    traces[i] = detail::simulate_pulse(cfg, i);
            });
        }
        for (auto& t : pool) t.join();
    }

    std::vector<PulseRecord> records;
    std::vector<EveRecord> eve_records;
    records.reserve(cfg.n_pulses);
    eve_records.reserve(cfg.n_pulses);
    for (auto& t : traces) {
        records.push_back(t.record);
        eve_records.push_back(t.eve);
        report.inconclusive_count += t.record.outcome.result == BitResult::Inconclusive;
        report.double_click_count += t.record.outcome.double_click;
        report.blocked_count += t.eve.blocked;
    }

    const SiftedKey key = sift(cfg.protocol, records);
    report.sifted_length = key.alice_bits.size();
    if (report.sifted_length > 0) report.empirical_qber = empirical_qber(key);

    eve_decode_after_disclosure(eve_records, splitmix64(cfg.seed ^ 0x5eed0dec0deULL));

    detail::StratifiedTables tables;
    std::uint64_t eve_known = 0;
    for (std::size_t k = 0; k < key.indices.size(); ++k) {
        const auto& eve = eve_records[key.indices[k]];
        if (!eve.attacked || !eve.guess) continue;
        ++tables.total;
        const int a = key.alice_bits[k], b = key.bob_bits[k], g = *eve.guess;
        auto& ae = tables.ae[eve.stratum];
        auto& eb = tables.eb[eve.stratum];
        ++ae.n;
        ae.disagree += a != g;
        ++eb.n;
        eb.disagree += g != b;
        if (eve.deferred == DeferredKind::StoredPhoton) ++eve_known;
    }
    report.attacked_sifted = tables.total;
    if (tables.total > 0) {
        report.i_ae_attacked = detail::stratified_info(tables.ae, tables.total);
        report.i_eb_attacked = detail::stratified_info(tables.eb, tables.total);
        const double f = static_cast<double>(tables.total) /
                         static_cast<double>(report.sifted_length);
        report.empirical_i_ae = f * report.i_ae_attacked;
        report.empirical_i_eb = f * report.i_eb_attacked;
    }
    if (report.sifted_length > 0)
        report.eve_known_fraction = static_cast<double>(eve_known) /
                                    static_cast<double>(report.sifted_length);
    return report;
}

}  // namespace qkd
