#include <doctest.h>

#include <cmath>

#include "qkd/adversary.hpp"
#include "qkd/session.hpp"

using namespace qkd;

namespace {

double binom_3sigma(double p, double n) {
    return 3.0 * std::sqrt(std::max(0.0, p * (1.0 - p)) / n);
}

ProtocolConfig base_config(ProtocolKind protocol, double mu, StrategyConfig strat,
                           std::uint64_t n = 300000, std::uint64_t seed = 31) {
    ProtocolConfig cfg;
    cfg.protocol = protocol;
    cfg.source.mu = mu;
    cfg.strategy = strat;
    cfg.n_pulses = n;
    cfg.seed = seed;
    cfg.workers = 4;
    return cfg;
}

}  // namespace

TEST_CASE("eta = 0 leaves every pulse untouched") {
    std::mt19937_64 rng(1);
    SourceModel src{0.1, PhotonStats::Poisson, 100.0};
    EveRecord rec;
    const auto f = emit_pulse(ProtocolKind::TwoState, {1, Basis::B0}, src, rng);

    const auto fwd = intercept_resend_symmetric(f, src, 0.0, rec, rng);
    CHECK(fwd.signal == f.signal);
    CHECK_FALSE(rec.attacked);

    const auto f42 = emit_pulse(ProtocolKind::FourPlusTwo, {1, Basis::B1}, src, rng);
    EveRecord rec2;
    const auto fwd2 =
        intercept_resend_conjugate(f42, ProtocolKind::FourPlusTwo, src, 0.0, rec2, rng);
    CHECK(fwd2.signal == f42.signal);

    EveRecord rec3;
    const auto fwd3 = povm_mimic(f, ProtocolKind::TwoState, src, 0.0, rec3, rng);
    CHECK(fwd3.signal == f.signal);

    EveRecord rec4;
    const auto fwd4 = beam_split(f, 0.0, rec4, rng);
    CHECK(fwd4.signal == f.signal);
    CHECK_FALSE(fwd4.lossless_line);
}

TEST_CASE("4-state intercept/resend at full strength") {
    const auto cfg = base_config(
        ProtocolKind::FourState, 0.1,
        {StrategyKind::InterceptResendConjugate, 1.0}, 400000);
    const auto rep = run_session(cfg);
    REQUIRE(rep.sifted_length > 1000);
    CHECK(std::abs(rep.empirical_qber - 0.25) <
          binom_3sigma(0.25, double(rep.sifted_length)));
    // she knows everything in the right basis, nothing in the wrong one
    CHECK(rep.empirical_i_ae == doctest::Approx(0.5).epsilon(0.05));
    CHECK(rep.empirical_i_eb == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("4-state intercept/resend at partial strength") {
    const auto cfg = base_config(ProtocolKind::FourState, 0.1,
                                 {StrategyKind::InterceptResendConjugate, 0.4},
                                 400000);
    const auto rep = run_session(cfg);
    const double expect = 0.4 / 4.0;
    CHECK(std::abs(rep.empirical_qber - expect) <
          binom_3sigma(expect, double(rep.sifted_length)));
}

TEST_CASE("symmetric projection on the 2-state protocol") {
    const double mu = 0.1;
    const auto delta = overlap_angle(MeanPhotonNumber(mu));
    const double q = sym_projection_error(delta);

    const auto cfg = base_config(ProtocolKind::TwoState, mu,
                                 {StrategyKind::InterceptResendSymmetric, 1.0});
    const auto rep = run_session(cfg);
    REQUIRE(rep.attacked_sifted == rep.sifted_length);

    // induced error rate is q, Eve-Bob is perfect, Alice-Eve reaches the extractable-information bound
    CHECK(std::abs(rep.empirical_qber - q) <
          binom_3sigma(q, double(rep.sifted_length)));
    CHECK(rep.i_eb_attacked == 1.0);
    const double sigma_info = std::abs(std::log2((1.0 - q) / q)) *
                              std::sqrt(q * (1.0 - q) / double(rep.sifted_length));
    CHECK(std::abs(rep.i_ae_attacked - max_extractable_info(delta)) <
          3.0 * sigma_info);
}

TEST_CASE("symmetric projection is a binary symmetric channel") {
    // crossover must be q regardless of the bit sent
    std::mt19937_64 rng(2);
    SourceModel src{0.1, PhotonStats::Poisson, 100.0};
    const double q =
        sym_projection_error(overlap_angle(MeanPhotonNumber(src.mu)));
    int flips[2] = {0, 0}, sent[2] = {0, 0};
    for (int i = 0; i < 200000; ++i) {
        const int bit = i & 1;
        const auto f = emit_pulse(ProtocolKind::TwoState, {bit, Basis::B0}, src, rng);
        EveRecord rec;
        intercept_resend_symmetric(f, src, 1.0, rec, rng);
        sent[bit]++;
        flips[bit] += *rec.guess != bit;
    }
    for (int bit : {0, 1})
        CHECK(std::abs(flips[bit] / double(sent[bit]) - q) <
              binom_3sigma(q, sent[bit]));
}

TEST_CASE("nearly orthogonal states give Eve everything for free") {
    const auto cfg = base_config(ProtocolKind::TwoState, 4.0,
                                 {StrategyKind::InterceptResendSymmetric, 1.0},
                                 100000);
    const auto rep = run_session(cfg);
    // q ~ 2e-4 at mu = 4; a 1e5-pulse run typically sees a handful of flips
    CHECK(rep.empirical_qber < 2e-3);
    CHECK(rep.i_ae_attacked > 0.99);
}

TEST_CASE("4+2 conjugate interception matches the closed forms") {
    const double mu = 0.1;
    const auto delta = overlap_angle(MeanPhotonNumber(mu));
    for (double eta : {0.5, 1.0}) {
        const auto cfg = base_config(
            ProtocolKind::FourPlusTwo, mu,
            {StrategyKind::InterceptResendConjugate, eta}, 400000, 57);
        const auto rep = run_session(cfg);
        const double expect = qber_42(EavesdropFraction(eta), delta);
        CHECK(std::abs(rep.empirical_qber - expect) <
              binom_3sigma(expect, double(rep.sifted_length)));
    }
}

TEST_CASE("POVM mimicry") {
    const double mu = 0.1;
    const double p_conclusive = 1.0 - std::exp(-2.0 * mu);

    const auto cfg = base_config(ProtocolKind::TwoState, mu,
                                 {StrategyKind::PovmMimic, 1.0});
    const auto rep = run_session(cfg);

    // deterministic information = conclusive fraction, below the extractable-information bound
    CHECK(std::abs(rep.i_ae_attacked - p_conclusive) <
          binom_3sigma(p_conclusive, double(rep.attacked_sifted)) + 0.002);
    CHECK(rep.i_ae_attacked <
          max_extractable_info(overlap_angle(MeanPhotonNumber(mu))));

    // inconclusive-branch guesses are resent and wrong half the time
    const double qber_expect = std::exp(-2.0 * mu) / 2.0;
    CHECK(std::abs(rep.empirical_qber - qber_expect) <
          binom_3sigma(qber_expect, double(rep.sifted_length)));
}

TEST_CASE("POVM deterministic info stays below the symmetric bound on a mu grid") {
    for (double mu = 0.02; mu < 1.5; mu += 0.06) {
        const double deterministic = 1.0 - std::exp(-2.0 * mu);
        CHECK(deterministic <=
              max_extractable_info(overlap_angle(MeanPhotonNumber(mu))) + 1e-12);
    }
}

TEST_CASE("blocking attack on the reference-free scheme") {
    auto strat = StrategyConfig{StrategyKind::BlockOnInconclusive, 1.0};
    strat.reference_free = true;
    const auto cfg = base_config(ProtocolKind::TwoState, 0.1, strat, 400000);
    const auto rep = run_session(cfg);

    // no errors, only a rate reduction
    CHECK(rep.empirical_qber == 0.0);
    const double p_c = 1.0 - std::exp(-0.2);
    const double rate_expect = p_c * p_c;
    CHECK(std::abs(rep.sifted_length / double(cfg.n_pulses) - rate_expect) <
          binom_3sigma(rate_expect, double(cfg.n_pulses)));
    // Eve decoded the conclusive fraction
    CHECK(std::abs(rep.blocked_count / double(cfg.n_pulses) - (1.0 - p_c)) <
          binom_3sigma(1.0 - p_c, double(cfg.n_pulses)));
}

TEST_CASE("blocking attack against the parallel reference leaves a trace") {
    const auto cfg = base_config(
        ProtocolKind::TwoState, 0.1,
        {StrategyKind::BlockOnInconclusive, 1.0}, 400000);
    const auto rep = run_session(cfg);

    // blocked pulses still carry the strong reference: random clicks at Bob
    const double p_c = 1.0 - std::exp(-0.2);
    const double p_rand = 1.0 - std::exp(-0.1);  // conclusive among beta-only pulses
    const double rate_expect = p_c * p_c + (1.0 - p_c) * p_rand;
    const double qber_expect = (1.0 - p_c) * p_rand * 0.5 / rate_expect;
    CHECK(std::abs(rep.sifted_length / double(cfg.n_pulses) - rate_expect) <
          binom_3sigma(rate_expect, double(cfg.n_pulses)));
    CHECK(std::abs(rep.empirical_qber - qber_expect) <
          binom_3sigma(qber_expect, double(rep.sifted_length)));
    CHECK(rep.empirical_qber > 0.0);
}

TEST_CASE("beam splitting") {
    const double mu = 0.1, split = 0.9;

    ProtocolConfig cfg = base_config(ProtocolKind::TwoState, mu,
                                     {StrategyKind::BeamSplit, 1.0}, 400000);
    cfg.strategy.split_fraction = split;
    const auto rep = run_session(cfg);

    // no induced errors, rate indistinguishable from an honest lossy line
    CHECK(rep.empirical_qber == 0.0);
    const double rate_expect = rate_2(MeanPhotonNumber(mu * (1.0 - split)));
    CHECK(std::abs(rep.sifted_length / double(cfg.n_pulses) - rate_expect) <
          binom_3sigma(rate_expect, double(cfg.n_pulses)));

    // deferred measurement is worth about 0.23 bits per sifted bit
    const auto delta_e = overlap_angle(MeanPhotonNumber(mu * split));
    const double q_e = sym_projection_error(delta_e);
    const double sigma = std::abs(std::log2((1.0 - q_e) / q_e)) *
                         std::sqrt(q_e * (1.0 - q_e) / double(rep.attacked_sifted));
    CHECK(std::abs(rep.i_ae_attacked - max_extractable_info(delta_e)) < 3.0 * sigma);
    CHECK(rep.i_ae_attacked == doctest::Approx(0.23).epsilon(0.05));
}

TEST_CASE("deferred beam-split decoding at zero retained intensity is a coin") {
    std::vector<EveRecord> recs(100000);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        recs[i].pulse_index = i;
        recs[i].deferred = DeferredKind::StoredAmplitude;
        recs[i].deferred_mu = 0.0;
        recs[i].true_bit = 0;
    }
    eve_decode_after_disclosure(recs, 777);
    int ones = 0;
    for (const auto& r : recs) ones += *r.guess;
    CHECK(std::abs(ones / double(recs.size()) - 0.5) <
          binom_3sigma(0.5, double(recs.size())));
}

TEST_CASE("photon-number splitting") {
    SUBCASE("rejects phase encoding") {
        std::mt19937_64 rng(3);
        SourceModel src{0.1, PhotonStats::Poisson, 100.0};
        const auto f = emit_pulse(ProtocolKind::TwoState, {0, Basis::B0}, src, rng);
        EveRecord rec;
        CHECK_THROWS_AS(photon_number_split(f, {PhotonStats::Poisson,
                                                MeanPhotonNumber(0.1)},
                                            0.9, rec, rng),
                        std::invalid_argument);
    }

    SUBCASE("single-photon pulses teach Eve nothing") {
        std::mt19937_64 rng(4);
        PulseFrame f;
        f.encoding = Encoding::PolarizationPair;
        f.photon_count = 1;
        EveRecord rec;
        photon_number_split(f, {PhotonStats::Poisson, MeanPhotonNumber(0.1)}, 0.0,
                            rec, rng);
        CHECK_FALSE(rec.attacked);
        CHECK(rec.deferred == DeferredKind::None);
    }

    SUBCASE("kept photons decode with certainty after disclosure") {
        std::mt19937_64 rng(5);
        PulseFrame f;
        f.encoding = Encoding::PolarizationPair;
        f.photon_count = 3;
        f.pol_angle = 3.0 * M_PI / 4.0;  // bit 1 in B1
        EveRecord rec;
        const auto fwd = photon_number_split(
            f, {PhotonStats::Poisson, MeanPhotonNumber(0.1)}, 0.9, rec, rng);
        CHECK(fwd.photon_count == 2);
        CHECK(fwd.lossless_line);
        std::vector<EveRecord> recs{rec};
        eve_decode_after_disclosure(recs, 1);
        CHECK(*recs[0].guess == 1);
    }

    SUBCASE("coherent pulses at 90% loss: Eve knows half the key, no errors") {
        ProtocolConfig cfg = base_config(ProtocolKind::FourState, 0.1,
                                         {StrategyKind::PhotonNumberSplit, 1.0},
                                         500000, 61);
        cfg.strategy.loss_budget = 0.9;
        const auto rep = run_session(cfg);
        CHECK(rep.empirical_qber == 0.0);
        const double expect =
            pns_leakage({PhotonStats::Poisson, MeanPhotonNumber(0.1)}, 0.9)
                .eve_known_fraction;
        CHECK(std::abs(rep.eve_known_fraction - expect) <
              binom_3sigma(expect, double(rep.sifted_length)));
    }
}
