#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "qkd/experiments.hpp"

using namespace qkd;

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

}  // namespace

TEST_CASE("grid parsing") {
    const auto g = parse_grid("0.01:0.4:5");
    CHECK(g.n == 5);
    CHECK_FALSE(g.log_spaced);
    CHECK(g.points().front() == doctest::Approx(0.01));
    CHECK(g.points().back() == doctest::Approx(0.4));

    const auto lg = parse_grid("1e-4:0.4:50:log");
    CHECK(lg.log_spaced);
    CHECK(lg.points().size() == 50);

    CHECK_THROWS_AS(parse_grid("nope"), std::invalid_argument);
    CHECK_THROWS_AS(parse_grid("1:2:0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_grid("1:2:3:weird"), std::invalid_argument);
}

TEST_CASE("analytic sweep output") {
    const std::vector<ProtocolKind> all{ProtocolKind::FourState,
                                        ProtocolKind::TwoState,
                                        ProtocolKind::FourPlusTwo};
    SUBCASE("mu = 0 gives zero rate everywhere") {
        const auto rows = parse_csv(cmd_analytic(all, {0.0}));
        REQUIRE(rows.size() == 4);
        for (std::size_t r = 1; r < rows.size(); ++r)
            CHECK(std::stod(rows[r][3]) == 0.0);
    }

    SUBCASE("2-state at mu = 0.09 leaks about 0.23 bits at full interception") {
        const auto rows =
            parse_csv(cmd_analytic({ProtocolKind::TwoState}, {0.09}));
        REQUIRE(rows.size() == 2);
        CHECK(std::stod(rows[1][5]) == doctest::Approx(0.23).epsilon(0.01));
        CHECK(std::stod(rows[1][6]) == doctest::Approx(1.0));
    }

    SUBCASE("numeric fields round-trip") {
        const auto csv = cmd_analytic({ProtocolKind::FourPlusTwo}, {0.123456789});
        const auto rows = parse_csv(csv);
        CHECK(std::stod(rows[1][1]) == 0.123456789);
        const MeanPhotonNumber mu(0.123456789);
        CHECK(std::stod(rows[1][3]) == doctest::Approx(rate_42(mu)).epsilon(1e-12));
    }
}

TEST_CASE("comparison-curve output") {
    const auto rows = parse_csv(cmd_fig3(default_fig3_grid()));
    REQUIRE(rows.size() == 51);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const double ae2 = std::stod(rows[r][1]);
        const double ae42 = std::stod(rows[r][3]);
        CHECK(ae42 < 1.0);
        CHECK(ae42 < ae2);
    }
    // infeasible t is marked, not fatal
    const auto bad = parse_csv(cmd_fig3({0.7}));
    CHECK(std::isnan(std::stod(bad[1][3])));
    CHECK_FALSE(std::isnan(std::stod(bad[1][1])));
}

TEST_CASE("simulation with analytic predictions") {
    ProtocolConfig cfg;
    cfg.protocol = ProtocolKind::TwoState;
    cfg.source.mu = 0.1;
    cfg.n_pulses = 200000;
    cfg.seed = 5;
    cfg.workers = 4;

    SUBCASE("honest run agrees with zero error") {
        const auto res = run_simulation(cfg);
        CHECK(res.agreement);
        CHECK(std::abs(res.z_rate) <= 3.0);
        CHECK(res.z_qber == 0.0);
    }

    SUBCASE("interception agrees with the closed forms") {
        cfg.strategy = {StrategyKind::InterceptResendSymmetric, 0.7};
        const auto res = run_simulation(cfg);
        CHECK(res.agreement);
        CHECK(std::abs(res.z_qber) <= 3.0);
        CHECK(std::abs(res.z_i_ae) <= 3.0);
        CHECK(std::abs(res.z_i_eb) <= 3.0);
    }

    SUBCASE("identical seeds give identical bytes across worker counts") {
        cfg.strategy = {StrategyKind::InterceptResendConjugate, 0.0};
        cfg.protocol = ProtocolKind::FourPlusTwo;
        cfg.workers = 1;
        const auto a = run_simulation(cfg);
        cfg.workers = 6;
        const auto b = run_simulation(cfg);
        CHECK(a.csv == b.csv);
    }
}

TEST_CASE("attack scenarios") {
    ProtocolConfig cfg;
    cfg.n_pulses = 400000;
    cfg.seed = 9;
    cfg.workers = 4;
    cfg.source.mu = 0.1;

    SUBCASE("photon-number splitting summary") {
        cfg.protocol = ProtocolKind::FourState;
        cfg.strategy = {StrategyKind::PhotonNumberSplit, 1.0};
        cfg.strategy.loss_budget = 0.9;
        const auto res = run_attack(cfg, 0.9);
        CHECK(res.induced_qber == 0.0);
        CHECK(res.eve_known_fraction == doctest::Approx(0.49).epsilon(0.1));
        CHECK(std::isnan(res.eve_bits_per_bit));
    }

    SUBCASE("beam splitting summary") {
        cfg.protocol = ProtocolKind::TwoState;
        cfg.strategy = {StrategyKind::BeamSplit, 1.0};
        cfg.strategy.split_fraction = 0.9;
        const auto res = run_attack(cfg, 0.9);
        CHECK(res.induced_qber == 0.0);
        CHECK(res.eve_bits_per_bit == doctest::Approx(0.23).epsilon(0.05));
    }

    SUBCASE("interception is not an attack-scenario strategy") {
        cfg.strategy = {StrategyKind::InterceptResendSymmetric, 1.0};
        CHECK_THROWS_AS(run_attack(cfg, 0.0), std::invalid_argument);
    }
}
