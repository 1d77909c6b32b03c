// qkdlab: analytic sweeps, comparison curves, Monte Carlo QKD sessions and
// attack scenarios for weak-coherent-pulse key distribution.
//
// Exit codes: 0 success, 1 usage error, 2 statistical-agreement failure,
// 3 internal error.

#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "qkd/experiments.hpp"

namespace {

void write_output(const std::string& csv, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << csv;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file " + out_path);
    f << csv;
}

const std::map<std::string, qkd::ProtocolKind> kProtocols = {
    {"4-state", qkd::ProtocolKind::FourState},
    {"2-state", qkd::ProtocolKind::TwoState},
    {"4+2", qkd::ProtocolKind::FourPlusTwo},
};

const std::map<std::string, qkd::StrategyKind> kStrategies = {
    {"none", qkd::StrategyKind::None},
    {"intercept-conjugate", qkd::StrategyKind::InterceptResendConjugate},
    {"intercept-symmetric", qkd::StrategyKind::InterceptResendSymmetric},
    {"povm-mimic", qkd::StrategyKind::PovmMimic},
    {"block", qkd::StrategyKind::BlockOnInconclusive},
    {"beamsplit", qkd::StrategyKind::BeamSplit},
    {"pns", qkd::StrategyKind::PhotonNumberSplit},
};

const std::map<std::string, qkd::PhotonStats> kStats = {
    {"poisson", qkd::PhotonStats::Poisson},
    {"thermal", qkd::PhotonStats::Thermal},
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"weak-coherent-pulse QKD laboratory"};
    app.require_subcommand(1);
    app.set_config("--config")->configurable(false);

    std::string out_path;
    app.add_option("--out", out_path, "output CSV path (default: stdout)")
        ->configurable(true);

    qkd::ProtocolKind protocol = qkd::ProtocolKind::TwoState;
    double mu = 0.1;
    double eta = 1.0;
    double length_km = 0.0;
    double loss_db = -1.0;  // <0: use --length-km
    double split_fraction = 0.0;
    double loss_budget = -1.0;  // <0: derive from the fiber loss
    bool reference_free = false;
    std::uint64_t n_pulses = 100000;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    std::string grid_text;
    qkd::StrategyKind strategy = qkd::StrategyKind::None;
    qkd::PhotonStats stats = qkd::PhotonStats::Poisson;

    const auto add_common = [&](CLI::App* sub, bool needs_seed) {
        sub->fallthrough();
        sub->add_option("--protocol", protocol, "protocol")
            ->transform(CLI::CheckedTransformer(kProtocols, CLI::ignore_case));
        sub->add_option("--mu", mu, "mean photon number per pulse")
            ->check(CLI::NonNegativeNumber);
        sub->add_option("--length-km", length_km, "fiber length, km")
            ->check(CLI::NonNegativeNumber);
        sub->add_option("--loss-db", loss_db,
                        "total line loss in dB (overrides --length-km)");
        sub->add_option("--photon-stats", stats,
                        "photon statistics of the source (4-state)")
            ->transform(CLI::CheckedTransformer(kStats, CLI::ignore_case));
        sub->add_option("--n-pulses", n_pulses, "pulses per session");
        auto* s = sub->add_option("--seed", seed, "master RNG seed");
        if (needs_seed) s->required();
        sub->add_option("--workers", workers, "worker threads")
            ->check(CLI::PositiveNumber);
    };

    auto* analytic = app.add_subcommand("analytic", "closed-form sweep over mu");
    analytic->fallthrough();
    analytic->add_option("--protocol", protocol, "protocol")
        ->transform(CLI::CheckedTransformer(kProtocols, CLI::ignore_case));
    bool all_protocols = false;
    analytic->add_flag("--all-protocols", all_protocols, "sweep every protocol");
    analytic->add_option("--mu", mu, "single mu value")->check(CLI::NonNegativeNumber);
    analytic->add_option("--grid", grid_text, "mu grid lo:hi:n[:log]");

    auto* fig3 = app.add_subcommand(
        "fig3", "normalized information-vs-rate comparison curves");
    fig3->fallthrough();
    fig3->add_option("--grid", grid_text, "t grid lo:hi:n[:log]");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo session");
    add_common(simulate, true);
    simulate->add_option("--eta", eta, "fraction of pulses Eve attacks")
        ->check(CLI::Range(0.0, 1.0));
    simulate->add_option("--strategy", strategy, "eavesdropping strategy")
        ->transform(CLI::CheckedTransformer(kStrategies, CLI::ignore_case));

    auto* attack = app.add_subcommand("attack", "lossy-line attack scenario");
    add_common(attack, true);
    attack->add_option("--strategy", strategy, "beamsplit | pns | block")
        ->required()
        ->transform(CLI::CheckedTransformer(kStrategies, CLI::ignore_case));
    attack->add_option("--split-fraction", split_fraction,
                       "beamsplit: intensity fraction diverted (default: line loss)");
    attack->add_option("--loss-budget", loss_budget,
                       "pns: loss fraction Eve hides behind (default: line loss)");
    attack->add_flag("--reference-free", reference_free,
                     "block: scheme without a strong reference pulse");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (analytic->parsed()) {
            const std::vector<double> grid =
                grid_text.empty() ? std::vector<double>{mu}
                                  : qkd::parse_grid(grid_text).points();
            std::vector<qkd::ProtocolKind> ps =
                all_protocols ? std::vector<qkd::ProtocolKind>{
                                    qkd::ProtocolKind::FourState,
                                    qkd::ProtocolKind::TwoState,
                                    qkd::ProtocolKind::FourPlusTwo}
                              : std::vector<qkd::ProtocolKind>{protocol};
            write_output(qkd::cmd_analytic(ps, grid), out_path);
            return 0;
        }
        if (fig3->parsed()) {
            const std::vector<double> grid = grid_text.empty()
                                                 ? qkd::default_fig3_grid()
                                                 : qkd::parse_grid(grid_text).points();
            write_output(qkd::cmd_fig3(grid), out_path);
            return 0;
        }

        qkd::ProtocolConfig cfg;
        cfg.protocol = protocol;
        cfg.source.mu = mu;
        cfg.source.stats = stats;
        cfg.n_pulses = n_pulses;
        cfg.seed = seed;
        cfg.workers = workers;
        if (loss_db >= 0.0) {
            cfg.fiber.length_km = 1.0;
            cfg.fiber.attenuation_db_per_km = loss_db;
        } else {
            cfg.fiber.length_km = length_km;
        }
        const double loss = cfg.fiber.loss_fraction();

        if (simulate->parsed()) {
            cfg.strategy.kind = strategy;
            cfg.strategy.eta = eta;
            const qkd::SimulateResult res = qkd::run_simulation(cfg);
            write_output(res.csv, out_path);
            return res.agreement ? 0 : 2;
        }

        // attack
        cfg.strategy.kind = strategy;
        cfg.strategy.eta = 1.0;
        cfg.strategy.reference_free = reference_free;
        cfg.strategy.split_fraction = split_fraction > 0.0 ? split_fraction : loss;
        cfg.strategy.loss_budget = loss_budget >= 0.0 ? loss_budget : loss;
        if (strategy == qkd::StrategyKind::BeamSplit ||
            strategy == qkd::StrategyKind::PhotonNumberSplit) {
            // Eve substitutes the line; the configured loss is her cover story.
            cfg.fiber = qkd::FiberModel{};
        }
        const qkd::AttackResult res = qkd::run_attack(cfg, loss);
        write_output(res.csv, out_path);
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
