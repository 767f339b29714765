// Command-line driver: run experiments, list the catalog, print design diagnostics.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "tfomp/config.hpp"
#include "tfomp/designs.hpp"
#include "tfomp/diagnostics.hpp"
#include "tfomp/experiment.hpp"
#include "tfomp/omp.hpp"
#include "tfomp/report.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct RunArgs {
    std::string config;
    std::optional<long> trials;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
    unsigned threads = 1;
};

struct DiagArgs {
    std::string what;
    std::string design = "gaussian";
    tfomp::Index n = 32;
    tfomp::Index p = 64;
    double rho = 0.0;
    tfomp::Index k0 = 3;
    std::uint64_t seed = 1;
    int draws = 200;
};

tfomp::DesignMatrix make_design(const DiagArgs& a) {
    if (a.design == "hadamard") {
        if (a.p != 2 * a.n) throw tfomp::InvalidParameter("hadamard design has p = 2n");
        return tfomp::hadamard_dictionary(a.n);
    }
    if (a.design == "gaussian") return tfomp::gaussian_design(a.n, a.p, a.seed);
    if (a.design == "correlated") return tfomp::correlated_design(a.n, a.p, a.rho, a.seed);
    throw tfomp::InvalidParameter("unknown design '" + a.design + "' (hadamard, gaussian, correlated)");
}

std::string rate(const std::optional<double>& v) {
    if (!v) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return buf;
}

int run(const RunArgs& a) {
    tfomp::ExperimentConfig cfg;
    try {
        cfg = tfomp::load_config(a.config);
        if (a.trials) cfg.trials = *a.trials;
        if (a.seed) cfg.seed = *a.seed;
        tfomp::validate(cfg);
    } catch (const tfomp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const tfomp::IoError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    const auto result = tfomp::run_experiment(cfg, a.threads);
    std::filesystem::create_directories(a.out);
    const std::string stem = (std::filesystem::path(a.out) / tfomp::to_string(cfg.experiment)).string();
    tfomp::emit_csv(result.rows, stem + ".csv");
    tfomp::emit_plotdata(result.rows, stem + ".dat");

    std::cout << "experiment " << tfomp::to_string(cfg.experiment) << ", " << cfg.trials << " trials per point, seed "
              << cfg.seed << "\n";
    std::cout << std::left << std::setw(18) << "algorithm" << std::setw(8) << "n" << std::setw(9) << "snr_db"
              << std::setw(12) << "mse_db" << std::setw(10) << "pe" << std::setw(10) << "ser" << "iters\n";
    std::cout << std::fixed;
    for (const auto& m : result.rows) {
        std::cout << std::setw(18) << m.algorithm << std::setw(8) << m.point.n << std::setw(9) << std::setprecision(1)
                  << m.point.snr_db << std::setw(12) << std::setprecision(3) << m.mse_db << std::setw(10)
                  << rate(m.pe) << std::setw(10) << rate(m.ser) << std::setprecision(2) << m.iters_mean << "\n";
    }
    long failed = 0;
    for (long f : result.failed_trials) failed += f;
    if (failed > 0) std::cout << failed << " trials produced no estimate\n";
    std::cout << "wrote " << stem << ".csv and " << stem << ".dat\n";
    return 0;
}

void list() {
    for (auto id : tfomp::kAllExperiments) {
        std::cout << "[" << tfomp::to_string(id) << "]\n" << tfomp::to_text(tfomp::default_config(id)) << "\n";
    }
}

void table5() {
    constexpr tfomp::Index p = 500;
    std::cout << std::left << std::setw(6) << "n" << std::setw(8) << "TF-OMP" << std::setw(10) << "QTF-OMP1"
              << "QTF-OMP2\n";
    for (tfomp::Index n = 100; n <= 450; n += 50) {
        std::cout << std::setw(6) << n << std::setw(8) << tfomp::tf_omp_kmax(n) << std::setw(10)
                  << tfomp::qtf_kmax1(n, p) << tfomp::qtf_kmax2(n, p) << "\n";
    }
}

void diag(const DiagArgs& a) {
    const auto d = make_design(a);
    const auto& x = d.entries;
    std::cout << std::setprecision(10);
    if (a.what == "coherence") {
        const double mu = tfomp::mutual_coherence(x);
        std::cout << "mutual_coherence " << mu << "\n";
        std::cout << "mic_max_k0 " << static_cast<long>(std::floor((1.0 / mu + 1.0) / 2.0 - 1e-12)) << "\n";
        return;
    }
    tfomp::Rng rng = tfomp::derive_stream(a.seed, {1});
    const auto signal = tfomp::sparse_signal(x.cols(), a.k0, {}, rng);
    std::cout << "support";
    for (auto i : signal.support) std::cout << ' ' << i;
    std::cout << "\n";
    if (a.what == "erc") {
        const double erc = tfomp::erc_coefficient(x, signal.support);
        std::cout << "erc " << erc << (erc < 1.0 ? " (holds)" : " (fails)") << "\n";
        return;
    }
    const auto th = tfomp::recovery_thresholds(x, signal);
    std::cout << "erc " << th.erc << "\n";
    std::cout << "lambda_min " << th.lambda_min << "\nlambda_max " << th.lambda_max << "\n";
    std::cout << "eps_a " << th.eps_a << "\neps_b " << th.eps_b << "\n";
    const double hi = 2.0 * std::sqrt(static_cast<double>(a.k0));
    const double lo = std::max(1e-3 * hi, std::min(th.eps_a, th.eps_b) > 0 ? std::min(th.eps_a, th.eps_b) : 1e-3);
    const auto est = tfomp::estimate_noise_tolerance(x, signal, std::min(lo, 0.5 * hi), hi, 24, a.draws, a.seed);
    std::cout << "eps_c_estimate " << est.radius << " (Monte Carlo, " << est.draws << " draws per radius)\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tuning-free greedy sparse recovery: experiments and diagnostics"};
    app.require_subcommand(1);

    RunArgs ra;
    auto* run_cmd = app.add_subcommand("run", "run an experiment configuration");
    run_cmd->add_option("--config", ra.config, "configuration file")->required();
    run_cmd->add_option("--trials", ra.trials, "override the trial count")->check(CLI::PositiveNumber);
    run_cmd->add_option("--seed", ra.seed, "override the master seed");
    run_cmd->add_option("--out", ra.out, "output directory")->capture_default_str();
    run_cmd->add_option("--threads", ra.threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();

    app.add_subcommand("list", "print the experiment catalog with default parameters");
    app.add_subcommand("table5", "print the iteration caps for p = 500");

    DiagArgs da;
    auto* diag_cmd = app.add_subcommand("diag", "print design diagnostics");
    diag_cmd->add_option("what", da.what, "coherence | erc | thresholds")
        ->required()
        ->check(CLI::IsMember({"coherence", "erc", "thresholds"}));
    diag_cmd->add_option("--design", da.design, "hadamard | gaussian | correlated")->capture_default_str();
    diag_cmd->add_option("--n", da.n)->capture_default_str();
    diag_cmd->add_option("--p", da.p)->capture_default_str();
    diag_cmd->add_option("--rho", da.rho)->capture_default_str();
    diag_cmd->add_option("--k0", da.k0)->capture_default_str();
    diag_cmd->add_option("--seed", da.seed)->capture_default_str();
    diag_cmd->add_option("--draws", da.draws, "Monte Carlo draws per noise radius")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run_cmd) return run(ra);
        if (app.got_subcommand("list")) list();
        if (app.got_subcommand("table5")) table5();
        if (*diag_cmd) diag(da);
    } catch (const tfomp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
