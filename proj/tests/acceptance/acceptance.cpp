// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tfomp/baselines.hpp"
#include "tfomp/config.hpp"
#include "tfomp/designs.hpp"
#include "tfomp/experiment.hpp"
#include "tfomp/metrics.hpp"
#include "tfomp/omp.hpp"
#include "tfomp/random.hpp"

using namespace tfomp;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
};

/// A trace together with the observation it was computed from.
struct TraceRecord {
    MatrixXd x;
    VectorXd y;
    GreedyTrace trace;
};

std::vector<TraceRecord> g_traces;

void keep(const MatrixXd& x, const VectorXd& y, const GreedyTrace& tr) { g_traces.push_back({x, y, tr}); }

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

Verdict table_v() {
    const std::vector<Index> ns{100, 150, 200, 250, 300, 350, 400, 450};
    const std::vector<Index> tf{50, 75, 100, 125, 150, 175, 200, 225};
    const std::vector<Index> q1{12, 15, 19, 23, 28, 35, 45, 68};
    const std::vector<Index> q2{16, 24, 32, 40, 48, 56, 64, 72};
    Verdict v;
    int mismatches = 0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (tf_omp_kmax(ns[i]) != tf[i] || qtf_kmax1(ns[i], 500) != q1[i] || qtf_kmax2(ns[i], 500) != q2[i]) {
            ++mismatches;
        }
    }
    v.pass = mismatches == 0;
    v.detail = std::to_string(ns.size() - mismatches) + "/8 rows exact";
    return v;
}

Verdict coherence() {
    const double mu = mutual_coherence(hadamard_dictionary(32));
    const double err = std::abs(mu - 1.0 / std::sqrt(32.0));
    return {err <= 1e-12, "mu = " + fmt("%.15f", mu) + ", |err| = " + fmt("%.2e", err)};
}

Verdict noiseless_recovery() {
    const MatrixXd x = hadamard_dictionary(32).entries;
    Rng rng = derive_stream(3, {});
    int wrong = 0;
    for (int t = 0; t < 500; ++t) {
        const auto s = sparse_signal(64, 3, {}, rng);
        const VectorXd y = x * s.dense();
        const auto res = tf_omp(x, y);
        keep(x, y, res.trace);
        std::vector<Index> sorted = res.support;
        std::sort(sorted.begin(), sorted.end());
        if (pe(res.support, s.support) != 0 || sorted != s.support) ++wrong;
    }
    return {wrong == 0, std::to_string(500 - wrong) + "/500 supports exact"};
}

Verdict bounded_noise() {
    const MatrixXd x = hadamard_dictionary(32).entries;
    Rng rng = derive_stream(4, {});
    std::normal_distribution<double> normal(0.0, 1.0);
    int accepted = 0, correct = 0, drawn = 0;
    for (double snr : {20.0, 25.0, 30.0, 40.0, 50.0, 60.0}) {
        for (int t = 0; t < 300; ++t) {
            ++drawn;
            const auto s = sparse_signal(64, 3, {}, rng);
            const VectorXd clean = x * s.dense();
            const auto noise = noise_for_snr(clean, snr, rng);
            const VectorXd y = clean + noise.w;
            const auto th = recovery_thresholds(x, s);
            const auto tr = run_omp(x, y, 16);
            keep(x, y, tr);
            if (!(noise.w.norm() < std::min(th.eps_a, th.eps_b))) continue;
            ++accepted;
            if (tr.steps() >= 3 && pe(std::span(tr.selected.data(), 3), s.support) == 0) ++correct;
        }
    }
    Verdict v;
    v.pass = accepted >= 100 && correct == accepted;
    v.detail = std::to_string(correct) + "/" + std::to_string(accepted) + " accepted trials correct (" +
               std::to_string(drawn) + " drawn)";
    return v;
}

Verdict high_snr_consistency() {
    auto c = default_config(ExperimentId::hadamard_small);
    c.trials = 2000;
    c.seed = 5;
    c.algorithms = {"tf_omp", "omp_sigma"};
    const auto result = run_experiment(c);

    // replay the harness draws to collect the TF-OMP and OMP(sigma^2) traces
    const MatrixXd x = hadamard_dictionary(32).entries;
    std::vector<double> replay_pe(c.snr_db.size(), 0.0);
    for (std::size_t gi = 0; gi < c.snr_db.size(); ++gi) {
        for (long t = 0; t < c.trials; ++t) {
            Rng rng = derive_stream(c.seed, {gi, static_cast<std::uint64_t>(t)});
            const auto s = sparse_signal(64, 3, {}, rng);
            const VectorXd clean = x * s.dense();
            const auto noise = noise_for_snr(clean, c.snr_db[gi], rng);
            const VectorXd y = clean + noise.w;
            const auto tf = tf_omp(x, y);
            keep(x, y, tf.trace);
            keep(x, y, omp_sigma(x, y, noise.sigma).trace);
            replay_pe[gi] += pe(tf.support, s.support);
        }
    }

    Verdict v;
    std::ostringstream os;
    os << "PE(TF-OMP) by SNR:";
    for (std::size_t gi = 0; gi < c.snr_db.size(); ++gi) {
        const auto& row = find_row(result, gi, "tf_omp");
        os << ' ' << fmt("%.4f", *row.pe);
        if (std::abs(replay_pe[gi] / static_cast<double>(c.trials) - *row.pe) > 1e-12) v.pass = false;  // replay must match harness
        if (gi > 0) {
            const auto& prev = find_row(result, gi - 1, "tf_omp");
            const double slack = 2.0 * std::hypot(*row.pe_stderr, *prev.pe_stderr);
            if (*row.pe > *prev.pe + slack) v.pass = false;
        }
    }
    const double pe0 = *find_row(result, 0, "tf_omp").pe;
    const double pe30 = *find_row(result, c.snr_db.size() - 1, "tf_omp").pe;
    const double sigma30 = *find_row(result, c.snr_db.size() - 1, "omp_sigma").pe;
    if (!(pe30 < 0.1 * pe0)) v.pass = false;
    if (!(sigma30 >= pe30)) v.pass = false;
    os << "; PE(OMP(sigma^2)) at 30 dB " << fmt("%.4f", sigma30);
    v.detail = os.str();
    return v;
}

Verdict oracle_equivalence() {
    Rng rng = derive_stream(6, {});
    const double bound = 1.0 / (std::sqrt(2.0) + 1.0);
    int accepted = 0, equal = 0;
    for (int inst = 0; inst < 100; ++inst) {
        const MatrixXd x = near_equiangular_design(rng).entries;
        const auto s = sparse_signal(16, 2, {}, rng);
        if (!(ric_bruteforce(x, 3).delta < bound)) continue;
        ++accepted;
        const VectorXd y = x * s.dense();
        const auto tr = run_omp(x, y, 2);
        keep(x, y, tr);
        if (pe(tr.selected, best_subset(x, y, 2).support) == 0) ++equal;
    }
    Verdict v;
    v.pass = accepted > 0 && equal == accepted;
    v.detail = std::to_string(equal) + "/" + std::to_string(accepted) + " accepted instances agree (of 100 drawn)";
    return v;
}

Verdict projection_identity() {
    double worst = 0.0;
    bool t_ok = true;
    std::size_t steps = 0;
    for (const auto& rec : g_traces) {
        const auto& tr = rec.trace;
        if (tr.steps() == 0) continue;
        const double y_sq = rec.y.squaredNorm();
        // batch residuals along the selection path, independent of the incremental state
        VectorXd prev = rec.y;
        std::vector<Index> cols;
        for (Index k = 1; k <= tr.steps(); ++k) {
            cols.push_back(tr.selected[static_cast<std::size_t>(k - 1)]);
            const VectorXd cur = ortho_residual(rec.y, select_columns(rec.x, cols));
            const double proj_sq = (prev - cur).squaredNorm();  // ||(P_k - P_{k-1}) y||^2
            const double gap = tr.residual_sq[static_cast<std::size_t>(k - 1)] -
                               tr.residual_sq[static_cast<std::size_t>(k)] - proj_sq;
            worst = std::max(worst, std::abs(gap) / y_sq);
            prev = cur;
            ++steps;
        }
        for (double t : t_statistic(tr)) {
            if (!(t >= 0.0 && t <= 1.0)) t_ok = false;
        }
    }
    Verdict v;
    v.pass = worst <= 1e-9 && t_ok && !g_traces.empty();
    v.detail = std::to_string(g_traces.size()) + " traces, " + std::to_string(steps) +
               " steps, max gap/||y||^2 = " + fmt("%.2e", worst) + (t_ok ? ", t in [0,1]" : ", t out of range");
    return v;
}

Verdict oracle_ls_variance() {
    const MatrixXd x = gaussian_design(32, 64, std::uint64_t{8}).entries;
    Rng rng = derive_stream(8, {});
    const auto s = sparse_signal(64, 3, {}, rng);
    const VectorXd beta = s.dense();
    const double sigma = 0.5;
    const MatrixXd xs = select_columns(x, s.support);
    const double expected = sigma * sigma * (xs.transpose() * xs).inverse().trace();
    std::normal_distribution<double> normal(0.0, sigma);
    MeanAccumulator acc;
    for (int t = 0; t < 10000; ++t) {
        VectorXd y = x * beta;
        for (Index i = 0; i < y.size(); ++i) y(i) += normal(rng);
        acc.add(mse(oracle_ls(x, y, s.support), beta));
    }
    const double rel = std::abs(acc.mean() - expected) / expected;
    return {rel <= 0.10, "MSE " + fmt("%.5f", acc.mean()) + " vs " + fmt("%.5f", expected) + " (rel " +
                             fmt("%.3f", rel) + ")"};
}

ExperimentResult gard_run(std::vector<Index> n_out, long trials) {
    auto c = default_config(ExperimentId::gard_nout_sweep);
    c.n_out_list = std::move(n_out);
    c.snr_db = {20};
    c.sir_db = -10;
    c.trials = trials;
    c.seed = 9;
    c.algorithms = {"tf_gard", "gard_sigma", "ls", "ls_wo"};
    return run_experiment(c);
}

Verdict tf_gard_vs_ls(const ExperimentResult& r) {
    const double tf = find_row(r, 0, "tf_gard").mse_db;
    const double wo = find_row(r, 0, "ls_wo").mse_db;
    const double ls = find_row(r, 0, "ls").mse_db;
    Verdict v;
    v.pass = std::abs(tf - wo) <= 1.0 && tf <= ls - 10.0;
    v.detail = "MSE dB: TF-GARD " + fmt("%.2f", tf) + ", LS outlier-free " + fmt("%.2f", wo) + ", LS " +
               fmt("%.2f", ls);
    return v;
}

Verdict tf_gard_vs_gard_sigma(const ExperimentResult& r) {
    Verdict v;
    std::ostringstream os;
    os << "|dB gap| at n_out 10/40/80:";
    for (std::size_t gi = 0; gi < r.config.n_out_list.size(); ++gi) {
        const double gap = std::abs(find_row(r, gi, "tf_gard").mse_db - find_row(r, gi, "gard_sigma").mse_db);
        if (!(gap <= 2.0)) v.pass = false;
        os << ' ' << fmt("%.2f", gap);
    }
    v.detail = os.str();
    return v;
}

Verdict mimo_correction() {
    auto c = default_config(ExperimentId::mimo_overdetermined);
    c.trials = 10000;
    c.seed = 11;
    const auto r = run_experiment(c);
    Verdict v;
    std::ostringstream os;
    os << "SER LMMSE -> +TF-OMP:";
    for (std::size_t gi = 0; gi < c.snr_db.size(); ++gi) {
        const auto& base = find_row(r, gi, "lmmse");
        const auto& tf = find_row(r, gi, "lmmse_tf_omp");
        const double slack = 2.0 * std::hypot(*base.ser_stderr, *tf.ser_stderr);
        if (*tf.ser > *base.ser + slack) v.pass = false;
        os << ' ' << fmt("%.4f", *base.ser) << "->" << fmt("%.4f", *tf.ser);
    }
    const std::size_t top = c.snr_db.size() - 1;
    const double tf_top = *find_row(r, top, "lmmse_tf_omp").ser;
    const double k0_top = *find_row(r, top, "lmmse_omp_k0").ser;
    if (!(tf_top <= 2.0 * k0_top)) v.pass = false;
    os << "; at " << fmt("%g", c.snr_db[top]) << " dB +TF-OMP " << fmt("%.3g", tf_top) << " vs +OMP(k0) "
       << fmt("%.3g", k0_top);
    v.detail = os.str();
    return v;
}

} // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const char* name, const std::function<Verdict()>& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!v.pass) ++failures;
        std::printf("%s [%2d] %s: %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str(), secs);
        std::fflush(stdout);
    };

    report(1, "iteration caps for p = 500", table_v);
    report(2, "Hadamard dictionary coherence", coherence);
    report(3, "noiseless exact recovery", noiseless_recovery);
    report(4, "bounded-noise recovery", bounded_noise);
    report(5, "high-SNR consistency", high_snr_consistency);
    report(6, "OMP equals best subset under RIP", oracle_equivalence);
    report(7, "projection identity on traces 3-6", projection_identity);
    report(8, "oracle LS variance", oracle_ls_variance);
    ExperimentResult single, sweep;
    report(9, "TF-GARD vs outlier-free LS", [&] {
        single = gard_run({10}, 500);
        return tf_gard_vs_ls(single);
    });
    report(10, "TF-GARD vs GARD(sigma^2)", [&] {
        sweep = gard_run({10, 40, 80}, 500);
        return tf_gard_vs_gard_sigma(sweep);
    });
    report(11, "MIMO sparse error correction", mimo_correction);

    std::printf("%d/11 criteria passed\n", 11 - failures);
    return failures == 0 ? 0 : 1;
}
