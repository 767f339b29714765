#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "tfomp/baselines.hpp"
#include "tfomp/config.hpp"
#include "tfomp/designs.hpp"
#include "tfomp/gard.hpp"
#include "tfomp/metrics.hpp"
#include "tfomp/mimo.hpp"
#include "tfomp/omp.hpp"
#include "tfomp/random.hpp"

namespace tfomp {

/// One point of an experiment grid. Fields that do not apply are empty.
struct GridPoint {
    Index n = 0;
    Index p = 0;
    std::optional<Index> k0;
    std::optional<double> rho;
    std::optional<double> alpha;
    double snr_db = 0.0;
    std::optional<double> sir_db;
    std::optional<Index> n_out;
};

/// Aggregated Monte Carlo metrics of one algorithm at one grid point.
struct TrialMetrics {
    std::string experiment;
    GridPoint point;
    std::string algorithm;
    long trials = 0;    // trials in which the algorithm produced an estimate
    long failures = 0;  // trials in which it raised an error
    double mse_linear = 0.0;
    double mse_db = 0.0;
    double mse_stderr = 0.0;
    std::optional<double> pe;
    std::optional<double> pe_stderr;
    std::optional<double> ser;
    std::optional<double> ser_stderr;
    double iters_mean = 0.0;
    std::optional<double> wall_ms_mean;
    std::optional<Index> k_max;  // iteration cap, where the algorithm has one
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<TrialMetrics> rows;
    std::vector<long> failed_trials;  // per grid point: trials whose data could not be generated
};

/// Expand the Cartesian grid n x rho x alpha x n_out x snr_db of a config.
inline std::vector<GridPoint> expand_grid(const ExperimentConfig& c) {
    const auto fam = family_of(c.experiment);
    const bool hadamard = c.experiment == ExperimentId::hadamard_small || c.experiment == ExperimentId::exp_decay;
    const std::vector<Index> ns = c.n_list.empty() ? std::vector<Index>{c.n} : c.n_list;
    const std::vector<double> rhos = c.rho_list.empty() ? std::vector<double>{c.rho} : c.rho_list;
    const std::vector<double> alphas = c.alpha_list.empty() ? std::vector<double>{c.alpha} : c.alpha_list;
    const std::vector<Index> nouts = c.n_out_list.empty() ? std::vector<Index>{c.n_out} : c.n_out_list;
    std::vector<GridPoint> grid;
    if (fam == ExperimentFamily::mimo) {
        for (double snr : c.snr_db) {
            GridPoint g;
            g.n = 2 * c.nr;
            g.p = 2 * c.nt;
            g.snr_db = snr;
            grid.push_back(g);
        }
        return grid;
    }
    for (Index n : ns) {
        for (double rho : rhos) {
            for (double alpha : alphas) {
                for (Index nout : nouts) {
                    for (double snr : c.snr_db) {
                        GridPoint g;
                        g.n = n;
                        g.snr_db = snr;
                        if (fam == ExperimentFamily::robust_regression) {
                            g.p = c.p;
                            g.sir_db = c.sir_db;
                            g.n_out = nout;
                        } else {
                            g.p = hadamard ? 2 * n : c.p;
                            g.k0 = c.k0_fraction > 0.0 ? static_cast<Index>(c.k0_fraction * static_cast<double>(n))
                                                       : c.k0;
                            if (c.experiment == ExperimentId::correlated) g.rho = rho;
                            if (c.experiment == ExperimentId::exp_decay) g.alpha = alpha;
                        }
                        grid.push_back(g);
                    }
                }
            }
        }
    }
    return grid;
}

/// Result of one algorithm on one trial.
struct AlgOutcome {
    bool ok = false;
    double sq_error = 0.0;
    std::optional<int> support_error;
    std::optional<double> ser;
    double iterations = 0.0;
    double wall_ms = 0.0;
};

using TrialOutcome = std::optional<std::vector<AlgOutcome>>;  // empty: data generation failed

namespace detail {

template <class Fn>
AlgOutcome timed(Fn&& fn) {
    AlgOutcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        out = fn();
        out.ok = true;
    } catch (const Error&) {
        out = AlgOutcome{};
    }
    const auto t1 = std::chrono::steady_clock::now();
    out.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    return out;
}

inline std::optional<Index> kmax_of(const std::string& alg, const GridPoint& g) {
    if (alg == "tf_omp") return tf_omp_kmax(g.n);
    if (alg == "qtf_omp1" && g.p > g.n) return qtf_kmax1(g.n, g.p);
    if (alg == "qtf_omp2") return qtf_kmax2(g.n, g.p);
    if (alg == "omp_k0") return g.k0;
    if (alg == "tf_gard") return tf_gard_kmax(g.n, g.p);
    if (alg == "gard_nout") return g.n_out;
    if (alg == "lmmse_tf_omp") return tf_omp_kmax(g.n);
    return std::nullopt;
}

inline std::vector<AlgOutcome> sparse_trial(const ExperimentConfig& c, const GridPoint& g,
                                            const std::optional<DesignMatrix>& fixed_design, Rng& rng) {
    DesignMatrix design;
    if (fixed_design) design = *fixed_design;
    else if (c.experiment == ExperimentId::correlated) design = correlated_design(g.n, g.p, *g.rho, rng);
    else design = gaussian_design(g.n, g.p, rng);
    const MatrixXd& x = design.entries;

    SignalSpec spec;
    if (c.experiment == ExperimentId::exp_decay) spec = {ValueKind::exp_decay, *g.alpha};
    const SparseSignal signal = sparse_signal(g.p, *g.k0, spec, rng);
    const VectorXd beta = signal.dense();
    const VectorXd clean = x * beta;
    NoiseDraw noise;
    if (c.noiseless) noise.w = VectorXd::Zero(g.n);
    else noise = noise_for_snr(clean, g.snr_db, rng);
    const VectorXd y = clean + noise.w;

    auto score = [&](const RecoveryResult& r) {
        AlgOutcome o;
        o.sq_error = mse(r.beta, beta);
        o.support_error = pe(r.support, signal.support);
        o.iterations = static_cast<double>(r.trace.steps());
        return o;
    };

    std::vector<AlgOutcome> out;
    for (const auto& alg : c.algorithms) {
        out.push_back(timed([&]() -> AlgOutcome {
            if (alg == "tf_omp") return score(tf_omp(x, y));
            if (alg == "qtf_omp1") return score(tf_omp(x, y, qtf_kmax1(g.n, g.p)));
            if (alg == "qtf_omp2") return score(tf_omp(x, y, qtf_kmax2(g.n, g.p)));
            if (alg == "omp_k0") return score(omp_fixed(x, y, *g.k0));
            if (alg == "omp_sigma") return score(omp_sigma(x, y, noise.sigma));
            if (alg == "lasso") {
                if (!(noise.sigma > 0.0)) throw InvalidParameter("lasso: needs sigma > 0");
                const auto sol = lasso(x, y, lasso_lambda(noise.sigma, g.p, c.lasso_lambda_scale));
                const auto support = sol.support();
                AlgOutcome o;
                o.sq_error = mse(debias(x, y, support), beta);
                o.support_error = pe(support, signal.support);
                o.iterations = sol.sweeps;
                return o;
            }
            if (alg == "oracle_ls") {
                AlgOutcome o;
                o.sq_error = mse(oracle_ls(x, y, signal.support), beta);
                o.support_error = 0;
                return o;
            }
            throw InvalidParameter("unknown algorithm " + alg);
        }));
    }
    return out;
}

inline std::vector<AlgOutcome> robust_trial(const ExperimentConfig& c, const GridPoint& g, Rng& rng) {
    const MatrixXd x = gaussian_design(g.n, g.p, rng).entries;
    const VectorXd beta = sparse_signal(g.p, g.p, {ValueKind::gaussian_values, 1.0}, rng).dense();
    const VectorXd clean = x * beta;
    NoiseDraw noise;
    if (c.noiseless) noise.w = VectorXd::Zero(g.n);
    else noise = noise_for_snr(clean, g.snr_db, rng);
    OutlierVector gross;
    gross.dimension = g.n;
    if (*g.n_out > 0) gross = outliers(g.n, *g.n_out, clean.squaredNorm(), *g.sir_db, rng);
    const VectorXd y_clean = clean + noise.w;
    const VectorXd y = y_clean + gross.dense();

    auto score = [&](const RobustEstimate& r) {
        AlgOutcome o;
        o.sq_error = mse(r.beta, beta);
        o.support_error = pe(r.outlier_support, gross.support);
        o.iterations = static_cast<double>(r.trace.steps());
        return o;
    };
    std::vector<AlgOutcome> out;
    for (const auto& alg : c.algorithms) {
        out.push_back(timed([&]() -> AlgOutcome {
            if (alg == "tf_gard") return score(tf_gard(x, y));
            if (alg == "gard_sigma") return score(gard_sigma(x, y, noise.sigma));
            if (alg == "gard_nout") return score(gard_fixed(x, y, *g.n_out));
            AlgOutcome o;
            if (alg == "ls") o.sq_error = mse(least_squares(x, y), beta);
            else if (alg == "ls_wo") o.sq_error = mse(least_squares(x, y_clean), beta);
            else throw InvalidParameter("unknown algorithm " + alg);
            return o;
        }));
    }
    return out;
}

inline MimoCorrection mimo_correction(const std::string& alg) {
    if (alg == "lmmse") return MimoCorrection::none;
    if (alg == "lmmse_tf_omp") return MimoCorrection::tf_omp;
    if (alg == "lmmse_omp_k0") return MimoCorrection::omp_k0;
    if (alg == "lmmse_omp_sigma") return MimoCorrection::omp_sigma;
    throw InvalidParameter("unknown algorithm " + alg);
}

inline std::vector<AlgOutcome> mimo_trial(const ExperimentConfig& c, const GridPoint& g, Rng& rng) {
    const MimoTrial t = draw_mimo_trial(c.nt, c.nr, g.snr_db, c.noiseless, rng);
    std::vector<MimoCorrection> roster;
    for (const auto& alg : c.algorithms) roster.push_back(mimo_correction(alg));
    const auto t0 = std::chrono::steady_clock::now();
    const MimoOutcome res = mimo_pipeline(t.h, t.x, t.y, roster);
    const auto t1 = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count() / static_cast<double>(roster.size());
    std::vector<AlgOutcome> out;
    for (const auto& d : res.decisions) {
        AlgOutcome o;
        o.ok = d.ok;
        if (d.ok) {
            o.sq_error = mse(d.x_hat, t.x);
            o.ser = d.ser;
            o.iterations = static_cast<double>(d.iterations);
        }
        o.wall_ms = ms;
        out.push_back(o);
    }
    return out;
}

} // namespace detail

/**
 * Run every trial of every grid point and aggregate per (point, algorithm).
 *
 * Trial t at grid point i draws all of its data from the stream
 * derive_stream(seed, {i, t}); results are collected by index and reduced in
 * index order, so the output does not depend on `threads`.
 */
inline ExperimentResult run_experiment(const ExperimentConfig& c, unsigned threads = 1) {
    validate(c);
    const auto fam = family_of(c.experiment);
    const auto grid = expand_grid(c);
    ExperimentResult result;
    result.config = c;
    threads = std::max(1u, threads);

    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        const GridPoint& g = grid[gi];
        std::optional<DesignMatrix> fixed_design;
        if (c.experiment == ExperimentId::hadamard_small || c.experiment == ExperimentId::exp_decay) {
            fixed_design = hadamard_dictionary(g.n);
        }
        std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(c.trials));
        auto run_one = [&](long t) {
            Rng rng = derive_stream(c.seed, {static_cast<std::uint64_t>(gi), static_cast<std::uint64_t>(t)});
            try {
                switch (fam) {
                case ExperimentFamily::sparse_recovery:
                    outcomes[static_cast<std::size_t>(t)] = detail::sparse_trial(c, g, fixed_design, rng);
                    break;
                case ExperimentFamily::robust_regression:
                    outcomes[static_cast<std::size_t>(t)] = detail::robust_trial(c, g, rng);
                    break;
                case ExperimentFamily::mimo:
                    outcomes[static_cast<std::size_t>(t)] = detail::mimo_trial(c, g, rng);
                    break;
                }
            } catch (const Error&) {
                outcomes[static_cast<std::size_t>(t)].reset();
            }
        };
        if (threads == 1) {
            for (long t = 0; t < c.trials; ++t) run_one(t);
        } else {
            std::atomic<long> next{0};
            std::vector<std::thread> pool;
            for (unsigned w = 0; w < threads; ++w) {
                pool.emplace_back([&] {
                    for (long t = next++; t < c.trials; t = next++) run_one(t);
                });
            }
            for (auto& th : pool) th.join();
        }

        long failed = 0;
        for (const auto& o : outcomes) {
            if (!o || std::none_of(o->begin(), o->end(), [](const AlgOutcome& a) { return a.ok; })) ++failed;
        }
        result.failed_trials.push_back(failed);

        for (std::size_t a = 0; a < c.algorithms.size(); ++a) {
            MeanAccumulator err, support, symbols, iters, wall;
            long failures = 0;
            for (const auto& o : outcomes) {
                if (!o) continue;
                const AlgOutcome& r = (*o)[a];
                if (!r.ok) {
                    ++failures;
                    continue;
                }
                err.add(r.sq_error);
                if (r.support_error) support.add(*r.support_error);
                if (r.ser) symbols.add(*r.ser);
                iters.add(r.iterations);
                wall.add(r.wall_ms);
            }
            TrialMetrics m;
            m.experiment = to_string(c.experiment);
            m.point = g;
            m.algorithm = c.algorithms[a];
            m.trials = err.count();
            m.failures = failures;
            if (m.trials > 0) {
                m.mse_linear = err.mean();
                m.mse_db = to_db(m.mse_linear);
                m.mse_stderr = err.stderr_of_mean();
                if (support.count() > 0) {
                    m.pe = support.mean();
                    m.pe_stderr = support.stderr_of_mean();
                }
                if (symbols.count() > 0) {
                    m.ser = symbols.mean();
                    m.ser_stderr = symbols.stderr_of_mean();
                }
                m.iters_mean = iters.mean();
                if (c.record_timing) m.wall_ms_mean = wall.mean();
            } else {
                m.mse_linear = m.mse_db = m.mse_stderr = std::nan("");
                m.iters_mean = std::nan("");
            }
            try {
                m.k_max = detail::kmax_of(m.algorithm, g);
            } catch (const Error&) {
                m.k_max.reset();
            }
            result.rows.push_back(std::move(m));
        }
    }
    return result;
}

/// Find the metrics row for an algorithm at a grid index.
inline const TrialMetrics& find_row(const ExperimentResult& r, std::size_t grid_index, const std::string& alg) {
    const std::size_t per = r.config.algorithms.size();
    for (std::size_t a = 0; a < per; ++a) {
        const auto& row = r.rows[grid_index * per + a];
        if (row.algorithm == alg) return row;
    }
    throw InvalidParameter("no row for algorithm " + alg);
}

} // namespace tfomp
