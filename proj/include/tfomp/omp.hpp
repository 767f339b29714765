#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "tfomp/designs.hpp"
#include "tfomp/errors.hpp"
#include "tfomp/linops.hpp"

namespace tfomp {

/// Relative residual norm below which a pursuit stops with zero_residual.
inline constexpr double kZeroResidual = 1e-12;

enum class HaltReason {
    reached_kmax,
    zero_residual,
    rank_deficient,
    residual_threshold,  // a residual-norm stopping rule fired
};

inline std::string to_string(HaltReason h) {
    switch (h) {
    case HaltReason::reached_kmax: return "reached_kmax";
    case HaltReason::zero_residual: return "zero_residual";
    case HaltReason::rank_deficient: return "rank_deficient";
    case HaltReason::residual_threshold: return "residual_threshold";
    }
    return "unknown";
}

/**
 * Record of one greedy pursuit run.
 *
 * `residual_sq` has one more entry than `selected`: entry k is ||r^(k)||^2,
 * starting with ||r^(0)||^2. `projection_sq[k-1]` is ||(P_k - P_{k-1}) y||^2.
 */
struct GreedyTrace {
    std::vector<Index> selected;
    std::vector<double> residual_sq;
    std::vector<double> projection_sq;
    HaltReason halt = HaltReason::reached_kmax;
    Index n = 0;
    Index k_max = 0;

    Index steps() const { return static_cast<Index>(selected.size()); }
};

struct RecoveryResult {
    std::vector<Index> support;  // first k_selected entries of the trace, selection order
    VectorXd beta;
    Index k_selected = 0;
    GreedyTrace trace;
};

/// LS re-fit on `support` with zeros elsewhere.
inline VectorXd debias(const MatrixXd& x, const VectorXd& y, std::span<const Index> support) {
    VectorXd beta = VectorXd::Zero(x.cols());
    if (support.empty()) return beta;
    const VectorXd b = least_squares(select_columns(x, support), y);
    for (std::size_t i = 0; i < support.size(); ++i) beta(support[i]) = b(static_cast<Index>(i));
    return beta;
}

namespace detail {

/// Index of the entry with largest magnitude; ties go to the smallest index.
inline Index argmax_abs(const VectorXd& v) {
    Index best = 0;
    double best_val = -1.0;
    for (Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v(i));
        if (a > best_val) {
            best_val = a;
            best = i;
        }
    }
    return best;
}

/**
 * Steps 2-6 of OMP until `k_max` selections, a zero residual, a dependent
 * column, or `stop(residual_sq)` returns true. `stop` is also consulted
 * before the first selection.
 */
template <class Stop>
GreedyTrace pursue(const MatrixXd& x, const VectorXd& y, Index k_max, Stop&& stop) {
    if (x.rows() != y.size()) throw DimensionMismatch("run_omp: X rows differ from y length");
    GreedyTrace trace;
    trace.n = x.rows();
    trace.k_max = k_max;
    IncrementalLsState state(y, std::min(k_max, x.rows()));
    const double zero_level = kZeroResidual * y.norm();
    trace.residual_sq.push_back(state.residual_sq());
    if (!(std::sqrt(state.residual_sq()) > zero_level)) {
        trace.halt = HaltReason::zero_residual;
        return trace;
    }
    if (stop(state.residual_sq())) {
        trace.halt = HaltReason::residual_threshold;
        return trace;
    }
    VectorXd corr(x.cols());
    while (trace.steps() < k_max) {
        corr.noalias() = x.transpose() * state.residual();
        const Index pick = argmax_abs(corr);
        try {
            state.append(x.col(pick));
        } catch (const RankDeficient&) {
            trace.halt = HaltReason::rank_deficient;
            return trace;
        }
        trace.selected.push_back(pick);
        trace.residual_sq.push_back(state.residual_sq());
        trace.projection_sq.push_back(state.last_projection_sq());
        if (!(std::sqrt(state.residual_sq()) > zero_level)) {
            trace.halt = HaltReason::zero_residual;
            return trace;
        }
        if (stop(state.residual_sq())) {
            trace.halt = HaltReason::residual_threshold;
            return trace;
        }
    }
    trace.halt = HaltReason::reached_kmax;
    return trace;
}

inline RecoveryResult finish(const MatrixXd& x, const VectorXd& y, GreedyTrace trace, Index k_selected) {
    RecoveryResult res;
    res.k_selected = k_selected;
    res.support.assign(trace.selected.begin(), trace.selected.begin() + k_selected);
    res.beta = debias(x, y, res.support);
    res.trace = std::move(trace);
    return res;
}

} // namespace detail

/// Plain OMP for up to k_max iterations (ties in the correlation argmax go to the smallest column).
inline GreedyTrace run_omp(const MatrixXd& x, const VectorXd& y, Index k_max) {
    if (k_max < 1) throw InvalidParameter("run_omp: k_max must be >= 1");
    return detail::pursue(x, y, k_max, [](double) { return false; });
}

/// t(k) = ||r^(k)||^2 / ||r^(k-1)||^2 for k = 1..K.
inline std::vector<double> t_statistic(const GreedyTrace& trace) {
    if (trace.steps() < 1) throw EmptyTrace("t_statistic: trace has no steps");
    std::vector<double> t(trace.selected.size());
    for (std::size_t k = 1; k <= t.size(); ++k) t[k - 1] = trace.residual_sq[k] / trace.residual_sq[k - 1];
    return t;
}

/// argmin of t over 1..upper (1-based result); ties go to the smallest k.
inline Index argmin_ratio(const std::vector<double>& t, Index upper) {
    Index best = 1;
    for (Index k = 2; k <= upper; ++k) {
        if (t[static_cast<std::size_t>(k - 1)] < t[static_cast<std::size_t>(best - 1)]) best = k;
    }
    return best;
}

/**
 * Tuning-free model order: argmin t(k) over 1 <= k <= min(K, k_max - 1).
 * A zero-residual halt at step K forces k* = K.
 */
inline Index select_tf(const GreedyTrace& trace) {
    const Index steps = trace.steps();
    if (steps < 1) throw EmptyTrace("select_tf: trace has no steps");
    if (trace.halt == HaltReason::zero_residual) return steps;
    const Index upper = std::min(steps, trace.k_max - 1);
    if (upper < 1) throw EmptyTrace("select_tf: no admissible iteration (k_max - 1 < 1)");
    return argmin_ratio(t_statistic(trace), upper);
}

/// k_max = floor(n / 2).
inline Index tf_omp_kmax(Index n) { return n / 2; }

/// 1 + floor(sqrt(n (p - 1) / (p - n))), evaluated in exact integer arithmetic.
inline Index qtf_kmax1(Index n, Index p) {
    if (!(p > n && n >= 2)) throw InvalidParameter("qtf_kmax1: need p > n >= 2");
    const auto num = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(p - 1);
    const auto den = static_cast<std::uint64_t>(p - n);
    // largest m with m^2 * den <= num
    auto m = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(num) / static_cast<double>(den)));
    while (m * m * den > num) --m;
    while ((m + 1) * (m + 1) * den <= num) ++m;
    return 1 + static_cast<Index>(m);
}

/// floor(n / ln p).
inline Index qtf_kmax2(Index n, Index p) {
    if (p < 2 || n < 1) throw InvalidParameter("qtf_kmax2: need p >= 2");
    return static_cast<Index>(std::floor(static_cast<double>(n) / std::log(static_cast<double>(p))));
}

/// TF-OMP with an explicit iteration cap (the QTF variants use this).
inline RecoveryResult tf_omp(const MatrixXd& x, const VectorXd& y, Index k_max) {
    GreedyTrace trace = run_omp(x, y, k_max);
    if (trace.steps() == 0 && trace.halt == HaltReason::zero_residual) {
        // y == 0: nothing to explain
        return detail::finish(x, y, std::move(trace), 0);
    }
    const Index k_star = select_tf(trace);
    return detail::finish(x, y, std::move(trace), k_star);
}

inline RecoveryResult tf_omp(const MatrixXd& x, const VectorXd& y) {
    return tf_omp(x, y, tf_omp_kmax(x.rows()));
}

/// OMP stopped after exactly k0 selections (or an earlier degeneracy).
inline RecoveryResult omp_fixed(const MatrixXd& x, const VectorXd& y, Index k0) {
    if (k0 < 1 || k0 > x.rows()) throw InvalidParameter("omp_fixed: need 1 <= k0 <= n");
    GreedyTrace trace = run_omp(x, y, k0);
    const Index steps = trace.steps();
    return detail::finish(x, y, std::move(trace), steps);
}

/// sigma sqrt(n + 2 sqrt(n ln n)): exceeded by ||w|| with probability at most 1/n.
inline double noise_norm_bound(double sigma, Index n) {
    const double nn = static_cast<double>(n);
    return sigma * std::sqrt(nn + 2.0 * std::sqrt(nn * std::log(nn)));
}

/// OMP stopped once ||r^(k)|| < sigma sqrt(n + 2 sqrt(n ln n)).
inline RecoveryResult omp_sigma(const MatrixXd& x, const VectorXd& y, double sigma) {
    if (!(sigma > 0.0)) throw InvalidParameter("omp_sigma: sigma must be positive");
    const double thr = noise_norm_bound(sigma, x.rows());
    const double thr_sq = thr * thr;
    GreedyTrace trace = detail::pursue(x, y, x.rows(), [thr_sq](double rsq) { return rsq < thr_sq; });
    const Index steps = trace.steps();
    return detail::finish(x, y, std::move(trace), steps);
}

/**
 * Noise-norm levels below which OMP/TF-OMP are guaranteed to behave, plus
 * their ingredients. lambda_min/lambda_max are the extreme eigenvalues of
 * X_I^T X_I.
 */
struct RecoveryThresholds {
    double eps_a = 0.0;  // first k0 selections are correct below this
    double eps_b = 0.0;  // no missed discoveries below min(eps_a, eps_b)
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double erc = 0.0;
    double beta_min = 0.0;
    double beta_max = 0.0;
    bool erc_holds = false;  // erc < 1; eps_a is not meaningful otherwise
};

inline RecoveryThresholds recovery_thresholds(const MatrixXd& x, const SparseSignal& signal) {
    RecoveryThresholds th;
    const MatrixXd xs = select_columns(x, signal.support);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(xs.transpose() * xs, Eigen::EigenvaluesOnly);
    th.lambda_min = eig.eigenvalues()(0);
    th.lambda_max = eig.eigenvalues()(eig.eigenvalues().size() - 1);
    if (!(th.lambda_min > kRankTolerance * th.lambda_max)) {
        throw RankDeficient("recovery_thresholds: support columns are rank deficient");
    }
    th.erc = erc_coefficient(x, signal.support);
    th.erc_holds = th.erc < 1.0;
    th.beta_min = signal.min_magnitude();
    th.beta_max = signal.max_magnitude();
    th.eps_a = th.beta_min * th.lambda_min * (1.0 - th.erc) / 2.0;
    const double cond = th.lambda_max / th.lambda_min;
    th.eps_b = th.lambda_min * th.beta_min / (1.0 + 2.0 * cond + cond * th.beta_max / th.beta_min);
    return th;
}

} // namespace tfomp
