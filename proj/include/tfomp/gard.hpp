#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "tfomp/errors.hpp"
#include "tfomp/linops.hpp"
#include "tfomp/omp.hpp"

namespace tfomp {

/**
 * Record of a GARD run. `residual_sq[0]` is ||(I - P_X) y||^2 and entry k
 * the squared residual after the k-th outlier column e_{j_k} was appended.
 */
struct GardTrace {
    std::vector<Index> outliers;
    std::vector<double> residual_sq;
    HaltReason halt = HaltReason::reached_kmax;
    Index n = 0;
    Index p = 0;
    Index k_max = 0;

    Index steps() const { return static_cast<Index>(outliers.size()); }
};

struct RobustEstimate {
    VectorXd beta;
    std::vector<Index> outlier_support;  // j_1..j_k in selection order
    VectorXd outlier_values;             // g estimate on outlier_support
    Index k_selected = 0;
    GardTrace trace;
};

/// Largest admissible GARD iteration count before [X, e_J] loses rank.
inline Index gard_max_steps(Index n, Index p) { return n - p; }

/// floor((n - p + 1) / 2).
inline Index tf_gard_kmax(Index n, Index p) { return (n - p + 1) / 2; }

namespace detail {

template <class Stop>
GardTrace pursue_outliers(const MatrixXd& x, const VectorXd& y, Index k_max, Stop&& stop) {
    const Index n = x.rows();
    const Index p = x.cols();
    if (y.size() != n) throw DimensionMismatch("run_gard: X rows differ from y length");
    if (!(n > p)) throw InvalidDimension("run_gard: GARD needs n > p");
    if (k_max < 0 || k_max > gard_max_steps(n, p)) throw InvalidParameter("run_gard: need 0 <= k_max <= n - p");

    GardTrace trace;
    trace.n = n;
    trace.p = p;
    trace.k_max = k_max;
    IncrementalLsState state(y, p + k_max);
    for (Index j = 0; j < p; ++j) {
        try {
            state.append(x.col(j));
        } catch (const RankDeficient&) {
            throw RankDeficient("run_gard: design matrix is column rank deficient");
        }
    }
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
    VectorXd unit = VectorXd::Zero(n);
    while (trace.steps() < k_max) {
        const Index j = argmax_abs(state.residual());
        unit(j) = 1.0;
        try {
            state.append(unit);
        } catch (const RankDeficient&) {
            trace.halt = HaltReason::rank_deficient;
            return trace;
        }
        unit(j) = 0.0;
        trace.outliers.push_back(j);
        trace.residual_sq.push_back(state.residual_sq());
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

/// Joint LS of (beta, g_J) on A = [X, e_{j_1}, ..., e_{j_k}].
inline RobustEstimate joint_estimate(const MatrixXd& x, const VectorXd& y, GardTrace trace, Index k) {
    const Index n = x.rows();
    const Index p = x.cols();
    MatrixXd a(n, p + k);
    a.leftCols(p) = x;
    a.rightCols(k).setZero();
    for (Index i = 0; i < k; ++i) a(trace.outliers[static_cast<std::size_t>(i)], p + i) = 1.0;
    const VectorXd coeff = least_squares(a, y);
    RobustEstimate est;
    est.beta = coeff.head(p);
    est.outlier_values = coeff.tail(k);
    est.outlier_support.assign(trace.outliers.begin(), trace.outliers.begin() + k);
    est.k_selected = k;
    est.trace = std::move(trace);
    return est;
}

} // namespace detail

/// GARD: greedily flag the largest residual entry, refit on [X, e_J], repeat.
inline GardTrace run_gard(const MatrixXd& x, const VectorXd& y, Index k_max) {
    return detail::pursue_outliers(x, y, k_max, [](double) { return false; });
}

/// t(k) on a GARD trace, k = 1..K.
inline std::vector<double> t_statistic(const GardTrace& trace) {
    if (trace.steps() < 1) throw EmptyTrace("t_statistic: GARD trace has no steps");
    std::vector<double> t(trace.outliers.size());
    for (std::size_t k = 1; k <= t.size(); ++k) t[k - 1] = trace.residual_sq[k] / trace.residual_sq[k - 1];
    return t;
}

/// Tuning-free GARD: k_f = argmin t(k) over 1 <= k <= K (K <= floor((n-p+1)/2)).
inline RobustEstimate tf_gard(const MatrixXd& x, const VectorXd& y) {
    if (!(x.rows() > x.cols())) throw InvalidDimension("tf_gard: needs n > p");
    GardTrace trace = run_gard(x, y, tf_gard_kmax(x.rows(), x.cols()));
    Index k = 0;
    if (trace.steps() > 0) {
        k = trace.halt == HaltReason::zero_residual ? trace.steps() : argmin_ratio(t_statistic(trace), trace.steps());
    }
    return detail::joint_estimate(x, y, std::move(trace), k);
}

/// GARD stopped after n_out selections.
inline RobustEstimate gard_fixed(const MatrixXd& x, const VectorXd& y, Index n_out) {
    if (!(x.rows() > x.cols())) throw InvalidDimension("gard_fixed: needs n > p");
    if (n_out < 0 || n_out > gard_max_steps(x.rows(), x.cols())) {
        throw InvalidParameter("gard_fixed: need 0 <= n_out <= n - p");
    }
    GardTrace trace = run_gard(x, y, n_out);
    const Index k = trace.steps();
    return detail::joint_estimate(x, y, std::move(trace), k);
}

/// GARD stopped once ||r^(k)|| <= sigma sqrt(n + 2 sqrt(n ln n)).
inline RobustEstimate gard_sigma(const MatrixXd& x, const VectorXd& y, double sigma) {
    if (!(sigma > 0.0)) throw InvalidParameter("gard_sigma: sigma must be positive");
    if (!(x.rows() > x.cols())) throw InvalidDimension("gard_sigma: needs n > p");
    const double eps = noise_norm_bound(sigma, x.rows());
    const double eps_sq = eps * eps;
    GardTrace trace = detail::pursue_outliers(x, y, gard_max_steps(x.rows(), x.cols()),
                                              [eps_sq](double rsq) { return rsq <= eps_sq; });
    const Index k = trace.steps();
    return detail::joint_estimate(x, y, std::move(trace), k);
}

} // namespace tfomp
