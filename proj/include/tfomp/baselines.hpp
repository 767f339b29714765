#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "tfomp/combinations.hpp"
#include "tfomp/designs.hpp"
#include "tfomp/errors.hpp"
#include "tfomp/linops.hpp"
#include "tfomp/omp.hpp"

namespace tfomp {

struct LassoSolution {
    VectorXd beta;
    double lambda = 0.0;
    int sweeps = 0;
    double max_change = 0.0;  // largest coordinate update in the final sweep
    bool converged = false;

    std::vector<Index> support() const {
        std::vector<Index> s;
        for (Index j = 0; j < beta.size(); ++j) {
            if (beta(j) != 0.0) s.push_back(j);
        }
        return s;
    }
};

inline double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

/// lambda = scale * sigma * sqrt(2 ln p); the experiments use scale = 2.
inline double lasso_lambda(double sigma, Index p, double scale = 2.0) {
    return scale * sigma * std::sqrt(2.0 * std::log(static_cast<double>(p)));
}

/**
 * Cyclic coordinate descent on 0.5 ||y - X b||^2 + lambda ||b||_1.
 * Stops when no coordinate moved by `tol` or more in a sweep. Running out of
 * sweeps returns the last iterate with converged = false.
 */
inline LassoSolution lasso(const MatrixXd& x, const VectorXd& y, double lambda, double tol = 1e-8,
                           int max_sweeps = 10000) {
    if (x.rows() != y.size()) throw DimensionMismatch("lasso: X rows differ from y length");
    if (!(lambda >= 0.0)) throw InvalidParameter("lasso: lambda must be non-negative");
    const Index p = x.cols();
    LassoSolution sol;
    sol.lambda = lambda;
    sol.beta = VectorXd::Zero(p);
    const VectorXd col_sq = x.colwise().squaredNorm().transpose();
    VectorXd r = y;
    for (sol.sweeps = 1; sol.sweeps <= max_sweeps; ++sol.sweeps) {
        double max_change = 0.0;
        for (Index j = 0; j < p; ++j) {
            if (!(col_sq(j) > 0.0)) continue;
            const double old = sol.beta(j);
            const double rho = x.col(j).dot(r) + col_sq(j) * old;
            const double updated = soft_threshold(rho, lambda) / col_sq(j);
            const double delta = updated - old;
            if (delta != 0.0) {
                r.noalias() -= delta * x.col(j);
                sol.beta(j) = updated;
                max_change = std::max(max_change, std::abs(delta));
            }
        }
        sol.max_change = max_change;
        if (max_change < tol) {
            sol.converged = true;
            return sol;
        }
    }
    sol.sweeps = max_sweeps;
    return sol;
}

/// LS with knowledge of the true support.
inline VectorXd oracle_ls(const MatrixXd& x, const VectorXd& y, std::span<const Index> true_support) {
    if (true_support.empty()) throw InvalidParameter("oracle_ls: true support is empty");
    return debias(x, y, true_support);
}

struct SubsetFit {
    std::vector<Index> support;
    VectorXd beta;
    double residual_sq = 0.0;
};

/// Exhaustive best k-term LS fit; ties go to the lexicographically smallest support.
inline SubsetFit best_subset(const MatrixXd& x, const VectorXd& y, Index k) {
    if (k < 1 || k > x.cols() || k > x.rows()) throw InvalidParameter("best_subset: need 1 <= k <= min(n, p)");
    if (binomial(static_cast<std::uint64_t>(x.cols()), static_cast<std::uint64_t>(k)) > kMaxEnumeration) {
        throw TooLarge("best_subset: C(p, k) exceeds 1e5");
    }
    SubsetFit best;
    best.residual_sq = std::numeric_limits<double>::infinity();
    for_each_combination(x.cols(), k, [&](const std::vector<Index>& s) {
        double rsq;
        try {
            rsq = ortho_residual(y, select_columns(x, s)).squaredNorm();
        } catch (const RankDeficient&) {
            return;
        }
        if (rsq < best.residual_sq) {
            best.residual_sq = rsq;
            best.support = s;
        }
    });
    if (best.support.empty()) throw RankDeficient("best_subset: every size-k submatrix is rank deficient");
    best.beta = debias(x, y, best.support);
    return best;
}

/// (H^T H + (noise_var / symbol_energy) I)^{-1} H^T y.
inline VectorXd lmmse(const MatrixXd& h, const VectorXd& y, double noise_var, double symbol_energy) {
    if (h.rows() != y.size()) throw DimensionMismatch("lmmse: H rows differ from y length");
    if (!(noise_var >= 0.0 && symbol_energy > 0.0)) throw InvalidParameter("lmmse: invalid variances");
    MatrixXd gram = h.transpose() * h;
    gram.diagonal().array() += noise_var / symbol_energy;
    return gram.ldlt().solve(h.transpose() * y);
}

/// ||(I - P_X) y||^2 / (n - p).
inline double sigma_ml(const MatrixXd& x, const VectorXd& y) {
    if (!(x.rows() > x.cols())) throw InvalidDimension("sigma_ml: needs n > p");
    return ortho_residual(y, x).squaredNorm() / static_cast<double>(x.rows() - x.cols());
}

/// Elementwise sign with sign(0) = +1.
inline VectorXd qpsk_quantize(const VectorXd& x) {
    return x.unaryExpr([](double v) { return v < 0.0 ? -1.0 : 1.0; });
}

/// [[Re H, -Im H], [Im H, Re H]].
inline MatrixXd real_equivalent(const Eigen::MatrixXcd& h) {
    const Index r = h.rows();
    const Index c = h.cols();
    MatrixXd out(2 * r, 2 * c);
    out.topLeftCorner(r, c) = h.real();
    out.topRightCorner(r, c) = -h.imag();
    out.bottomLeftCorner(r, c) = h.imag();
    out.bottomRightCorner(r, c) = h.real();
    return out;
}

/// [Re v; Im v].
inline VectorXd real_equivalent(const Eigen::VectorXcd& v) {
    VectorXd out(2 * v.size());
    out.head(v.size()) = v.real();
    out.tail(v.size()) = v.imag();
    return out;
}

} // namespace tfomp
