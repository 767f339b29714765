#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "tfomp/errors.hpp"

namespace tfomp {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Relative tolerance for every full-column-rank test in the library.
inline constexpr double kRankTolerance = 1e-10;

namespace detail {

inline Eigen::JacobiSVD<MatrixXd> checked_svd(const MatrixXd& a) {
    if (a.rows() < a.cols()) {
        throw InvalidDimension("least squares needs rows >= cols, got " + std::to_string(a.rows()) + "x" +
                               std::to_string(a.cols()));
    }
    Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VectorXd& sv = svd.singularValues();
    if (sv.size() > 0 && !(sv(sv.size() - 1) > kRankTolerance * sv(0))) {
        throw RankDeficient("matrix is numerically rank deficient");
    }
    return svd;
}

} // namespace detail

/// Gather the listed columns of `x` into a new matrix, in the given order.
inline MatrixXd select_columns(const MatrixXd& x, std::span<const Index> cols) {
    MatrixXd out(x.rows(), static_cast<Index>(cols.size()));
    for (Index j = 0; j < out.cols(); ++j) {
        out.col(j) = x.col(cols[static_cast<std::size_t>(j)]);
    }
    return out;
}

/**
 * Unique minimiser of ||y - A b||_2 for a full-column-rank A.
 *
 * Throws RankDeficient when the smallest singular value of A is not above
 * 1e-10 times the largest.
 */
inline VectorXd least_squares(const MatrixXd& a, const VectorXd& y) {
    if (a.rows() != y.size()) {
        throw DimensionMismatch("least_squares: A has " + std::to_string(a.rows()) + " rows, y has " +
                                std::to_string(y.size()));
    }
    if (a.cols() == 0) {
        return VectorXd(0);
    }
    return detail::checked_svd(a).solve(y);
}

/// Column-wise least squares: returns A^+ B.
inline MatrixXd least_squares(const MatrixXd& a, const MatrixXd& b) {
    if (a.rows() != b.rows()) {
        throw DimensionMismatch("least_squares: row count mismatch");
    }
    if (a.cols() == 0) {
        return MatrixXd(0, b.cols());
    }
    return detail::checked_svd(a).solve(b);
}

/// (I - P_A) y. An A with no columns leaves y unchanged.
inline VectorXd ortho_residual(const VectorXd& y, const MatrixXd& a) {
    if (a.rows() != y.size()) {
        throw DimensionMismatch("ortho_residual: row count mismatch");
    }
    if (a.cols() == 0) {
        return y;
    }
    const auto svd = detail::checked_svd(a);
    const MatrixXd& u = svd.matrixU();
    VectorXd r = y - u * (u.transpose() * y);
    // second pass keeps r orthogonal to col(A) at the 1e-15 level
    r -= u * (u.transpose() * r);
    return r;
}

/**
 * Orthonormal basis of a growing set of columns plus the residual of a
 * fixed observation y against their span.
 *
 * Columns are orthogonalised by modified Gram-Schmidt with one
 * reorthogonalisation pass, so an append costs O(n k). Because Gram-Schmidt
 * is prefix-consistent, the first m basis vectors and the leading m x m block
 * of R are exactly the factorisation of the first m appended columns.
 */
class IncrementalLsState {
public:
    IncrementalLsState() = default;

    explicit IncrementalLsState(VectorXd y, Index capacity = 0)
        : y_(std::move(y)), residual_(y_), residual_sq_(y_.squaredNorm()) {
        reserve(capacity);
    }

    Index rows() const { return y_.size(); }
    Index size() const { return k_; }
    const VectorXd& observation() const { return y_; }
    const VectorXd& residual() const { return residual_; }
    double residual_sq() const { return residual_sq_; }

    /// ||(P_k - P_{k-1}) y||^2 for the most recent append (0 before any).
    double last_projection_sq() const { return k_ == 0 ? 0.0 : qty_(k_ - 1) * qty_(k_ - 1); }

    auto basis() const { return q_.leftCols(k_); }
    auto triangular() const { return r_.topLeftCorner(k_, k_); }

    void reserve(Index capacity) {
        if (capacity > q_.cols()) {
            q_.conservativeResize(rows(), capacity);
            r_.conservativeResize(capacity, capacity);
            qty_.conservativeResize(capacity);
        }
    }

    /**
     * Append column `a`. Throws RankDeficient, leaving the state untouched,
     * when the part of `a` orthogonal to the current span has norm at most
     * 1e-10 * ||a||.
     */
    void append(const Eigen::Ref<const VectorXd>& a) {
        if (a.size() != rows()) {
            throw DimensionMismatch("append_column: column length differs from observation length");
        }
        const double a_norm = a.norm();
        if (!(a_norm > 0.0)) {
            throw RankDeficient("append_column: zero column");
        }
        if (k_ >= rows()) {
            throw RankDeficient("append_column: basis already spans the whole space");
        }
        VectorXd v = a;
        VectorXd coeff = VectorXd::Zero(k_);
        for (int pass = 0; pass < 2; ++pass) {
            for (Index i = 0; i < k_; ++i) {
                const double c = q_.col(i).dot(v);
                v.noalias() -= c * q_.col(i);
                coeff(i) += c;
            }
        }
        const double v_norm = v.norm();
        if (!(v_norm > kRankTolerance * a_norm)) {
            throw RankDeficient("append_column: column lies in the span of the current columns");
        }
        if (k_ == q_.cols()) {
            reserve(std::max<Index>(4, 2 * k_));
        }
        v /= v_norm;
        q_.col(k_) = v;
        r_.col(k_).head(k_) = coeff;
        r_.col(k_).tail(r_.rows() - k_).setZero();
        r_(k_, k_) = v_norm;
        const double z = v.dot(residual_);
        residual_.noalias() -= z * v;
        qty_(k_) = z;
        residual_sq_ = residual_.squaredNorm();
        ++k_;
    }

    /// Least-squares coefficients of y on the first `m` appended columns.
    VectorXd coefficients(Index m) const {
        if (m < 0 || m > k_) {
            throw InvalidParameter("coefficients: prefix length out of range");
        }
        return r_.topLeftCorner(m, m).triangularView<Eigen::Upper>().solve(qty_.head(m));
    }

    VectorXd coefficients() const { return coefficients(k_); }

private:
    VectorXd y_;
    MatrixXd q_;
    MatrixXd r_;
    VectorXd qty_;
    VectorXd residual_;
    double residual_sq_ = 0.0;
    Index k_ = 0;
};

/// Value-style append: consumes a state and returns the extended one.
inline IncrementalLsState append_column(IncrementalLsState state, const VectorXd& a) {
    state.append(a);
    return state;
}

} // namespace tfomp
