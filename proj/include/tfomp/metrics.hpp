#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "tfomp/errors.hpp"

namespace tfomp {

/// ||beta_hat - beta||^2.
inline double mse(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta) {
    if (beta_hat.size() != beta.size()) throw DimensionMismatch("mse: length mismatch");
    return (beta_hat - beta).squaredNorm();
}

/// 1 when the two index sets differ, 0 when equal (order ignored).
inline int pe(std::span<const Eigen::Index> estimated, std::span<const Eigen::Index> truth) {
    std::vector<Eigen::Index> a(estimated.begin(), estimated.end());
    std::vector<Eigen::Index> b(truth.begin(), truth.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return a == b ? 0 : 1;
}

/// Fraction of positions where the two symbol vectors differ.
template <class Vec>
double ser(const Vec& estimate, const Vec& truth) {
    if (estimate.size() != truth.size()) throw DimensionMismatch("ser: length mismatch");
    if (truth.size() == 0) return 0.0;
    std::size_t wrong = 0;
    for (decltype(truth.size()) i = 0; i < truth.size(); ++i) {
        if (!(estimate[i] == truth[i])) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

/// Complex-symbol error rate on stacked [Re; Im] vectors: a symbol is wrong
/// if either component differs.
inline double ser_stacked(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth) {
    if (estimate.size() != truth.size() || truth.size() % 2 != 0) throw DimensionMismatch("ser: bad stacked length");
    const Eigen::Index half = truth.size() / 2;
    if (half == 0) return 0.0;
    Eigen::Index wrong = 0;
    for (Eigen::Index i = 0; i < half; ++i) {
        if (estimate(i) != truth(i) || estimate(i + half) != truth(i + half)) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(half);
}

/// Sample mean and standard error of the mean, accumulated in call order.
class MeanAccumulator {
public:
    void add(double v) {
        ++count_;
        const double d = v - mean_;
        mean_ += d / static_cast<double>(count_);
        m2_ += d * (v - mean_);
    }

    long count() const { return count_; }
    double mean() const { return count_ > 0 ? mean_ : std::nan(""); }

    double stderr_of_mean() const {
        if (count_ < 2) return count_ == 1 ? 0.0 : std::nan("");
        const double var = m2_ / static_cast<double>(count_ - 1);
        return std::sqrt(var / static_cast<double>(count_));
    }

private:
    long count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

inline double to_db(double linear) { return 10.0 * std::log10(linear); }

} // namespace tfomp
