#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tfomp/combinations.hpp"
#include "tfomp/errors.hpp"
#include "tfomp/linops.hpp"
#include "tfomp/random.hpp"

namespace tfomp {

enum class DesignKind { hadamard_identity, gaussian, correlated };

inline std::string to_string(DesignKind k) {
    switch (k) {
    case DesignKind::hadamard_identity: return "hadamard_identity";
    case DesignKind::gaussian: return "gaussian";
    case DesignKind::correlated: return "correlated";
    }
    return "unknown";
}

/// Real n x p design with unit-norm columns and the recipe that produced it.
struct DesignMatrix {
    MatrixXd entries;
    DesignKind kind = DesignKind::gaussian;
    double rho = 0.0;                   // correlated only
    std::optional<std::uint64_t> seed;  // absent for deterministic kinds

    Index rows() const { return entries.rows(); }
    Index cols() const { return entries.cols(); }
};

/// k0-sparse vector in R^p. Indices are 0-based and sorted ascending.
struct SparseSignal {
    Index dimension = 0;
    std::vector<Index> support;
    std::vector<double> values;

    Index sparsity() const { return static_cast<Index>(support.size()); }

    VectorXd dense() const {
        VectorXd b = VectorXd::Zero(dimension);
        for (std::size_t i = 0; i < support.size(); ++i) b(support[i]) = values[i];
        return b;
    }

    double min_magnitude() const {
        double m = std::numeric_limits<double>::infinity();
        for (double v : values) m = std::min(m, std::abs(v));
        return m;
    }

    double max_magnitude() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }
};

/// Sparse gross-error vector g: +-magnitude on `support`, zero elsewhere.
struct OutlierVector {
    Index dimension = 0;
    std::vector<Index> support;
    double magnitude = 0.0;
    std::vector<int> signs;

    VectorXd dense() const {
        VectorXd g = VectorXd::Zero(dimension);
        for (std::size_t i = 0; i < support.size(); ++i) g(support[i]) = signs[i] * magnitude;
        return g;
    }
};

enum class ValueKind { pm_one, exp_decay, gaussian_values };

struct SignalSpec {
    ValueKind kind = ValueKind::pm_one;
    double alpha = 1.0;  // exp_decay only
};

inline bool is_power_of_two(Index n) { return n > 0 && (n & (n - 1)) == 0; }

inline int random_sign(Rng& rng) { return std::bernoulli_distribution(0.5)(rng) ? 1 : -1; }

/// Normalise each column to unit l2 norm in place.
inline void normalize_columns(MatrixXd& x) {
    for (Index j = 0; j < x.cols(); ++j) {
        const double norm = x.col(j).norm();
        if (norm > 0.0) x.col(j) /= norm;
    }
}

/// [I_n, H_n / sqrt(n)] with H_n the Sylvester Hadamard matrix.
inline DesignMatrix hadamard_dictionary(Index n) {
    if (!is_power_of_two(n) || n < 2) {
        throw InvalidDimension("hadamard_dictionary: n must be a power of two >= 2, got " + std::to_string(n));
    }
    DesignMatrix d;
    d.kind = DesignKind::hadamard_identity;
    d.entries.resize(n, 2 * n);
    d.entries.leftCols(n).setIdentity();
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
            // Sylvester construction: H(i, j) = (-1)^popcount(i & j)
            const int parity = __builtin_popcountll(static_cast<unsigned long long>(i & j)) & 1;
            d.entries(i, n + j) = parity ? -scale : scale;
        }
    }
    return d;
}

inline MatrixXd standard_normal_matrix(Index n, Index p, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixXd g(n, p);
    for (Index j = 0; j < p; ++j) {
        for (Index i = 0; i < n; ++i) g(i, j) = normal(rng);
    }
    return g;
}

inline DesignMatrix gaussian_design(Index n, Index p, Rng& rng) {
    if (n < 2 || p < 1) throw InvalidDimension("gaussian_design: need n >= 2 and p >= 1");
    DesignMatrix d;
    d.kind = DesignKind::gaussian;
    d.entries = standard_normal_matrix(n, p, rng);
    normalize_columns(d.entries);
    return d;
}

inline DesignMatrix gaussian_design(Index n, Index p, std::uint64_t seed) {
    Rng rng(seed);
    auto d = gaussian_design(n, p, rng);
    d.seed = seed;
    return d;
}

/// 10 x 16 real equiangular tight frame, coherence 1/5. Gram = I - S/5 with S
/// the Seidel matrix of the Clebsch graph (folded 4-cube).
inline MatrixXd clebsch_frame() {
    const Index p = 16;
    MatrixXd gram(p, p);
    for (Index i = 0; i < p; ++i) {
        for (Index j = 0; j < p; ++j) {
            const int d = __builtin_popcountll(static_cast<unsigned long long>(i ^ j));
            const double seidel = i == j ? 0.0 : (d == 1 || d == 4 ? -1.0 : 1.0);
            gram(i, j) = (i == j ? 1.0 : 0.0) - seidel / 5.0;
        }
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
    // eigenvalues are 0 (x6) and 8/5 (x10), ascending
    const MatrixXd u = eig.eigenvectors().rightCols(10);
    return std::sqrt(1.6) * u.transpose();
}

/**
 * Randomly rotated clebsch_frame with random column signs and an additive
 * Gaussian perturbation of per-entry sd uniform in [0, max_perturbation] / sqrt(10).
 */
inline DesignMatrix near_equiangular_design(Rng& rng, double max_perturbation = 0.02) {
    if (!(max_perturbation >= 0.0)) throw InvalidParameter("near_equiangular_design: max_perturbation < 0");
    Eigen::HouseholderQR<MatrixXd> qr(standard_normal_matrix(10, 10, rng));
    MatrixXd q = qr.householderQ();
    const VectorXd diag = qr.matrixQR().diagonal();
    for (Index j = 0; j < 10; ++j) {
        if (diag(j) < 0) q.col(j) = -q.col(j);
    }
    DesignMatrix d;
    d.kind = DesignKind::gaussian;
    d.entries = q * clebsch_frame();
    for (Index j = 0; j < 16; ++j) d.entries.col(j) *= random_sign(rng);
    const double scale = std::uniform_real_distribution<double>(0.0, max_perturbation)(rng) / std::sqrt(10.0);
    d.entries += scale * standard_normal_matrix(10, 16, rng);
    normalize_columns(d.entries);
    return d;
}

/**
 * Columns with population correlation rho^|i-j|: i.i.d. N(0,1) draws times
 * the transposed Cholesky factor of the Toeplitz target, then unit-normalised.
 * rho = 0 consumes the stream exactly like gaussian_design.
 */
inline DesignMatrix correlated_design(Index n, Index p, double rho, Rng& rng) {
    if (!(rho >= 0.0 && rho < 1.0)) {
        throw InvalidParameter("correlated_design: rho must lie in [0, 1)");
    }
    if (n < 2 || p < 1) throw InvalidDimension("correlated_design: need n >= 2 and p >= 1");
    MatrixXd toeplitz(p, p);
    for (Index i = 0; i < p; ++i) {
        for (Index j = 0; j < p; ++j) toeplitz(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
    }
    Eigen::LLT<MatrixXd> llt(toeplitz);
    const MatrixXd lower = llt.matrixL();
    DesignMatrix d;
    d.kind = DesignKind::correlated;
    d.rho = rho;
    d.entries = standard_normal_matrix(n, p, rng) * lower.transpose();
    normalize_columns(d.entries);
    return d;
}

inline DesignMatrix correlated_design(Index n, Index p, double rho, std::uint64_t seed) {
    Rng rng(seed);
    auto d = correlated_design(n, p, rho, rng);
    d.seed = seed;
    return d;
}

/// k distinct indices drawn uniformly from {0..p-1}, sorted ascending.
inline std::vector<Index> random_support(Index p, Index k, Rng& rng) {
    std::vector<Index> pool(static_cast<std::size_t>(p));
    std::iota(pool.begin(), pool.end(), Index{0});
    for (Index i = 0; i < k; ++i) {
        std::uniform_int_distribution<Index> pick(i, p - 1);
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
    }
    pool.resize(static_cast<std::size_t>(k));
    std::sort(pool.begin(), pool.end());
    return pool;
}

/**
 * Random k0-sparse signal. exp_decay is defined for k0 = 3 only: magnitudes
 * [a, a alpha, a alpha^2] with a chosen so that ||beta||^2 = 3, matching the
 * +-1 case.
 */
inline SparseSignal sparse_signal(Index p, Index k0, SignalSpec spec, Rng& rng) {
    if (k0 < 1 || k0 > p) throw InvalidParameter("sparse_signal: need 1 <= k0 <= p");
    if (spec.kind == ValueKind::exp_decay) {
        if (k0 != 3) throw InvalidParameter("sparse_signal: exp_decay is only defined for k0 = 3");
        if (!(spec.alpha > 0.0 && spec.alpha <= 1.0)) {
            throw InvalidParameter("sparse_signal: exp_decay needs 0 < alpha <= 1");
        }
    }
    SparseSignal s;
    s.dimension = p;
    s.support = random_support(p, k0, rng);
    s.values.resize(static_cast<std::size_t>(k0));
    switch (spec.kind) {
    case ValueKind::pm_one:
        for (auto& v : s.values) v = random_sign(rng);
        break;
    case ValueKind::exp_decay: {
        const double a2 = spec.alpha * spec.alpha;
        const double a = std::sqrt(3.0 / (1.0 + a2 + a2 * a2));
        double mag = a;
        for (auto& v : s.values) {
            v = random_sign(rng) * mag;
            mag *= spec.alpha;
        }
        break;
    }
    case ValueKind::gaussian_values: {
        std::normal_distribution<double> normal(0.0, 1.0);
        for (auto& v : s.values) {
            do {
                v = normal(rng);
            } while (v == 0.0);
        }
        break;
    }
    }
    return s;
}

inline SparseSignal sparse_signal(Index p, Index k0, SignalSpec spec, std::uint64_t seed) {
    Rng rng(seed);
    return sparse_signal(p, k0, spec, rng);
}

struct NoiseDraw {
    double sigma = 0.0;
    VectorXd w;
};

/// sigma^2 = ||clean||^2 / (n 10^(snr_db/10)); w ~ N(0, sigma^2 I).
inline double sigma_for_snr(const VectorXd& clean, double snr_db) {
    const double energy = clean.squaredNorm();
    if (!(energy > 0.0)) throw InvalidParameter("noise_for_snr: clean signal has zero energy");
    return std::sqrt(energy / (static_cast<double>(clean.size()) * std::pow(10.0, snr_db / 10.0)));
}

inline NoiseDraw noise_for_snr(const VectorXd& clean, double snr_db, Rng& rng) {
    NoiseDraw d;
    d.sigma = sigma_for_snr(clean, snr_db);
    std::normal_distribution<double> normal(0.0, d.sigma);
    d.w.resize(clean.size());
    for (Index i = 0; i < d.w.size(); ++i) d.w(i) = normal(rng);
    return d;
}

/// n_out gross errors with ||g||^2 = signal_energy / 10^(sir_db/10).
inline OutlierVector outliers(Index n, Index n_out, double signal_energy, double sir_db, Rng& rng) {
    if (n_out < 1 || n_out > n) throw InvalidParameter("outliers: need 1 <= n_out <= n");
    if (!(signal_energy > 0.0)) throw InvalidParameter("outliers: signal energy must be positive");
    OutlierVector g;
    g.dimension = n;
    g.support = random_support(n, n_out, rng);
    g.magnitude = std::sqrt(signal_energy / (static_cast<double>(n_out) * std::pow(10.0, sir_db / 10.0)));
    g.signs.resize(static_cast<std::size_t>(n_out));
    for (auto& s : g.signs) s = random_sign(rng);
    return g;
}

/// max_{i != j} |X_i^T X_j| for unit-norm columns.
inline double mutual_coherence(const MatrixXd& x) {
    const MatrixXd gram = x.transpose() * x;
    double mu = 0.0;
    for (Index j = 0; j < gram.cols(); ++j) {
        for (Index i = 0; i < j; ++i) mu = std::max(mu, std::abs(gram(i, j)));
    }
    return mu;
}

inline double mutual_coherence(const DesignMatrix& x) { return mutual_coherence(x.entries); }

/// Exact recovery coefficient: max over j outside the support of ||X_S^+ X_j||_1.
inline double erc_coefficient(const MatrixXd& x, std::span<const Index> support) {
    std::vector<bool> in_support(static_cast<std::size_t>(x.cols()), false);
    for (Index j : support) {
        if (j < 0 || j >= x.cols()) throw InvalidParameter("erc_coefficient: support index out of range");
        in_support[static_cast<std::size_t>(j)] = true;
    }
    std::vector<Index> rest;
    for (Index j = 0; j < x.cols(); ++j) {
        if (!in_support[static_cast<std::size_t>(j)]) rest.push_back(j);
    }
    const MatrixXd coeff = least_squares(select_columns(x, support), select_columns(x, rest));
    double erc = 0.0;
    for (Index j = 0; j < coeff.cols(); ++j) erc = std::max(erc, coeff.col(j).lpNorm<1>());
    return erc;
}

struct RicBounds {
    double lambda_min = 1.0;  // smallest Gram eigenvalue over all k-subsets
    double lambda_max = 1.0;  // largest Gram eigenvalue over all k-subsets
    double delta = 0.0;       // max(1 - lambda_min, lambda_max - 1)
};

inline constexpr std::uint64_t kMaxEnumeration = 100000;

/// Restricted isometry constant of order k by enumerating every k-column submatrix.
inline RicBounds ric_bruteforce(const MatrixXd& x, Index k) {
    if (k < 1 || k > x.cols()) throw InvalidParameter("ric_bruteforce: need 1 <= k <= p");
    if (binomial(static_cast<std::uint64_t>(x.cols()), static_cast<std::uint64_t>(k)) > kMaxEnumeration) {
        throw TooLarge("ric_bruteforce: C(p, k) exceeds 1e5");
    }
    const MatrixXd gram = x.transpose() * x;
    RicBounds out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), 0.0};
    MatrixXd sub(k, k);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig;
    for_each_combination(x.cols(), k, [&](const std::vector<Index>& s) {
        for (Index a = 0; a < k; ++a) {
            for (Index b = 0; b < k; ++b) sub(a, b) = gram(s[static_cast<std::size_t>(a)], s[static_cast<std::size_t>(b)]);
        }
        eig.compute(sub, Eigen::EigenvaluesOnly);
        out.lambda_min = std::min(out.lambda_min, eig.eigenvalues()(0));
        out.lambda_max = std::max(out.lambda_max, eig.eigenvalues()(k - 1));
    });
    out.delta = std::max(1.0 - out.lambda_min, out.lambda_max - 1.0);
    return out;
}

} // namespace tfomp
