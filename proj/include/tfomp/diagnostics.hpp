#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

#include "tfomp/designs.hpp"
#include "tfomp/metrics.hpp"
#include "tfomp/omp.hpp"
#include "tfomp/random.hpp"

namespace tfomp {

/**
 * Monte Carlo estimate (not a bound) of the largest noise norm at which
 * TF-OMP still recovers the support of `signal` exactly.
 *
 * Noise vectors are drawn uniformly on spheres of radius r for r on a
 * geometric grid between lo and hi; the estimate is the largest grid radius
 * below which every tested radius recovered in all `draws` trials. This is
 * the empirical counterpart of the false-discovery threshold, whose exact
 * value depends on every realisable OMP index sequence.
 */
struct NoiseToleranceEstimate {
    double radius = 0.0;       // 0 when even the smallest radius failed
    std::vector<double> radii;
    std::vector<double> success_rate;
    int draws = 0;
};

inline NoiseToleranceEstimate estimate_noise_tolerance(const MatrixXd& x, const SparseSignal& signal, double lo,
                                                       double hi, int levels, int draws, std::uint64_t seed) {
    if (!(lo > 0.0 && hi > lo) || levels < 2 || draws < 1) {
        throw InvalidParameter("estimate_noise_tolerance: need 0 < lo < hi, levels >= 2, draws >= 1");
    }
    NoiseToleranceEstimate est;
    est.draws = draws;
    const VectorXd clean = x * signal.dense();
    const double ratio = std::pow(hi / lo, 1.0 / static_cast<double>(levels - 1));
    bool intact = true;
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int l = 0; l < levels; ++l) {
        const double r = lo * std::pow(ratio, l);
        Rng rng = derive_stream(seed, {static_cast<std::uint64_t>(l)});
        int ok = 0;
        for (int d = 0; d < draws; ++d) {
            VectorXd w(x.rows());
            for (Index i = 0; i < w.size(); ++i) w(i) = normal(rng);
            w *= r / w.norm();
            const auto rec = tf_omp(x, VectorXd(clean + w));
            if (pe(rec.support, signal.support) == 0) ++ok;
        }
        est.radii.push_back(r);
        est.success_rate.push_back(static_cast<double>(ok) / draws);
        if (intact && ok == draws) est.radius = r;
        else intact = false;
    }
    return est;
}

} // namespace tfomp
