#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "generators.hpp"
#include "tfomp/baselines.hpp"
#include "tfomp/designs.hpp"
#include "tfomp/metrics.hpp"
#include "tfomp/omp.hpp"

using namespace tfomp;

namespace {

GreedyTrace trace_from(std::vector<double> residual_sq, Index k_max) {
    GreedyTrace t;
    t.residual_sq = std::move(residual_sq);
    for (std::size_t k = 1; k < t.residual_sq.size(); ++k) {
        t.selected.push_back(static_cast<Index>(k - 1));
        t.projection_sq.push_back(t.residual_sq[k - 1] - t.residual_sq[k]);
    }
    t.k_max = k_max;
    t.n = 100;
    return t;
}

const VectorXd kSpike{{0.0, 2.0, 0.0, 0.0}};

} // namespace

TEST(RunOmp, IdentityDesignSingleSpike) {
    const auto tr = run_omp(MatrixXd::Identity(4, 4), kSpike, 2);
    ASSERT_EQ(tr.steps(), 1);
    EXPECT_EQ(tr.selected[0], 1);
    EXPECT_EQ(tr.halt, HaltReason::zero_residual);
    EXPECT_EQ(tr.residual_sq.back(), 0.0);
    EXPECT_EQ(tr.n, 4);
}

TEST(RunOmp, TiesGoToSmallestIndex) {
    const auto tr = run_omp(MatrixXd::Identity(3, 3), VectorXd{{1.0, -1.0, 1.0}}, 3);
    EXPECT_EQ(tr.selected, (std::vector<Index>{0, 1, 2}));
}

TEST(RunOmp, ReachesCapAndRejectsBadCap) {
    std::mt19937_64 rng(1);
    const MatrixXd x = testgen::unit_columns(testgen::gaussian(20, 40, rng));
    const auto tr = run_omp(x, testgen::gaussian(20, rng), 5);
    EXPECT_EQ(tr.steps(), 5);
    EXPECT_EQ(tr.halt, HaltReason::reached_kmax);
    EXPECT_EQ(tr.residual_sq.size(), 6u);
    EXPECT_THROW(run_omp(x, testgen::gaussian(20, rng), 0), InvalidParameter);
    EXPECT_THROW(run_omp(x, VectorXd::Ones(19), 3), DimensionMismatch);
}

TEST(RunOmp, DependentColumnHaltsPursuit) {
    // after e1 and e2 are chosen, the only column still correlated with the
    // residual lies in their span
    MatrixXd x(3, 3);
    x << 1, 0, 1, 0, 1, 1, 0, 0, 0;
    x.col(2).normalize();
    const auto tr = run_omp(x, VectorXd{{3.0, 1.0, 1e-3}}, 3);
    EXPECT_EQ(tr.halt, HaltReason::rank_deficient);
    EXPECT_LE(tr.steps(), 2);
}

TEST(RunOmp, NoiselessHadamardFirstStepsFindSupport) {
    const MatrixXd x = hadamard_dictionary(32).entries;
    Rng rng(2);
    for (int rep = 0; rep < 100; ++rep) {
        const auto s = sparse_signal(64, 3, {}, rng);
        const auto tr = run_omp(x, x * s.dense(), 3);
        EXPECT_EQ(pe(tr.selected, s.support), 0);
    }
}

// Oracle: exhaustive best 2-subset, accepted only when delta_3 < 1/(sqrt 2 + 1).
TEST(RunOmp, TwoStepSupportEqualsBestSubsetUnderRip) {
    Rng rng(3);
    int accepted = 0, rejected = 0;
    for (int rep = 0; rep < 60; ++rep) {
        const MatrixXd x = near_equiangular_design(rng, 0.03).entries;
        const auto s = sparse_signal(16, 2, {}, rng);
        if (!(ric_bruteforce(x, 3).delta < 1.0 / (std::sqrt(2.0) + 1.0))) {
            ++rejected;
            continue;
        }
        ++accepted;
        const VectorXd y = x * s.dense();
        const auto tr = run_omp(x, y, 2);
        const auto best = best_subset(x, y, 2);
        EXPECT_EQ(pe(tr.selected, best.support), 0);
        EXPECT_EQ(pe(best.support, s.support), 0);
    }
    EXPECT_GT(accepted, 0);
    EXPECT_GT(rejected, 0);
}

TEST(TStatistic, ZeroResidualAtFirstStep) {
    const auto t = t_statistic(run_omp(MatrixXd::Identity(4, 4), kSpike, 2));
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t[0], 0.0);
}

TEST(TStatistic, EmptyTraceThrows) {
    EXPECT_THROW(t_statistic(trace_from({1.0}, 4)), EmptyTrace);
    EXPECT_THROW(select_tf(trace_from({1.0}, 4)), EmptyTrace);
}

// Property: t(k) = ||r_k||^2 / (||r_k||^2 + ||(P_k - P_{k-1}) y||^2) and t(k) in [0, 1].
TEST(TStatistic, ProjectionFormAndRange) {
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 200; ++rep) {
        const Index n = testgen::uniform_index(4, 40, rng);
        const Index p = testgen::uniform_index(2, 80, rng);
        const MatrixXd x = testgen::unit_columns(testgen::gaussian(n, p, rng));
        const VectorXd y = testgen::gaussian(n, rng);
        const auto tr = run_omp(x, y, testgen::uniform_index(1, std::min(n, p), rng));
        const auto t = t_statistic(tr);
        for (std::size_t k = 0; k < t.size(); ++k) {
            const double rewritten = tr.residual_sq[k + 1] / (tr.residual_sq[k + 1] + tr.projection_sq[k]);
            EXPECT_NEAR(t[k], rewritten, 1e-9);
            EXPECT_GE(t[k], 0.0);
            EXPECT_LE(t[k], 1.0 + 1e-12);
            EXPECT_LE(std::abs(tr.residual_sq[k] - tr.residual_sq[k + 1] - tr.projection_sq[k]),
                      1e-9 * y.squaredNorm());
        }
    }
}

TEST(TStatistic, NonAdaptiveNoiseMatchesBetaMean) {
    // For a fixed column and isotropic noise, t(k) ~ Beta((n-k)/2, 1/2).
    std::mt19937_64 rng(5);
    const Index n = 40;
    const MatrixXd cols = testgen::gaussian(n, 3, rng);
    const int draws = 4000;
    std::vector<double> mean(3, 0.0);
    for (int d = 0; d < draws; ++d) {
        IncrementalLsState s(testgen::gaussian(n, rng));
        for (Index k = 0; k < 3; ++k) {
            const double before = s.residual_sq();
            s.append(cols.col(k));
            mean[static_cast<std::size_t>(k)] += s.residual_sq() / before / draws;
        }
    }
    for (Index k = 1; k <= 3; ++k) {
        const double a = (n - k) / 2.0, b = 0.5;
        const double beta_mean = a / (a + b);
        const double beta_sd = std::sqrt(a * b / ((a + b) * (a + b) * (a + b + 1)));
        EXPECT_NEAR(mean[static_cast<std::size_t>(k - 1)], beta_mean, 4.0 * beta_sd / std::sqrt(draws));
    }
}

TEST(TStatistic, PureNoiseGreedyStepsStayNearOne) {
    std::mt19937_64 rng(6);
    const Index n = 200, p = 400;
    const MatrixXd x = testgen::unit_columns(testgen::gaussian(n, p, rng));
    double mean_t1 = 0.0;
    for (int d = 0; d < 200; ++d) {
        const auto t = t_statistic(run_omp(x, testgen::gaussian(n, rng), 5));
        mean_t1 += t[0] / 200.0;
        for (double v : t) EXPECT_GT(v, 0.85);
    }
    // greedy pick explains at most about 2 ln(2p) / n of the noise energy
    EXPECT_GT(mean_t1, 1.0 - 2.0 * std::log(2.0 * p) / n);
    EXPECT_LT(mean_t1, 1.0);
}

TEST(SelectTf, UniqueMinimum) {
    const auto tr = trace_from({1.0, 0.9, 0.045, 0.036}, 10);
    const auto t = t_statistic(tr);
    EXPECT_NEAR(t[0], 0.9, 1e-15);
    EXPECT_NEAR(t[1], 0.05, 1e-15);
    EXPECT_NEAR(t[2], 0.8, 1e-15);
    EXPECT_EQ(select_tf(tr), 2);
}

TEST(SelectTf, TieGoesToSmallestK) {
    EXPECT_EQ(select_tf(trace_from({1.0, 0.5, 0.25}, 10)), 1);
    EXPECT_EQ(argmin_ratio({0.5, 0.5}, 2), 1);
}

TEST(SelectTf, UpperLimitIsKmaxMinusOne) {
    // the deepest dip sits at k = k_max and must be ignored
    EXPECT_EQ(select_tf(trace_from({1.0, 0.9, 0.45, 0.009}, 3)), 2);
    EXPECT_EQ(select_tf(trace_from({1.0, 0.9, 0.45, 0.009}, 4)), 3);
}

TEST(SelectTf, ZeroResidualForcesLastStep) {
    auto tr = trace_from({1.0, 0.1, 0.05, 0.0}, 10);
    tr.halt = HaltReason::zero_residual;
    EXPECT_EQ(select_tf(tr), 3);
}

TEST(SelectTf, ModalOrderMatchesSparsityOnHadamard) {
    const MatrixXd x = hadamard_dictionary(32).entries;
    for (double snr : {10.0, 30.0}) {
        Rng rng(7);
        std::map<Index, int> counts;
        for (int rep = 0; rep < 300; ++rep) {
            const auto s = sparse_signal(64, 3, {}, rng);
            const VectorXd clean = x * s.dense();
            const VectorXd y = clean + noise_for_snr(clean, snr, rng).w;
            ++counts[tf_omp(x, y).k_selected];
        }
        Index mode = 0;
        int best = -1;
        for (auto [k, c] : counts) {
            if (c > best) {
                best = c;
                mode = k;
            }
        }
        EXPECT_EQ(mode, 3) << "snr " << snr;
    }
}

// Property: minimising the squared or the unsquared ratio picks the same k.
TEST(SelectTf, SquaredAndUnsquaredRatiosAgree) {
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 200; ++rep) {
        const MatrixXd x = testgen::unit_columns(testgen::gaussian(30, 60, rng));
        const auto tr = run_omp(x, testgen::gaussian(30, rng), 15);
        std::vector<double> root;
        for (double v : t_statistic(tr)) root.push_back(std::sqrt(v));
        EXPECT_EQ(select_tf(tr), argmin_ratio(root, std::min(tr.steps(), tr.k_max - 1)));
    }
}

TEST(TfOmp, CapIsHalfTheRows) {
    std::mt19937_64 rng(9);
    const MatrixXd x = testgen::unit_columns(testgen::gaussian(32, 64, rng));
    const auto res = tf_omp(x, testgen::gaussian(32, rng));
    EXPECT_EQ(res.trace.k_max, 16);
    EXPECT_EQ(tf_omp_kmax(33), 16);
}

TEST(TfOmp, IdentitySpike) {
    const auto res = tf_omp(MatrixXd::Identity(4, 4), kSpike);
    EXPECT_EQ(res.support, (std::vector<Index>{1}));
    EXPECT_EQ(res.beta, kSpike);
    EXPECT_EQ(res.k_selected, 1);
}

TEST(TfOmp, ZeroObservationGivesEmptySupport) {
    const auto res = tf_omp(MatrixXd::Identity(4, 4), VectorXd::Zero(4));
    EXPECT_TRUE(res.support.empty());
    EXPECT_EQ(res.beta, VectorXd::Zero(4));
}

// Property: on noiseless ERC instances tf_omp and omp_fixed(k0) agree with the truth.
TEST(TfOmp, NoiselessErcInstancesRecoverExactly) {
    const MatrixXd x = hadamard_dictionary(32).entries;
    Rng rng(10);
    for (int rep = 0; rep < 200; ++rep) {
        const auto s = sparse_signal(64, 3, {}, rng);
        ASSERT_LT(erc_coefficient(x, s.support), 1.0);
        const VectorXd y = x * s.dense();
        const auto tf = tf_omp(x, y);
        const auto fixed = omp_fixed(x, y, 3);
        EXPECT_EQ(pe(tf.support, s.support), 0);
        EXPECT_EQ(pe(fixed.support, tf.support), 0);
        EXPECT_LE((tf.beta - s.dense()).norm(), 1e-10);
    }
}

TEST(TfOmp, CoefficientsAreLeastSquaresOnSupport) {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        const MatrixXd x = testgen::unit_columns(testgen::gaussian(24, 50, rng));
        const VectorXd y = testgen::gaussian(24, rng);
        const auto res = tf_omp(x, y);
        const std::vector<Index> prefix(res.trace.selected.begin(), res.trace.selected.begin() + res.k_selected);
        EXPECT_EQ(res.support, prefix);
        const VectorXd ls = least_squares(select_columns(x, res.support), y);
        for (std::size_t i = 0; i < res.support.size(); ++i) {
            EXPECT_NEAR(res.beta(res.support[i]), ls(static_cast<Index>(i)), 1e-10 * (1.0 + ls.norm()));
        }
        EXPECT_EQ(static_cast<std::size_t>((res.beta.array() != 0.0).count()), res.support.size());
    }
}

TEST(QtfCaps, TableValues) {
    EXPECT_EQ(qtf_kmax1(100, 500), 12);
    EXPECT_EQ(qtf_kmax2(100, 500), 16);
    EXPECT_EQ(qtf_kmax1(450, 500), 68);
    EXPECT_EQ(qtf_kmax2(450, 500), 72);
    EXPECT_EQ(qtf_kmax1(32, 64), 8);
    EXPECT_EQ(qtf_kmax2(32, 64), 7);
}

TEST(QtfCaps, DomainErrors) {
    EXPECT_THROW(qtf_kmax1(64, 64), InvalidParameter);
    EXPECT_THROW(qtf_kmax1(1, 64), InvalidParameter);
    EXPECT_THROW(qtf_kmax2(10, 1), InvalidParameter);
}

TEST(QtfCaps, IntegerSquareRootIsExact) {
    // n (p - 1) / (p - n) is a perfect square here: 36 * 63 / 28 = 81
    EXPECT_EQ(qtf_kmax1(36, 64), 10);
    for (Index p = 3; p < 300; ++p) {
        for (Index n = 2; n < p; n += 7) {
            const double v = static_cast<double>(n) * (p - 1) / (p - n);
            const auto m = qtf_kmax1(n, p) - 1;
            EXPECT_LE(static_cast<double>(m * m), v + 1e-9);
            EXPECT_GT(static_cast<double>((m + 1) * (m + 1)), v - 1e-9);
        }
    }
}

TEST(OmpFixed, Examples) {
    EXPECT_THROW(omp_fixed(MatrixXd::Identity(4, 4), kSpike, 0), InvalidParameter);
    EXPECT_THROW(omp_fixed(MatrixXd::Identity(4, 4), kSpike, 5), InvalidParameter);
    const auto res = omp_fixed(MatrixXd::Identity(4, 4), kSpike, 1);
    EXPECT_EQ(res.support, (std::vector<Index>{1}));
    const auto early = omp_fixed(MatrixXd::Identity(4, 4), kSpike, 3);
    EXPECT_EQ(early.k_selected, 1);
}

TEST(OmpSigma, ThresholdValue) {
    EXPECT_NEAR(noise_norm_bound(1.0, 32), 7.2844, 5e-5);
    EXPECT_NEAR(noise_norm_bound(2.0, 32), 2.0 * 7.2844, 1e-4);
    EXPECT_THROW(omp_sigma(MatrixXd::Identity(4, 4), kSpike, 0.0), InvalidParameter);
}

TEST(OmpSigma, HugeSigmaMeansNoIterations) {
    const auto res = omp_sigma(MatrixXd::Identity(4, 4), kSpike, 100.0);
    EXPECT_TRUE(res.support.empty());
    EXPECT_EQ(res.trace.halt, HaltReason::residual_threshold);
    EXPECT_EQ(res.beta, VectorXd::Zero(4));
}

TEST(OmpSigma, StopsBelowThreshold) {
    std::mt19937_64 rng(12);
    for (int rep = 0; rep < 50; ++rep) {
        const MatrixXd x = testgen::unit_columns(testgen::gaussian(32, 64, rng));
        const VectorXd y = testgen::gaussian(32, rng);
        const double sigma = 0.3;
        const auto res = omp_sigma(x, y, sigma);
        const double thr = noise_norm_bound(sigma, 32);
        const auto& r = res.trace.residual_sq;
        for (std::size_t k = 0; k + 1 < r.size(); ++k) EXPECT_GE(std::sqrt(r[k]), thr);
        if (res.trace.halt == HaltReason::residual_threshold) {
            EXPECT_LT(std::sqrt(r.back()), thr);
        }
    }
}

TEST(OmpSigma, NoiseNormCoverage) {
    std::mt19937_64 rng(13);
    const Index n = 32;
    int exceed = 0;
    for (int d = 0; d < 1000; ++d) {
        if (testgen::gaussian(n, rng).norm() > noise_norm_bound(1.0, n)) ++exceed;
    }
    EXPECT_LE(exceed / 1000.0, 1.0 / n + 0.02);
}

TEST(Thresholds, OrthonormalClosedForms) {
    SparseSignal s;
    s.dimension = 4;
    s.support = {0, 2};
    s.values = {1.0, -1.0};
    auto th = recovery_thresholds(MatrixXd::Identity(4, 4), s);
    EXPECT_NEAR(th.lambda_min, 1.0, 1e-14);
    EXPECT_NEAR(th.lambda_max, 1.0, 1e-14);
    EXPECT_EQ(th.erc, 0.0);
    EXPECT_TRUE(th.erc_holds);
    EXPECT_NEAR(th.eps_a, 0.5, 1e-14);
    EXPECT_NEAR(th.eps_b, 0.25, 1e-14);

    s.values = {2.0, 1.0};
    th = recovery_thresholds(MatrixXd::Identity(4, 4), s);
    EXPECT_NEAR(th.eps_b, 0.2, 1e-14);
    EXPECT_LE(th.eps_b, th.lambda_min * th.beta_min);
}

TEST(Thresholds, HadamardMatchesEigendecompositionOracle) {
    const MatrixXd x = hadamard_dictionary(32).entries;
    Rng rng(14);
    for (int rep = 0; rep < 20; ++rep) {
        const auto s = sparse_signal(64, 3, {}, rng);
        MatrixXd xs(32, 3);
        for (int i = 0; i < 3; ++i) xs.col(i) = x.col(s.support[static_cast<std::size_t>(i)]);
        const Eigen::JacobiSVD<MatrixXd> svd(xs);
        const double lmax = svd.singularValues()(0) * svd.singularValues()(0);
        const double lmin = svd.singularValues()(2) * svd.singularValues()(2);
        const MatrixXd pinv = (xs.transpose() * xs).inverse() * xs.transpose();
        double erc = 0.0;
        for (Index j = 0; j < 64; ++j) {
            if (std::find(s.support.begin(), s.support.end(), j) != s.support.end()) continue;
            erc = std::max(erc, (pinv * x.col(j)).lpNorm<1>());
        }
        const double eps_a = 1.0 * lmin * (1.0 - erc) / 2.0;
        const double eps_b = lmin / (1.0 + 2.0 * lmax / lmin + lmax / lmin);
        const auto th = recovery_thresholds(x, s);
        EXPECT_NEAR(th.lambda_min, lmin, 1e-12);
        EXPECT_NEAR(th.lambda_max, lmax, 1e-12);
        EXPECT_NEAR(th.erc, erc, 1e-12);
        EXPECT_NEAR(th.eps_a, eps_a, 1e-12);
        EXPECT_NEAR(th.eps_b, eps_b, 1e-12);
        EXPECT_GT(th.eps_a, 0.0);
        EXPECT_GT(th.eps_b, 0.0);
    }
}

TEST(Thresholds, ErcViolationIsFlagged) {
    MatrixXd x(2, 3);
    x << 1, 0, 1, 0, 1, 1;
    x.col(2).normalize();
    SparseSignal s;
    s.dimension = 3;
    s.support = {0, 1};
    s.values = {1.0, 1.0};
    const auto th = recovery_thresholds(x, s);
    EXPECT_FALSE(th.erc_holds);
    EXPECT_NEAR(th.erc, std::sqrt(2.0), 1e-12);
}

TEST(Debias, Examples) {
    const VectorXd y{{1.0, 2.0, 3.0}};
    const std::vector<Index> s{0, 2};
    EXPECT_EQ(debias(MatrixXd::Identity(3, 3), y, s), (VectorXd{{1.0, 0.0, 3.0}}));
    EXPECT_EQ(debias(MatrixXd::Identity(3, 3), y, {}), VectorXd::Zero(3));
    std::mt19937_64 rng(15);
    const MatrixXd x = testgen::gaussian(10, 5, rng);
    const std::vector<Index> t{1, 3};
    const VectorXd yy = VectorXd(y.replicate(4, 1)).head(10);
    const VectorXd b = debias(x, yy, t);
    const VectorXd ls = least_squares(select_columns(x, t), yy);
    EXPECT_NEAR(b(1), ls(0), 1e-12);
    EXPECT_NEAR(b(3), ls(1), 1e-12);
}
