#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tfomp/baselines.hpp"
#include "tfomp/errors.hpp"
#include "tfomp/metrics.hpp"
#include "tfomp/omp.hpp"
#include "tfomp/random.hpp"

namespace tfomp {

/// Second-stage sparse solver applied to the error vector of the LMMSE decision.
enum class MimoCorrection { none, tf_omp, omp_k0, omp_sigma };

struct MimoDecision {
    MimoCorrection correction = MimoCorrection::none;
    VectorXd x_hat;         // stacked real/imag symbol decisions, entries +-1
    double ser = 0.0;       // complex-symbol error rate
    Index iterations = 0;   // CS-stage pursuit steps
    bool ok = true;
    std::string error;
};

struct MimoOutcome {
    double sigma2_ml = 0.0;     // per real dimension
    VectorXd x_lmmse;           // quantised first-stage decision
    Index true_error_count = 0; // nonzero entries of x - x_lmmse
    std::vector<MimoDecision> decisions;
};

/// One real-equivalent MIMO draw: H_r, QPSK symbols x_r and y_r = H_r x_r + w_r.
struct MimoTrial {
    MatrixXd h;
    VectorXd x;
    VectorXd y;
    double sigma2 = 0.0;  // per real dimension
};

/**
 * Complex H with i.i.d. CN(0,1) entries, QPSK symbols +-1 +-i, complex noise
 * CN(0, 2 sigma2). SNR is E||Hx||^2 / E||w||^2, so sigma2 = nt / 10^(snr/10)
 * per real dimension.
 */
inline MimoTrial draw_mimo_trial(Index nt, Index nr, double snr_db, bool noiseless, Rng& rng) {
    std::normal_distribution<double> half(0.0, std::sqrt(0.5));
    Eigen::MatrixXcd hc(nr, nt);
    for (Index j = 0; j < nt; ++j) {
        for (Index i = 0; i < nr; ++i) {
            const double re = half(rng);
            const double im = half(rng);
            hc(i, j) = {re, im};
        }
    }
    MimoTrial t;
    t.h = real_equivalent(hc);
    t.x.resize(2 * nt);
    for (Index i = 0; i < 2 * nt; ++i) t.x(i) = random_sign(rng);
    t.sigma2 = noiseless ? 0.0 : static_cast<double>(nt) / std::pow(10.0, snr_db / 10.0);
    t.y = t.h * t.x;
    if (!noiseless) {
        std::normal_distribution<double> noise(0.0, std::sqrt(t.sigma2));
        for (Index i = 0; i < t.y.size(); ++i) t.y(i) += noise(rng);
    }
    return t;
}

/**
 * LMMSE + quantisation, then sparse correction of the decision error.
 *
 * The noise variance is unknown to the receiver and replaced by its residual
 * estimate. The CS stage runs on column-normalised H_r against
 * y - H_r x_lmmse; the recovered error is rescaled, added to the preliminary
 * decision and re-quantised. OMP(k0) is given the true number of erroneous
 * real components.
 */
inline MimoOutcome mimo_pipeline(const MatrixXd& h, const VectorXd& x_true, const VectorXd& y,
                                 const std::vector<MimoCorrection>& roster) {
    if (h.rows() < h.cols()) throw InvalidDimension("mimo_pipeline: needs an overdetermined system");
    if (h.cols() != x_true.size() || h.rows() != y.size()) throw DimensionMismatch("mimo_pipeline: sizes disagree");
    MimoOutcome out;
    out.sigma2_ml = sigma_ml(h, y);
    out.x_lmmse = qpsk_quantize(lmmse(h, y, out.sigma2_ml, 1.0));
    out.true_error_count = static_cast<Index>(((x_true - out.x_lmmse).array() != 0.0).count());

    const VectorXd col_norm = h.colwise().norm().transpose();
    MatrixXd dict = h;
    for (Index j = 0; j < dict.cols(); ++j) dict.col(j) /= col_norm(j);
    const VectorXd y_err = y - h * out.x_lmmse;
    const bool nothing_left = !(y_err.norm() > kZeroResidual * y.norm());

    for (MimoCorrection alg : roster) {
        MimoDecision d;
        d.correction = alg;
        d.x_hat = out.x_lmmse;
        try {
            if (alg != MimoCorrection::none && !nothing_left) {
                std::optional<RecoveryResult> rec;
                switch (alg) {
                case MimoCorrection::tf_omp: rec = tf_omp(dict, y_err); break;
                case MimoCorrection::omp_k0:
                    if (out.true_error_count > 0) rec = omp_fixed(dict, y_err, out.true_error_count);
                    break;
                case MimoCorrection::omp_sigma: rec = omp_sigma(dict, y_err, std::sqrt(out.sigma2_ml)); break;
                case MimoCorrection::none: break;
                }
                if (rec) {
                    const VectorXd e_hat = rec->beta.cwiseQuotient(col_norm);
                    d.x_hat = qpsk_quantize(out.x_lmmse + e_hat);
                    d.iterations = rec->trace.steps();
                }
            }
        } catch (const Error& e) {
            d.ok = false;
            d.error = e.what();
        }
        d.ser = ser_stacked(d.x_hat, x_true);
        out.decisions.push_back(std::move(d));
    }
    return out;
}

} // namespace tfomp
