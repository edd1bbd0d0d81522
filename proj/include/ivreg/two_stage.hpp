#ifndef IVREG_TWO_STAGE_HPP_
#define IVREG_TWO_STAGE_HPP_

#include <Eigen/Dense>

#include "ivreg/ep.hpp"

namespace ivreg {

using BoolVec = Eigen::Array<bool, Eigen::Dynamic, 1>;
using BoolMat = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Response y (n), covariates X (n x p), instruments Z (n x q).
struct Dataset {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;
    Eigen::MatrixXd Z;

    Eigen::Index n() const { return y.size(); }
    Eigen::Index p() const { return X.cols(); }
    Eigen::Index q() const { return Z.cols(); }

    void validate() const;  // consistent row counts, finite entries
};

// Model parameters and inclusion priors for the two regressions.
struct HyperParams {
    double sigma0_sq;  // stage-II noise variance
    double tau0_sq;    // stage-I noise variance
    double nu0;        // stage-II slab variance
    double omega0;     // stage-I slab variance
    double p0;         // stage-II inclusion prior, in (0,1)
    double pi0;        // stage-I inclusion prior, in (0,1)

    void validate() const;
};

// Row-major vectorization: rows of M laid end to end (index = row*cols + col).
Eigen::VectorXd vec_rowmajor(const Eigen::MatrixXd& M);
Eigen::MatrixXd unvec_rowmajor(const Eigen::VectorXd& v, Eigen::Index rows,
                               Eigen::Index cols);
BoolVec vec_rowmajor(const BoolMat& M);
BoolMat unvec_rowmajor(const BoolVec& v, Eigen::Index rows, Eigen::Index cols);

struct TwoStageFit {
    // Dense EP posterior means and inclusion log-odds.
    Eigen::MatrixXd gamma_hat;  // q x p
    Eigen::MatrixXd gamma_u;    // q x p
    Eigen::VectorXd beta_hat;   // p
    Eigen::VectorXd beta_u;     // p

    // Quantile-rule supports and ridge post-estimates (zero off-support).
    BoolMat gamma_support;
    BoolVec beta_support;
    Eigen::MatrixXd gamma_post;
    Eigen::VectorXd beta_post;

    // Convergence diagnostics.
    BoolVec stage1_converged;
    Eigen::VectorXi stage1_iters;
    Eigen::VectorXd stage1_max_delta;
    bool stage2_converged = false;
    int stage2_iters = 0;
    double stage2_max_delta = 0.0;

    // Centering offsets removed before fitting; predictions add them back.
    double y_mean = 0.0;
    Eigen::VectorXd x_means;  // p (reported, not used in prediction)
    Eigen::VectorXd z_means;  // q
};

struct Stage1Result {
    Eigen::MatrixXd gamma_hat;  // q x p
    Eigen::MatrixXd gamma_u;
    BoolVec converged;          // per column
    Eigen::VectorXi iters;
    Eigen::VectorXd max_delta;
};

// Stage I: p independent EP runs of X[:,j] on Z, with noise tau0_sq, slab
// omega0, inclusion prior pi0. Columns may run concurrently; the result is
// identical regardless of scheduling order.
Stage1Result stage1_fit(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z,
                        const HyperParams& hyper, const EpConfig& cfg,
                        int threads = 1);

// Xhat = Z * gamma_hat.
Eigen::MatrixXd predict_covariates(const Eigen::MatrixXd& Z,
                                   const Eigen::MatrixXd& gamma_hat);

struct Stage2Result {
    Eigen::VectorXd beta_hat;
    Eigen::VectorXd beta_u;
    bool converged = false;
    int iters = 0;
    double max_delta = 0.0;
};

// Stage II: one EP run of y on Xhat, with noise sigma0_sq, slab nu0,
// inclusion prior p0.
Stage2Result stage2_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& Xhat,
                        const HyperParams& hyper, const EpConfig& cfg);

// Quantile sparsification: drop coefficient j iff its exclusion probability
// sigmoid(-u[j]) strictly exceeds the nearest-rank `level` quantile of all
// exclusion probabilities. Elements at the threshold are kept.
BoolVec sparsify(const Eigen::VectorXd& u, const Probability& level);

struct PostEstimates {
    Eigen::VectorXd beta_post;
    Eigen::MatrixXd gamma_post;
};

// Ridge refits restricted to the selected supports. Per stage-I column the
// selected instruments are refit against X[:,j]; the response refit runs on
// the rebuilt Z*gamma_post by default (set refit_on_rebuilt = false to refit
// on the columns of the supplied Xhat instead). Zero support yields zeros.
PostEstimates post_estimate(const Dataset& data, const BoolVec& beta_support,
                            const BoolMat& gamma_support,
                            const Eigen::MatrixXd& Xhat, double lambda_ridge,
                            bool refit_on_rebuilt = true);

// The full pipeline: center, stage I, Xhat from the dense posterior means
// (or the support-masked means when xhat_from_sparsified is set), stage II,
// sparsify both coefficient sets, ridge post-estimation.
TwoStageFit fit(const Dataset& data, const HyperParams& hyper, const EpConfig& cfg,
                double lambda_ridge = 1e-2, int threads = 1,
                bool xhat_from_sparsified = false);

// Plug-in prediction Z_new * Gamma * beta using the post-estimates when
// use_post is set, the dense EP means otherwise. Centering offsets stored in
// the fit are applied.
Eigen::VectorXd predict_response(const Eigen::MatrixXd& Z_new, const TwoStageFit& fit,
                                 bool use_post);

}  // namespace ivreg

#endif  // IVREG_TWO_STAGE_HPP_
