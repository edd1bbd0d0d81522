#ifndef IVREG_LASSO_HPP_
#define IVREG_LASSO_HPP_

#include <Eigen/Dense>
#include <vector>

#include "ivreg/two_stage.hpp"

namespace ivreg {

struct LassoSolution {
    Eigen::VectorXd coef;
    double lambda = 0.0;
    int iters = 0;                        // coordinate-descent sweeps
    double kkt_violation = 0.0;           // max stationarity residual at return
    std::vector<double> objective_trace;  // objective after each sweep
};

enum class SelectCriterion { Aic, Bic };

// Cyclic coordinate descent with soft-thresholding for
//   (1/2n) ||target - D w||^2 + lambda ||w||_1.
// Stops once the largest coefficient change in a sweep is below tol and the
// KKT residual is within 10*tol; errors out if max_iters sweeps leave the KKT
// residual above 10*tol.
LassoSolution lasso_cd(const Eigen::MatrixXd& D, const Eigen::VectorXd& target,
                       double lambda, double tol = 1e-7, int max_iters = 2000);

// 50 log-spaced values from lambda_max = max|D't|/n down to min_ratio*lambda_max.
std::vector<double> default_lambda_grid(const Eigen::MatrixXd& D,
                                        const Eigen::VectorXd& target,
                                        int count = 50, double min_ratio = 1e-3);

// Fits the grid largest-lambda first with warm starts and returns the fit
// minimizing  n log(RSS/n) + penalty * df  (penalty 2 for AIC, log n for BIC,
// df = active-set size). Ties go to the larger lambda.
LassoSolution lasso_select(const Eigen::MatrixXd& D, const Eigen::VectorXd& target,
                           const std::vector<double>& lambda_grid,
                           SelectCriterion criterion);

// Criterion value used by lasso_select, exposed for re-scoring.
double selection_score(const Eigen::MatrixXd& D, const Eigen::VectorXd& target,
                       const Eigen::VectorXd& coef, SelectCriterion criterion);

// Solves (D'D + n lambda I) w = D' target by SPD factorization, switching to
// the n x n dual form when d > n and lambda > 0. A singular system at
// lambda = 0 raises NumericalError advising a positive penalty.
Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& D, const Eigen::VectorXd& target,
                            double lambda);

struct TwoStageLasso {
    Eigen::MatrixXd gamma;  // q x p
    Eigen::VectorXd beta;   // p
};

// Lin-et-al style two-stage LASSO: per covariate column a penalized
// regression on Z selected by `criterion`, then a penalized regression of y
// on Xhat = Z*gamma. Empty grids fall back to the per-regression default.
TwoStageLasso two_stage_lasso(const Dataset& data,
                              const std::vector<double>& lambda1_grid,
                              const std::vector<double>& lambda2_grid,
                              SelectCriterion criterion, int threads = 1);

// two_stage_lasso on centered data, packaged in the common fit carrier
// (dense and post estimates coincide; supports are the nonzero masks).
TwoStageFit two_stage_lasso_fit(const Dataset& data,
                                const std::vector<double>& lambda1_grid,
                                const std::vector<double>& lambda2_grid,
                                SelectCriterion criterion, int threads = 1);

}  // namespace ivreg

#endif  // IVREG_LASSO_HPP_
