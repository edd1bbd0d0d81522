#ifndef IVREG_HYPERINIT_HPP_
#define IVREG_HYPERINIT_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ivreg/ep.hpp"
#include "ivreg/lasso.hpp"
#include "ivreg/two_stage.hpp"

namespace ivreg {

enum class InitSource { StrategyI, StrategyII };

struct InitReport {
    HyperParams hyper{};
    Eigen::Index df1 = 0;  // nonzero count of the initial beta estimate
    Eigen::Index df2 = 0;  // nonzero count of the initial Gamma estimate
    InitSource source = InitSource::StrategyI;
    bool df1_degenerate = false;  // empty/full support fallback engaged
    bool df2_degenerate = false;

    // Strategy II only: the searched grids, the CV surface (rows indexed by
    // p0, columns by pi0), and how the folds were drawn.
    std::vector<double> p0_grid;
    std::vector<double> pi0_grid;
    Eigen::MatrixXd cv_surface;
    std::uint64_t cv_seed = 0;
    int folds = 0;
};

// {0.1, 0.3, 0.5, 0.7, 0.9}
std::vector<double> default_hyper_grid();

// Moment-matching initialization from a two-stage LASSO pilot fit:
//   p0  = df1/p, pi0 = df2/(pq),
//   sigma0_sq = ||y - Xhat b||^2 / df*   (df* = n - df1 when df1 < n, n/2 otherwise),
//   tau0_sq   = ||X - Z G||_F^2 / n,
//   nu0 = sum b_j^2 / df1,  omega0 = sum G_ij^2 / df2,
// with empty-support fallbacks nu0 = omega0 = 1, p0 = 1/p, pi0 = 1/(pq), a
// 1e-8 floor on the variances, and full-support inclusion probabilities pulled
// just inside (0,1). All quantities are computed on centered data.
InitReport strategy1_from_fit(const Dataset& data, const TwoStageFit& pilot);

// Runs the two-stage LASSO pilot itself (empty grids use the per-regression
// default), then applies strategy1_from_fit.
InitReport strategy1(const Dataset& data, const std::vector<double>& lambda1_grid = {},
                     const std::vector<double>& lambda2_grid = {},
                     SelectCriterion criterion = SelectCriterion::Bic, int threads = 1);

// Grid search over (p0, pi0) by k-fold CV of the full EP pipeline, with the
// remaining hyperparameters fixed once from `base` (computed via strategy1
// when base is null). Failed cells score +infinity; ties prefer smaller p0,
// then smaller pi0. The surface rows/columns follow the sorted grids.
InitReport strategy2_grid(const Dataset& data, const std::vector<double>& p0_grid,
                          const std::vector<double>& pi0_grid, int folds,
                          const EpConfig& cfg, double lambda_ridge, std::uint64_t seed,
                          int threads = 1, const InitReport* base = nullptr);

}  // namespace ivreg

#endif  // IVREG_HYPERINIT_HPP_
