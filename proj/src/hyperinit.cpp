#include "ivreg/hyperinit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ivreg/errors.hpp"
#include "ivreg/metrics.hpp"

namespace ivreg {

std::vector<double> default_hyper_grid() { return {0.1, 0.3, 0.5, 0.7, 0.9}; }

InitReport strategy1_from_fit(const Dataset& data, const TwoStageFit& pilot) {
    data.validate();
    const auto n = static_cast<double>(data.n());
    const auto p = static_cast<double>(data.p());
    const auto q = static_cast<double>(data.q());
    if (pilot.beta_hat.size() != data.p() || pilot.gamma_hat.rows() != data.q() ||
        pilot.gamma_hat.cols() != data.p())
        throw DataError("strategy1: pilot fit shape does not match the dataset");

    const Eigen::VectorXd yc = data.y.array() - data.y.mean();
    const Eigen::MatrixXd xc =
        data.X.rowwise() - Eigen::RowVectorXd(data.X.colwise().mean());
    const Eigen::MatrixXd zc =
        data.Z.rowwise() - Eigen::RowVectorXd(data.Z.colwise().mean());

    InitReport report;
    report.source = InitSource::StrategyI;
    report.df1 = (pilot.beta_hat.array() != 0.0).count();
    report.df2 = (pilot.gamma_hat.array() != 0.0).count();

    const Eigen::MatrixXd xhat = zc * pilot.gamma_hat;
    const double df_star =
        static_cast<double>(report.df1) < n ? n - static_cast<double>(report.df1) : n / 2.0;
    const double sigma0_sq = (yc - xhat * pilot.beta_hat).squaredNorm() / df_star;
    const double tau0_sq = (xc - xhat).squaredNorm() / n;

    report.hyper.sigma0_sq = std::max(sigma0_sq, 1e-8);
    report.hyper.tau0_sq = std::max(tau0_sq, 1e-8);

    if (report.df1 > 0) {
        report.hyper.nu0 = pilot.beta_hat.squaredNorm() / static_cast<double>(report.df1);
        report.hyper.p0 = static_cast<double>(report.df1) / p;
        if (report.hyper.p0 >= 1.0) {  // full support: pull inside (0,1)
            report.hyper.p0 = 1.0 - 0.5 / p;
            report.df1_degenerate = true;
        }
    } else {
        report.hyper.nu0 = 1.0;
        report.hyper.p0 = 1.0 / p;
        report.df1_degenerate = true;
    }
    if (report.df2 > 0) {
        report.hyper.omega0 =
            pilot.gamma_hat.squaredNorm() / static_cast<double>(report.df2);
        report.hyper.pi0 = static_cast<double>(report.df2) / (p * q);
        if (report.hyper.pi0 >= 1.0) {
            report.hyper.pi0 = 1.0 - 0.5 / (p * q);
            report.df2_degenerate = true;
        }
    } else {
        report.hyper.omega0 = 1.0;
        report.hyper.pi0 = 1.0 / (p * q);
        report.df2_degenerate = true;
    }
    report.hyper.validate();
    return report;
}

InitReport strategy1(const Dataset& data, const std::vector<double>& lambda1_grid,
                     const std::vector<double>& lambda2_grid, SelectCriterion criterion,
                     int threads) {
    const TwoStageFit pilot =
        two_stage_lasso_fit(data, lambda1_grid, lambda2_grid, criterion, threads);
    return strategy1_from_fit(data, pilot);
}

InitReport strategy2_grid(const Dataset& data, const std::vector<double>& p0_grid,
                          const std::vector<double>& pi0_grid, int folds,
                          const EpConfig& cfg, double lambda_ridge, std::uint64_t seed,
                          int threads, const InitReport* base) {
    if (p0_grid.empty() || pi0_grid.empty())
        throw ConfigError("strategy2_grid: empty grid");
    if (folds < 2) throw ConfigError("strategy2_grid: need at least 2 folds");
    data.validate();
    cfg.validate();

    auto sorted_unique = [](std::vector<double> g) {
        std::sort(g.begin(), g.end());
        g.erase(std::unique(g.begin(), g.end()), g.end());
        for (double v : g) Probability{v};  // grid points must be valid probabilities
        return g;
    };

    InitReport report = base ? *base : strategy1(data, {}, {}, SelectCriterion::Bic, threads);
    report.source = InitSource::StrategyII;
    report.p0_grid = sorted_unique(p0_grid);
    report.pi0_grid = sorted_unique(pi0_grid);
    report.folds = folds;
    report.cv_seed = seed;

    const auto rows = static_cast<Eigen::Index>(report.p0_grid.size());
    const auto cols = static_cast<Eigen::Index>(report.pi0_grid.size());
    report.cv_surface.setConstant(rows, cols, std::numeric_limits<double>::infinity());

    double best = std::numeric_limits<double>::infinity();
    Eigen::Index best_r = -1;
    Eigen::Index best_c = -1;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            HyperParams cell = report.hyper;
            cell.p0 = report.p0_grid[static_cast<std::size_t>(r)];
            cell.pi0 = report.pi0_grid[static_cast<std::size_t>(c)];
            double cv = std::numeric_limits<double>::infinity();
            try {
                cv = kfold_cv(
                    data, folds,
                    [&](const Dataset& train) {
                        return fit(train, cell, cfg, lambda_ridge, threads);
                    },
                    seed);
            } catch (const NumericalError&) {
                // failed cell: leave +infinity and keep searching
            }
            if (std::isnan(cv)) cv = std::numeric_limits<double>::infinity();
            report.cv_surface(r, c) = cv;
            if (cv < best) {
                best = cv;
                best_r = r;
                best_c = c;
            }
        }
    }
    if (best_r < 0)
        throw NumericalError("strategy2_grid: every grid cell failed its CV evaluation");

    // Re-derive the argmin from the emitted surface; the two must agree.
    Eigen::Index check_r = 0;
    Eigen::Index check_c = 0;
    report.cv_surface.minCoeff(&check_r, &check_c);
    if (report.cv_surface(check_r, check_c) < report.cv_surface(best_r, best_c))
        throw std::logic_error("strategy2_grid: argmin bookkeeping mismatch");

    report.hyper.p0 = report.p0_grid[static_cast<std::size_t>(best_r)];
    report.hyper.pi0 = report.pi0_grid[static_cast<std::size_t>(best_c)];
    report.hyper.validate();
    return report;
}

}  // namespace ivreg
