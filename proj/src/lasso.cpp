#include "ivreg/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "ivreg/errors.hpp"
#include "ivreg/parallel.hpp"

namespace ivreg {

namespace {

double soft_threshold(double x, double lambda) {
    if (x > lambda) return x - lambda;
    if (x < -lambda) return x + lambda;
    return 0.0;
}

LassoSolution lasso_cd_warm(const Eigen::MatrixXd& D, const Eigen::VectorXd& target,
                            double lambda, double tol, int max_iters,
                            Eigen::VectorXd w) {
    const Eigen::Index n = D.rows();
    const Eigen::Index d = D.cols();
    if (n == 0) throw DataError("lasso_cd: empty design matrix");
    if (target.size() != n) throw DataError("lasso_cd: target length does not match design rows");
    if (!std::isfinite(lambda) || !(lambda > 0.0)) throw DomainError("lasso_cd: lambda must be positive and finite");
    if (!(tol > 0.0)) throw DomainError("lasso_cd: tol must be positive");
    if (max_iters < 1) throw DomainError("lasso_cd: max_iters must be at least 1");

    LassoSolution sol;
    sol.lambda = lambda;
    if (d == 0) {
        sol.coef.resize(0);
        return sol;
    }

    const Eigen::VectorXd csq = D.colwise().squaredNorm() / static_cast<double>(n);
    Eigen::VectorXd r = target - D * w;

    auto sweep = [&](const std::vector<Eigen::Index>& idx) {
        double max_delta = 0.0;
        for (Eigen::Index j : idx) {
            if (!(csq[j] > 0.0)) {
                if (w[j] != 0.0) {
                    r += w[j] * D.col(j);
                    max_delta = std::max(max_delta, std::abs(w[j]));
                    w[j] = 0.0;
                }
                continue;
            }
            const double rho = D.col(j).dot(r) / static_cast<double>(n) + csq[j] * w[j];
            const double wj = soft_threshold(rho, lambda) / csq[j];
            const double delta = wj - w[j];
            if (delta != 0.0) {
                r -= delta * D.col(j);
                w[j] = wj;
                max_delta = std::max(max_delta, std::abs(delta));
            }
        }
        return max_delta;
    };

    auto objective = [&] {
        return 0.5 * r.squaredNorm() / static_cast<double>(n) + lambda * w.lpNorm<1>();
    };

    auto kkt_residual = [&] {
        r = target - D * w;  // refresh: kills drift from incremental updates
        const Eigen::VectorXd g = D.transpose() * r / static_cast<double>(n);
        double worst = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) {
            const double res = (w[j] != 0.0)
                                   ? std::abs(g[j] - lambda * (w[j] > 0.0 ? 1.0 : -1.0))
                                   : std::max(0.0, std::abs(g[j]) - lambda);
            worst = std::max(worst, res);
        }
        return worst;
    };

    std::vector<Eigen::Index> all(static_cast<std::size_t>(d));
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    std::vector<Eigen::Index> active;

    bool converged = false;
    int sweeps = 0;
    while (sweeps < max_iters) {
        const double full_delta = sweep(all);
        ++sweeps;
        sol.objective_trace.push_back(objective());
        active.clear();
        for (Eigen::Index j = 0; j < d; ++j)
            if (w[j] != 0.0) active.push_back(j);
        double max_delta = full_delta;
        while (sweeps < max_iters && max_delta >= tol && !active.empty()) {
            max_delta = sweep(active);
            ++sweeps;
            sol.objective_trace.push_back(objective());
        }
        if (max_delta < tol) {
            sol.kkt_violation = kkt_residual();
            if (sol.kkt_violation <= 10.0 * tol) {
                converged = true;
                break;
            }
            // A violated coordinate may sit outside the active set; only a
            // stationary *full* sweep proves no sweep can make progress.
            if (full_delta == 0.0) break;
        }
    }
    if (!converged) {
        sol.kkt_violation = kkt_residual();
        if (sol.kkt_violation > 10.0 * tol)
            throw NumericalError("lasso_cd: coordinate descent did not converge after " +
                                 std::to_string(sweeps) + " sweeps (KKT residual " +
                                 std::to_string(sol.kkt_violation) + ")");
    }
    if (!w.allFinite()) throw NumericalError("lasso_cd: non-finite coefficients");
    sol.coef = std::move(w);
    sol.iters = sweeps;
    return sol;
}

double criterion_penalty(SelectCriterion criterion, Eigen::Index n) {
    return criterion == SelectCriterion::Aic ? 2.0 : std::log(static_cast<double>(n));
}

}  // namespace

LassoSolution lasso_cd(const Eigen::MatrixXd& D, const Eigen::VectorXd& target,
                       double lambda, double tol, int max_iters) {
    return lasso_cd_warm(D, target, lambda, tol, max_iters,
                         Eigen::VectorXd::Zero(D.cols()));
}

std::vector<double> default_lambda_grid(const Eigen::MatrixXd& D,
                                        const Eigen::VectorXd& target,
                                        int count, double min_ratio) {
    if (count < 1) throw DomainError("default_lambda_grid: count must be at least 1");
    if (!(min_ratio > 0.0) || !(min_ratio <= 1.0))
        throw DomainError("default_lambda_grid: min_ratio must lie in (0, 1]");
    if (D.rows() == 0) throw DataError("default_lambda_grid: empty design matrix");
    const double lmax =
        D.cols() == 0 ? 0.0
                      : (D.transpose() * target).cwiseAbs().maxCoeff() / static_cast<double>(D.rows());
    if (!std::isfinite(lmax)) throw NumericalError("default_lambda_grid: non-finite lambda_max");
    if (!(lmax > 0.0)) return {1e-12};  // degenerate target: any positive lambda kills all coefs
    std::vector<double> grid(static_cast<std::size_t>(count));
    if (count == 1) {
        grid[0] = lmax;
        return grid;
    }
    for (int i = 0; i < count; ++i)
        grid[static_cast<std::size_t>(i)] =
            lmax * std::pow(min_ratio, static_cast<double>(i) / static_cast<double>(count - 1));
    return grid;
}

double selection_score(const Eigen::MatrixXd& D, const Eigen::VectorXd& target,
                       const Eigen::VectorXd& coef, SelectCriterion criterion) {
    const Eigen::Index n = D.rows();
    if (n == 0) throw DataError("selection_score: empty design matrix");
    const double rss = std::max((target - D * coef).squaredNorm(), 1e-300);
    const double df = static_cast<double>((coef.array() != 0.0).count());
    return static_cast<double>(n) * std::log(rss / static_cast<double>(n)) +
           criterion_penalty(criterion, n) * df;
}

LassoSolution lasso_select(const Eigen::MatrixXd& D, const Eigen::VectorXd& target,
                           const std::vector<double>& lambda_grid,
                           SelectCriterion criterion) {
    if (lambda_grid.empty()) throw ConfigError("lasso_select: empty lambda grid");
    std::vector<double> grid = lambda_grid;
    for (double l : grid)
        if (!std::isfinite(l) || !(l > 0.0))
            throw DomainError("lasso_select: lambda grid entries must be positive and finite");
    std::sort(grid.begin(), grid.end(), std::greater<>());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    Eigen::VectorXd warm = Eigen::VectorXd::Zero(D.cols());
    LassoSolution best;
    LassoSolution last;
    double best_score = std::numeric_limits<double>::infinity();
    // Path fits only feed the information criterion, so they run at a looser
    // stall tolerance than standalone solves: correlated designs crawl at the
    // small-lambda end of the grid, where extra digits change no selection.
    for (double lambda : grid) {
        LassoSolution sol = lasso_cd_warm(D, target, lambda, 1e-5, 50000, warm);
        warm = sol.coef;
        // A saturated active set interpolates the target, so the information
        // criteria degenerate; stop the path there instead of scoring it.
        if ((sol.coef.array() != 0.0).count() >= D.rows()) {
            last = std::move(sol);
            break;
        }
        const double score = selection_score(D, target, sol.coef, criterion);
        last = sol;
        if (score < best_score) {  // strict: ties keep the earlier (larger) lambda
            best_score = score;
            best = std::move(sol);
        }
    }
    return best.coef.size() ? best : last;  // all-saturated grids fall back to the fit itself
}

Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& D, const Eigen::VectorXd& target,
                            double lambda) {
    const Eigen::Index n = D.rows();
    const Eigen::Index d = D.cols();
    if (n == 0) throw DataError("ridge_solve: empty design matrix");
    if (target.size() != n) throw DataError("ridge_solve: target length does not match design rows");
    if (!std::isfinite(lambda) || lambda < 0.0)
        throw DomainError("ridge_solve: lambda must be non-negative and finite");
    if (d == 0) return Eigen::VectorXd(0);

    const double nlambda = static_cast<double>(n) * lambda;
    const Eigen::VectorXd rhs = D.transpose() * target;
    Eigen::VectorXd w;
    if (d > n && lambda > 0.0) {
        Eigen::MatrixXd kernel = D * D.transpose();
        kernel.diagonal().array() += nlambda;
        w = D.transpose() * kernel.ldlt().solve(target);
    } else {
        Eigen::MatrixXd gram = D.transpose() * D;
        gram.diagonal().array() += nlambda;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
        if (lambda == 0.0) {
            const Eigen::VectorXd pivots = ldlt.vectorD();
            const double pmax = pivots.cwiseAbs().maxCoeff();
            const double pmin = pivots.minCoeff();
            if (!(pmin > pmax * 1e-12))
                throw NumericalError(
                    "ridge_solve: singular normal equations at lambda = 0; "
                    "use a positive ridge penalty",
                    pmin);
        }
        w = ldlt.solve(rhs);
    }

    const Eigen::VectorXd resid = D.transpose() * (D * w) + nlambda * w - rhs;
    const double scale = std::max(rhs.lpNorm<Eigen::Infinity>(), 1e-300);
    if (!w.allFinite() || !(resid.lpNorm<Eigen::Infinity>() <= 1e-8 * scale))
        throw NumericalError("ridge_solve: normal-equations residual too large; "
                             "system is singular or severely ill-conditioned",
                             resid.lpNorm<Eigen::Infinity>());
    return w;
}

TwoStageLasso two_stage_lasso(const Dataset& data,
                              const std::vector<double>& lambda1_grid,
                              const std::vector<double>& lambda2_grid,
                              SelectCriterion criterion, int threads) {
    data.validate();
    const Eigen::Index p = data.p();
    TwoStageLasso out;
    out.gamma.resize(data.q(), p);
    parallel_for(p, threads, [&](long j) {
        try {
            const std::vector<double> grid =
                lambda1_grid.empty() ? default_lambda_grid(data.Z, data.X.col(j))
                                     : lambda1_grid;
            out.gamma.col(j) = lasso_select(data.Z, data.X.col(j), grid, criterion).coef;
        } catch (const NumericalError& e) {
            throw NumericalError("stage 1 lasso, covariate column " + std::to_string(j) +
                                     ": " + e.what(),
                                 e.min_pivot, j);
        }
    });
    const Eigen::MatrixXd xhat = data.Z * out.gamma;
    const std::vector<double> grid2 =
        lambda2_grid.empty() ? default_lambda_grid(xhat, data.y) : lambda2_grid;
    out.beta = lasso_select(xhat, data.y, grid2, criterion).coef;
    return out;
}

TwoStageFit two_stage_lasso_fit(const Dataset& data,
                                const std::vector<double>& lambda1_grid,
                                const std::vector<double>& lambda2_grid,
                                SelectCriterion criterion, int threads) {
    data.validate();
    Dataset centered;
    const Eigen::VectorXd x_means = data.X.colwise().mean();
    const Eigen::VectorXd z_means = data.Z.colwise().mean();
    const double y_mean = data.y.mean();
    centered.y = data.y.array() - y_mean;
    centered.X = data.X.rowwise() - x_means.transpose();
    centered.Z = data.Z.rowwise() - z_means.transpose();

    const TwoStageLasso tl =
        two_stage_lasso(centered, lambda1_grid, lambda2_grid, criterion, threads);

    TwoStageFit fit;
    fit.gamma_hat = tl.gamma;
    fit.gamma_u = tl.gamma;
    fit.beta_hat = tl.beta;
    fit.beta_u = tl.beta;
    fit.gamma_support = tl.gamma.array() != 0.0;
    fit.beta_support = tl.beta.array() != 0.0;
    fit.gamma_post = tl.gamma;
    fit.beta_post = tl.beta;
    fit.stage1_converged = BoolVec::Constant(data.p(), true);
    fit.stage1_iters = Eigen::VectorXi::Zero(data.p());
    fit.stage1_max_delta = Eigen::VectorXd::Zero(data.p());
    fit.stage2_converged = true;
    fit.y_mean = y_mean;
    fit.x_means = x_means;
    fit.z_means = z_means;
    return fit;
}

}  // namespace ivreg
