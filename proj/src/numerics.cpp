#include "ivreg/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace ivreg {

double sigmoid(double x) {
    if (!std::isfinite(x)) {
        throw DomainError("sigmoid: non-finite input");
    }
    // Branch-free in exp's argument sign so neither branch overflows.
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double logit(const Probability& p) {
    const double v = p.value();
    return std::log(v / (1.0 - v));
}

double logit(double p) {
    if (!(p > 0.0) || !(p < 1.0)) {
        throw DomainError("logit: argument must lie strictly inside (0,1)");
    }
    return std::log(p / (1.0 - p));
}

double quantile_nearest_rank(const Eigen::VectorXd& v, double level) {
    if (v.size() == 0) {
        throw DomainError("quantile_nearest_rank: empty vector");
    }
    if (!(level >= 0.0) || !(level <= 1.0)) {
        throw DomainError("quantile_nearest_rank: level must lie in [0,1]");
    }
    std::vector<double> sorted(v.data(), v.data() + v.size());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<std::size_t>(sorted.size());
    std::size_t rank = static_cast<std::size_t>(std::ceil(level * static_cast<double>(n)));
    if (rank == 0) rank = 1;  // level 0 -> minimum
    return sorted[rank - 1];
}

LowRankPosterior lowrank_posterior(const Eigen::MatrixXd& D,
                                   const Eigen::VectorXd& site_means,
                                   const Eigen::VectorXd& site_vars,
                                   double noise_var,
                                   const Eigen::VectorXd& target) {
    const Eigen::Index n = D.rows();
    const Eigen::Index d = D.cols();
    if (site_means.size() != d || site_vars.size() != d || target.size() != n) {
        throw DomainError("lowrank_posterior: inconsistent dimensions");
    }
    if (!(noise_var > 0.0)) {
        throw DomainError("lowrank_posterior: noise_var must be positive");
    }
    if ((site_vars.array() <= 0.0).any()) {
        throw DomainError("lowrank_posterior: site variances must be positive");
    }

    // K = noise_var*I + D S D' with S = diag(site_vars).
    Eigen::MatrixXd scaled = D.array().rowwise() * site_vars.transpose().array();
    Eigen::MatrixXd kernel(n, n);
    kernel.noalias() = scaled * D.transpose();
    kernel.diagonal().array() += noise_var;
    if (!kernel.allFinite()) {
        throw NumericalError("lowrank_posterior: kernel has non-finite entries");
    }

    Eigen::LLT<Eigen::MatrixXd> llt(kernel);
    if (llt.info() != Eigen::Success) {
        // One jitter attempt proportional to the kernel scale, then fail.
        const double jitter = 1e-10 * kernel.trace() / static_cast<double>(n);
        kernel.diagonal().array() += jitter;
        llt.compute(kernel);
        if (llt.info() != Eigen::Success) {
            const double min_pivot = llt.matrixLLT().diagonal().minCoeff();
            throw NumericalError("lowrank_posterior: kernel factorization failed "
                                 "(non-SPD after jitter), min pivot " +
                                     std::to_string(min_pivot),
                                 min_pivot);
        }
    }

    // diag(V)_j = s_j - s_j^2 * d_j' K^-1 d_j, via half-solve A = L^-1 D.
    Eigen::MatrixXd half = llt.matrixL().solve(D);
    LowRankPosterior out;
    out.diag_cov = site_vars.array() -
                   site_vars.array().square() * half.colwise().squaredNorm().transpose().array();
    // Cancellation guard: diag(V) is positive in exact arithmetic.
    out.diag_cov = out.diag_cov.array().max(site_vars.array() * 1e-15).matrix();

    // mean = site_means + S D' K^-1 (target - D site_means).
    Eigen::VectorXd residual = target - D * site_means;
    Eigen::VectorXd w = llt.solve(residual);
    out.mean = site_means.array() + site_vars.array() * (D.transpose() * w).array();

    if (!out.diag_cov.allFinite() || !out.mean.allFinite()) {
        throw NumericalError("lowrank_posterior: non-finite posterior moments");
    }
    return out;
}

}  // namespace ivreg
