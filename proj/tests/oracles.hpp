#ifndef IVREG_TESTS_ORACLES_HPP_
#define IVREG_TESTS_ORACLES_HPP_

// Reference implementations used to cross-check the library. Everything here
// is written independently of the production code paths: dense inversions
// instead of kernel solves, exhaustive support enumeration instead of EP,
// direct gradient evaluation instead of solver-internal bookkeeping.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ivreg/rng.hpp"

namespace oracles {

struct ExactSpikeSlab {
    Eigen::VectorXd mean;       // model-averaged posterior means
    Eigen::VectorXd inclusion;  // posterior inclusion probabilities
};

// Exact posterior for target = D w + N(0, noise_var I) with independent
// spike-and-slab priors, by enumerating all 2^d supports. Per support S the
// coefficients are N(0, slab_var I_S), so the evidence is a Gaussian marginal
// likelihood; supports are mixed by evidence times Bernoulli(incl_prior) mass.
inline ExactSpikeSlab exact_spike_slab(const Eigen::MatrixXd& D,
                                       const Eigen::VectorXd& target,
                                       double noise_var, double slab_var,
                                       double incl_prior) {
    const Eigen::Index n = D.rows();
    const Eigen::Index d = D.cols();
    const double log_in = std::log(incl_prior);
    const double log_out = std::log1p(-incl_prior);

    std::vector<double> log_post(std::size_t(1) << d);
    std::vector<Eigen::VectorXd> means(std::size_t(1) << d);
    double log_norm = -std::numeric_limits<double>::infinity();

    for (std::uint32_t mask = 0; mask < (std::uint32_t(1) << d); ++mask) {
        std::vector<Eigen::Index> sel;
        for (Eigen::Index j = 0; j < d; ++j)
            if (mask & (std::uint32_t(1) << j)) sel.push_back(j);
        const Eigen::Index k = Eigen::Index(sel.size());

        Eigen::MatrixXd Ds(n, k);
        for (Eigen::Index i = 0; i < k; ++i) Ds.col(i) = D.col(sel[std::size_t(i)]);

        // log N(target; 0, noise_var I + slab_var Ds Ds')
        Eigen::MatrixXd cov = slab_var * (Ds * Ds.transpose());
        cov.diagonal().array() += noise_var;
        const Eigen::LLT<Eigen::MatrixXd> llt(cov);
        const Eigen::VectorXd alpha = llt.solve(target);
        double logdet = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
        const double loglik = -0.5 * (double(n) * std::log(2.0 * M_PI) + logdet +
                                      target.dot(alpha));

        const double logprior = double(k) * log_in + double(d - k) * log_out;
        log_post[mask] = loglik + logprior;
        log_norm = log_norm > log_post[mask]
                       ? log_norm + std::log1p(std::exp(log_post[mask] - log_norm))
                       : log_post[mask] + std::log1p(std::exp(log_norm - log_post[mask]));

        // conditional posterior mean on the support
        Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
        if (k > 0) {
            Eigen::MatrixXd prec = Ds.transpose() * Ds / noise_var;
            prec.diagonal().array() += 1.0 / slab_var;
            const Eigen::VectorXd mu_s = prec.llt().solve(Ds.transpose() * target / noise_var);
            for (Eigen::Index i = 0; i < k; ++i) mu[sel[std::size_t(i)]] = mu_s[i];
        }
        means[mask] = mu;
    }

    ExactSpikeSlab out;
    out.mean = Eigen::VectorXd::Zero(d);
    out.inclusion = Eigen::VectorXd::Zero(d);
    for (std::uint32_t mask = 0; mask < (std::uint32_t(1) << d); ++mask) {
        const double w = std::exp(log_post[mask] - log_norm);
        out.mean += w * means[mask];
        for (Eigen::Index j = 0; j < d; ++j)
            if (mask & (std::uint32_t(1) << j)) out.inclusion[j] += w;
    }
    return out;
}

struct DensePosterior {
    Eigen::VectorXd diag_cov;
    Eigen::VectorXd mean;
};

// Direct d x d evaluation of V = (diag(site_vars)^-1 + D'D/noise_var)^-1 and
// its mean, with a full matrix inverse.
inline DensePosterior dense_posterior(const Eigen::MatrixXd& D,
                                      const Eigen::VectorXd& site_means,
                                      const Eigen::VectorXd& site_vars,
                                      double noise_var,
                                      const Eigen::VectorXd& target) {
    const Eigen::Index d = D.cols();
    Eigen::MatrixXd A = D.transpose() * D / noise_var;
    A += Eigen::MatrixXd(site_vars.cwiseInverse().asDiagonal());
    const Eigen::MatrixXd V = A.inverse();
    DensePosterior out;
    out.diag_cov = V.diagonal();
    out.mean = V * (site_means.cwiseQuotient(site_vars) + D.transpose() * target / noise_var);
    (void)d;
    return out;
}

// Independent stationarity check for (1/2n)||t - Dw||^2 + lambda ||w||_1:
// returns the largest violation over coordinates (active coordinates must have
// gradient lambda * sign(w_j); inactive ones gradient magnitude <= lambda).
inline double lasso_kkt_violation(const Eigen::MatrixXd& D, const Eigen::VectorXd& target,
                                  const Eigen::VectorXd& w, double lambda) {
    const double n = double(D.rows());
    const Eigen::VectorXd g = D.transpose() * (target - D * w) / n;
    double worst = 0.0;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        const double v = w[j] != 0.0 ? std::abs(g[j] - lambda * (w[j] > 0.0 ? 1.0 : -1.0))
                                     : std::max(0.0, std::abs(g[j]) - lambda);
        worst = std::max(worst, v);
    }
    return worst;
}

inline Eigen::MatrixXd random_matrix(ivreg::Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = rng.normal();
    return M;
}

inline Eigen::VectorXd random_vector(ivreg::Rng& rng, Eigen::Index size) {
    Eigen::VectorXd v(size);
    for (Eigen::Index i = 0; i < size; ++i) v[i] = rng.normal();
    return v;
}

}  // namespace oracles

#endif  // IVREG_TESTS_ORACLES_HPP_
