#ifndef IVREG_EP_HPP_
#define IVREG_EP_HPP_

#include <Eigen/Dense>

#include "ivreg/numerics.hpp"

namespace ivreg {

// Configuration of one EP run on the model  target = D w + noise, with an
// independent spike-and-slab prior on every coefficient of w.
struct EpConfig {
    double noise_var = 1.0;    // observation noise variance
    double slab_var = 1.0;     // variance of the Gaussian slab
    double incl_prior = 0.5;   // prior inclusion probability, in (0,1)

    double tol = 1e-4;         // convergence threshold on site-parameter change
    int max_iters = 100;
    double damp_start = 0.95;  // eps_t = max(damp_floor, damp_start * damp_decay^t)
    double damp_decay = 0.97;
    double damp_floor = 0.1;
    double var_clamp = 1e6;    // replacement for non-positive site variances
    double flat_var = 1e6;     // variance of the flat likelihood sites at init

    EpConfig with_model(double noise_var_, double slab_var_, double incl_prior_) const {
        EpConfig c = *this;
        c.noise_var = noise_var_;
        c.slab_var = slab_var_;
        c.incl_prior = incl_prior_;
        return c;
    }

    void validate() const;  // throws ConfigError
};

// Site parameters of the three approximating factors:
//   f1 (likelihood):   independent Gaussians N(w_j; m1_j, v1_j)
//   f2 (prior):        Gaussians N(w_j; m2_j, v2_j) x Bernoulli(sigmoid(p2_j))
//   f3 (hyper-prior):  Bernoulli(sigmoid(p3_j)); constant after initialization
struct SiteState {
    Eigen::VectorXd m1, v1;
    Eigen::VectorXd m2, v2, p2;
    Eigen::VectorXd p3;
    int iter = 0;
};

// Per-coefficient marginals of the approximate posterior.
struct MarginalPosterior {
    Eigen::VectorXd xi;   // posterior means
    Eigen::VectorXd s2;   // posterior variances
    Eigen::VectorXd u;    // inclusion log-odds, u = p2 + p3
    bool converged = false;
    int iters = 0;
    double max_delta = 0.0;
};

// Noninformative start: m1 = 0, v1 = flat_var, m2 = 0, v2 = slab_var, p2 = 0,
// and p3 already set to logit(incl_prior) (the one-time f3 refinement).
SiteState init_sites(Eigen::Index d, const EpConfig& cfg);

// The f3 refinement: constant log-odds logit(incl_prior). Idempotent.
Eigen::VectorXd refine_f3(Eigen::Index d, const EpConfig& cfg);

struct F2Update {
    Eigen::VectorXd m2, v2, p2;
};

// Prior-site refinement from the step-t state (Jacobi ordering: reads only
// `sites`, never anything produced in the same iteration). Non-positive or
// oversized updated variances are replaced by cfg.var_clamp before the mean
// update uses them.
F2Update refine_f2(const SiteState& sites, const EpConfig& cfg);

struct F1Update {
    Eigen::VectorXd m1, v1;
};

// Likelihood-site refinement: full Gaussian posterior via lowrank_posterior,
// then per-coefficient cavity division against the step-t f2 sites.
F1Update refine_f1(const SiteState& sites, const Eigen::MatrixXd& D,
                   const Eigen::VectorXd& target, const EpConfig& cfg);

// Convex combination in natural parameters (precision, precision-mean, and
// log-odds); eps = 1 returns `fresh` exactly, p3 is copied unchanged.
SiteState damp_sites(const SiteState& old_state, const SiteState& fresh, double eps);

// xi = (m1/v1 + m2/v2) s2,  s2 = (1/v1 + 1/v2)^-1,  u = p2 + p3.
MarginalPosterior marginal_posterior(const SiteState& sites);

// Full damped EP loop. Stops when the largest absolute change across
// (m1, v1, m2, v2, p2) falls below cfg.tol, or after max_iters (result is
// still returned, converged = false, with the last max_delta recorded).
MarginalPosterior run_ep(const Eigen::MatrixXd& D, const Eigen::VectorXd& target,
                         const EpConfig& cfg);

}  // namespace ivreg

#endif  // IVREG_EP_HPP_
