#ifndef IVREG_NUMERICS_HPP_
#define IVREG_NUMERICS_HPP_

#include <Eigen/Dense>

#include "ivreg/errors.hpp"

namespace ivreg {

// A probability constrained to the open interval (0,1).
class Probability {
  public:
    explicit Probability(double value) : value_(value) {
        if (!(value > 0.0) || !(value < 1.0)) {
            throw DomainError("probability must lie strictly inside (0,1), got " +
                              std::to_string(value));
        }
    }

    double value() const { return value_; }

  private:
    double value_;
};

// Logistic function 1/(1+exp(-x)), stable over the full double range.
double sigmoid(double x);

// Inverse of sigmoid: log(p/(1-p)).
double logit(const Probability& p);
double logit(double p);

// Nearest-rank quantile: the element of sorted(v) at 1-based index
// ceil(level*len(v)); level 0 maps to the minimum. No interpolation, so the
// result is always an element of v.
double quantile_nearest_rank(const Eigen::VectorXd& v, double level);

struct LowRankPosterior {
    Eigen::VectorXd diag_cov;  // diag of (diag(site_vars)^-1 + D'D/noise_var)^-1
    Eigen::VectorXd mean;
};

// Diagonal covariance and mean of the Gaussian posterior
//   V = (diag(site_vars)^-1 + D'D/noise_var)^-1,
//   mean = V (diag(site_vars)^-1 site_means + D' target / noise_var),
// computed through the n x n kernel K = noise_var*I + D diag(site_vars) D'
// with a single Cholesky factorization. The d x d matrix V is never formed;
// cost O(n^2 d + n^3), memory O(nd).
LowRankPosterior lowrank_posterior(const Eigen::MatrixXd& D,
                                   const Eigen::VectorXd& site_means,
                                   const Eigen::VectorXd& site_vars,
                                   double noise_var,
                                   const Eigen::VectorXd& target);

}  // namespace ivreg

#endif  // IVREG_NUMERICS_HPP_
