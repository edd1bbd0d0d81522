#ifndef IVREG_METRICS_HPP_
#define IVREG_METRICS_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "ivreg/two_stage.hpp"

namespace ivreg {

struct SelectionRates {
    double fnr = 0.0;
    double fpr = 0.0;
    Eigen::Index true_nonzero = 0;
    Eigen::Index true_zero = 0;
    // False when the matching denominator is empty; the rate is reported as 0.
    bool fnr_defined = true;
    bool fpr_defined = true;
};

// fnr = #{true nonzero estimated zero} / #{true nonzero},
// fpr = #{true zero estimated nonzero} / #{true zero}.
SelectionRates selection_rates(const BoolVec& truth_support, const BoolVec& est_support);

// Seeded shuffle of 0..n-1 cut into k folds whose sizes differ by at most 1.
std::vector<std::vector<Eigen::Index>> make_folds(Eigen::Index n, int k,
                                                  std::uint64_t seed);

using Fitter = std::function<TwoStageFit(const Dataset&)>;

struct CvPair {
    double dense = 0.0;  // predictions from the dense estimates
    double post = 0.0;   // predictions from the post-estimates
};

// k-fold CV of held-out squared error, total divided by k (per-fold average;
// pass per_observation = true to divide by n instead). Both prediction
// variants share the same fold fits.
CvPair kfold_cv_both(const Dataset& data, int k, const Fitter& fitter,
                     std::uint64_t seed, bool per_observation = false);

double kfold_cv(const Dataset& data, int k, const Fitter& fitter, std::uint64_t seed,
                bool use_post = false, bool per_observation = false);

// 1 - RSS/TSS; requires Var(y) > 0.
double r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& y_pred);

// n ln(RSS/n) + df ln(n); requires RSS > 0.
double bic(const Eigen::VectorXd& y, const Eigen::VectorXd& y_pred, Eigen::Index df);

}  // namespace ivreg

#endif  // IVREG_METRICS_HPP_
