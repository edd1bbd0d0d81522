#ifndef IVREG_SIMULATE_HPP_
#define IVREG_SIMULATE_HPP_

#include <Eigen/Dense>
#include <cstdint>

#include "ivreg/two_stage.hpp"

namespace ivreg {

struct Truth {
    Eigen::VectorXd beta;   // p
    Eigen::MatrixXd Gamma;  // q x p
    BoolVec beta_support;
    BoolMat gamma_support;
};

// p=300, q=400: beta = (1 x 7, 0 x 285, -0.5 x 8); Gamma row 0 = 0.01
// everywhere, last three rows = -0.005, zero elsewhere.
Truth default_truth();

// Same block pattern at other sizes: round(0.05 p) leading ones and
// round(0.025 p) trailing -0.5 entries in beta; Gamma row 0 = 0.01 and the
// last three rows = -0.005. Requires q >= 4.
Truth scaled_truth(Eigen::Index p, Eigen::Index q);

// How the spread parameters 0.1 / 0.5 of the generator are read.
enum class NoiseScale { Variance, StdDev };

// Z_ij ~ Bernoulli(r_ij) with r_ij ~ Beta(3, 7), row-major, one stream.
Eigen::MatrixXd gen_genotypes(Eigen::Index n, Eigen::Index q, std::uint64_t seed);

struct SimulatedDataset {
    Dataset data;
    Truth truth;
};

// Single RNG stream per dataset: genotypes first (so Z matches
// gen_genotypes(n, q, seed) bit for bit), then X row-major with
// X_ij ~ Normal(0.1 + Z_i . Gamma_col_j, spread 0.1), then
// y_i ~ Normal(1 + X_i . beta, spread 0.5).
SimulatedDataset gen_dataset(Eigen::Index n, const Truth& truth, std::uint64_t seed,
                             NoiseScale scale = NoiseScale::Variance);

}  // namespace ivreg

#endif  // IVREG_SIMULATE_HPP_
