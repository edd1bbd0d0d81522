#include "ivreg/simulate.hpp"

#include <cmath>

#include "ivreg/errors.hpp"
#include "ivreg/rng.hpp"

namespace ivreg {

namespace {

Truth block_truth(Eigen::Index p, Eigen::Index q, Eigen::Index n_pos, Eigen::Index n_neg) {
    if (q < 4) throw DomainError("truth: need at least 4 instrument rows for the block pattern");
    if (n_pos < 1 || n_neg < 1 || n_pos + n_neg > p)
        throw DomainError("truth: covariate count too small for the block pattern");
    Truth t;
    t.beta = Eigen::VectorXd::Zero(p);
    t.beta.head(n_pos).setConstant(1.0);
    t.beta.tail(n_neg).setConstant(-0.5);
    t.Gamma = Eigen::MatrixXd::Zero(q, p);
    t.Gamma.row(0).setConstant(0.01);
    t.Gamma.bottomRows(3).setConstant(-0.005);
    t.beta_support = t.beta.array() != 0.0;
    t.gamma_support = t.Gamma.array() != 0.0;
    return t;
}

Eigen::MatrixXd genotypes_from_stream(Rng& rng, Eigen::Index n, Eigen::Index q) {
    Eigen::MatrixXd Z(n, q);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < q; ++j) {
            const double r = rng.beta(3.0, 7.0);
            Z(i, j) = rng.bernoulli(r) ? 1.0 : 0.0;
        }
    return Z;
}

}  // namespace

Truth default_truth() { return block_truth(300, 400, 7, 8); }

Truth scaled_truth(Eigen::Index p, Eigen::Index q) {
    const auto n_pos = static_cast<Eigen::Index>(std::llround(0.05 * static_cast<double>(p)));
    const auto n_neg = static_cast<Eigen::Index>(std::llround(0.025 * static_cast<double>(p)));
    return block_truth(p, q, n_pos, n_neg);
}

Eigen::MatrixXd gen_genotypes(Eigen::Index n, Eigen::Index q, std::uint64_t seed) {
    if (n < 1 || q < 1) throw DomainError("gen_genotypes: n and q must be at least 1");
    Rng rng(seed);
    return genotypes_from_stream(rng, n, q);
}

SimulatedDataset gen_dataset(Eigen::Index n, const Truth& truth, std::uint64_t seed,
                             NoiseScale scale) {
    if (n < 1) throw DomainError("gen_dataset: n must be at least 1");
    const Eigen::Index q = truth.Gamma.rows();
    const Eigen::Index p = truth.Gamma.cols();
    if (p < 1 || q < 1) throw DomainError("gen_dataset: empty truth");
    if (truth.beta.size() != p) throw DomainError("gen_dataset: beta length != Gamma columns");

    const double x_spread = scale == NoiseScale::Variance ? std::sqrt(0.1) : 0.1;
    const double y_spread = scale == NoiseScale::Variance ? std::sqrt(0.5) : 0.5;

    Rng rng(seed);
    SimulatedDataset out;
    out.truth = truth;
    out.data.Z = genotypes_from_stream(rng, n, q);
    out.data.X.resize(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::RowVectorXd mean = out.data.Z.row(i) * truth.Gamma;
        for (Eigen::Index j = 0; j < p; ++j)
            out.data.X(i, j) = 0.1 + mean[j] + x_spread * rng.normal();
    }
    out.data.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
        out.data.y[i] = 1.0 + out.data.X.row(i).dot(truth.beta) + y_spread * rng.normal();
    return out;
}

}  // namespace ivreg
