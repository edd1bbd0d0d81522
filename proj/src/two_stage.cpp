#include "ivreg/two_stage.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "ivreg/errors.hpp"
#include "ivreg/lasso.hpp"
#include "ivreg/numerics.hpp"
#include "ivreg/parallel.hpp"

namespace ivreg {

void Dataset::validate() const {
    if (y.size() == 0) throw DataError("dataset: empty response");
    if (X.rows() != y.size() || Z.rows() != y.size())
        throw DataError("dataset: row counts of y, X, Z disagree");
    if (X.cols() == 0) throw DataError("dataset: no covariate columns");
    if (Z.cols() == 0) throw DataError("dataset: no instrument columns");
    if (!y.allFinite() || !X.allFinite() || !Z.allFinite())
        throw DataError("dataset: non-finite entries");
}

void HyperParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!std::isfinite(v) || !(v > 0.0))
            throw DomainError(std::string("hyperparams: ") + name + " must be positive and finite");
    };
    positive(sigma0_sq, "sigma0_sq");
    positive(tau0_sq, "tau0_sq");
    positive(nu0, "nu0");
    positive(omega0, "omega0");
    Probability{p0};
    Probability{pi0};
}

Eigen::VectorXd vec_rowmajor(const Eigen::MatrixXd& M) {
    Eigen::VectorXd v(M.size());
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j) v[k++] = M(i, j);
    return v;
}

Eigen::MatrixXd unvec_rowmajor(const Eigen::VectorXd& v, Eigen::Index rows,
                               Eigen::Index cols) {
    if (v.size() != rows * cols) throw DataError("unvec: size does not match rows*cols");
    Eigen::MatrixXd M(rows, cols);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = v[k++];
    return M;
}

BoolVec vec_rowmajor(const BoolMat& M) {
    BoolVec v(M.size());
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j) v[k++] = M(i, j);
    return v;
}

BoolMat unvec_rowmajor(const BoolVec& v, Eigen::Index rows, Eigen::Index cols) {
    if (v.size() != rows * cols) throw DataError("unvec: size does not match rows*cols");
    BoolMat M(rows, cols);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = v[k++];
    return M;
}

Stage1Result stage1_fit(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z,
                        const HyperParams& hyper, const EpConfig& cfg, int threads) {
    if (X.rows() != Z.rows()) throw DataError("stage1_fit: X and Z row counts disagree");
    hyper.validate();
    const EpConfig column_cfg = cfg.with_model(hyper.tau0_sq, hyper.omega0, hyper.pi0);
    const Eigen::Index p = X.cols();
    const Eigen::Index q = Z.cols();

    Stage1Result res;
    res.gamma_hat.resize(q, p);
    res.gamma_u.resize(q, p);
    res.converged.resize(p);
    res.iters.resize(p);
    res.max_delta.resize(p);

    parallel_for(p, threads, [&](long j) {
        try {
            const MarginalPosterior post = run_ep(Z, X.col(j), column_cfg);
            res.gamma_hat.col(j) = post.xi;
            res.gamma_u.col(j) = post.u;
            res.converged[j] = post.converged;
            res.iters[j] = post.iters;
            res.max_delta[j] = post.max_delta;
        } catch (const NumericalError& e) {
            throw NumericalError("stage 1, covariate column " + std::to_string(j) + ": " +
                                     e.what(),
                                 e.min_pivot, j);
        }
    });
    return res;
}

Eigen::MatrixXd predict_covariates(const Eigen::MatrixXd& Z,
                                   const Eigen::MatrixXd& gamma_hat) {
    if (Z.cols() != gamma_hat.rows())
        throw DataError("predict_covariates: inner dimensions disagree");
    return Z * gamma_hat;
}

Stage2Result stage2_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& Xhat,
                        const HyperParams& hyper, const EpConfig& cfg) {
    if (Xhat.rows() != y.size()) throw DataError("stage2_fit: y and Xhat row counts disagree");
    hyper.validate();
    const MarginalPosterior post =
        run_ep(Xhat, y, cfg.with_model(hyper.sigma0_sq, hyper.nu0, hyper.p0));
    Stage2Result res;
    res.beta_hat = post.xi;
    res.beta_u = post.u;
    res.converged = post.converged;
    res.iters = post.iters;
    res.max_delta = post.max_delta;
    return res;
}

BoolVec sparsify(const Eigen::VectorXd& u, const Probability& level) {
    if (u.size() == 0) return BoolVec(0);
    if (!u.allFinite()) throw DomainError("sparsify: non-finite inclusion log-odds");
    Eigen::VectorXd exclusion(u.size());
    for (Eigen::Index j = 0; j < u.size(); ++j) exclusion[j] = sigmoid(-u[j]);
    const double threshold = quantile_nearest_rank(exclusion, level.value());
    BoolVec support(u.size());
    for (Eigen::Index j = 0; j < u.size(); ++j) support[j] = !(exclusion[j] > threshold);
    return support;
}

namespace {

// Ridge-refit `target` on the support columns of `design`; zeros elsewhere.
Eigen::VectorXd scattered_ridge(const Eigen::MatrixXd& design, const Eigen::VectorXd& target,
                                const BoolVec& support, double lambda_ridge) {
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(design.cols());
    std::vector<Eigen::Index> sel;
    for (Eigen::Index j = 0; j < support.size(); ++j)
        if (support[j]) sel.push_back(j);
    if (sel.empty()) return coef;
    Eigen::MatrixXd sub(design.rows(), static_cast<Eigen::Index>(sel.size()));
    for (std::size_t k = 0; k < sel.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = design.col(sel[k]);
    const Eigen::VectorXd w = ridge_solve(sub, target, lambda_ridge);
    for (std::size_t k = 0; k < sel.size(); ++k) coef[sel[k]] = w[static_cast<Eigen::Index>(k)];
    return coef;
}

}  // namespace

PostEstimates post_estimate(const Dataset& data, const BoolVec& beta_support,
                            const BoolMat& gamma_support, const Eigen::MatrixXd& Xhat,
                            double lambda_ridge, bool refit_on_rebuilt) {
    const Eigen::Index p = data.p();
    const Eigen::Index q = data.q();
    if (beta_support.size() != p) throw DataError("post_estimate: beta support length != p");
    if (gamma_support.rows() != q || gamma_support.cols() != p)
        throw DataError("post_estimate: gamma support shape != q x p");
    if (Xhat.rows() != data.n() || Xhat.cols() != p)
        throw DataError("post_estimate: Xhat shape != n x p");

    PostEstimates post;
    post.gamma_post.resize(q, p);
    for (Eigen::Index j = 0; j < p; ++j)
        post.gamma_post.col(j) =
            scattered_ridge(data.Z, data.X.col(j), gamma_support.col(j), lambda_ridge);

    const Eigen::MatrixXd design = refit_on_rebuilt ? (data.Z * post.gamma_post).eval() : Xhat;
    post.beta_post = scattered_ridge(design, data.y, beta_support, lambda_ridge);
    return post;
}

TwoStageFit fit(const Dataset& data, const HyperParams& hyper, const EpConfig& cfg,
                double lambda_ridge, int threads, bool xhat_from_sparsified) {
    data.validate();
    hyper.validate();
    cfg.validate();

    Dataset centered;
    const Eigen::VectorXd x_means = data.X.colwise().mean();
    const Eigen::VectorXd z_means = data.Z.colwise().mean();
    const double y_mean = data.y.mean();
    centered.y = data.y.array() - y_mean;
    centered.X = data.X.rowwise() - x_means.transpose();
    centered.Z = data.Z.rowwise() - z_means.transpose();

    const Stage1Result s1 = stage1_fit(centered.X, centered.Z, hyper, cfg, threads);
    const BoolMat gamma_support = unvec_rowmajor(
        sparsify(vec_rowmajor(s1.gamma_u), Probability{hyper.pi0}), data.q(), data.p());

    Eigen::MatrixXd gamma_for_xhat = s1.gamma_hat;
    if (xhat_from_sparsified)
        gamma_for_xhat = (gamma_for_xhat.array() * gamma_support.cast<double>()).matrix();
    const Eigen::MatrixXd xhat = predict_covariates(centered.Z, gamma_for_xhat);

    const Stage2Result s2 = stage2_fit(centered.y, xhat, hyper, cfg);
    const BoolVec beta_support = sparsify(s2.beta_u, Probability{hyper.p0});
    const PostEstimates post =
        post_estimate(centered, beta_support, gamma_support, xhat, lambda_ridge);

    TwoStageFit out;
    out.gamma_hat = s1.gamma_hat;
    out.gamma_u = s1.gamma_u;
    out.beta_hat = s2.beta_hat;
    out.beta_u = s2.beta_u;
    out.gamma_support = gamma_support;
    out.beta_support = beta_support;
    out.gamma_post = post.gamma_post;
    out.beta_post = post.beta_post;
    out.stage1_converged = s1.converged;
    out.stage1_iters = s1.iters;
    out.stage1_max_delta = s1.max_delta;
    out.stage2_converged = s2.converged;
    out.stage2_iters = s2.iters;
    out.stage2_max_delta = s2.max_delta;
    out.y_mean = y_mean;
    out.x_means = x_means;
    out.z_means = z_means;
    return out;
}

Eigen::VectorXd predict_response(const Eigen::MatrixXd& Z_new, const TwoStageFit& fit,
                                 bool use_post) {
    const Eigen::MatrixXd& gamma = use_post ? fit.gamma_post : fit.gamma_hat;
    const Eigen::VectorXd& beta = use_post ? fit.beta_post : fit.beta_hat;
    if (Z_new.cols() != gamma.rows())
        throw DataError("predict_response: instrument count disagrees with fit");
    Eigen::MatrixXd centered = Z_new;
    if (fit.z_means.size() == Z_new.cols())
        centered.rowwise() -= fit.z_means.transpose();
    return (centered * (gamma * beta)).array() + fit.y_mean;
}

}  // namespace ivreg
