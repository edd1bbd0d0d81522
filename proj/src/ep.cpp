#include "ivreg/ep.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ivreg {

void EpConfig::validate() const {
    if (!(noise_var > 0.0)) throw ConfigError("EpConfig: noise_var must be positive");
    if (!(slab_var > 0.0)) throw ConfigError("EpConfig: slab_var must be positive");
    if (!(incl_prior > 0.0) || !(incl_prior < 1.0)) {
        throw ConfigError("EpConfig: incl_prior must lie in (0,1)");
    }
    if (!(tol > 0.0)) throw ConfigError("EpConfig: tol must be positive");
    if (max_iters < 1) throw ConfigError("EpConfig: max_iters must be at least 1");
    if (!(damp_start > 0.0) || !(damp_start <= 1.0)) {
        throw ConfigError("EpConfig: damp_start must lie in (0,1]");
    }
    if (!(damp_decay > 0.0) || !(damp_decay < 1.0)) {
        throw ConfigError("EpConfig: damp_decay must lie in (0,1)");
    }
    if (!(damp_floor > 0.0) || !(damp_floor <= damp_start)) {
        throw ConfigError("EpConfig: need 0 < damp_floor <= damp_start");
    }
    if (!(var_clamp > 0.0)) throw ConfigError("EpConfig: var_clamp must be positive");
    if (!(flat_var > 0.0)) throw ConfigError("EpConfig: flat_var must be positive");
}

namespace {

// Non-positive (or runaway) variances stand in for the constrained-KL optimum
// at infinity; both get the configured large constant.
inline double clamp_variance(double v, double clamp) {
    if (!(v > 0.0) || v > clamp) return clamp;
    return v;
}

}  // namespace

SiteState init_sites(Eigen::Index d, const EpConfig& cfg) {
    cfg.validate();
    if (d < 1) throw DomainError("init_sites: d must be at least 1");
    SiteState s;
    s.m1 = Eigen::VectorXd::Zero(d);
    s.v1 = Eigen::VectorXd::Constant(d, cfg.flat_var);
    s.m2 = Eigen::VectorXd::Zero(d);
    s.v2 = Eigen::VectorXd::Constant(d, cfg.slab_var);
    s.p2 = Eigen::VectorXd::Zero(d);
    s.p3 = refine_f3(d, cfg);
    s.iter = 0;
    return s;
}

Eigen::VectorXd refine_f3(Eigen::Index d, const EpConfig& cfg) {
    cfg.validate();
    return Eigen::VectorXd::Constant(d, logit(Probability(cfg.incl_prior)));
}

F2Update refine_f2(const SiteState& sites, const EpConfig& cfg) {
    const Eigen::Index d = sites.m1.size();
    if ((sites.v1.array() <= 0.0).any() || !sites.v1.allFinite()) {
        throw DomainError("refine_f2: v1 must be positive and finite");
    }
    const double slab = cfg.slab_var;

    F2Update out;
    out.m2.resize(d);
    out.v2.resize(d);
    out.p2.resize(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const double m1 = sites.m1[j];
        const double v1 = sites.v1[j];
        const double vs = v1 + slab;

        // Log-odds of the slab against the spike under the cavity.
        const double p2 = 0.5 * std::log(v1) - 0.5 * std::log(vs) +
                          0.5 * m1 * m1 * (1.0 / v1 - 1.0 / vs);
        const double slab_resp = sigmoid(p2 + sites.p3[j]);
        const double spike_resp = sigmoid(-p2 - sites.p3[j]);

        const double a = slab_resp * m1 / vs + spike_resp * m1 / v1;
        const double b = slab_resp * (m1 * m1 - v1 - slab) / (vs * vs) +
                         spike_resp * (m1 * m1 / (v1 * v1) - 1.0 / v1);

        double v2 = 1.0 / (a * a - b) - v1;
        if (std::isnan(v2)) {
            throw NumericalError(
                "refine_f2: non-finite variance update at coefficient " + std::to_string(j),
                std::numeric_limits<double>::quiet_NaN(), static_cast<long>(j));
        }
        v2 = clamp_variance(v2, cfg.var_clamp);
        const double m2 = m1 - a * (v2 + v1);
        if (!std::isfinite(m2) || !std::isfinite(p2)) {
            throw NumericalError(
                "refine_f2: non-finite update at coefficient " + std::to_string(j),
                std::numeric_limits<double>::quiet_NaN(), static_cast<long>(j));
        }
        out.v2[j] = v2;
        out.m2[j] = m2;
        out.p2[j] = p2;
    }
    return out;
}

F1Update refine_f1(const SiteState& sites, const Eigen::MatrixXd& D,
                   const Eigen::VectorXd& target, const EpConfig& cfg) {
    if ((sites.v2.array() <= 0.0).any()) {
        throw DomainError("refine_f1: v2 must be positive");
    }
    const LowRankPosterior post =
        lowrank_posterior(D, sites.m2, sites.v2, cfg.noise_var, target);

    const Eigen::Index d = sites.m2.size();
    F1Update out;
    out.m1.resize(d);
    out.v1.resize(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const double vjj = post.diag_cov[j];
        const double mj = post.mean[j];
        double v1 = 1.0 / (1.0 / vjj - 1.0 / sites.v2[j]);
        v1 = clamp_variance(v1, cfg.var_clamp);
        out.v1[j] = v1;
        out.m1[j] = (mj / vjj - sites.m2[j] / sites.v2[j]) * v1;
        if (!std::isfinite(out.m1[j])) {
            throw NumericalError(
                "refine_f1: non-finite mean update at coefficient " + std::to_string(j),
                std::numeric_limits<double>::quiet_NaN(), static_cast<long>(j));
        }
    }
    return out;
}

SiteState damp_sites(const SiteState& old_state, const SiteState& fresh, double eps) {
    if (!(eps > 0.0) || !(eps <= 1.0)) {
        throw DomainError("damp_sites: eps must lie in (0,1]");
    }
    if (old_state.m1.size() != fresh.m1.size()) {
        throw DomainError("damp_sites: dimension mismatch");
    }
    if (eps == 1.0) {
        SiteState s = fresh;
        s.p3 = old_state.p3;
        return s;
    }

    const double keep = 1.0 - eps;
    SiteState s;
    const double clamp = 1e6;

    auto blend_gaussian = [&](const Eigen::VectorXd& m_old, const Eigen::VectorXd& v_old,
                              const Eigen::VectorXd& m_new, const Eigen::VectorXd& v_new,
                              Eigen::VectorXd& m_out, Eigen::VectorXd& v_out) {
        Eigen::ArrayXd prec = eps / v_new.array() + keep / v_old.array();
        Eigen::ArrayXd prec_mean =
            eps * m_new.array() / v_new.array() + keep * m_old.array() / v_old.array();
        // Cannot go non-positive when both inputs have positive precision.
        prec = (prec > 0.0).select(prec, 1.0 / clamp);
        v_out = prec.inverse().matrix();
        m_out = (prec_mean / prec).matrix();
    };

    blend_gaussian(old_state.m1, old_state.v1, fresh.m1, fresh.v1, s.m1, s.v1);
    blend_gaussian(old_state.m2, old_state.v2, fresh.m2, fresh.v2, s.m2, s.v2);
    s.p2 = eps * fresh.p2 + keep * old_state.p2;
    s.p3 = old_state.p3;
    s.iter = fresh.iter;
    return s;
}

MarginalPosterior marginal_posterior(const SiteState& sites) {
    MarginalPosterior mp;
    const Eigen::ArrayXd prec = 1.0 / sites.v1.array() + 1.0 / sites.v2.array();
    mp.s2 = prec.inverse().matrix();
    mp.xi = ((sites.m1.array() / sites.v1.array() + sites.m2.array() / sites.v2.array()) /
             prec)
                .matrix();
    mp.u = sites.p2 + sites.p3;
    mp.iters = sites.iter;
    return mp;
}

namespace {

double max_abs_change(const SiteState& a, const SiteState& b) {
    double delta = (a.m1 - b.m1).cwiseAbs().maxCoeff();
    delta = std::max(delta, (a.v1 - b.v1).cwiseAbs().maxCoeff());
    delta = std::max(delta, (a.m2 - b.m2).cwiseAbs().maxCoeff());
    delta = std::max(delta, (a.v2 - b.v2).cwiseAbs().maxCoeff());
    delta = std::max(delta, (a.p2 - b.p2).cwiseAbs().maxCoeff());
    return delta;
}

}  // namespace

MarginalPosterior run_ep(const Eigen::MatrixXd& D, const Eigen::VectorXd& target,
                         const EpConfig& cfg) {
    cfg.validate();
    if (D.rows() < 1 || D.cols() < 1) {
        throw DomainError("run_ep: design matrix must be non-empty");
    }
    if (target.size() != D.rows()) {
        throw DomainError("run_ep: target length does not match design rows");
    }
    if (!D.allFinite() || !target.allFinite()) {
        throw DomainError("run_ep: inputs must be finite");
    }

    SiteState sites = init_sites(D.cols(), cfg);
    bool converged = false;
    double max_delta = 0.0;

    for (int t = 0; t < cfg.max_iters; ++t) {
        // Both refinements read the same step-t snapshot.
        const F2Update f2 = refine_f2(sites, cfg);
        const F1Update f1 = refine_f1(sites, D, target, cfg);

        SiteState fresh;
        fresh.m1 = f1.m1;
        fresh.v1 = f1.v1;
        fresh.m2 = f2.m2;
        fresh.v2 = f2.v2;
        fresh.p2 = f2.p2;
        fresh.p3 = sites.p3;
        fresh.iter = t + 1;

        const double eps =
            std::max(cfg.damp_floor, cfg.damp_start * std::pow(cfg.damp_decay, t));
        SiteState damped = damp_sites(sites, fresh, eps);
        damped.iter = t + 1;

        max_delta = max_abs_change(damped, sites);
        sites = std::move(damped);
        if (max_delta < cfg.tol) {
            converged = true;
            break;
        }
    }

    MarginalPosterior mp = marginal_posterior(sites);
    mp.converged = converged;
    mp.iters = sites.iter;
    mp.max_delta = max_delta;
    if (!mp.xi.allFinite() || !mp.s2.allFinite() || !mp.u.allFinite()) {
        throw NumericalError("run_ep: non-finite posterior marginals");
    }
    return mp;
}

}  // namespace ivreg
