#include "ivreg/commands.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>

#include "ivreg/csv.hpp"
#include "ivreg/errors.hpp"
#include "ivreg/lasso.hpp"
#include "ivreg/parallel.hpp"
#include "ivreg/rng.hpp"

namespace ivreg {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int guarded(const std::function<void()>& body) {
    try {
        body();
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const DomainError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
}

void ensure_out_dir(const std::string& dir) {
    if (dir.empty()) throw ConfigError("output directory not set");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) { return dir + "/" + name; }

NoiseScale parse_noise_scale(const std::string& s) {
    if (s == "variance") return NoiseScale::Variance;
    if (s == "sd" || s == "stddev") return NoiseScale::StdDev;
    throw ConfigError("unknown noise scale '" + s + "' (expected variance or sd)");
}

Truth preset_truth(const std::string& preset, Eigen::Index p, Eigen::Index q) {
    Eigen::Index def_p;
    Eigen::Index def_q;
    if (preset == "paper") {
        def_p = 300;
        def_q = 400;
    } else if (preset == "scaled") {
        def_p = 100;
        def_q = 120;
    } else {
        throw ConfigError("unknown preset '" + preset + "' (expected paper or scaled)");
    }
    const Eigen::Index use_p = p > 0 ? p : def_p;
    const Eigen::Index use_q = q > 0 ? q : def_q;
    if (preset == "paper" && use_p == 300 && use_q == 400) return default_truth();
    return scaled_truth(use_p, use_q);
}

Dataset load_dataset(const std::string& z_path, const std::string& x_path,
                     const std::string& y_path) {
    if (z_path.empty() || x_path.empty() || y_path.empty())
        throw ConfigError("--z, --x and --y are all required");
    Dataset data;
    data.Z = load_matrix_csv(z_path);
    validate_genotypes(data.Z, z_path);
    data.X = load_matrix_csv(x_path);
    const Eigen::MatrixXd y_raw = load_matrix_csv(y_path);
    if (y_raw.cols() == 1)
        data.y = y_raw.col(0);
    else if (y_raw.rows() == 1)
        data.y = y_raw.row(0).transpose();
    else
        throw DataError(y_path + ": response must be a single column or a single row");
    data.validate();
    return data;
}

int resolve_threads(int threads) { return threads > 0 ? threads : default_threads(); }

EpConfig make_ep_config(double tol, int max_iters) {
    EpConfig cfg;
    cfg.tol = tol;
    cfg.max_iters = max_iters;
    cfg.validate();
    return cfg;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n == 0) return std::numeric_limits<double>::quiet_NaN();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double safe_r2(const Eigen::VectorXd& y, const Eigen::VectorXd& pred) {
    try {
        return r_squared(y, pred);
    } catch (const DomainError&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

}  // namespace

int run_simulate(const SimulateArgs& args) {
    return guarded([&] {
        if (args.n < 1) throw ConfigError("--n must be at least 1");
        const Truth truth = preset_truth(args.preset, args.p, args.q);
        const NoiseScale scale = parse_noise_scale(args.noise_scale);
        ensure_out_dir(args.out_dir);

        const SimulatedDataset sim = gen_dataset(args.n, truth, args.seed, scale);
        save_matrix_csv(join(args.out_dir, "Z.csv"), sim.data.Z);
        save_matrix_csv(join(args.out_dir, "X.csv"), sim.data.X);
        save_matrix_csv(join(args.out_dir, "y.csv"), sim.data.y);
        save_truth_csv(join(args.out_dir, "truth.csv"), sim.truth);

        KvPairs meta{{"command", "simulate"},
                     {"preset", args.preset},
                     {"n", std::to_string(sim.data.n())},
                     {"p", std::to_string(sim.data.p())},
                     {"q", std::to_string(sim.data.q())},
                     {"seed", std::to_string(args.seed)},
                     {"generator", kRngName},
                     {"noise_scale", args.noise_scale},
                     {"beta_nonzero", std::to_string((sim.truth.beta.array() != 0.0).count())},
                     {"gamma_nonzero", std::to_string((sim.truth.Gamma.array() != 0.0).count())}};
        save_kv_csv(join(args.out_dir, "meta.csv"), meta);
    });
}

int run_fit(const FitArgs& args) {
    return guarded([&] {
        const Dataset data = load_dataset(args.z_path, args.x_path, args.y_path);
        ensure_out_dir(args.out_dir);
        const EpConfig cfg = make_ep_config(args.tol, args.max_iters);
        const int threads = resolve_threads(args.threads);

        const bool all_explicit = !std::isnan(args.sigma0_sq) && !std::isnan(args.tau0_sq) &&
                                  !std::isnan(args.nu0) && !std::isnan(args.omega0) &&
                                  !std::isnan(args.p0) && !std::isnan(args.pi0);
        HyperParams hyper{};
        std::string hyper_source;
        InitReport report;
        bool have_report = false;
        if (all_explicit) {
            hyper = {args.sigma0_sq, args.tau0_sq, args.nu0,
                     args.omega0,    args.p0,      args.pi0};
            hyper_source = "explicit";
        } else {
            if (args.strategy == 1) {
                report = strategy1(data, {}, {}, SelectCriterion::Bic, threads);
                hyper_source = "strategy1";
            } else if (args.strategy == 2) {
                const auto p0g = args.grid_p0.empty() ? default_hyper_grid() : args.grid_p0;
                const auto pi0g = args.grid_pi0.empty() ? default_hyper_grid() : args.grid_pi0;
                report = strategy2_grid(data, p0g, pi0g, args.folds, cfg, args.lambda_ridge,
                                        args.seed, threads);
                hyper_source = "strategy2";
            } else {
                throw ConfigError("--strategy must be 1 or 2");
            }
            have_report = true;
            hyper = report.hyper;
            if (!std::isnan(args.sigma0_sq)) hyper.sigma0_sq = args.sigma0_sq;
            if (!std::isnan(args.tau0_sq)) hyper.tau0_sq = args.tau0_sq;
            if (!std::isnan(args.nu0)) hyper.nu0 = args.nu0;
            if (!std::isnan(args.omega0)) hyper.omega0 = args.omega0;
            if (!std::isnan(args.p0)) hyper.p0 = args.p0;
            if (!std::isnan(args.pi0)) hyper.pi0 = args.pi0;
        }
        hyper.validate();

        const TwoStageFit tfit =
            fit(data, hyper, cfg, args.lambda_ridge, threads, args.xhat_sparsified);

        const Eigen::Index p = data.p();
        const Eigen::Index q = data.q();
        Eigen::MatrixXd beta_table(p, 5);
        for (Eigen::Index j = 0; j < p; ++j) {
            beta_table(j, 0) = static_cast<double>(j);
            beta_table(j, 1) = tfit.beta_hat[j];
            beta_table(j, 2) = tfit.beta_u[j];
            beta_table(j, 3) = tfit.beta_support[j] ? 1.0 : 0.0;
            beta_table(j, 4) = tfit.beta_post[j];
        }
        save_matrix_csv(join(args.out_dir, "beta.csv"), beta_table,
                        {"index", "xi", "u", "support", "post"});

        const bool dense_gamma = q * p <= 100000;
        std::vector<std::array<double, 6>> gamma_rows;
        for (Eigen::Index i = 0; i < q; ++i)
            for (Eigen::Index j = 0; j < p; ++j) {
                if (!dense_gamma && !tfit.gamma_support(i, j) && tfit.gamma_post(i, j) == 0.0)
                    continue;
                gamma_rows.push_back({static_cast<double>(i), static_cast<double>(j),
                                      tfit.gamma_hat(i, j), tfit.gamma_u(i, j),
                                      tfit.gamma_support(i, j) ? 1.0 : 0.0,
                                      tfit.gamma_post(i, j)});
            }
        Eigen::MatrixXd gamma_table(static_cast<Eigen::Index>(gamma_rows.size()), 6);
        for (std::size_t r = 0; r < gamma_rows.size(); ++r)
            for (int c = 0; c < 6; ++c)
                gamma_table(static_cast<Eigen::Index>(r), c) = gamma_rows[r][static_cast<std::size_t>(c)];
        save_matrix_csv(join(args.out_dir, "gamma.csv"), gamma_table,
                        {"row", "col", "xi", "u", "support", "post"});

        const Eigen::VectorXd pred_dense = predict_response(data.Z, tfit, false);
        const Eigen::VectorXd pred_post = predict_response(data.Z, tfit, true);
        const Eigen::Index beta_selected = tfit.beta_support.count();
        const Eigen::Index gamma_selected = tfit.gamma_support.count();

        auto safe_bic = [&](const Eigen::VectorXd& pred, Eigen::Index df) {
            try {
                return bic(data.y, pred, df);
            } catch (const DomainError&) {
                return std::numeric_limits<double>::quiet_NaN();
            }
        };

        KvPairs diag{{"command", "fit"},
                     {"n", std::to_string(data.n())},
                     {"p", std::to_string(p)},
                     {"q", std::to_string(q)},
                     {"hyper_source", hyper_source},
                     {"sigma0_sq", fmt17(hyper.sigma0_sq)},
                     {"tau0_sq", fmt17(hyper.tau0_sq)},
                     {"nu0", fmt17(hyper.nu0)},
                     {"omega0", fmt17(hyper.omega0)},
                     {"p0", fmt17(hyper.p0)},
                     {"pi0", fmt17(hyper.pi0)},
                     {"lambda_ridge", fmt17(args.lambda_ridge)},
                     {"tol", fmt17(args.tol)},
                     {"max_iters", std::to_string(args.max_iters)},
                     {"xhat_sparsified", args.xhat_sparsified ? "1" : "0"},
                     {"beta_selected", std::to_string(beta_selected)},
                     {"gamma_selected", std::to_string(gamma_selected)},
                     {"stage1_converged", std::to_string(tfit.stage1_converged.count())},
                     {"stage1_iters_max", std::to_string(tfit.stage1_iters.size()
                                                             ? tfit.stage1_iters.maxCoeff()
                                                             : 0)},
                     {"stage1_max_delta", fmt17(tfit.stage1_max_delta.size()
                                                    ? tfit.stage1_max_delta.maxCoeff()
                                                    : 0.0)},
                     {"stage2_converged", tfit.stage2_converged ? "1" : "0"},
                     {"stage2_iters", std::to_string(tfit.stage2_iters)},
                     {"stage2_max_delta", fmt17(tfit.stage2_max_delta)},
                     {"r2_dense", fmt17(safe_r2(data.y, pred_dense))},
                     {"r2_post", fmt17(safe_r2(data.y, pred_post))},
                     {"bic_dense", fmt17(safe_bic(pred_dense, p))},
                     {"bic_post", fmt17(safe_bic(pred_post, beta_selected))}};
        if (have_report) {
            diag.emplace_back("df1", std::to_string(report.df1));
            diag.emplace_back("df2", std::to_string(report.df2));
            diag.emplace_back("df1_degenerate", report.df1_degenerate ? "1" : "0");
            diag.emplace_back("df2_degenerate", report.df2_degenerate ? "1" : "0");
        }
        if (have_report && report.source == InitSource::StrategyII) {
            diag.emplace_back("cv_folds", std::to_string(report.folds));
            diag.emplace_back("cv_seed", std::to_string(report.cv_seed));
            save_cv_surface(join(args.out_dir, "cv_surface.csv"), report.p0_grid,
                            report.pi0_grid, report.cv_surface);
        }
        save_kv_csv(join(args.out_dir, "diagnostics.csv"), diag);
    });
}

int run_cv_grid(const CvGridArgs& args) {
    return guarded([&] {
        const Dataset data = load_dataset(args.z_path, args.x_path, args.y_path);
        ensure_out_dir(args.out_dir);
        const EpConfig cfg = make_ep_config(args.tol, args.max_iters);
        const int threads = resolve_threads(args.threads);
        const auto p0g = args.grid_p0.empty() ? default_hyper_grid() : args.grid_p0;
        const auto pi0g = args.grid_pi0.empty() ? default_hyper_grid() : args.grid_pi0;

        const InitReport report = strategy2_grid(data, p0g, pi0g, args.folds, cfg,
                                                 args.lambda_ridge, args.seed, threads);
        save_cv_surface(join(args.out_dir, "cv_surface.csv"), report.p0_grid,
                        report.pi0_grid, report.cv_surface);

        KvPairs choice{{"command", "cv-grid"},
                       {"p0", fmt17(report.hyper.p0)},
                       {"pi0", fmt17(report.hyper.pi0)},
                       {"cv_min", fmt17(report.cv_surface.minCoeff())},
                       {"sigma0_sq", fmt17(report.hyper.sigma0_sq)},
                       {"tau0_sq", fmt17(report.hyper.tau0_sq)},
                       {"nu0", fmt17(report.hyper.nu0)},
                       {"omega0", fmt17(report.hyper.omega0)},
                       {"df1", std::to_string(report.df1)},
                       {"df2", std::to_string(report.df2)},
                       {"folds", std::to_string(report.folds)},
                       {"cv_seed", std::to_string(report.cv_seed)},
                       {"lambda_ridge", fmt17(args.lambda_ridge)}};
        save_kv_csv(join(args.out_dir, "cv_choice.csv"), choice);
    });
}

std::vector<ReplicateRow> compare_replicates(const CompareArgs& args) {
    if (args.reps < 1) throw ConfigError("--reps must be at least 1");
    const Truth truth = preset_truth(args.preset, args.p, args.q);
    const NoiseScale scale = parse_noise_scale(args.noise_scale);
    const EpConfig cfg = make_ep_config(args.tol, args.max_iters);
    const int threads = resolve_threads(args.threads);
    const BoolVec truth_gamma_vec = vec_rowmajor(truth.gamma_support);

    using clock = std::chrono::steady_clock;
    auto seconds_between = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double>(b - a).count();
    };

    std::vector<ReplicateRow> rows;
    for (int r = 0; r < args.reps; ++r) {
        const std::uint64_t rep_seed = args.seed + static_cast<std::uint64_t>(r);
        const std::uint64_t cv_seed = rep_seed + kCvSeedOffset;
        const SimulatedDataset sim = gen_dataset(args.n, truth, rep_seed, scale);
        const Dataset& data = sim.data;

        const auto t0 = clock::now();
        const TwoStageFit lasso_fit =
            two_stage_lasso_fit(data, {}, {}, SelectCriterion::Bic, threads);
        const auto t1 = clock::now();
        const double wall_lasso = seconds_between(t0, t1);

        const InitReport init = strategy1_from_fit(data, lasso_fit);
        const TwoStageFit ep_fit = fit(data, init.hyper, cfg, args.lambda_ridge, threads);
        const auto t2 = clock::now();
        const double wall_ep = wall_lasso + seconds_between(t1, t2);

        const CvPair cv_lasso = kfold_cv_both(
            data, args.folds,
            [&](const Dataset& train) {
                return two_stage_lasso_fit(train, {}, {}, SelectCriterion::Bic, threads);
            },
            cv_seed);
        const CvPair cv_ep = kfold_cv_both(
            data, args.folds,
            [&](const Dataset& train) {
                const InitReport fold_init = strategy1(train, {}, {}, SelectCriterion::Bic, threads);
                return fit(train, fold_init.hyper, cfg, args.lambda_ridge, threads);
            },
            cv_seed);

        auto make_row = [&](const std::string& method, const TwoStageFit& f, const CvPair& cv,
                            double wall) {
            ReplicateRow row;
            row.rep = r;
            row.seed = rep_seed;
            row.method = method;
            const SelectionRates rb = selection_rates(truth.beta_support, f.beta_support);
            const SelectionRates rg =
                selection_rates(truth_gamma_vec, vec_rowmajor(f.gamma_support));
            row.fnr_beta = rb.fnr;
            row.fpr_beta = rb.fpr;
            row.fnr_gamma = rg.fnr;
            row.fpr_gamma = rg.fpr;
            row.cv_dense = cv.dense;
            row.cv_post = cv.post;
            row.r2_dense = safe_r2(data.y, predict_response(data.Z, f, false));
            row.r2_post = safe_r2(data.y, predict_response(data.Z, f, true));
            row.wall_seconds = wall;
            return row;
        };
        rows.push_back(make_row("2S.EP", ep_fit, cv_ep, wall_ep));
        rows.push_back(make_row("2S.LASSO", lasso_fit, cv_lasso, wall_lasso));
    }
    return rows;
}

int run_compare(const CompareArgs& args) {
    return guarded([&] {
        ensure_out_dir(args.out_dir);
        const std::vector<ReplicateRow> rows = compare_replicates(args);

        {
            std::ofstream out(join(args.out_dir, "replicates.csv"), std::ios::binary);
            if (!out) throw ConfigError("cannot open for writing: " +
                                        join(args.out_dir, "replicates.csv"));
            out << "rep,seed,method,fnr_beta,fpr_beta,fnr_gamma,fpr_gamma,"
                   "cv_dense,cv_post,r2_dense,r2_post,wall_seconds\n";
            for (const ReplicateRow& row : rows) {
                out << row.rep << ',' << row.seed << ',' << row.method << ','
                    << fmt17(row.fnr_beta) << ',' << fmt17(row.fpr_beta) << ','
                    << fmt17(row.fnr_gamma) << ',' << fmt17(row.fpr_gamma) << ','
                    << fmt17(row.cv_dense) << ',' << fmt17(row.cv_post) << ','
                    << fmt17(row.r2_dense) << ',' << fmt17(row.r2_post) << ','
                    << fmt17(row.wall_seconds) << '\n';
            }
        }

        // Median summary of the deterministic quantities only: wall time
        // varies run to run, so it stays out of this table and identical
        // seeds reproduce it byte for byte.
        {
            std::ofstream out(join(args.out_dir, "summary.csv"), std::ios::binary);
            if (!out) throw ConfigError("cannot open for writing: " +
                                        join(args.out_dir, "summary.csv"));
            out << "method,metric,median\n";
            const std::vector<std::pair<std::string, double ReplicateRow::*>> metrics{
                {"fnr_beta", &ReplicateRow::fnr_beta},   {"fpr_beta", &ReplicateRow::fpr_beta},
                {"fnr_gamma", &ReplicateRow::fnr_gamma}, {"fpr_gamma", &ReplicateRow::fpr_gamma},
                {"cv_dense", &ReplicateRow::cv_dense},   {"cv_post", &ReplicateRow::cv_post},
                {"r2_dense", &ReplicateRow::r2_dense},   {"r2_post", &ReplicateRow::r2_post}};
            for (const std::string method : {"2S.EP", "2S.LASSO"}) {
                for (const auto& [name, member] : metrics) {
                    std::vector<double> values;
                    for (const ReplicateRow& row : rows)
                        if (row.method == method) values.push_back(row.*member);
                    out << method << ',' << name << ',' << fmt17(median(std::move(values)))
                        << '\n';
                }
            }
        }

        const Truth truth = preset_truth(args.preset, args.p, args.q);
        KvPairs meta{{"command", "compare"},
                     {"preset", args.preset},
                     {"n", std::to_string(args.n)},
                     {"p", std::to_string(truth.Gamma.cols())},
                     {"q", std::to_string(truth.Gamma.rows())},
                     {"reps", std::to_string(args.reps)},
                     {"seed", std::to_string(args.seed)},
                     {"folds", std::to_string(args.folds)},
                     {"tol", fmt17(args.tol)},
                     {"max_iters", std::to_string(args.max_iters)},
                     {"lambda_ridge", fmt17(args.lambda_ridge)},
                     {"noise_scale", args.noise_scale},
                     {"generator", kRngName},
                     {"cv_seed_offset", std::to_string(kCvSeedOffset)},
                     {"lasso_criterion", "bic"},
                     {"ep_init", "strategy1"}};
        save_kv_csv(join(args.out_dir, "meta.csv"), meta);
    });
}

}  // namespace ivreg
