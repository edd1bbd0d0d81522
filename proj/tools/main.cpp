#include <CLI11.hpp>

#include "ivreg/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Two-stage EP estimator for sparse instrumental-variable regression"};
    app.require_subcommand(1);

    ivreg::SimulateArgs sim_args;
    CLI::App* sim = app.add_subcommand("simulate", "Generate a synthetic benchmark dataset");
    sim->add_option("--out", sim_args.out_dir, "Output directory")->required();
    sim->add_option("--preset", sim_args.preset, "paper (p=300,q=400) or scaled (p=100,q=120)")
        ->check(CLI::IsMember({"paper", "scaled"}))
        ->capture_default_str();
    sim->add_option("--n", sim_args.n, "Sample size")->capture_default_str();
    sim->add_option("--p", sim_args.p, "Covariate count (0: preset value)")
        ->capture_default_str();
    sim->add_option("--q", sim_args.q, "Instrument count (0: preset value)")
        ->capture_default_str();
    sim->add_option("--seed", sim_args.seed, "RNG seed")->capture_default_str();
    sim->add_option("--noise-scale", sim_args.noise_scale,
                    "Read the 0.1/0.5 noise spreads as variance or sd")
        ->check(CLI::IsMember({"variance", "sd"}))
        ->capture_default_str();

    ivreg::FitArgs fit_args;
    CLI::App* fit = app.add_subcommand("fit", "Fit the two-stage EP model to CSV data");
    fit->add_option("--z", fit_args.z_path, "Instrument (genotype) CSV, coded 0/1/2")
        ->required();
    fit->add_option("--x", fit_args.x_path, "Covariate CSV")->required();
    fit->add_option("--y", fit_args.y_path, "Response CSV (one column)")->required();
    fit->add_option("--out", fit_args.out_dir, "Output directory")->required();
    fit->add_option("--tol", fit_args.tol, "EP convergence tolerance")->capture_default_str();
    fit->add_option("--max-iters", fit_args.max_iters, "EP iteration cap")
        ->capture_default_str();
    fit->add_option("--threads", fit_args.threads, "Worker threads (0: all cores)")
        ->capture_default_str();
    fit->add_option("--seed", fit_args.seed, "Seed for strategy-2 CV folds")
        ->capture_default_str();
    fit->add_option("--strategy", fit_args.strategy,
                    "Hyperparameter initialization: 1 (LASSO plug-in) or 2 (CV grid)")
        ->check(CLI::Range(1, 2))
        ->capture_default_str();
    fit->add_option("--grid-p0", fit_args.grid_p0, "Strategy-2 p0 grid")->delimiter(',');
    fit->add_option("--grid-pi0", fit_args.grid_pi0, "Strategy-2 pi0 grid")->delimiter(',');
    fit->add_option("--folds", fit_args.folds, "Strategy-2 CV folds")->capture_default_str();
    fit->add_option("--lambda-ridge", fit_args.lambda_ridge, "Post-estimation ridge penalty")
        ->capture_default_str();
    fit->add_flag("--xhat-sparsified", fit_args.xhat_sparsified,
                  "Build Xhat from the sparsified Gamma instead of the dense means");
    fit->add_option("--sigma0-sq", fit_args.sigma0_sq, "Stage-II noise variance");
    fit->add_option("--tau0-sq", fit_args.tau0_sq, "Stage-I noise variance");
    fit->add_option("--nu0", fit_args.nu0, "Stage-II slab variance");
    fit->add_option("--omega0", fit_args.omega0, "Stage-I slab variance");
    fit->add_option("--p0", fit_args.p0, "Stage-II inclusion prior");
    fit->add_option("--pi0", fit_args.pi0, "Stage-I inclusion prior");

    ivreg::CvGridArgs cv_args;
    CLI::App* cv = app.add_subcommand("cv-grid", "Cross-validated (p0, pi0) grid search");
    cv->add_option("--z", cv_args.z_path, "Instrument (genotype) CSV, coded 0/1/2")
        ->required();
    cv->add_option("--x", cv_args.x_path, "Covariate CSV")->required();
    cv->add_option("--y", cv_args.y_path, "Response CSV (one column)")->required();
    cv->add_option("--out", cv_args.out_dir, "Output directory")->required();
    cv->add_option("--grid-p0", cv_args.grid_p0, "p0 grid (default 0.1..0.9 step 0.2)")
        ->delimiter(',');
    cv->add_option("--grid-pi0", cv_args.grid_pi0, "pi0 grid (default 0.1..0.9 step 0.2)")
        ->delimiter(',');
    cv->add_option("--folds", cv_args.folds, "CV folds")->capture_default_str();
    cv->add_option("--seed", cv_args.seed, "Fold-shuffle seed")->capture_default_str();
    cv->add_option("--tol", cv_args.tol, "EP convergence tolerance")->capture_default_str();
    cv->add_option("--max-iters", cv_args.max_iters, "EP iteration cap")
        ->capture_default_str();
    cv->add_option("--lambda-ridge", cv_args.lambda_ridge, "Post-estimation ridge penalty")
        ->capture_default_str();
    cv->add_option("--threads", cv_args.threads, "Worker threads (0: all cores)")
        ->capture_default_str();

    ivreg::CompareArgs cmp_args;
    CLI::App* cmp = app.add_subcommand(
        "compare", "Replicated 2S.EP vs 2S.LASSO benchmark on simulated data");
    cmp->add_option("--out", cmp_args.out_dir, "Output directory")->required();
    cmp->add_option("--preset", cmp_args.preset, "paper or scaled")
        ->check(CLI::IsMember({"paper", "scaled"}))
        ->capture_default_str();
    cmp->add_option("--reps", cmp_args.reps, "Replicate count")->capture_default_str();
    cmp->add_option("--seed", cmp_args.seed, "Base seed; replicate r uses seed+r")
        ->capture_default_str();
    cmp->add_option("--n", cmp_args.n, "Sample size")->capture_default_str();
    cmp->add_option("--p", cmp_args.p, "Covariate count (0: preset value)")
        ->capture_default_str();
    cmp->add_option("--q", cmp_args.q, "Instrument count (0: preset value)")
        ->capture_default_str();
    cmp->add_option("--folds", cmp_args.folds, "CV folds per replicate")
        ->capture_default_str();
    cmp->add_option("--tol", cmp_args.tol, "EP convergence tolerance")->capture_default_str();
    cmp->add_option("--max-iters", cmp_args.max_iters, "EP iteration cap")
        ->capture_default_str();
    cmp->add_option("--lambda-ridge", cmp_args.lambda_ridge, "Post-estimation ridge penalty")
        ->capture_default_str();
    cmp->add_option("--threads", cmp_args.threads, "Worker threads (0: all cores)")
        ->capture_default_str();
    cmp->add_option("--noise-scale", cmp_args.noise_scale, "variance or sd")
        ->check(CLI::IsMember({"variance", "sd"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ivreg::kExitOk : ivreg::kExitConfig;
    }

    if (sim->parsed()) return ivreg::run_simulate(sim_args);
    if (fit->parsed()) return ivreg::run_fit(fit_args);
    if (cv->parsed()) return ivreg::run_cv_grid(cv_args);
    if (cmp->parsed()) return ivreg::run_compare(cmp_args);
    return ivreg::kExitConfig;
}
