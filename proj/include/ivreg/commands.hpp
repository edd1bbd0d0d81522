#ifndef IVREG_COMMANDS_HPP_
#define IVREG_COMMANDS_HPP_

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ivreg/hyperinit.hpp"
#include "ivreg/metrics.hpp"
#include "ivreg/simulate.hpp"
#include "ivreg/two_stage.hpp"

namespace ivreg {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;     // usage / configuration
inline constexpr int kExitData = 2;       // malformed or inconsistent data
inline constexpr int kExitNumerical = 3;  // numerical failure

// Offset added to a replicate's dataset seed to derive its CV fold seed.
inline constexpr std::uint64_t kCvSeedOffset = 1000003;

struct SimulateArgs {
    std::string out_dir;
    std::string preset = "paper";  // paper (p=300,q=400) | scaled (p=100,q=120)
    Eigen::Index n = 50;
    Eigen::Index p = 0;  // 0: preset value
    Eigen::Index q = 0;
    std::uint64_t seed = 1;
    std::string noise_scale = "variance";  // variance | sd
};

struct FitArgs {
    std::string z_path;
    std::string x_path;
    std::string y_path;
    std::string out_dir;
    double tol = 1e-4;
    int max_iters = 100;
    int threads = 0;  // 0: available parallelism
    std::uint64_t seed = 1;
    int strategy = 1;  // hyperparameter initialization when flags leave gaps
    std::vector<double> grid_p0;   // strategy 2; empty: 0.1..0.9 step 0.2
    std::vector<double> grid_pi0;
    int folds = 3;
    double lambda_ridge = 1e-2;
    bool xhat_sparsified = false;

    // Explicit hyperparameters override the strategy values; NaN = unset.
    double sigma0_sq = std::numeric_limits<double>::quiet_NaN();
    double tau0_sq = std::numeric_limits<double>::quiet_NaN();
    double nu0 = std::numeric_limits<double>::quiet_NaN();
    double omega0 = std::numeric_limits<double>::quiet_NaN();
    double p0 = std::numeric_limits<double>::quiet_NaN();
    double pi0 = std::numeric_limits<double>::quiet_NaN();
};

struct CvGridArgs {
    std::string z_path;
    std::string x_path;
    std::string y_path;
    std::string out_dir;
    std::vector<double> grid_p0;  // empty: 0.1..0.9 step 0.2
    std::vector<double> grid_pi0;
    int folds = 3;
    std::uint64_t seed = 1;
    double tol = 1e-4;
    int max_iters = 100;
    double lambda_ridge = 1e-2;
    int threads = 0;
};

struct CompareArgs {
    std::string out_dir;
    std::string preset = "scaled";
    int reps = 20;
    std::uint64_t seed = 1;
    Eigen::Index n = 50;
    Eigen::Index p = 0;  // 0: preset value
    Eigen::Index q = 0;
    int folds = 3;
    double tol = 1e-4;
    int max_iters = 100;
    double lambda_ridge = 1e-2;
    int threads = 0;
    std::string noise_scale = "variance";
};

// One method's results on one replicate of the comparison protocol.
struct ReplicateRow {
    int rep = 0;
    std::uint64_t seed = 0;
    std::string method;  // 2S.EP | 2S.LASSO
    double fnr_beta = 0.0;
    double fpr_beta = 0.0;
    double fnr_gamma = 0.0;
    double fpr_gamma = 0.0;
    double cv_dense = 0.0;
    double cv_post = 0.0;
    double r2_dense = 0.0;
    double r2_post = 0.0;
    double wall_seconds = 0.0;  // 2S.EP includes its LASSO pilot
};

// The comparison protocol itself, exposed for the acceptance suite: `reps`
// seeded datasets, both methods fit on each, selection rates against the
// generating truth, k-fold CV, and training R^2. Two rows per replicate.
std::vector<ReplicateRow> compare_replicates(const CompareArgs& args);

// Subcommand drivers: return an exit code, writing files under out_dir and
// one diagnostic line to stderr on failure.
int run_simulate(const SimulateArgs& args);
int run_fit(const FitArgs& args);
int run_cv_grid(const CvGridArgs& args);
int run_compare(const CompareArgs& args);

}  // namespace ivreg

#endif  // IVREG_COMMANDS_HPP_
