#ifndef IVREG_CSV_HPP_
#define IVREG_CSV_HPP_

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "ivreg/simulate.hpp"

namespace ivreg {

// Comma-separated, LF line ends, period decimals. An optional single header
// row is detected by a non-numeric first line. Ragged rows, empty or
// non-numeric cells, and non-finite values are rejected with 1-based
// file coordinates.
Eigen::MatrixXd load_matrix_csv(const std::string& path);

// %.17g per cell so that save -> load round trips bit-exactly.
void save_matrix_csv(const std::string& path, const Eigen::MatrixXd& M,
                     const std::vector<std::string>& header = {});

// Genotype matrices must hold exactly 0, 1, or 2 (F2-cross coding).
void validate_genotypes(const Eigen::MatrixXd& Z, const std::string& origin);

// Two-column key,value file.
using KvPairs = std::vector<std::pair<std::string, std::string>>;
void save_kv_csv(const std::string& path, const KvPairs& pairs);
KvPairs load_kv_csv(const std::string& path);

// Generic string table with a header row, for report files.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};
CsvTable load_table_csv(const std::string& path);

// Sparse-triplet truth file: a shape record then the nonzero entries of beta
// and Gamma.
void save_truth_csv(const std::string& path, const Truth& truth);
Truth load_truth_csv(const std::string& path);

// CV surface with grid headers: first row pi0 values, first column p0 values.
// Cells may be "inf" (failed grid cells), unlike general matrix files.
struct CvSurface {
    std::vector<double> p0_grid;
    std::vector<double> pi0_grid;
    Eigen::MatrixXd values;
};
void save_cv_surface(const std::string& path, const std::vector<double>& p0_grid,
                     const std::vector<double>& pi0_grid, const Eigen::MatrixXd& values);
CvSurface load_cv_surface(const std::string& path);

}  // namespace ivreg

#endif  // IVREG_CSV_HPP_
