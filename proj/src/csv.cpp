#include "ivreg/csv.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <tuple>

#include "ivreg/errors.hpp"

namespace ivreg {

namespace {

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open for reading: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) throw DataError(path + ": empty file");
    return lines;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(line.substr(start));
            return cells;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

bool parse_double(const std::string& cell, double& out) {
    std::size_t first = 0;
    std::size_t last = cell.size();
    while (first < last && std::isspace(static_cast<unsigned char>(cell[first]))) ++first;
    while (last > first && std::isspace(static_cast<unsigned char>(cell[last - 1]))) --last;
    if (first == last) return false;
    const char* begin = cell.data() + first;
    const char* end = cell.data() + last;
    const auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc() && res.ptr == end;
}

struct OutFile {
    std::FILE* f;

    explicit OutFile(const std::string& path) : f(std::fopen(path.c_str(), "wb")) {
        if (!f) throw ConfigError("cannot open for writing: " + path);
    }
    ~OutFile() {
        if (f) std::fclose(f);
    }
    OutFile(const OutFile&) = delete;
    OutFile& operator=(const OutFile&) = delete;
};

}  // namespace

Eigen::MatrixXd load_matrix_csv(const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);

    std::size_t first_data = 0;
    {
        const std::vector<std::string> cells = split(lines[0]);
        double ignored;
        for (const std::string& c : cells)
            if (!parse_double(c, ignored)) {
                first_data = 1;  // non-numeric first row: header
                break;
            }
    }
    if (first_data >= lines.size()) throw DataError(path + ": no data rows after the header");

    const std::size_t cols = split(lines[first_data]).size();
    const std::size_t rows = lines.size() - first_data;
    Eigen::MatrixXd M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t file_row = first_data + r + 1;  // 1-based, counting the header
        const std::vector<std::string> cells = split(lines[first_data + r]);
        if (cells.size() != cols)
            throw DataError(path + ": row " + std::to_string(file_row) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(cols));
        for (std::size_t c = 0; c < cols; ++c) {
            double v;
            if (!parse_double(cells[c], v))
                throw DataError(path + ": row " + std::to_string(file_row) + ", column " +
                                std::to_string(c + 1) + ": not a number: '" + cells[c] + "'");
            if (!std::isfinite(v))
                throw DataError(path + ": row " + std::to_string(file_row) + ", column " +
                                std::to_string(c + 1) + ": non-finite value");
            M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
        }
    }
    return M;
}

void save_matrix_csv(const std::string& path, const Eigen::MatrixXd& M,
                     const std::vector<std::string>& header) {
    if (!M.allFinite()) throw DataError(path + ": refusing to write non-finite values");
    if (!header.empty() && static_cast<Eigen::Index>(header.size()) != M.cols())
        throw DataError(path + ": header width does not match the matrix");
    OutFile out(path);
    if (!header.empty()) {
        for (std::size_t c = 0; c < header.size(); ++c)
            std::fprintf(out.f, "%s%s", c ? "," : "", header[c].c_str());
        std::fputc('\n', out.f);
    }
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        for (Eigen::Index c = 0; c < M.cols(); ++c)
            std::fprintf(out.f, "%s%.17g", c ? "," : "", M(r, c));
        std::fputc('\n', out.f);
    }
}

void validate_genotypes(const Eigen::MatrixXd& Z, const std::string& origin) {
    for (Eigen::Index i = 0; i < Z.rows(); ++i)
        for (Eigen::Index j = 0; j < Z.cols(); ++j) {
            const double v = Z(i, j);
            if (v != 0.0 && v != 1.0 && v != 2.0)
                throw DataError(origin + ": genotype entry at row " + std::to_string(i + 1) +
                                ", column " + std::to_string(j + 1) +
                                " is not coded 0/1/2");
        }
}

void save_kv_csv(const std::string& path, const KvPairs& pairs) {
    OutFile out(path);
    std::fputs("key,value\n", out.f);
    for (const auto& [key, value] : pairs)
        std::fprintf(out.f, "%s,%s\n", key.c_str(), value.c_str());
}

KvPairs load_kv_csv(const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);
    KvPairs pairs;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i == 0 && lines[i] == "key,value") continue;
        const std::size_t comma = lines[i].find(',');
        if (comma == std::string::npos)
            throw DataError(path + ": row " + std::to_string(i + 1) + ": expected key,value");
        pairs.emplace_back(lines[i].substr(0, comma), lines[i].substr(comma + 1));
    }
    return pairs;
}

CsvTable load_table_csv(const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);
    CsvTable table;
    table.header = split(lines[0]);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        table.rows.push_back(split(lines[i]));
        if (table.rows.back().size() != table.header.size())
            throw DataError(path + ": row " + std::to_string(i + 1) +
                            " does not match the header width");
    }
    return table;
}

void save_truth_csv(const std::string& path, const Truth& truth) {
    OutFile out(path);
    std::fputs("matrix,row,col,value\n", out.f);
    std::fprintf(out.f, "shape,%lld,%lld,0\n", static_cast<long long>(truth.Gamma.rows()),
                 static_cast<long long>(truth.Gamma.cols()));
    for (Eigen::Index j = 0; j < truth.beta.size(); ++j)
        if (truth.beta[j] != 0.0)
            std::fprintf(out.f, "beta,%lld,0,%.17g\n", static_cast<long long>(j),
                         truth.beta[j]);
    for (Eigen::Index i = 0; i < truth.Gamma.rows(); ++i)
        for (Eigen::Index j = 0; j < truth.Gamma.cols(); ++j)
            if (truth.Gamma(i, j) != 0.0)
                std::fprintf(out.f, "gamma,%lld,%lld,%.17g\n", static_cast<long long>(i),
                             static_cast<long long>(j), truth.Gamma(i, j));
}

Truth load_truth_csv(const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);
    std::size_t i = 0;
    if (lines[i] == "matrix,row,col,value") ++i;
    if (i >= lines.size()) throw DataError(path + ": missing shape record");

    auto parse_row = [&](const std::string& line, std::size_t file_row) {
        const std::vector<std::string> cells = split(line);
        if (cells.size() != 4)
            throw DataError(path + ": row " + std::to_string(file_row) + ": expected 4 cells");
        double row_idx;
        double col_idx;
        double value;
        if (!parse_double(cells[1], row_idx) || !parse_double(cells[2], col_idx) ||
            !parse_double(cells[3], value) || !std::isfinite(value))
            throw DataError(path + ": row " + std::to_string(file_row) + ": bad numeric cell");
        return std::tuple<std::string, Eigen::Index, Eigen::Index, double>(
            cells[0], static_cast<Eigen::Index>(row_idx), static_cast<Eigen::Index>(col_idx),
            value);
    };

    auto [tag, q, p, ignored] = parse_row(lines[i], i + 1);
    if (tag != "shape" || q < 1 || p < 1)
        throw DataError(path + ": first record must be a positive shape");
    ++i;

    Truth truth;
    truth.beta = Eigen::VectorXd::Zero(p);
    truth.Gamma = Eigen::MatrixXd::Zero(q, p);
    for (; i < lines.size(); ++i) {
        auto [kind, r, c, value] = parse_row(lines[i], i + 1);
        if (kind == "beta") {
            if (r < 0 || r >= p || c != 0)
                throw DataError(path + ": row " + std::to_string(i + 1) +
                                ": beta index out of range");
            truth.beta[r] = value;
        } else if (kind == "gamma") {
            if (r < 0 || r >= q || c < 0 || c >= p)
                throw DataError(path + ": row " + std::to_string(i + 1) +
                                ": gamma index out of range");
            truth.Gamma(r, c) = value;
        } else {
            throw DataError(path + ": row " + std::to_string(i + 1) + ": unknown matrix tag '" +
                            kind + "'");
        }
    }
    truth.beta_support = truth.beta.array() != 0.0;
    truth.gamma_support = truth.Gamma.array() != 0.0;
    return truth;
}

void save_cv_surface(const std::string& path, const std::vector<double>& p0_grid,
                     const std::vector<double>& pi0_grid, const Eigen::MatrixXd& values) {
    if (values.rows() != static_cast<Eigen::Index>(p0_grid.size()) ||
        values.cols() != static_cast<Eigen::Index>(pi0_grid.size()))
        throw DataError(path + ": surface shape does not match the grids");
    OutFile out(path);
    std::fputs("p0_pi0", out.f);
    for (double v : pi0_grid) std::fprintf(out.f, ",%.17g", v);
    std::fputc('\n', out.f);
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        std::fprintf(out.f, "%.17g", p0_grid[static_cast<std::size_t>(r)]);
        for (Eigen::Index c = 0; c < values.cols(); ++c)
            std::fprintf(out.f, ",%.17g", values(r, c));
        std::fputc('\n', out.f);
    }
}

CvSurface load_cv_surface(const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.size() < 2) throw DataError(path + ": surface needs a header and one row");
    CvSurface surface;
    const std::vector<std::string> head = split(lines[0]);
    if (head.size() < 2) throw DataError(path + ": surface header too short");
    for (std::size_t c = 1; c < head.size(); ++c) {
        double v;
        if (!parse_double(head[c], v))
            throw DataError(path + ": bad pi0 grid value '" + head[c] + "'");
        surface.pi0_grid.push_back(v);
    }
    const auto cols = static_cast<Eigen::Index>(surface.pi0_grid.size());
    surface.values.resize(static_cast<Eigen::Index>(lines.size() - 1), cols);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::vector<std::string> cells = split(lines[i]);
        if (static_cast<Eigen::Index>(cells.size()) != cols + 1)
            throw DataError(path + ": row " + std::to_string(i + 1) +
                            " does not match the header width");
        double p0;
        if (!parse_double(cells[0], p0))
            throw DataError(path + ": bad p0 grid value '" + cells[0] + "'");
        surface.p0_grid.push_back(p0);
        for (Eigen::Index c = 0; c < cols; ++c) {
            double v;
            if (!parse_double(cells[static_cast<std::size_t>(c) + 1], v) || std::isnan(v))
                throw DataError(path + ": row " + std::to_string(i + 1) + ", column " +
                                std::to_string(c + 2) + ": bad surface value");
            surface.values(static_cast<Eigen::Index>(i - 1), c) = v;
        }
    }
    return surface;
}

}  // namespace ivreg
