#ifndef IVREG_ERRORS_HPP_
#define IVREG_ERRORS_HPP_

#include <limits>
#include <stdexcept>
#include <string>

namespace ivreg {

// Invalid argument to a library operation (precondition violation).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Bad or malformed input data (files, CSV contents, dimension mismatches
// discovered while ingesting user data).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid run configuration (flags, grids, hyperparameter ranges).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failure (non-SPD kernel, singular ridge system, overflow in an
// EP update). `min_pivot` is the smallest Cholesky pivot seen when a
// factorization failed; `index` the offending coefficient/column when known.
struct NumericalError : std::runtime_error {
    double min_pivot;
    long index;

    explicit NumericalError(const std::string& msg,
                            double min_pivot_ = std::numeric_limits<double>::quiet_NaN(),
                            long index_ = -1)
        : std::runtime_error(msg), min_pivot(min_pivot_), index(index_) {}
};

}  // namespace ivreg

#endif  // IVREG_ERRORS_HPP_
