#include "ivreg/metrics.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "ivreg/errors.hpp"
#include "ivreg/rng.hpp"

namespace ivreg {

SelectionRates selection_rates(const BoolVec& truth_support, const BoolVec& est_support) {
    if (truth_support.size() != est_support.size())
        throw DomainError("selection_rates: mask lengths disagree");
    SelectionRates rates;
    Eigen::Index missed = 0;
    Eigen::Index false_hits = 0;
    for (Eigen::Index j = 0; j < truth_support.size(); ++j) {
        if (truth_support[j]) {
            ++rates.true_nonzero;
            if (!est_support[j]) ++missed;
        } else {
            ++rates.true_zero;
            if (est_support[j]) ++false_hits;
        }
    }
    if (rates.true_nonzero > 0)
        rates.fnr = static_cast<double>(missed) / static_cast<double>(rates.true_nonzero);
    else
        rates.fnr_defined = false;
    if (rates.true_zero > 0)
        rates.fpr = static_cast<double>(false_hits) / static_cast<double>(rates.true_zero);
    else
        rates.fpr_defined = false;
    return rates;
}

std::vector<std::vector<Eigen::Index>> make_folds(Eigen::Index n, int k,
                                                  std::uint64_t seed) {
    if (k < 2) throw ConfigError("make_folds: need at least 2 folds");
    if (n < k) throw DataError("make_folds: fewer rows than folds");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Rng rng(seed);
    for (Eigen::Index i = n - 1; i > 0; --i) {  // Fisher-Yates on the pinned stream
        const auto j = static_cast<Eigen::Index>(rng.uniform01() * static_cast<double>(i + 1));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }

    std::vector<std::vector<Eigen::Index>> folds(static_cast<std::size_t>(k));
    const Eigen::Index base = n / k;
    const Eigen::Index extra = n % k;
    std::size_t cursor = 0;
    for (int f = 0; f < k; ++f) {
        const Eigen::Index size = base + (f < extra ? 1 : 0);
        folds[static_cast<std::size_t>(f)].assign(order.begin() + static_cast<long>(cursor),
                                                  order.begin() + static_cast<long>(cursor) +
                                                      size);
        cursor += static_cast<std::size_t>(size);
    }
    return folds;
}

namespace {

Dataset take_rows(const Dataset& data, const std::vector<Eigen::Index>& rows) {
    Dataset out;
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    out.X.resize(static_cast<Eigen::Index>(rows.size()), data.p());
    out.Z.resize(static_cast<Eigen::Index>(rows.size()), data.q());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.y[static_cast<Eigen::Index>(r)] = data.y[rows[r]];
        out.X.row(static_cast<Eigen::Index>(r)) = data.X.row(rows[r]);
        out.Z.row(static_cast<Eigen::Index>(r)) = data.Z.row(rows[r]);
    }
    return out;
}

}  // namespace

CvPair kfold_cv_both(const Dataset& data, int k, const Fitter& fitter,
                     std::uint64_t seed, bool per_observation) {
    data.validate();
    const auto folds = make_folds(data.n(), k, seed);

    double total_dense = 0.0;
    double total_post = 0.0;
    std::vector<char> in_test(static_cast<std::size_t>(data.n()));
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::fill(in_test.begin(), in_test.end(), 0);
        for (Eigen::Index i : folds[f]) in_test[static_cast<std::size_t>(i)] = 1;
        std::vector<Eigen::Index> train_rows;
        train_rows.reserve(static_cast<std::size_t>(data.n()) - folds[f].size());
        for (Eigen::Index i = 0; i < data.n(); ++i)
            if (!in_test[static_cast<std::size_t>(i)]) train_rows.push_back(i);

        const Dataset train = take_rows(data, train_rows);
        const Dataset test = take_rows(data, folds[f]);
        TwoStageFit fit;
        try {
            fit = fitter(train);
        } catch (const NumericalError& e) {
            throw NumericalError("cv fold " + std::to_string(f) + ": " + e.what(),
                                 e.min_pivot, e.index);
        }
        total_dense += (test.y - predict_response(test.Z, fit, false)).squaredNorm();
        total_post += (test.y - predict_response(test.Z, fit, true)).squaredNorm();
    }
    const double denom =
        per_observation ? static_cast<double>(data.n()) : static_cast<double>(k);
    return {total_dense / denom, total_post / denom};
}

double kfold_cv(const Dataset& data, int k, const Fitter& fitter, std::uint64_t seed,
                bool use_post, bool per_observation) {
    const CvPair pair = kfold_cv_both(data, k, fitter, seed, per_observation);
    return use_post ? pair.post : pair.dense;
}

double r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& y_pred) {
    if (y.size() != y_pred.size()) throw DomainError("r_squared: length mismatch");
    if (y.size() == 0) throw DomainError("r_squared: empty input");
    const double tss = (y.array() - y.mean()).square().sum();
    if (!(tss > 0.0)) throw DomainError("r_squared: zero-variance response");
    const double rss = (y - y_pred).squaredNorm();
    return 1.0 - rss / tss;
}

double bic(const Eigen::VectorXd& y, const Eigen::VectorXd& y_pred, Eigen::Index df) {
    if (y.size() != y_pred.size()) throw DomainError("bic: length mismatch");
    if (y.size() == 0) throw DomainError("bic: empty input");
    if (df < 0) throw DomainError("bic: negative degrees of freedom");
    const double n = static_cast<double>(y.size());
    const double rss = (y - y_pred).squaredNorm();
    if (!(rss > 0.0)) throw DomainError("bic: zero residual sum of squares");
    return n * std::log(rss / n) + static_cast<double>(df) * std::log(n);
}

}  // namespace ivreg
