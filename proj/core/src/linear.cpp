#include <algorithm>
#include <cmath>
#include <numeric>

#include "seal/error.hpp"
#include "seal/regressors.hpp"
#include "seal/util.hpp"

namespace seal {

namespace {

void validate_matrix(const Matrix& x, const std::vector<double>& y, const char* who) {
    if (x.size() != y.size()) {
        throw DataError(std::string(who) + ": row/target count mismatch");
    }
    if (x.empty()) {
        throw DataError(std::string(who) + ": empty training set");
    }
    const std::size_t width = x.front().size();
    for (const auto& row : x) {
        if (row.size() != width) {
            throw DataError(std::string(who) + ": ragged feature rows");
        }
        for (double v : row) {
            if (!std::isfinite(v)) {
                throw DataError(std::string(who) + ": non-finite feature value");
            }
        }
    }
    for (double v : y) {
        if (!std::isfinite(v)) {
            throw DataError(std::string(who) + ": non-finite target value");
        }
    }
}

// Closed-form fit on centered data. No minimum-size requirement here; the
// public entry point enforces that.
RidgeModel ridge_solve(const Matrix& x, const std::vector<double>& y, double alpha) {
    const std::size_t n = x.size();
    const std::size_t d = x.front().size();

    std::vector<double> xbar(d, 0.0);
    double ybar = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            xbar[j] += x[i][j];
        }
        ybar += y[i];
    }
    for (double& v : xbar) {
        v /= static_cast<double>(n);
    }
    ybar /= static_cast<double>(n);

    // gram = Xc^T Xc + alpha I, rhs = Xc^T yc
    std::vector<double> gram(d * d, 0.0);
    std::vector<double> rhs(d, 0.0);
    std::vector<double> xc(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            xc[j] = x[i][j] - xbar[j];
        }
        const double yc = y[i] - ybar;
        for (std::size_t j = 0; j < d; ++j) {
            rhs[j] += xc[j] * yc;
            for (std::size_t k = j; k < d; ++k) {
                gram[j * d + k] += xc[j] * xc[k];
            }
        }
    }
    double max_diag = alpha;
    for (std::size_t j = 0; j < d; ++j) {
        gram[j * d + j] += alpha;
        max_diag = std::max(max_diag, gram[j * d + j]);
        for (std::size_t k = 0; k < j; ++k) {
            gram[j * d + k] = gram[k * d + j];
        }
    }

    // Cholesky; the system is symmetric positive definite unless the
    // centered design is rank-deficient at alpha = 0.
    const double pivot_tol = 1e-12 * std::max(max_diag, 1e-300);
    std::vector<double> chol(d * d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        double pivot = gram[j * d + j];
        for (std::size_t k = 0; k < j; ++k) {
            pivot -= chol[j * d + k] * chol[j * d + k];
        }
        if (!(pivot > pivot_tol)) {
            throw DataError("ridge: singular system at alpha=" + format_g17(alpha) +
                            "; use alpha > 0");
        }
        chol[j * d + j] = std::sqrt(pivot);
        for (std::size_t i = j + 1; i < d; ++i) {
            double v = gram[i * d + j];
            for (std::size_t k = 0; k < j; ++k) {
                v -= chol[i * d + k] * chol[j * d + k];
            }
            chol[i * d + j] = v / chol[j * d + j];
        }
    }

    std::vector<double> w(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) { // forward: L z = rhs
        double v = rhs[i];
        for (std::size_t k = 0; k < i; ++k) {
            v -= chol[i * d + k] * w[k];
        }
        w[i] = v / chol[i * d + i];
    }
    for (std::size_t ii = d; ii > 0; --ii) { // backward: L^T w = z
        const std::size_t i = ii - 1;
        double v = w[i];
        for (std::size_t k = i + 1; k < d; ++k) {
            v -= chol[k * d + i] * w[k];
        }
        w[i] = v / chol[i * d + i];
    }

    RidgeModel model;
    model.alpha_used = alpha;
    model.intercept = ybar - std::inner_product(w.begin(), w.end(), xbar.begin(), 0.0);
    model.weights = std::move(w);
    return model;
}

// Pooled held-out squared error of a closed-form fit at one alpha, over
// deterministic 5-fold splits. Mean squared error keeps selection defined
// even when targets contain zeros.
double inner_cv_mse(const Matrix& x, const std::vector<double>& y, double alpha,
                    std::uint64_t seed) {
    const std::size_t n = x.size();
    const int k = static_cast<int>(std::min<std::size_t>(5, n));
    const std::vector<std::size_t> perm = shuffled_indices(n, seed);
    std::vector<int> fold_of(n);
    for (std::size_t i = 0; i < n; ++i) {
        fold_of[perm[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    }

    double sq_err = 0.0;
    std::size_t held_out = 0;
    for (int fold = 0; fold < k; ++fold) {
        Matrix xt;
        std::vector<double> yt;
        for (std::size_t i = 0; i < n; ++i) {
            if (fold_of[i] != fold) {
                xt.push_back(x[i]);
                yt.push_back(y[i]);
            }
        }
        if (xt.empty()) {
            continue;
        }
        const RidgeModel m = ridge_solve(xt, yt, alpha);
        for (std::size_t i = 0; i < n; ++i) {
            if (fold_of[i] == fold) {
                const double e = predict_ridge(m, x[i]) - y[i];
                sq_err += e * e;
                ++held_out;
            }
        }
    }
    return sq_err / static_cast<double>(held_out);
}

} // namespace

RidgeModel train_ridge(const Matrix& x, const std::vector<double>& y, const RidgeParams& params) {
    validate_matrix(x, y, "ridge");
    if (x.size() < 2) {
        throw DataError("ridge: need at least 2 training rows");
    }

    double alpha = 0.0;
    if (params.alpha.has_value()) {
        alpha = *params.alpha;
        if (!(alpha >= 0.0)) {
            throw UsageError("ridge: alpha must be >= 0");
        }
    } else {
        if (params.alpha_grid.empty()) {
            throw UsageError("ridge: empty alpha grid");
        }
        double best_mse = 0.0;
        bool first = true;
        for (double candidate : params.alpha_grid) {
            if (!(candidate >= 0.0)) {
                throw UsageError("ridge: alpha grid values must be >= 0");
            }
            const double mse = inner_cv_mse(x, y, candidate, params.seed);
            if (first || mse < best_mse) {
                best_mse = mse;
                alpha = candidate;
                first = false;
            }
        }
    }
    return ridge_solve(x, y, alpha);
}

double predict_ridge(const RidgeModel& model, std::span<const double> row) {
    if (row.size() != model.weights.size()) {
        throw DataError("ridge: feature width mismatch");
    }
    double acc = model.intercept;
    for (std::size_t j = 0; j < row.size(); ++j) {
        acc += model.weights[j] * row[j];
    }
    return acc;
}

KnnModel train_knn(const Matrix& x, const std::vector<double>& y, const KnnParams& params) {
    validate_matrix(x, y, "knn");
    if (params.k < 1) {
        throw UsageError("knn: k must be >= 1");
    }
    if (static_cast<std::size_t>(params.k) > x.size()) {
        throw DataError("knn: k exceeds training set size");
    }
    return KnnModel{x, y, params.k};
}

double predict_knn(const KnnModel& model, std::span<const double> row) {
    if (model.train_rows.empty() || model.k < 1 ||
        static_cast<std::size_t>(model.k) > model.train_rows.size()) {
        throw DataError("knn: model has no usable training rows");
    }
    if (row.size() != model.train_rows.front().size()) {
        throw DataError("knn: feature width mismatch");
    }
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(model.train_rows.size());
    for (std::size_t i = 0; i < model.train_rows.size(); ++i) {
        const auto& r = model.train_rows[i];
        double d2 = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            const double d = r[j] - row[j];
            d2 += d * d;
        }
        dist.emplace_back(d2, i);
    }
    const std::size_t k = static_cast<std::size_t>(model.k);
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        acc += model.train_targets[dist[i].second];
    }
    return acc / static_cast<double>(k);
}

std::string_view to_string(RegressorKind kind) {
    switch (kind) {
    case RegressorKind::GradientBoostedTrees:
        return "gradient_boosted_trees";
    case RegressorKind::Ridge:
        return "ridge";
    case RegressorKind::OrdinaryLeastSquares:
        return "ordinary_least_squares";
    case RegressorKind::KNearestNeighbors:
        return "k_nearest_neighbors";
    }
    return "unknown";
}

RegressorKind regressor_kind_from_string(std::string_view s) {
    for (RegressorKind kind : kRegressorRegistry) {
        if (to_string(kind) == s) {
            return kind;
        }
    }
    throw DataError("unknown regressor kind '" + std::string(s) + "'");
}

TrainedRegressor::TrainedRegressor(RegressorKind kind, GbdtModel model)
    : kind_(kind), model_(std::move(model)) {}
TrainedRegressor::TrainedRegressor(RegressorKind kind, RidgeModel model)
    : kind_(kind), model_(std::move(model)) {}
TrainedRegressor::TrainedRegressor(RegressorKind kind, KnnModel model)
    : kind_(kind), model_(std::move(model)) {}

double TrainedRegressor::predict(std::span<const double> row) const {
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, GbdtModel>) {
                return predict_gbdt(m, row);
            } else if constexpr (std::is_same_v<T, RidgeModel>) {
                return predict_ridge(m, row);
            } else {
                return predict_knn(m, row);
            }
        },
        model_);
}

const GbdtModel& TrainedRegressor::gbdt() const { return std::get<GbdtModel>(model_); }
const RidgeModel& TrainedRegressor::ridge() const { return std::get<RidgeModel>(model_); }
const KnnModel& TrainedRegressor::knn() const { return std::get<KnnModel>(model_); }

TrainedRegressor train(RegressorKind kind, const Matrix& x, const std::vector<double>& y,
                       const TrainParams& params) {
    switch (kind) {
    case RegressorKind::GradientBoostedTrees:
        return {kind, train_gbdt(x, y, params.gbdt)};
    case RegressorKind::Ridge:
        return {kind, train_ridge(x, y, params.ridge)};
    case RegressorKind::OrdinaryLeastSquares: {
        RidgeParams ols = params.ridge;
        ols.alpha = 0.0;
        return {kind, train_ridge(x, y, ols)};
    }
    case RegressorKind::KNearestNeighbors:
        return {kind, train_knn(x, y, params.knn)};
    }
    throw UsageError("unknown regressor kind");
}

} // namespace seal
