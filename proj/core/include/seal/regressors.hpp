#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace seal {

using Matrix = std::vector<std::vector<double>>;

// ---------------------------------------------------------------------------
// Gradient-boosted regression trees, squared-error objective. Residuals are
// fitted with exact greedy split search over sorted feature values; the L2
// penalty enters leaf weights only. Split-gain ties break toward the lowest
// feature index, then the lowest threshold, so training is reproducible.
// ---------------------------------------------------------------------------

struct GbdtParams {
    int n_trees = 300;
    double learning_rate = 0.1; // in (0, 1]
    int max_depth = 6;
    int min_samples_leaf = 5;
    double l2_leaf_penalty = 1.0; // lambda in leaf weight G/(n + lambda)
    std::uint64_t seed = 0;
};

// Internal nodes route x[feature] < threshold to `left`; leaves carry the
// unscaled weight (prediction adds learning_rate * weight).
struct GbdtNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double weight = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct GbdtTree {
    std::vector<GbdtNode> nodes;

    double leaf_weight(std::span<const double> row) const;
};

struct GbdtModel {
    double base_score = 0.0;
    double learning_rate = 0.1;
    std::size_t n_features = 0;
    std::vector<GbdtTree> trees;
};

GbdtModel train_gbdt(const Matrix& x, const std::vector<double>& y, const GbdtParams& params);
double predict_gbdt(const GbdtModel& model, std::span<const double> row);

// ---------------------------------------------------------------------------
// Ridge regression, closed form on centered data:
//   (Xc^T Xc + alpha I) w = Xc^T yc,  intercept = mean(y) - w . mean(x).
// alpha=0 degrades to ordinary least squares; a singular system at alpha=0
// raises an error advising alpha > 0. When alpha is unset it is selected by
// inner 5-fold cross-validation (mean squared error) over alpha_grid.
// ---------------------------------------------------------------------------

struct RidgeParams {
    std::optional<double> alpha;
    std::vector<double> alpha_grid = {0.01, 0.1, 1.0, 10.0, 100.0};
    std::uint64_t seed = 0; // seeds the inner CV folds
};

struct RidgeModel {
    std::vector<double> weights;
    double intercept = 0.0;
    double alpha_used = 0.0;
};

RidgeModel train_ridge(const Matrix& x, const std::vector<double>& y, const RidgeParams& params);
double predict_ridge(const RidgeModel& model, std::span<const double> row);

// ---------------------------------------------------------------------------
// k-nearest-neighbor baseline: mean target of the k nearest training rows
// under Euclidean distance, distance ties broken by training-row index.
// ---------------------------------------------------------------------------

struct KnnParams {
    int k = 5;
};

struct KnnModel {
    Matrix train_rows;
    std::vector<double> train_targets;
    int k = 5;
};

KnnModel train_knn(const Matrix& x, const std::vector<double>& y, const KnnParams& params);
double predict_knn(const KnnModel& model, std::span<const double> row);

// ---------------------------------------------------------------------------
// Registry. Declaration order doubles as the tie-break order wherever equal
// scores must resolve to one kind.
// ---------------------------------------------------------------------------

enum class RegressorKind {
    GradientBoostedTrees,
    Ridge,
    OrdinaryLeastSquares,
    KNearestNeighbors,
};

inline constexpr std::array<RegressorKind, 4> kRegressorRegistry = {
    RegressorKind::GradientBoostedTrees,
    RegressorKind::Ridge,
    RegressorKind::OrdinaryLeastSquares,
    RegressorKind::KNearestNeighbors,
};

std::string_view to_string(RegressorKind kind);
RegressorKind regressor_kind_from_string(std::string_view s);

struct TrainParams {
    GbdtParams gbdt;
    RidgeParams ridge;
    KnnParams knn;
};

class TrainedRegressor {
public:
    // Empty ridge placeholder; bundle slots overwrite it before any use.
    TrainedRegressor() : kind_(RegressorKind::Ridge), model_(RidgeModel{}) {}
    TrainedRegressor(RegressorKind kind, GbdtModel model);
    TrainedRegressor(RegressorKind kind, RidgeModel model);
    TrainedRegressor(RegressorKind kind, KnnModel model);

    RegressorKind kind() const { return kind_; }
    double predict(std::span<const double> row) const;

    const GbdtModel& gbdt() const;
    const RidgeModel& ridge() const;
    const KnnModel& knn() const;

private:
    RegressorKind kind_;
    std::variant<GbdtModel, RidgeModel, KnnModel> model_;
};

TrainedRegressor train(RegressorKind kind, const Matrix& x, const std::vector<double>& y,
                       const TrainParams& params);

// JSON text serialization; numbers as decimal text with 17 significant
// digits, so deserialized models predict identically.
std::string to_json_text(const TrainedRegressor& model);
TrainedRegressor regressor_from_json_text(std::string_view text);

} // namespace seal
