#include <algorithm>
#include <cmath>
#include <numeric>

#include "seal/error.hpp"
#include "seal/regressors.hpp"

namespace seal {

namespace {

void validate_matrix(const Matrix& x, const std::vector<double>& y) {
    if (x.size() != y.size()) {
        throw DataError("gbdt: row/target count mismatch");
    }
    if (x.size() < 2) {
        throw DataError("gbdt: need at least 2 training rows");
    }
    const std::size_t width = x.front().size();
    for (const auto& row : x) {
        if (row.size() != width) {
            throw DataError("gbdt: ragged feature rows");
        }
        for (double v : row) {
            if (!std::isfinite(v)) {
                throw DataError("gbdt: non-finite feature value");
            }
        }
    }
    for (double v : y) {
        if (!std::isfinite(v)) {
            throw DataError("gbdt: non-finite target value");
        }
    }
}

void validate_params(const GbdtParams& p) {
    if (p.n_trees < 0) {
        throw UsageError("gbdt: n_trees must be >= 0");
    }
    if (!(p.learning_rate > 0.0 && p.learning_rate <= 1.0)) {
        throw UsageError("gbdt: learning_rate must lie in (0, 1]");
    }
    if (p.max_depth < 1) {
        throw UsageError("gbdt: max_depth must be >= 1");
    }
    if (p.min_samples_leaf < 1) {
        throw UsageError("gbdt: min_samples_leaf must be >= 1");
    }
    if (p.l2_leaf_penalty < 0.0) {
        throw UsageError("gbdt: l2_leaf_penalty must be >= 0");
    }
}

// Split threshold between two adjacent sorted values. Rows route left when
// x[feature] < threshold, so the midpoint must stay strictly above `lo`.
double split_threshold(double lo, double hi) {
    double mid = lo + (hi - lo) / 2.0;
    if (!(lo < mid)) {
        mid = hi;
    }
    return mid;
}

// Scan state for one pending node while sweeping one feature in sorted order.
struct NodeScan {
    double left_sum = 0.0;
    std::size_t left_count = 0;
    double prev_value = 0.0;
    bool has_prev = false;
};

struct NodeSearch {
    double sum = 0.0;
    std::size_t count = 0;
    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
};

} // namespace

double GbdtTree::leaf_weight(std::span<const double> row) const {
    int idx = 0;
    while (!nodes[static_cast<std::size_t>(idx)].is_leaf()) {
        const GbdtNode& node = nodes[static_cast<std::size_t>(idx)];
        idx = row[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left
                                                                           : node.right;
    }
    return nodes[static_cast<std::size_t>(idx)].weight;
}

GbdtModel train_gbdt(const Matrix& x, const std::vector<double>& y, const GbdtParams& params) {
    validate_matrix(x, y);
    validate_params(params);

    const std::size_t n = x.size();
    const std::size_t width = x.front().size();
    const double lambda = params.l2_leaf_penalty;
    const std::size_t min_leaf = static_cast<std::size_t>(params.min_samples_leaf);

    // Column-major copy plus one global sort per feature; every tree reuses
    // the same orderings since only residuals change between iterations.
    std::vector<std::vector<double>> cols(width, std::vector<double>(n));
    std::vector<std::vector<std::uint32_t>> order(width, std::vector<std::uint32_t>(n));
    for (std::size_t f = 0; f < width; ++f) {
        for (std::size_t i = 0; i < n; ++i) {
            cols[f][i] = x[i][f];
        }
        std::iota(order[f].begin(), order[f].end(), 0u);
        std::sort(order[f].begin(), order[f].end(), [&](std::uint32_t a, std::uint32_t b) {
            if (cols[f][a] != cols[f][b]) {
                return cols[f][a] < cols[f][b];
            }
            return a < b;
        });
    }

    GbdtModel model;
    model.learning_rate = params.learning_rate;
    model.n_features = width;
    model.base_score = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    model.trees.reserve(static_cast<std::size_t>(params.n_trees));

    std::vector<double> residual(n);
    for (std::size_t i = 0; i < n; ++i) {
        residual[i] = y[i] - model.base_score;
    }

    std::vector<std::int32_t> node_of(n);
    std::vector<std::int32_t> search_slot;
    std::vector<NodeScan> scans;
    std::vector<NodeSearch> searches;

    for (int t = 0; t < params.n_trees; ++t) {
        GbdtTree tree;
        tree.nodes.push_back(GbdtNode{});
        std::fill(node_of.begin(), node_of.end(), 0);

        double root_sum = std::accumulate(residual.begin(), residual.end(), 0.0);
        std::vector<std::int32_t> pending;
        std::vector<NodeSearch> node_stats;

        auto finalize_leaf = [&](std::int32_t id, double sum, std::size_t count) {
            tree.nodes[static_cast<std::size_t>(id)].feature = -1;
            tree.nodes[static_cast<std::size_t>(id)].weight =
                sum / (static_cast<double>(count) + lambda);
        };

        if (n >= 2 * min_leaf) {
            pending.push_back(0);
            node_stats.push_back(NodeSearch{root_sum, n, 0.0, -1, 0.0});
        } else {
            finalize_leaf(0, root_sum, n);
        }

        for (int depth = 0; depth < params.max_depth && !pending.empty(); ++depth) {
            searches = node_stats;
            search_slot.assign(tree.nodes.size(), -1);
            for (std::size_t s = 0; s < pending.size(); ++s) {
                search_slot[static_cast<std::size_t>(pending[s])] = static_cast<std::int32_t>(s);
            }

            for (std::size_t f = 0; f < width; ++f) {
                scans.assign(pending.size(), NodeScan{});
                const auto& col = cols[f];
                for (std::uint32_t ridx : order[f]) {
                    const std::int32_t slot = search_slot[static_cast<std::size_t>(node_of[ridx])];
                    if (slot < 0) {
                        continue;
                    }
                    NodeScan& scan = scans[static_cast<std::size_t>(slot)];
                    NodeSearch& search = searches[static_cast<std::size_t>(slot)];
                    const double v = col[ridx];
                    if (scan.has_prev && v > scan.prev_value && scan.left_count >= min_leaf &&
                        search.count - scan.left_count >= min_leaf) {
                        const double nl = static_cast<double>(scan.left_count);
                        const double nr = static_cast<double>(search.count - scan.left_count);
                        const double gl = scan.left_sum;
                        const double gr = search.sum - gl;
                        const double gain = gl * gl / nl + gr * gr / nr -
                                            search.sum * search.sum /
                                                static_cast<double>(search.count);
                        if (gain > search.best_gain) {
                            search.best_gain = gain;
                            search.best_feature = static_cast<int>(f);
                            search.best_threshold = split_threshold(scan.prev_value, v);
                        }
                    }
                    scan.left_sum += residual[ridx];
                    scan.left_count += 1;
                    scan.prev_value = v;
                    scan.has_prev = true;
                }
            }

            // Apply splits; nodes without a strictly positive gain become leaves.
            std::vector<std::int32_t> split_nodes;
            for (std::size_t s = 0; s < pending.size(); ++s) {
                const std::int32_t id = pending[s];
                const NodeSearch& search = searches[s];
                if (search.best_feature >= 0 && search.best_gain > 0.0) {
                    GbdtNode& node = tree.nodes[static_cast<std::size_t>(id)];
                    node.feature = search.best_feature;
                    node.threshold = search.best_threshold;
                    node.left = static_cast<int>(tree.nodes.size());
                    node.right = node.left + 1;
                    tree.nodes.push_back(GbdtNode{});
                    tree.nodes.push_back(GbdtNode{});
                    split_nodes.push_back(id);
                } else {
                    finalize_leaf(id, search.sum, search.count);
                }
            }
            if (split_nodes.empty()) {
                pending.clear();
                break;
            }

            // Rows lag one level behind: any row pointing at a node that just
            // became internal descends exactly one edge.
            std::vector<NodeSearch> child_stats(tree.nodes.size());
            for (std::size_t i = 0; i < n; ++i) {
                const GbdtNode& node = tree.nodes[static_cast<std::size_t>(node_of[i])];
                if (node.is_leaf()) {
                    continue;
                }
                const std::int32_t child =
                    cols[static_cast<std::size_t>(node.feature)][i] < node.threshold
                        ? node.left
                        : node.right;
                node_of[i] = child;
                child_stats[static_cast<std::size_t>(child)].sum += residual[i];
                child_stats[static_cast<std::size_t>(child)].count += 1;
            }

            pending.clear();
            node_stats.clear();
            for (std::int32_t id : split_nodes) {
                for (std::int32_t child : {tree.nodes[static_cast<std::size_t>(id)].left,
                                           tree.nodes[static_cast<std::size_t>(id)].right}) {
                    NodeSearch stats = child_stats[static_cast<std::size_t>(child)];
                    if (depth + 1 < params.max_depth && stats.count >= 2 * min_leaf) {
                        pending.push_back(child);
                        node_stats.push_back(stats);
                    } else {
                        finalize_leaf(child, stats.sum, stats.count);
                    }
                }
            }
        }
        for (std::size_t s = 0; s < pending.size(); ++s) {
            finalize_leaf(pending[s], node_stats[s].sum, node_stats[s].count);
        }

        for (std::size_t i = 0; i < n; ++i) {
            const double w = tree.nodes[static_cast<std::size_t>(node_of[i])].weight;
            residual[i] -= params.learning_rate * w;
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

double predict_gbdt(const GbdtModel& model, std::span<const double> row) {
    if (row.size() != model.n_features) {
        throw DataError("gbdt: feature width mismatch");
    }
    double acc = model.base_score;
    for (const auto& tree : model.trees) {
        acc += model.learning_rate * tree.leaf_weight(row);
    }
    return acc;
}

} // namespace seal
