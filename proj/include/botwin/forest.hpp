#pragma once

#include "botwin/eval.hpp"
#include "botwin/features.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace botwin {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ForestConfig {
    int n_estimators = 10;
    int max_features = 6;  // candidate features drawn per split
    std::optional<int> max_depth;  // unlimited when empty
    int min_samples_split = 2;
    std::uint64_t seed = 0;
    /// Draw `max_features` once per tree instead of once per split.
    bool per_tree_features = false;
    /// Grow each tree on a bootstrap sample (otherwise on the full data).
    bool bootstrap = true;

    void validate() const;
};

/// A node of a CART tree. Internal nodes route x[feature_id - 1] <= threshold
/// to `left`; leaves carry the attack fraction of their training samples.
struct TreeNode {
    int feature_id = 0;  // 1-based; 0 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double attack_fraction = 0.0;
    int n_samples = 0;

    bool is_leaf() const { return feature_id == 0; }
    bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    template <class Row>
    double predict(const Row& x) const {
        int i = 0;
        while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
            const TreeNode& n = nodes[static_cast<std::size_t>(i)];
            i = x(n.feature_id - 1) <= n.threshold ? n.left : n.right;
        }
        return nodes[static_cast<std::size_t>(i)].attack_fraction;
    }

    int depth() const;
    bool operator==(const DecisionTree&) const = default;
};

struct ForestModel {
    ForestConfig config;
    int n_features = kFeatureCount;
    std::vector<DecisionTree> trees;
    /// Mean decrease in impurity per feature, normalised to sum 1 (all zero
    /// when no split reduced impurity).
    Eigen::VectorXd importances;

    template <class Row>
    double predict_proba(const Row& x) const {
        double sum = 0.0;
        for (const auto& t : trees) sum += t.predict(x);
        return sum / static_cast<double>(trees.size());
    }

    std::vector<double> predict_proba(const Eigen::Ref<const RowMatrixXd>& X) const;
    std::vector<double> predict_proba(const Dataset& data) const;
};

/// Gini impurity 1 - p_attack^2 - p_normal^2. Throws on an empty node.
template <class Scalar = double>
Scalar gini(std::size_t n_attack, std::size_t n_normal) {
    const std::size_t total = n_attack + n_normal;
    if (total == 0) throw ContractError("gini: empty node");
    const Scalar pa = static_cast<Scalar>(n_attack) / static_cast<Scalar>(total);
    const Scalar pn = static_cast<Scalar>(n_normal) / static_cast<Scalar>(total);
    return Scalar(1) - pa * pa - pn * pn;
}

/// Bootstrap row indices of tree `tree_index`; a pure function of its arguments.
std::vector<std::size_t> bootstrap_indices(std::uint64_t seed, int tree_index, std::size_t n);

ForestModel train_forest(const Eigen::Ref<const RowMatrixXd>& X, const Eigen::Ref<const Eigen::VectorXi>& y,
                         const ForestConfig& config, unsigned jobs = 1);
ForestModel train_forest(const Dataset& data, const ForestConfig& config, unsigned jobs = 1);

// ---------------------------------------------------------------- grid search

struct ForestGrid {
    std::vector<int> n_estimators = {10, 50, 100, 300, 700};
    std::vector<std::optional<int>> max_depths = {std::nullopt};
    std::vector<int> max_features = {6};
    std::vector<int> min_samples_split = {2};

    std::size_t size() const {
        return n_estimators.size() * max_depths.size() * max_features.size() * min_samples_split.size();
    }
};

struct GridRow {
    ForestConfig config;
    EvalReport report;  // on the held-out 30%
};

struct GridResult {
    ForestConfig best;
    std::vector<GridRow> table;  // F1 descending; ties by fewer trees, then shallower depth
};

/// Evaluates every grid point on one seeded 70/30 split of `data`.
GridResult grid_search_forest(const Dataset& data, const ForestGrid& grid, const ForestConfig& base,
                              double threshold = 0.5, std::uint64_t split_seed = 0, unsigned jobs = 1);

// ---------------------------------------------------------------- persistence

/// Versioned JSON document; a loaded model predicts bit-identically.
void save_forest(std::ostream& out, const ForestModel& model);
ForestModel load_forest(std::istream& in);

}  // namespace botwin
