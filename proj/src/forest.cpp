#include "botwin/forest.hpp"

#include "botwin/parallel.hpp"
#include "botwin/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>

namespace botwin {

void ForestConfig::validate() const {
    if (n_estimators < 1) throw ConfigError("forest: n_estimators must be >= 1");
    if (max_features < 1) throw ConfigError("forest: max_features must be >= 1");
    if (max_depth && *max_depth < 0) throw ConfigError("forest: max_depth must be >= 0");
    if (min_samples_split < 2) throw ConfigError("forest: min_samples_split must be >= 2");
}

int DecisionTree::depth() const {
    if (nodes.empty()) return 0;
    std::vector<int> d(nodes.size(), 0);
    int deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        deepest = std::max(deepest, d[i]);
        if (!nodes[i].is_leaf()) {
            d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
        }
    }
    return deepest;
}

std::vector<double> ForestModel::predict_proba(const Eigen::Ref<const RowMatrixXd>& X) const {
    if (X.cols() != n_features) throw ContractError("predict_proba: feature count does not match the model");
    std::vector<double> out(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index r = 0; r < X.rows(); ++r) out[static_cast<std::size_t>(r)] = predict_proba(X.row(r));
    return out;
}

std::vector<double> ForestModel::predict_proba(const Dataset& data) const {
    std::vector<double> out(data.size());
    for (Eigen::Index r = 0; r < data.rows(); ++r) out[static_cast<std::size_t>(r)] = predict_proba(data.X.row(r));
    return out;
}

std::vector<std::size_t> bootstrap_indices(std::uint64_t seed, int tree_index, std::size_t n) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(tree_index), 0xb0075712ULL}));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = pick(rng);
    return rows;
}

namespace {

struct Split {
    int feature = -1;  // 0-based column
    double threshold = 0.0;
    double weighted_gini = 0.0;  // sum over children of n_child * gini_child
    // weighted_gini == 2 * num / den exactly; compared as integers so that
    // equal impurities tie regardless of rounding.
    std::uint64_t num = 0;
    std::uint64_t den = 1;
    std::size_t left_count = 0;
};

// Lower weighted impurity wins; ties go to the lower feature, then the lower threshold.
bool better(const Split& a, const Split& b) {
    if (b.feature < 0) return true;
    using wide = unsigned __int128;
    const wide lhs = static_cast<wide>(a.num) * b.den;
    const wide rhs = static_cast<wide>(b.num) * a.den;
    if (lhs != rhs) return lhs < rhs;
    if (a.feature != b.feature) return a.feature < b.feature;
    return a.threshold < b.threshold;
}

class TreeBuilder {
public:
    TreeBuilder(const Eigen::Ref<const RowMatrixXd>& X, const Eigen::Ref<const Eigen::VectorXi>& y,
                const ForestConfig& config, int tree_index)
        : X_(X), y_(y), config_(config), tree_index_(tree_index),
          importance_(Eigen::VectorXd::Zero(X.cols())) {
        if (config.per_tree_features) {
            std::vector<int> all(static_cast<std::size_t>(X.cols()));
            std::iota(all.begin(), all.end(), 0);
            Rng rng(derive_seed(config.seed, {static_cast<std::uint64_t>(tree_index), 0xfea7ULL}));
            std::shuffle(all.begin(), all.end(), rng);
            all.resize(std::min<std::size_t>(all.size(), static_cast<std::size_t>(config.max_features)));
            std::sort(all.begin(), all.end());
            tree_features_ = std::move(all);
        }
    }

    DecisionTree build() {
        std::vector<std::size_t> rows;
        if (config_.bootstrap) {
            rows = bootstrap_indices(config_.seed, tree_index_, static_cast<std::size_t>(X_.rows()));
        } else {
            rows.resize(static_cast<std::size_t>(X_.rows()));
            std::iota(rows.begin(), rows.end(), std::size_t{0});
        }

        struct Task {
            int node;
            std::vector<std::size_t> rows;
            int depth;
            std::uint64_t key;
        };
        tree_.nodes.emplace_back();
        std::vector<Task> stack;
        stack.push_back({0, std::move(rows), 0,
                         derive_seed(config_.seed, {static_cast<std::uint64_t>(tree_index_), 1})});
        while (!stack.empty()) {
            Task task = std::move(stack.back());
            stack.pop_back();
            grow(task.node, task.rows, task.depth, task.key, [&](Task t) { stack.push_back(std::move(t)); });
        }
        return std::move(tree_);
    }

    const Eigen::VectorXd& importance() const { return importance_; }

private:
    template <class Push>
    void grow(int node_id, std::vector<std::size_t>& rows, int depth, std::uint64_t key, Push&& push) {
        std::size_t attack = 0;
        for (std::size_t r : rows) attack += y_(static_cast<Eigen::Index>(r)) != 0 ? 1 : 0;
        const std::size_t n = rows.size();
        {
            TreeNode& node = tree_.nodes[static_cast<std::size_t>(node_id)];
            node.n_samples = static_cast<int>(n);
            node.attack_fraction = static_cast<double>(attack) / static_cast<double>(n);
        }

        const bool pure = attack == 0 || attack == n;
        const bool too_small = n < static_cast<std::size_t>(config_.min_samples_split);
        const bool too_deep = config_.max_depth && depth >= *config_.max_depth;
        if (pure || too_small || too_deep) return;

        const Split best = find_split(rows, key);
        if (best.feature < 0) return;

        const double parent = static_cast<double>(n) * gini<double>(attack, n - attack);
        importance_(best.feature) += parent - best.weighted_gini;

        std::vector<std::size_t> left, right;
        left.reserve(best.left_count);
        right.reserve(n - best.left_count);
        for (std::size_t r : rows)
            (X_(static_cast<Eigen::Index>(r), best.feature) <= best.threshold ? left : right).push_back(r);

        const int left_id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        const int right_id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        TreeNode& node = tree_.nodes[static_cast<std::size_t>(node_id)];
        node.feature_id = best.feature + 1;
        node.threshold = best.threshold;
        node.left = left_id;
        node.right = right_id;

        rows.clear();
        rows.shrink_to_fit();
        push({right_id, std::move(right), depth + 1, derive_seed(key, {2})});
        push({left_id, std::move(left), depth + 1, derive_seed(key, {1})});
    }

    Split find_split(const std::vector<std::size_t>& rows, std::uint64_t key) {
        std::vector<int> order;
        std::size_t wanted = 0;
        if (config_.per_tree_features) {
            order = tree_features_;
            wanted = order.size();
        } else {
            order.resize(static_cast<std::size_t>(X_.cols()));
            std::iota(order.begin(), order.end(), 0);
            Rng rng(key);
            std::shuffle(order.begin(), order.end(), rng);
            wanted = std::min<std::size_t>(order.size(), static_cast<std::size_t>(config_.max_features));
        }

        Split best;
        std::size_t examined = 0;
        for (int f : order) {
            if (examined >= wanted) break;
            // Constant features do not count against the budget.
            if (evaluate_feature(rows, f, best)) ++examined;
        }
        return best;
    }

    // Returns false when the feature is constant within the node.
    bool evaluate_feature(const std::vector<std::size_t>& rows, int f, Split& best) {
        scratch_.clear();
        for (std::size_t r : rows)
            scratch_.emplace_back(X_(static_cast<Eigen::Index>(r), f), y_(static_cast<Eigen::Index>(r)) != 0 ? 1 : 0);
        std::sort(scratch_.begin(), scratch_.end());
        if (scratch_.front().first == scratch_.back().first) return false;

        const std::size_t n = scratch_.size();
        std::size_t total_attack = 0;
        for (const auto& s : scratch_) total_attack += static_cast<std::size_t>(s.second);

        std::size_t left_attack = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            left_attack += static_cast<std::size_t>(scratch_[i].second);
            const double a = scratch_[i].first;
            const double b = scratch_[i + 1].first;
            if (!(a < b)) continue;
            const std::size_t nl = i + 1;
            const std::size_t nr = n - nl;
            const std::size_t right_attack = total_attack - left_attack;
            Split cand;
            cand.feature = f;
            cand.threshold = a + (b - a) / 2.0;
            if (!(cand.threshold < b)) cand.threshold = a;
            cand.weighted_gini = static_cast<double>(nl) * gini<double>(left_attack, nl - left_attack) +
                                 static_cast<double>(nr) * gini<double>(right_attack, nr - right_attack);
            cand.num = left_attack * (nl - left_attack) * nr + right_attack * (nr - right_attack) * nl;
            cand.den = nl * nr;
            cand.left_count = nl;
            if (better(cand, best)) best = cand;
        }
        return true;
    }

    const Eigen::Ref<const RowMatrixXd>& X_;
    const Eigen::Ref<const Eigen::VectorXi>& y_;
    const ForestConfig& config_;
    int tree_index_;
    std::vector<int> tree_features_;
    DecisionTree tree_;
    Eigen::VectorXd importance_;
    std::vector<std::pair<double, int>> scratch_;
};

}  // namespace

ForestModel train_forest(const Eigen::Ref<const RowMatrixXd>& X, const Eigen::Ref<const Eigen::VectorXi>& y,
                         const ForestConfig& config, unsigned jobs) {
    config.validate();
    if (X.rows() == 0) throw EmptyInputError("train_forest: no training rows");
    if (X.rows() != y.size()) throw ContractError("train_forest: X and y row counts differ");
    if (!X.allFinite()) throw NumericInputError("train_forest: non-finite feature value");

    ForestModel model;
    model.config = config;
    model.n_features = static_cast<int>(X.cols());
    model.trees.resize(static_cast<std::size_t>(config.n_estimators));
    std::vector<Eigen::VectorXd> per_tree(model.trees.size());

    parallel_for(model.trees.size(), jobs, [&](std::size_t t) {
        TreeBuilder builder(X, y, config, static_cast<int>(t));
        model.trees[t] = builder.build();
        per_tree[t] = builder.importance();
    });

    model.importances = Eigen::VectorXd::Zero(X.cols());
    for (const auto& imp : per_tree) model.importances += imp;
    const double total = model.importances.sum();
    if (total > 0.0) model.importances /= total;
    else model.importances.setZero();
    return model;
}

ForestModel train_forest(const Dataset& data, const ForestConfig& config, unsigned jobs) {
    return train_forest(data.X, data.y, config, jobs);
}

GridResult grid_search_forest(const Dataset& data, const ForestGrid& grid, const ForestConfig& base,
                              double threshold, std::uint64_t split_seed, unsigned jobs) {
    std::vector<ForestConfig> points;
    for (int est : grid.n_estimators)
        for (const auto& depth : grid.max_depths)
            for (int mf : grid.max_features)
                for (int mss : grid.min_samples_split) {
                    ForestConfig c = base;
                    c.n_estimators = est;
                    c.max_depth = depth;
                    c.max_features = mf;
                    c.min_samples_split = mss;
                    c.validate();
                    points.push_back(c);
                }
    if (points.empty()) throw ConfigError("grid_search_forest: empty grid");

    const auto [train, test] = split_train_test(data, 0.7, split_seed);
    const std::span<const int> test_labels(test.y.data(), test.size());

    std::vector<GridRow> rows(points.size());
    parallel_for(points.size(), jobs, [&](std::size_t i) {
        const ForestModel model = train_forest(train, points[i]);
        rows[i] = {points[i], compute_metrics(model.predict_proba(test), test_labels, threshold)};
    });

    auto depth_key = [](const std::optional<int>& d) { return d ? *d : std::numeric_limits<int>::max(); };
    std::stable_sort(rows.begin(), rows.end(), [&](const GridRow& a, const GridRow& b) {
        if (a.report.f1 != b.report.f1) return a.report.f1 > b.report.f1;
        if (a.config.n_estimators != b.config.n_estimators) return a.config.n_estimators < b.config.n_estimators;
        return depth_key(a.config.max_depth) < depth_key(b.config.max_depth);
    });

    GridResult result;
    result.best = rows.front().config;
    result.table = std::move(rows);
    return result;
}

// ---------------------------------------------------------------- persistence

namespace {

constexpr const char* kForestFormat = "botwin.forest";
constexpr int kForestVersion = 1;

}  // namespace

void save_forest(std::ostream& out, const ForestModel& model) {
    using nlohmann::json;
    json cfg = {
        {"n_estimators", model.config.n_estimators},
        {"max_features", model.config.max_features},
        {"max_depth", model.config.max_depth ? json(*model.config.max_depth) : json(nullptr)},
        {"min_samples_split", model.config.min_samples_split},
        {"seed", model.config.seed},
        {"per_tree_features", model.config.per_tree_features},
        {"bootstrap", model.config.bootstrap},
    };
    json trees = json::array();
    for (const auto& t : model.trees) {
        json nodes = json::array();
        for (const auto& n : t.nodes)
            nodes.push_back({n.feature_id, n.threshold, n.left, n.right, n.attack_fraction, n.n_samples});
        trees.push_back({{"nodes", std::move(nodes)}});
    }
    std::vector<double> imp(model.importances.data(), model.importances.data() + model.importances.size());
    const json doc = {
        {"format", kForestFormat},
        {"version", kForestVersion},
        {"node_layout", {"feature_id", "threshold", "left", "right", "attack_fraction", "n_samples"}},
        {"config", std::move(cfg)},
        {"n_features", model.n_features},
        {"importances", std::move(imp)},
        {"trees", std::move(trees)},
    };
    out << doc.dump(1) << '\n';
}

ForestModel load_forest(std::istream& in) {
    using nlohmann::json;
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw FormatError(std::string("forest model: ") + e.what());
    }
    try {
        if (doc.at("format").get<std::string>() != kForestFormat)
            throw FormatError("forest model: not a forest model file");
        if (doc.at("version").get<int>() != kForestVersion)
            throw FormatError("forest model: unsupported version " + doc.at("version").dump());

        ForestModel model;
        const json& cfg = doc.at("config");
        model.config.n_estimators = cfg.at("n_estimators").get<int>();
        model.config.max_features = cfg.at("max_features").get<int>();
        if (!cfg.at("max_depth").is_null()) model.config.max_depth = cfg.at("max_depth").get<int>();
        model.config.min_samples_split = cfg.at("min_samples_split").get<int>();
        model.config.seed = cfg.at("seed").get<std::uint64_t>();
        model.config.per_tree_features = cfg.at("per_tree_features").get<bool>();
        model.config.bootstrap = cfg.at("bootstrap").get<bool>();
        model.n_features = doc.at("n_features").get<int>();

        const auto imp = doc.at("importances").get<std::vector<double>>();
        if (static_cast<int>(imp.size()) != model.n_features)
            throw FormatError("forest model: importances length differs from n_features");
        model.importances = Eigen::Map<const Eigen::VectorXd>(imp.data(), static_cast<Eigen::Index>(imp.size()));

        for (const json& t : doc.at("trees")) {
            DecisionTree tree;
            for (const json& n : t.at("nodes")) {
                TreeNode node;
                node.feature_id = n.at(0).get<int>();
                node.threshold = n.at(1).get<double>();
                node.left = n.at(2).get<int>();
                node.right = n.at(3).get<int>();
                node.attack_fraction = n.at(4).get<double>();
                node.n_samples = n.at(5).get<int>();
                tree.nodes.push_back(node);
            }
            const auto count = static_cast<int>(tree.nodes.size());
            if (count == 0) throw FormatError("forest model: empty tree");
            for (int i = 0; i < count; ++i) {
                const TreeNode& node = tree.nodes[static_cast<std::size_t>(i)];
                if (node.is_leaf()) continue;
                // Children always follow their parent, which also rules out cycles.
                if (node.feature_id < 1 || node.feature_id > model.n_features || node.left <= i ||
                    node.right <= i || node.left >= count || node.right >= count)
                    throw FormatError("forest model: malformed node");
            }
            model.trees.push_back(std::move(tree));
        }
        if (static_cast<int>(model.trees.size()) != model.config.n_estimators)
            throw FormatError("forest model: tree count differs from n_estimators");
        return model;
    } catch (const json::exception& e) {
        throw FormatError(std::string("forest model: ") + e.what());
    }
}

}  // namespace botwin
