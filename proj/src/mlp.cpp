#include "botwin/mlp.hpp"

#include "botwin/text.hpp"

#include <json.hpp>

#include <istream>
#include <ostream>

namespace botwin {

Activation parse_activation(std::string_view s) {
    const std::string lower = text::to_lower(text::trim(s));
    if (lower == "relu") return Activation::ReLU;
    if (lower == "tanh") return Activation::Tanh;
    if (lower == "sigmoid") return Activation::Sigmoid;
    if (lower == "leakyrelu" || lower == "leaky_relu" || lower == "leaky-relu") return Activation::LeakyReLU;
    throw ConfigError("unknown activation '" + std::string(s) + "'");
}

std::string_view to_string(Activation a) {
    switch (a) {
    case Activation::ReLU: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::LeakyReLU: return "leakyrelu";
    }
    return "relu";
}

void MlpConfig::validate() const {
    if (hidden_sizes.empty()) throw ConfigError("mlp: at least one hidden layer is required");
    for (int h : hidden_sizes)
        if (h < 1) throw ConfigError("mlp: hidden layer sizes must be >= 1");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("mlp: dropout rate must be in [0, 1)");
    if (epochs < 0) throw ConfigError("mlp: epochs must be >= 0");
    if (batch_size < 1) throw ConfigError("mlp: batch size must be >= 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("mlp: bad learning rate");
}

MlpTrainResult train_mlp(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXi>& y,
                         const MlpConfig& config) {
    config.validate();
    const Eigen::Index n = X.rows();
    if (n == 0) throw EmptyInputError("train_mlp: no training rows");
    if (y.size() != n) throw ContractError("train_mlp: X and y row counts differ");
    if (n < config.batch_size) throw ContractError("train_mlp: fewer rows than one batch");
    if (!X.allFinite()) throw NumericInputError("train_mlp: non-finite feature value");

    MlpTrainResult result;
    const Eigen::Index positives = y.count();
    result.single_class = positives == 0 || positives == n;

    Rng rng(config.seed);
    MlpModel& model = result.model;
    model = init_mlp<double>(X.cols(), config, rng);
    model.mean = X.colwise().mean().transpose();
    model.scale = ((X.rowwise() - model.mean.transpose()).array().square().colwise().sum() / static_cast<double>(n))
                      .sqrt()
                      .transpose();
    for (Eigen::Index c = 0; c < model.scale.size(); ++c)
        if (!(model.scale(c) > 0.0)) model.scale(c) = 1.0;

    const Eigen::MatrixXd inputs = X.transpose();
    const Eigen::RowVectorXd labels = y.cast<double>().transpose();

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const auto batch = static_cast<Eigen::Index>(config.batch_size);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (Eigen::Index start = 0; start < n; start += batch) {
            const Eigen::Index size = std::min(batch, n - start);
            Eigen::MatrixXd xb(inputs.rows(), size);
            Eigen::RowVectorXd yb(size);
            for (Eigen::Index j = 0; j < size; ++j) {
                const Eigen::Index src = order[static_cast<std::size_t>(start + j)];
                xb.col(j) = inputs.col(src);
                yb(j) = labels(src);
            }
            const auto pass = forward_batch<double>(model, xb, &rng);
            const auto grads = backward<double>(model, pass, yb);
            for (std::size_t l = 0; l < model.n_layers(); ++l) {
                model.weights[l] -= config.learning_rate * grads.weights[l];
                model.biases[l] -= config.learning_rate * grads.biases[l];
            }
        }
        result.loss_curve.push_back(mean_loss<double>(model, inputs, labels));
    }
    return result;
}

MlpTrainResult train_mlp(const Dataset& data, const MlpConfig& config) { return train_mlp(data.X, data.y, config); }

std::vector<double> predict_proba(const MlpModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X) {
    const Eigen::MatrixXd inputs = X.transpose();
    const auto pass = forward_batch<double>(model, inputs);
    const auto p = pass.probabilities();
    return std::vector<double>(p.begin(), p.end());
}

std::vector<double> predict_proba(const MlpModel& model, const Dataset& data) {
    if (data.size() == 0) return {};
    return predict_proba(model, Eigen::MatrixXd(data.X));
}

// ---------------------------------------------------------------- persistence

namespace {

constexpr const char* kMlpFormat = "botwin.mlp";
constexpr int kMlpVersion = 1;

nlohmann::json to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    const auto rows = j.get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw FormatError("mlp model: empty matrix");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows.front().size()) throw FormatError("mlp model: ragged matrix");
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
    return m;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

void save_mlp(std::ostream& out, const MlpModel& model) {
    using nlohmann::json;
    json layers = json::array();
    for (std::size_t l = 0; l < model.n_layers(); ++l)
        layers.push_back({{"weights", to_json(model.weights[l])}, {"bias", to_std(model.biases[l])}});
    const json doc = {
        {"format", kMlpFormat},
        {"version", kMlpVersion},
        {"config",
         {{"hidden_sizes", model.config.hidden_sizes},
          {"activation", std::string(to_string(model.config.activation))},
          {"dropout_rate", model.config.dropout_rate},
          {"epochs", model.config.epochs},
          {"batch_size", model.config.batch_size},
          {"learning_rate", model.config.learning_rate},
          {"seed", model.config.seed}}},
        {"standardization", {{"mean", to_std(model.mean)}, {"scale", to_std(model.scale)}}},
        {"layers", std::move(layers)},
    };
    out << doc.dump(1) << '\n';
}

MlpModel load_mlp(std::istream& in) {
    using nlohmann::json;
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw FormatError(std::string("mlp model: ") + e.what());
    }
    try {
        if (doc.at("format").get<std::string>() != kMlpFormat) throw FormatError("mlp model: not an mlp model file");
        if (doc.at("version").get<int>() != kMlpVersion)
            throw FormatError("mlp model: unsupported version " + doc.at("version").dump());
        MlpModel model;
        const json& cfg = doc.at("config");
        model.config.hidden_sizes = cfg.at("hidden_sizes").get<std::vector<int>>();
        model.config.activation = parse_activation(cfg.at("activation").get<std::string>());
        model.config.dropout_rate = cfg.at("dropout_rate").get<double>();
        model.config.epochs = cfg.at("epochs").get<int>();
        model.config.batch_size = cfg.at("batch_size").get<int>();
        model.config.learning_rate = cfg.at("learning_rate").get<double>();
        model.config.seed = cfg.at("seed").get<std::uint64_t>();
        model.mean = vector_from_json(doc.at("standardization").at("mean"));
        model.scale = vector_from_json(doc.at("standardization").at("scale"));
        for (const json& layer : doc.at("layers")) {
            model.weights.push_back(matrix_from_json(layer.at("weights")));
            model.biases.push_back(vector_from_json(layer.at("bias")));
        }
        // Dimensions must chain from the inputs to a single output.
        if (model.weights.size() != model.config.hidden_sizes.size() + 1)
            throw FormatError("mlp model: layer count does not match hidden_sizes");
        Eigen::Index fan_in = model.mean.size();
        if (model.scale.size() != fan_in) throw FormatError("mlp model: standardization sizes differ");
        for (std::size_t l = 0; l < model.weights.size(); ++l) {
            if (model.weights[l].cols() != fan_in || model.biases[l].size() != model.weights[l].rows())
                throw FormatError("mlp model: layer " + std::to_string(l) + " has inconsistent dimensions");
            fan_in = model.weights[l].rows();
        }
        if (fan_in != 1) throw FormatError("mlp model: output layer must have one unit");
        return model;
    } catch (const json::exception& e) {
        throw FormatError(std::string("mlp model: ") + e.what());
    }
}

}  // namespace botwin
