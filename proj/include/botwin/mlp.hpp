#pragma once

#include "botwin/error.hpp"
#include "botwin/features.hpp"
#include "botwin/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <numeric>
#include <string_view>
#include <vector>

namespace botwin {

enum class Activation { ReLU, Tanh, Sigmoid, LeakyReLU };

Activation parse_activation(std::string_view s);
std::string_view to_string(Activation a);

struct MlpConfig {
    std::vector<int> hidden_sizes = {64, 32};
    Activation activation = Activation::ReLU;
    double dropout_rate = 0.5;  // after every hidden layer, training only
    int epochs = 50;
    int batch_size = 32;
    double learning_rate = 0.01;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Feed-forward binary classifier: standardisation, hidden layers with the
/// configured activation, one sigmoid output unit.
template <class Scalar>
struct BasicMlpModel {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    MlpConfig config;
    std::vector<Matrix> weights;  // weights[l] is (fan_out x fan_in)
    std::vector<Vector> biases;
    Vector mean;   // per-input standardisation
    Vector scale;  // population stddev, 1 where a column is constant

    Eigen::Index n_inputs() const { return weights.empty() ? 0 : weights.front().cols(); }
    std::size_t n_layers() const { return weights.size(); }

    template <class Other>
    BasicMlpModel<Other> cast() const {
        BasicMlpModel<Other> out;
        out.config = config;
        for (const auto& w : weights) out.weights.push_back(w.template cast<Other>());
        for (const auto& b : biases) out.biases.push_back(b.template cast<Other>());
        out.mean = mean.template cast<Other>();
        out.scale = scale.template cast<Other>();
        return out;
    }
};

using MlpModel = BasicMlpModel<double>;

namespace mlp_detail {

template <class Scalar>
Scalar sigmoid(Scalar z) {
    if (z >= 0) return Scalar(1) / (Scalar(1) + std::exp(-z));
    const Scalar e = std::exp(z);
    return e / (Scalar(1) + e);
}

template <class Derived>
auto activate(const Eigen::MatrixBase<Derived>& z, Activation a) {
    using Scalar = typename Derived::Scalar;
    using Plain = typename Derived::PlainObject;
    switch (a) {
    case Activation::ReLU: return Plain(z.array().max(Scalar(0)).matrix());
    case Activation::Tanh: return Plain(z.array().tanh().matrix());
    case Activation::Sigmoid: return Plain(z.unaryExpr([](Scalar v) { return sigmoid(v); }));
    case Activation::LeakyReLU:
        return Plain(z.unaryExpr([](Scalar v) { return v > Scalar(0) ? v : Scalar(0.01) * v; }));
    }
    return Plain(z);
}

/// Derivative of the activation at pre-activation `z` (ReLU uses 0 at 0).
template <class Derived>
auto activate_grad(const Eigen::MatrixBase<Derived>& z, Activation a) {
    using Scalar = typename Derived::Scalar;
    using Plain = typename Derived::PlainObject;
    switch (a) {
    case Activation::ReLU: return Plain(z.unaryExpr([](Scalar v) { return v > Scalar(0) ? Scalar(1) : Scalar(0); }));
    case Activation::Tanh: return Plain((Scalar(1) - z.array().tanh().square()).matrix());
    case Activation::Sigmoid:
        return Plain(z.unaryExpr([](Scalar v) {
            const Scalar s = sigmoid(v);
            return s * (Scalar(1) - s);
        }));
    case Activation::LeakyReLU:
        return Plain(z.unaryExpr([](Scalar v) { return v > Scalar(0) ? Scalar(1) : Scalar(0.01); }));
    }
    return Plain(z);
}

}  // namespace mlp_detail

/// Binary cross-entropy with the probability clamped to [1e-12, 1 - 1e-12].
template <class Scalar>
Scalar bce_loss(Scalar p, Scalar y) {
    const Scalar eps = Scalar(1e-12);
    const Scalar q = std::clamp(p, eps, Scalar(1) - eps);
    return -(y * std::log(q) + (Scalar(1) - y) * std::log(Scalar(1) - q));
}

/// Glorot-uniform weights, zero biases, identity standardisation.
template <class Scalar>
BasicMlpModel<Scalar> init_mlp(Eigen::Index n_inputs, const MlpConfig& config, Rng& rng) {
    config.validate();
    BasicMlpModel<Scalar> m;
    m.config = config;
    std::vector<Eigen::Index> dims{n_inputs};
    for (int h : config.hidden_sizes) dims.push_back(h);
    dims.push_back(1);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const double limit = std::sqrt(6.0 / static_cast<double>(dims[l] + dims[l + 1]));
        std::uniform_real_distribution<double> u(-limit, limit);
        typename BasicMlpModel<Scalar>::Matrix w(dims[l + 1], dims[l]);
        for (Eigen::Index c = 0; c < w.cols(); ++c)
            for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = static_cast<Scalar>(u(rng));
        m.weights.push_back(std::move(w));
        m.biases.push_back(BasicMlpModel<Scalar>::Vector::Zero(dims[l + 1]));
    }
    m.mean = BasicMlpModel<Scalar>::Vector::Zero(n_inputs);
    m.scale = BasicMlpModel<Scalar>::Vector::Ones(n_inputs);
    return m;
}

/// Activations of one forward pass over a batch (columns are samples).
template <class Scalar>
struct ForwardPass {
    using Matrix = typename BasicMlpModel<Scalar>::Matrix;
    std::vector<Matrix> pre;    // z per layer
    std::vector<Matrix> post;   // post[0] is the standardised input, post[l+1] the output of layer l
    std::vector<Matrix> masks;  // dropout multipliers per hidden layer (empty at inference)

    auto probabilities() const { return post.back().row(0); }
};

/// Runs the network on `inputs` (n_inputs x batch, raw feature scale). When
/// `rng` is given, hidden activations are dropped with the configured rate
/// and survivors rescaled by 1/(1-rate).
template <class Scalar>
ForwardPass<Scalar> forward_batch(const BasicMlpModel<Scalar>& model,
                                  const Eigen::Ref<const typename BasicMlpModel<Scalar>::Matrix>& inputs,
                                  Rng* rng = nullptr) {
    using Matrix = typename BasicMlpModel<Scalar>::Matrix;
    if (inputs.rows() != model.n_inputs()) throw ContractError("mlp: input width does not match the model");
    if (!inputs.allFinite()) throw NumericInputError("mlp: non-finite input");

    ForwardPass<Scalar> pass;
    pass.post.push_back(((inputs.colwise() - model.mean).array().colwise() / model.scale.array()).matrix());
    const std::size_t L = model.n_layers();
    const double keep = 1.0 - model.config.dropout_rate;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t l = 0; l < L; ++l) {
        Matrix z = (model.weights[l] * pass.post.back()).colwise() + model.biases[l];
        Matrix a;
        if (l + 1 < L) {
            a = mlp_detail::activate(z, model.config.activation);
            if (rng && model.config.dropout_rate > 0.0) {
                Matrix mask(a.rows(), a.cols());
                for (Eigen::Index c = 0; c < mask.cols(); ++c)
                    for (Eigen::Index r = 0; r < mask.rows(); ++r)
                        mask(r, c) = u(*rng) < keep ? static_cast<Scalar>(1.0 / keep) : Scalar(0);
                a = a.cwiseProduct(mask);
                pass.masks.push_back(std::move(mask));
            }
        } else {
            a = z.unaryExpr([](Scalar v) { return mlp_detail::sigmoid(v); });
        }
        pass.pre.push_back(std::move(z));
        pass.post.push_back(std::move(a));
    }
    return pass;
}

/// Attack probability of one raw feature vector; `training` enables dropout
/// and then needs `rng`.
template <class Scalar>
Scalar forward(const BasicMlpModel<Scalar>& model,
               const Eigen::Ref<const typename BasicMlpModel<Scalar>::Vector>& x, bool training = false,
               Rng* rng = nullptr) {
    if (training && !rng) throw ContractError("mlp forward: training mode needs an rng");
    const auto pass = forward_batch<Scalar>(model, x, training ? rng : nullptr);
    return pass.post.back()(0, 0);
}

template <class Scalar>
struct MlpGradients {
    std::vector<typename BasicMlpModel<Scalar>::Matrix> weights;
    std::vector<typename BasicMlpModel<Scalar>::Vector> biases;
};

/// Gradient of the mean cross-entropy over the batch in `pass` w.r.t. every
/// weight and bias.
template <class Scalar>
MlpGradients<Scalar> backward(const BasicMlpModel<Scalar>& model, const ForwardPass<Scalar>& pass,
                              const Eigen::Ref<const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>>& labels) {
    using Matrix = typename BasicMlpModel<Scalar>::Matrix;
    const std::size_t L = model.n_layers();
    const auto batch = static_cast<Scalar>(labels.size());
    MlpGradients<Scalar> g;
    g.weights.resize(L);
    g.biases.resize(L);

    Matrix delta = (pass.post.back() - labels) / batch;
    for (std::size_t l = L; l-- > 0;) {
        g.weights[l] = delta * pass.post[l].transpose();
        g.biases[l] = delta.rowwise().sum();
        if (l == 0) break;
        Matrix back = model.weights[l].transpose() * delta;
        back = back.cwiseProduct(mlp_detail::activate_grad(pass.pre[l - 1], model.config.activation));
        if (!pass.masks.empty()) back = back.cwiseProduct(pass.masks[l - 1]);
        delta = std::move(back);
    }
    return g;
}

template <class Scalar>
Scalar mean_loss(const BasicMlpModel<Scalar>& model,
                 const Eigen::Ref<const typename BasicMlpModel<Scalar>::Matrix>& inputs,
                 const Eigen::Ref<const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>>& labels) {
    const auto pass = forward_batch<Scalar>(model, inputs);
    Scalar sum = 0;
    for (Eigen::Index i = 0; i < labels.size(); ++i) sum += bce_loss(pass.post.back()(0, i), labels(i));
    return sum / static_cast<Scalar>(labels.size());
}

struct GradientCheckResult {
    double max_relative_error = 0.0;
    std::vector<double> analytic;  // flattened: for each layer, weights (column-major) then biases
    std::vector<double> numeric;
};

/// Compares back-propagated gradients with central differences of the loss
/// on one sample, dropout disabled. Relative error per parameter is
/// |a - n| / max(|a|, |n|), taken as 0 when both vanish.
template <class Scalar>
GradientCheckResult gradient_check(const BasicMlpModel<Scalar>& model,
                                   const Eigen::Ref<const typename BasicMlpModel<Scalar>::Vector>& x, int y,
                                   Scalar step = Scalar(1e-5)) {
    using Matrix = typename BasicMlpModel<Scalar>::Matrix;
    const Matrix input = x;
    Eigen::Matrix<Scalar, 1, Eigen::Dynamic> label(1);
    label(0) = static_cast<Scalar>(y);

    const auto grads = backward<Scalar>(model, forward_batch<Scalar>(model, input), label);
    BasicMlpModel<Scalar> probe = model;
    GradientCheckResult out;

    auto check = [&](Scalar& param, Scalar analytic) {
        const Scalar saved = param;
        param = saved + step;
        const Scalar up = mean_loss<Scalar>(probe, input, label);
        param = saved - step;
        const Scalar down = mean_loss<Scalar>(probe, input, label);
        param = saved;
        const Scalar numeric = (up - down) / (Scalar(2) * step);
        const Scalar denom = std::max(std::abs(analytic), std::abs(numeric));
        const double rel = denom > Scalar(0) ? static_cast<double>(std::abs(analytic - numeric) / denom) : 0.0;
        out.max_relative_error = std::max(out.max_relative_error, rel);
        out.analytic.push_back(static_cast<double>(analytic));
        out.numeric.push_back(static_cast<double>(numeric));
    };

    for (std::size_t l = 0; l < probe.n_layers(); ++l) {
        for (Eigen::Index c = 0; c < probe.weights[l].cols(); ++c)
            for (Eigen::Index r = 0; r < probe.weights[l].rows(); ++r) check(probe.weights[l](r, c), grads.weights[l](r, c));
        for (Eigen::Index r = 0; r < probe.biases[l].size(); ++r) check(probe.biases[l](r), grads.biases[l](r));
    }
    return out;
}

// ---------------------------------------------------------------- training

struct MlpTrainResult {
    MlpModel model;
    std::vector<double> loss_curve;  // mean training loss after each epoch, inference mode
    bool single_class = false;       // training data held one label only
};

/// Mini-batch SGD on mean binary cross-entropy. Standardisation statistics
/// come from `data`. Deterministic for a given config.seed.
MlpTrainResult train_mlp(const Dataset& data, const MlpConfig& config);
MlpTrainResult train_mlp(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXi>& y,
                         const MlpConfig& config);

std::vector<double> predict_proba(const MlpModel& model, const Dataset& data);
std::vector<double> predict_proba(const MlpModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X);

void save_mlp(std::ostream& out, const MlpModel& model);
MlpModel load_mlp(std::istream& in);

}  // namespace botwin
