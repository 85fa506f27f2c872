#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "fbnll/dataset.hpp"
#include "fbnll/rng.hpp"

namespace fbnll {

struct TrainOptions {
    int epochs = 2;
    double learning_rate = 5e-4;
    int batch_size = 64;
    double momentum = 0.5;
    double weight_decay = 1e-3;
};

/// Local learner contract: flat parameter vectors in, flat parameter vectors
/// out, deterministic given the seed.
class LocalLearner {
public:
    virtual ~LocalLearner() = default;
    virtual Eigen::Index parameter_count() const = 0;
    virtual Eigen::VectorXd init(std::uint64_t seed) const = 0;
    virtual Eigen::VectorXd train(const Eigen::VectorXd& params, const LabeledDataset& ds,
                                  const TrainOptions& opts, std::uint64_t seed) const = 0;
    virtual double loss(const Eigen::VectorXd& params, const LabeledDataset& ds) const = 0;
    virtual double accuracy(const Eigen::VectorXd& params, const LabeledDataset& ds) const = 0;
};

struct LogisticLearnerConfig {
    Eigen::Index input_dim = 0;
    int num_classes = 2;
    Eigen::Index hidden_dim = 0;  // 0: plain multinomial logistic regression
    double init_scale = 0.01;
};

/// Multinomial logistic regression on feature vectors, optionally with one
/// tanh hidden layer. SGD with momentum and L2 weight decay applied in the
/// update step; mini-batches are reshuffled each epoch with the seeded
/// generator, so training is bit-reproducible.
class LogisticLearner final : public LocalLearner {
public:
    explicit LogisticLearner(LogisticLearnerConfig cfg) : cfg_(cfg) {
        if (cfg_.input_dim < 1 || cfg_.num_classes < 2)
            throw ConfigError("learner needs input_dim >= 1 and num_classes >= 2");
        if (cfg_.hidden_dim < 0) throw ConfigError("hidden_dim must be >= 0");
    }

    const LogisticLearnerConfig& config() const { return cfg_; }

    Eigen::Index parameter_count() const override {
        const Eigen::Index d = cfg_.input_dim, c = cfg_.num_classes, h = cfg_.hidden_dim;
        return h == 0 ? c * d + c : h * d + h + c * h + c;
    }

    Eigen::VectorXd init(std::uint64_t seed) const override {
        auto rng = make_rng(seed);
        Eigen::VectorXd params(parameter_count());
        for (Eigen::Index i = 0; i < params.size(); ++i)
            params[i] = cfg_.init_scale * gaussian(rng);
        return params;
    }

    Eigen::VectorXd train(const Eigen::VectorXd& params, const LabeledDataset& ds,
                          const TrainOptions& opts, std::uint64_t seed) const override {
        check_params(params);
        if (ds.size() == 0) return params;
        if (ds.dim() != cfg_.input_dim)
            throw ShapeError("dataset dimension " + std::to_string(ds.dim()) +
                             " does not match learner input " + std::to_string(cfg_.input_dim));
        if (opts.batch_size < 1) throw ConfigError("batch size must be >= 1");

        auto rng = make_rng(seed);
        Eigen::VectorXd w = params;
        Eigen::VectorXd velocity = Eigen::VectorXd::Zero(params.size());
        const auto n = static_cast<std::size_t>(ds.size());
        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;

        for (int epoch = 0; epoch < opts.epochs; ++epoch) {
            shuffle(perm, rng);
            for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(opts.batch_size)) {
                const std::size_t stop = std::min(n, start + static_cast<std::size_t>(opts.batch_size));
                const Eigen::VectorXd grad = batch_gradient(w, ds, perm, start, stop);
                velocity = opts.momentum * velocity + (grad + opts.weight_decay * w);
                w -= opts.learning_rate * velocity;
            }
        }
        return w;
    }

    double loss(const Eigen::VectorXd& params, const LabeledDataset& ds) const override {
        check_params(params);
        if (ds.size() == 0) return 0.0;
        const Eigen::MatrixXd logits = forward(params, ds.features.cast<double>());
        double total = 0.0;
        for (Eigen::Index i = 0; i < ds.size(); ++i) {
            const auto row = logits.row(i);
            const double mx = row.maxCoeff();
            const double lse = mx + std::log((row.array() - mx).exp().sum());
            total += lse - row[ds.observed_labels[static_cast<std::size_t>(i)]];
        }
        return total / static_cast<double>(ds.size());
    }

    double accuracy(const Eigen::VectorXd& params, const LabeledDataset& ds) const override {
        check_params(params);
        if (ds.size() == 0) return 0.0;
        const Eigen::MatrixXd logits = forward(params, ds.features.cast<double>());
        Eigen::Index hits = 0;
        for (Eigen::Index i = 0; i < ds.size(); ++i) {
            Eigen::Index arg = 0;
            logits.row(i).maxCoeff(&arg);  // first maximum on ties
            if (static_cast<int>(arg) == ds.observed_labels[static_cast<std::size_t>(i)]) ++hits;
        }
        return static_cast<double>(hits) / static_cast<double>(ds.size());
    }

    /// Mean cross-entropy gradient over the whole dataset (no weight decay).
    Eigen::VectorXd gradient(const Eigen::VectorXd& params, const LabeledDataset& ds) const {
        check_params(params);
        std::vector<std::size_t> idx(static_cast<std::size_t>(ds.size()));
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        return batch_gradient(params, ds, idx, 0, idx.size());
    }

private:
    void check_params(const Eigen::VectorXd& params) const {
        if (params.size() != parameter_count())
            throw ShapeError("parameter vector has length " + std::to_string(params.size()) +
                             ", learner expects " + std::to_string(parameter_count()));
    }

    // Views into the flat parameter vector.
    struct Linear {
        Eigen::Map<const Eigen::MatrixXd> weight;
        Eigen::Map<const Eigen::VectorXd> bias;
    };
    Linear layer(const Eigen::VectorXd& p, Eigen::Index offset, Eigen::Index out,
                 Eigen::Index in) const {
        return {Eigen::Map<const Eigen::MatrixXd>(p.data() + offset, out, in),
                Eigen::Map<const Eigen::VectorXd>(p.data() + offset + out * in, out)};
    }

    Eigen::MatrixXd forward(const Eigen::VectorXd& p, const Eigen::MatrixXd& x) const {
        const Eigen::Index d = cfg_.input_dim, c = cfg_.num_classes, h = cfg_.hidden_dim;
        if (h == 0) {
            const Linear out = layer(p, 0, c, d);
            return ((x * out.weight.transpose()).rowwise() + out.bias.transpose());
        }
        const Linear l1 = layer(p, 0, h, d);
        const Linear l2 = layer(p, h * d + h, c, h);
        const Eigen::MatrixXd hidden =
            ((x * l1.weight.transpose()).rowwise() + l1.bias.transpose()).array().tanh();
        return ((hidden * l2.weight.transpose()).rowwise() + l2.bias.transpose());
    }

    Eigen::VectorXd batch_gradient(const Eigen::VectorXd& p, const LabeledDataset& ds,
                                   const std::vector<std::size_t>& order, std::size_t start,
                                   std::size_t stop) const {
        const Eigen::Index d = cfg_.input_dim, c = cfg_.num_classes, h = cfg_.hidden_dim;
        const auto b = static_cast<Eigen::Index>(stop - start);
        Eigen::MatrixXd x(b, d);
        for (Eigen::Index i = 0; i < b; ++i)
            x.row(i) = ds.features.row(static_cast<Eigen::Index>(order[start + static_cast<std::size_t>(i)]))
                           .cast<double>();

        Eigen::VectorXd grad = Eigen::VectorXd::Zero(p.size());
        auto softmax_residual = [&](const Eigen::MatrixXd& logits) {
            Eigen::MatrixXd probs(b, c);
            for (Eigen::Index i = 0; i < b; ++i) {
                const double mx = logits.row(i).maxCoeff();
                probs.row(i) = (logits.row(i).array() - mx).exp();
                probs.row(i) /= probs.row(i).sum();
                probs(i, ds.observed_labels[order[start + static_cast<std::size_t>(i)]]) -= 1.0;
            }
            return Eigen::MatrixXd(probs / static_cast<double>(b));
        };

        if (h == 0) {
            const Linear out = layer(p, 0, c, d);
            const Eigen::MatrixXd logits = (x * out.weight.transpose()).rowwise() + out.bias.transpose();
            const Eigen::MatrixXd g = softmax_residual(logits);
            Eigen::Map<Eigen::MatrixXd>(grad.data(), c, d) = g.transpose() * x;
            Eigen::Map<Eigen::VectorXd>(grad.data() + c * d, c) = g.colwise().sum().transpose();
            return grad;
        }

        const Linear l1 = layer(p, 0, h, d);
        const Linear l2 = layer(p, h * d + h, c, h);
        const Eigen::MatrixXd hidden =
            ((x * l1.weight.transpose()).rowwise() + l1.bias.transpose()).array().tanh();
        const Eigen::MatrixXd logits = (hidden * l2.weight.transpose()).rowwise() + l2.bias.transpose();
        const Eigen::MatrixXd g = softmax_residual(logits);
        const Eigen::MatrixXd dhidden =
            (g * l2.weight).array() * (1.0 - hidden.array().square());
        Eigen::Map<Eigen::MatrixXd>(grad.data(), h, d) = dhidden.transpose() * x;
        Eigen::Map<Eigen::VectorXd>(grad.data() + h * d, h) = dhidden.colwise().sum().transpose();
        Eigen::Map<Eigen::MatrixXd>(grad.data() + h * d + h, c, h) = g.transpose() * hidden;
        Eigen::Map<Eigen::VectorXd>(grad.data() + h * d + h + c * h, c) =
            g.colwise().sum().transpose();
        return grad;
    }

    LogisticLearnerConfig cfg_;
};

}  // namespace fbnll
