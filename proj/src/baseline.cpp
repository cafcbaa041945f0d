#include "scs/baseline.hpp"

#include <algorithm>
#include <cmath>

#include "scs/errors.hpp"
#include "scs/ngram.hpp"
#include "scs/rng.hpp"

namespace scs {

namespace {

double dot_normalized(const std::vector<double>& weights, double bias,
                      const std::map<std::uint32_t, std::uint32_t>& counts) {
    double total = 0.0;
    for (const auto& [id, c] : counts) total += c;
    double z = bias;
    if (total > 0.0) {
        for (const auto& [id, c] : counts) {
            if (id < weights.size()) z += weights[id] * (static_cast<double>(c) / total);
        }
    }
    return z;
}

double sigmoid_scalar(double x) {
    return 1.0 / (1.0 + std::exp(-x));
}

std::size_t required_width(const std::vector<CountSample>& data) {
    std::size_t width = 2;  // reserved ids always addressable
    for (const auto& s : data) {
        if (!s.counts.empty()) width = std::max(width, static_cast<std::size_t>(s.counts.rbegin()->first) + 1);
    }
    return width;
}

}  // namespace

double baseline_loss(const LinearModel& model, const std::vector<CountSample>& data) {
    double sum = 0.0;
    for (const auto& s : data) {
        double p = sigmoid_scalar(dot_normalized(model.weights, model.bias, s.counts));
        p = std::min(std::max(p, 1e-12), 1.0 - 1e-12);
        sum += s.label == 1 ? -std::log(p) : -std::log(1.0 - p);
    }
    double sq = 0.0;
    for (double w : model.weights) sq += w * w;
    return sum / static_cast<double>(data.size()) + 0.5 * model.lambda * sq;
}

std::pair<std::vector<double>, double> baseline_gradient(const LinearModel& model,
                                                         const std::vector<CountSample>& data) {
    std::vector<double> grad(model.weights.size(), 0.0);
    double grad_b = 0.0;
    const double inv_n = 1.0 / static_cast<double>(data.size());
    for (const auto& s : data) {
        double total = 0.0;
        for (const auto& [id, c] : s.counts) total += c;
        const double p = sigmoid_scalar(dot_normalized(model.weights, model.bias, s.counts));
        const double err = (p - static_cast<double>(s.label)) * inv_n;
        grad_b += err;
        if (total > 0.0) {
            for (const auto& [id, c] : s.counts) {
                if (id < grad.size()) grad[id] += err * (static_cast<double>(c) / total);
            }
        }
    }
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += model.lambda * model.weights[i];
    return {std::move(grad), grad_b};
}

LinearModel baseline_train(const std::vector<CountSample>& data, double lambda,
                           std::size_t epochs, double learning_rate, std::uint64_t seed) {
    if (data.empty()) throw Error(ErrorKind::data, "empty baseline training set");
    bool has0 = false, has1 = false;
    for (const auto& s : data) (s.label == 0 ? has0 : has1) = true;
    if (!has0) throw MissingClass(0);
    if (!has1) throw MissingClass(1);

    const std::size_t width = required_width(data);
    LinearModel model;
    model.lambda = lambda;
    model.weights.assign(width, 0.0);
    Rng rng(seed);
    for (auto& w : model.weights) w = rng.uniform(-0.01, 0.01);
    model.bias = 0.0;

    const double inv_n = 1.0 / static_cast<double>(data.size());
    std::vector<double> grad(width);
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_b = 0.0;
        for (const auto& s : data) {
            double total = 0.0;
            for (const auto& [id, c] : s.counts) total += c;
            const double p =
                sigmoid_scalar(dot_normalized(model.weights, model.bias, s.counts));
            const double err = (p - static_cast<double>(s.label)) * inv_n;
            grad_b += err;
            if (total > 0.0) {
                for (const auto& [id, c] : s.counts) {
                    grad[id] += err * (static_cast<double>(c) / total);
                }
            }
        }
        for (std::size_t i = 0; i < width; ++i) {
            model.weights[i] -= learning_rate * (grad[i] + lambda * model.weights[i]);
        }
        model.bias -= learning_rate * grad_b;
    }
    return model;
}

double baseline_predict(const LinearModel& model,
                        const std::map<std::uint32_t, std::uint32_t>& counts) {
    return sigmoid_scalar(dot_normalized(model.weights, model.bias, counts));
}

}  // namespace scs
