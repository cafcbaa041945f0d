#include "scs/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "scs/errors.hpp"

namespace scs {

namespace {

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ShapeMismatch(std::string(op) + " on " + shape_str(a.shape()) + " vs " +
                            shape_str(b.shape()));
    }
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
    if (shape_numel(shape_) != values_.size()) {
        throw ShapeMismatch("tensor " + shape_str(shape_) + " given " +
                            std::to_string(values_.size()) + " values");
    }
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
    std::size_t n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<double>(n, 0.0));
}

std::size_t Tensor::rows() const {
    if (rank() != 2) throw ShapeMismatch("rows() on rank-" + std::to_string(rank()) + " tensor");
    return shape_[0];
}

std::size_t Tensor::cols() const {
    if (rank() != 2) throw ShapeMismatch("cols() on rank-" + std::to_string(rank()) + " tensor");
    return shape_[1];
}

double& Tensor::at(std::size_t r, std::size_t c) {
    return values_[r * cols() + c];
}

double Tensor::at(std::size_t r, std::size_t c) const {
    return values_[r * cols() + c];
}

void Tensor::fill(double v) {
    std::fill(values_.begin(), values_.end(), v);
}

bool Tensor::all_finite() const {
    for (double v : values_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows()) {
        throw ShapeMismatch("matmul " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
    }
    std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    Tensor out = Tensor::matrix(m, n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t l = 0; l < k; ++l) {
            double av = a.at(i, l);
            if (av == 0.0) continue;
            const double* brow = b.data() + l * n;
            double* orow = out.data() + i * n;
            for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    Tensor out = a;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] += b[i];
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    Tensor out = a;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= b[i];
    return out;
}

Tensor sigmoid(const Tensor& x) {
    Tensor out = x;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = 1.0 / (1.0 + std::exp(-out[i]));
    return out;
}

Tensor tanh_map(const Tensor& x) {
    Tensor out = x;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::tanh(out[i]);
    return out;
}

std::vector<double> softmax(const std::vector<double>& scores) {
    if (scores.empty()) throw ShapeMismatch("softmax of empty vector");
    double mx = *std::max_element(scores.begin(), scores.end());
    std::vector<double> out(scores.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = std::exp(scores[i] - mx);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

std::pair<Tensor, Tensor> matmul_backward(const Tensor& a, const Tensor& b,
                                          const Tensor& grad_out) {
    // d(a.b)/da = g . b^T,  d(a.b)/db = a^T . g
    std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    if (grad_out.rank() != 2 || grad_out.rows() != m || grad_out.cols() != n) {
        throw ShapeMismatch("matmul_backward upstream gradient shape");
    }
    Tensor ga = Tensor::matrix(m, k);
    Tensor gb = Tensor::matrix(k, n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t l = 0; l < k; ++l) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += grad_out.at(i, j) * b.at(l, j);
            ga.at(i, l) = s;
        }
    }
    for (std::size_t l = 0; l < k; ++l) {
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i) s += a.at(i, l) * grad_out.at(i, j);
            gb.at(l, j) = s;
        }
    }
    return {std::move(ga), std::move(gb)};
}

std::pair<Tensor, Tensor> add_backward(const Tensor& grad_out) {
    return {grad_out, grad_out};
}

std::pair<Tensor, Tensor> mul_backward(const Tensor& a, const Tensor& b, const Tensor& grad_out) {
    require_same_shape(a, b, "mul_backward");
    Tensor ga = mul(grad_out, b);
    Tensor gb = mul(grad_out, a);
    return {std::move(ga), std::move(gb)};
}

Tensor sigmoid_backward(const Tensor& y, const Tensor& grad_out) {
    require_same_shape(y, grad_out, "sigmoid_backward");
    Tensor out = grad_out;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= y[i] * (1.0 - y[i]);
    return out;
}

Tensor tanh_backward(const Tensor& y, const Tensor& grad_out) {
    require_same_shape(y, grad_out, "tanh_backward");
    Tensor out = grad_out;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= 1.0 - y[i] * y[i];
    return out;
}

std::vector<double> softmax_backward(const std::vector<double>& weights,
                                     const std::vector<double>& grad_out) {
    if (weights.size() != grad_out.size()) throw ShapeMismatch("softmax_backward sizes");
    double dot = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) dot += weights[i] * grad_out[i];
    std::vector<double> out(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) out[i] = weights[i] * (grad_out[i] - dot);
    return out;
}

Tensor init_uniform(std::vector<std::size_t> shape, Rng& rng, std::size_t fan_in,
                    std::size_t fan_out) {
    double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor out = Tensor::zeros(std::move(shape));
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = rng.uniform(-limit, limit);
    return out;
}

}  // namespace scs
