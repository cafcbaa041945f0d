#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "scs/rng.hpp"

namespace scs {

// Dense row-major tensor of doubles. Rank 1 or 2 covers everything the
// classifier needs; values stay finite through every public op.
class Tensor {
public:
    Tensor() = default;
    Tensor(std::vector<std::size_t> shape, std::vector<double> values);

    static Tensor zeros(std::vector<std::size_t> shape);
    static Tensor vector(std::size_t n) { return zeros({n}); }
    static Tensor matrix(std::size_t rows, std::size_t cols) { return zeros({rows, cols}); }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t numel() const { return values_.size(); }
    std::size_t rows() const;
    std::size_t cols() const;

    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& at(std::size_t r, std::size_t c);
    double at(std::size_t r, std::size_t c) const;

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    void fill(double v);
    bool all_finite() const;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> values_;
};

// Forward ops. Each has a backward counterpart below mapping the upstream
// gradient to input gradients; all are checked against finite differences.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
Tensor sigmoid(const Tensor& x);
Tensor tanh_map(const Tensor& x);

// Stable exp-normalize (max subtraction); output sums to 1.
std::vector<double> softmax(const std::vector<double>& scores);

std::pair<Tensor, Tensor> matmul_backward(const Tensor& a, const Tensor& b,
                                          const Tensor& grad_out);
std::pair<Tensor, Tensor> add_backward(const Tensor& grad_out);
std::pair<Tensor, Tensor> mul_backward(const Tensor& a, const Tensor& b, const Tensor& grad_out);
// These take the forward *output*, which determines the derivative exactly.
Tensor sigmoid_backward(const Tensor& y, const Tensor& grad_out);
Tensor tanh_backward(const Tensor& y, const Tensor& grad_out);
// weights = softmax output.
std::vector<double> softmax_backward(const std::vector<double>& weights,
                                     const std::vector<double>& grad_out);

// Glorot-style uniform draw in +-sqrt(6 / (fan_in + fan_out)).
Tensor init_uniform(std::vector<std::size_t> shape, Rng& rng, std::size_t fan_in,
                    std::size_t fan_out);

}  // namespace scs
