#pragma once

#include <cstdint>
#include <map>
#include <vector>

namespace scs {

// Logistic regression over L1-normalized n-gram count vectors; the sanity
// comparator next to the recurrent model.
struct LinearModel {
    std::vector<double> weights;  // indexed by vocabulary id
    double bias = 0.0;
    double lambda = 0.0;
};

struct CountSample {
    std::map<std::uint32_t, std::uint32_t> counts;
    int label = 0;
};

// Full-batch gradient descent on mean cross-entropy + (lambda/2)||w||^2.
// Deterministic for a fixed seed; counts are L1-normalized per sample to
// remove contract-length bias.
LinearModel baseline_train(const std::vector<CountSample>& data, double lambda,
                           std::size_t epochs, double learning_rate, std::uint64_t seed);

double baseline_predict(const LinearModel& model,
                        const std::map<std::uint32_t, std::uint32_t>& counts);

// Loss and gradient at the current weights; exposed for gradient checks.
double baseline_loss(const LinearModel& model, const std::vector<CountSample>& data);
std::pair<std::vector<double>, double> baseline_gradient(const LinearModel& model,
                                                         const std::vector<CountSample>& data);

}  // namespace scs
