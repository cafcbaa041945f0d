#include <doctest.h>

#include <cmath>

#include "scs/baseline.hpp"
#include "scs/errors.hpp"
#include "scs/model.hpp"
#include "scs/ngram.hpp"

using namespace scs;

namespace {

// One indicative feature: id 5 present iff label 1, id 6 present iff label 0.
std::vector<CountSample> separable_samples(std::size_t n_per_class) {
    std::vector<CountSample> out;
    for (std::size_t i = 0; i < n_per_class; ++i) {
        out.push_back({{{5u, 1u}, {7u, static_cast<std::uint32_t>(i % 3)}}, 1});
        out.push_back({{{6u, 1u}, {7u, static_cast<std::uint32_t>(i % 2)}}, 0});
    }
    return out;
}

}  // namespace

TEST_CASE("baseline separates a perfectly correlated feature") {
    auto train = separable_samples(20);
    LinearModel m = baseline_train(train, 0.0, 400, 1.0, 7);
    auto held_out = separable_samples(5);
    std::size_t correct = 0;
    for (const auto& s : held_out) {
        if (predict_label(baseline_predict(m, s.counts)) == s.label) ++correct;
    }
    CHECK(correct == held_out.size());
}

TEST_CASE("huge regularization shrinks weights toward zero") {
    auto train = separable_samples(10);
    // lambda*lr must stay below 1 for plain GD to contract
    LinearModel m = baseline_train(train, 1e6, 200, 1e-7, 7);
    double norm = 0.0;
    for (double w : m.weights) norm += w * w;
    CHECK(std::sqrt(norm) < 1e-3);
    for (const auto& s : train) {
        CHECK(std::abs(baseline_predict(m, s.counts) - 0.5) < 0.05);
    }
}

TEST_CASE("baseline training is deterministic per seed") {
    auto train = separable_samples(12);
    LinearModel a = baseline_train(train, 1e-3, 200, 0.5, 99);
    LinearModel b = baseline_train(train, 1e-3, 200, 0.5, 99);
    REQUIRE(a.weights.size() == b.weights.size());
    for (std::size_t i = 0; i < a.weights.size(); ++i) CHECK(a.weights[i] == b.weights[i]);
    CHECK(a.bias == b.bias);
}

TEST_CASE("different seeds land on the same optimum (convexity)") {
    auto train = separable_samples(12);
    LinearModel a = baseline_train(train, 1e-2, 2000, 1.0, 1);
    LinearModel b = baseline_train(train, 1e-2, 2000, 1.0, 2);
    CHECK(std::abs(baseline_loss(a, train) - baseline_loss(b, train)) < 1e-3);
}

TEST_CASE("zero model predicts one half") {
    LinearModel m;
    m.weights.assign(10, 0.0);
    m.bias = 0.0;
    CHECK(baseline_predict(m, {{3, 4}}) == 0.5);
    CHECK(baseline_predict(m, {}) == 0.5);
}

TEST_CASE("baseline gradient matches finite differences") {
    auto data = separable_samples(6);
    LinearModel m = baseline_train(data, 1e-2, 5, 0.1, 13);  // a few steps off the origin
    auto [grad_w, grad_b] = baseline_gradient(m, data);

    const double step = 1e-7;
    for (std::size_t i = 0; i < m.weights.size(); ++i) {
        LinearModel up = m, down = m;
        up.weights[i] += step;
        down.weights[i] -= step;
        const double fd = (baseline_loss(up, data) - baseline_loss(down, data)) / (2 * step);
        CHECK(std::abs(grad_w[i] - fd) < 1e-6);
    }
    LinearModel up = m, down = m;
    up.bias += step;
    down.bias -= step;
    const double fd_b = (baseline_loss(up, data) - baseline_loss(down, data)) / (2 * step);
    CHECK(std::abs(grad_b - fd_b) < 1e-6);
}

TEST_CASE("missing class is rejected") {
    std::vector<CountSample> one_sided{{{{2u, 1u}}, 1}, {{{3u, 1u}}, 1}};
    CHECK_THROWS_AS(baseline_train(one_sided, 0.0, 10, 0.1, 1), MissingClass);
}

TEST_CASE("out-of-vocabulary n-grams act through the UNK weight") {
    std::vector<TokenSequence> corpus{{"60", "80", "60"}};
    NgramVocabulary vocab = build_vocab(corpus, 2, 1);

    LinearModel m;
    m.weights.assign(vocab.size(), 0.0);
    m.weights[NgramVocabulary::kUnk] = 4.0;
    m.bias = 0.0;

    // "aabb" never occurred in the corpus, so it counts as UNK.
    auto counts = count_vector({"aa", "bb"}, vocab);
    CHECK(counts.count(NgramVocabulary::kUnk) == 1);
    CHECK(baseline_predict(m, counts) > 0.9);
}
