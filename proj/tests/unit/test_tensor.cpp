#include <doctest.h>

#include <cmath>

#include "scs/errors.hpp"
#include "scs/rng.hpp"
#include "scs/tensor.hpp"

using namespace scs;

namespace {

Tensor random_tensor(Rng& rng, std::vector<std::size_t> shape, double scale = 1.0) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-scale, scale);
    return t;
}

// relative error with the usual |a|+|b| floor
double rel_err(double a, double b) {
    return std::abs(a - b) / std::max(std::abs(a) + std::abs(b), 1e-8);
}

constexpr double kFdStep = 1e-6;

}  // namespace

TEST_CASE("matmul identity and shape checks") {
    Tensor eye({2, 2}, {1, 0, 0, 1});
    Tensor a({2, 2}, {3, -1, 2.5, 7});
    Tensor out = matmul(eye, a);
    for (std::size_t i = 0; i < 4; ++i) CHECK(out[i] == a[i]);

    Tensor bad({3, 2}, std::vector<double>(6, 0.0));
    CHECK_THROWS_AS(matmul(a, bad), ShapeMismatch);
}

TEST_CASE("elementary analytic values") {
    Tensor z({1}, {0.0});
    CHECK(sigmoid(z)[0] == doctest::Approx(0.5));
    CHECK(tanh_map(z)[0] == doctest::Approx(0.0));
}

TEST_CASE("softmax is stable and normalized") {
    auto w = softmax({0.0, 0.0});
    CHECK(w[0] == doctest::Approx(0.5));
    CHECK(w[1] == doctest::Approx(0.5));

    auto big = softmax({1000.0, 1000.0});
    CHECK(big[0] == doctest::Approx(0.5));
    CHECK(std::isfinite(big[0]));

    Rng rng(17);
    for (int iter = 0; iter < 200; ++iter) {
        std::vector<double> scores(1 + rng.next_index(12));
        for (auto& s : scores) s = rng.uniform(-3, 3);
        auto out = softmax(scores);
        double sum = 0.0;
        for (double v : out) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);

        // naive exp-normalize oracle at small magnitudes
        double denom = 0.0;
        for (double s : scores) denom += std::exp(s);
        for (std::size_t i = 0; i < scores.size(); ++i) {
            CHECK(std::abs(out[i] - std::exp(scores[i]) / denom) <= 1e-12);
        }
    }
}

TEST_CASE("matmul backward matches finite differences") {
    Rng rng(23);
    for (int iter = 0; iter < 20; ++iter) {
        std::size_t m = 1 + rng.next_index(4), k = 1 + rng.next_index(4),
                    n = 1 + rng.next_index(4);
        Tensor a = random_tensor(rng, {m, k});
        Tensor b = random_tensor(rng, {k, n});
        Tensor w = random_tensor(rng, {m, n});  // random linear functional

        auto objective = [&](const Tensor& aa, const Tensor& bb) {
            Tensor out = matmul(aa, bb);
            double s = 0.0;
            for (std::size_t i = 0; i < out.numel(); ++i) s += w[i] * out[i];
            return s;
        };
        auto [ga, gb] = matmul_backward(a, b, w);

        for (std::size_t i = 0; i < a.numel(); ++i) {
            Tensor ap = a, am = a;
            ap[i] += kFdStep;
            am[i] -= kFdStep;
            double fd = (objective(ap, b) - objective(am, b)) / (2 * kFdStep);
            CHECK(rel_err(ga[i], fd) < 1e-5);
        }
        for (std::size_t i = 0; i < b.numel(); ++i) {
            Tensor bp = b, bm = b;
            bp[i] += kFdStep;
            bm[i] -= kFdStep;
            double fd = (objective(a, bp) - objective(a, bm)) / (2 * kFdStep);
            CHECK(rel_err(gb[i], fd) < 1e-5);
        }
    }
}

TEST_CASE("elementwise backward passes match finite differences") {
    Rng rng(29);
    for (int iter = 0; iter < 25; ++iter) {
        std::size_t n = 1 + rng.next_index(8);
        Tensor x = random_tensor(rng, {n}, 2.0);
        Tensor y = random_tensor(rng, {n}, 2.0);
        Tensor w = random_tensor(rng, {n});

        auto weighted = [&w](const Tensor& t) {
            double s = 0.0;
            for (std::size_t i = 0; i < t.numel(); ++i) s += w[i] * t[i];
            return s;
        };

        SUBCASE("mul") {
            auto [gx, gy] = mul_backward(x, y, w);
            for (std::size_t i = 0; i < n; ++i) {
                Tensor xp = x, xm = x;
                xp[i] += kFdStep;
                xm[i] -= kFdStep;
                double fd = (weighted(mul(xp, y)) - weighted(mul(xm, y))) / (2 * kFdStep);
                CHECK(rel_err(gx[i], fd) < 1e-5);
                Tensor yp = y, ym = y;
                yp[i] += kFdStep;
                ym[i] -= kFdStep;
                fd = (weighted(mul(x, yp)) - weighted(mul(x, ym))) / (2 * kFdStep);
                CHECK(rel_err(gy[i], fd) < 1e-5);
            }
        }
        SUBCASE("add") {
            auto [gx, gy] = add_backward(w);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(gx[i] == w[i]);
                CHECK(gy[i] == w[i]);
            }
        }
        SUBCASE("sigmoid") {
            Tensor out = sigmoid(x);
            Tensor g = sigmoid_backward(out, w);
            for (std::size_t i = 0; i < n; ++i) {
                Tensor xp = x, xm = x;
                xp[i] += kFdStep;
                xm[i] -= kFdStep;
                double fd = (weighted(sigmoid(xp)) - weighted(sigmoid(xm))) / (2 * kFdStep);
                CHECK(rel_err(g[i], fd) < 1e-5);
            }
        }
        SUBCASE("tanh") {
            Tensor out = tanh_map(x);
            Tensor g = tanh_backward(out, w);
            for (std::size_t i = 0; i < n; ++i) {
                Tensor xp = x, xm = x;
                xp[i] += kFdStep;
                xm[i] -= kFdStep;
                double fd = (weighted(tanh_map(xp)) - weighted(tanh_map(xm))) / (2 * kFdStep);
                CHECK(rel_err(g[i], fd) < 1e-5);
            }
        }
        SUBCASE("softmax") {
            std::vector<double> scores(x.values());
            std::vector<double> up(w.values());
            auto sm = softmax(scores);
            auto g = softmax_backward(sm, up);
            for (std::size_t i = 0; i < n; ++i) {
                auto sp = scores, smn = scores;
                sp[i] += kFdStep;
                smn[i] -= kFdStep;
                double fp = 0.0, fm = 0.0;
                auto op = softmax(sp);
                auto om = softmax(smn);
                for (std::size_t j = 0; j < n; ++j) {
                    fp += up[j] * op[j];
                    fm += up[j] * om[j];
                }
                double fd = (fp - fm) / (2 * kFdStep);
                CHECK(rel_err(g[i], fd) < 1e-5);
            }
        }
    }
}

TEST_CASE("init_uniform is seeded and bounded") {
    Rng a(99), b(99);
    Tensor t1 = init_uniform({10, 10}, a, 10, 10);
    Tensor t2 = init_uniform({10, 10}, b, 10, 10);
    const double limit = std::sqrt(6.0 / 20.0);
    for (std::size_t i = 0; i < t1.numel(); ++i) {
        CHECK(t1[i] == t2[i]);
        CHECK(std::abs(t1[i]) <= limit);
    }

    // Empirical mean of 1e5 draws within 3 sigma of 0.
    Rng c(123);
    const std::size_t n = 100000;
    Tensor big = init_uniform({n}, c, 10, 10);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += big[i];
    mean /= static_cast<double>(n);
    const double sigma = limit / std::sqrt(3.0) / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(mean) < 3.0 * sigma);
}

TEST_CASE("rng streams are reproducible") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    std::vector<int> v1{1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<int> v2 = v1;
    Rng s1(7), s2(7);
    s1.shuffle(v1);
    s2.shuffle(v2);
    CHECK(v1 == v2);

    CHECK(Rng::derive(1, 2) == Rng::derive(1, 2));
    CHECK(Rng::derive(1, 2) != Rng::derive(1, 3));
}
