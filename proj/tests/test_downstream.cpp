#include <doctest.h>

#include <random>

#include "robustkit/downstream.hpp"

using namespace robustkit;
using downstream::DepthMap;
using downstream::LinearModel;

TEST_CASE("acc_p basic fractions") {
    CHECK(downstream::acc_p({true, true, true, true, true}) == 1.0);
    CHECK(downstream::acc_p({true, false, true, false}) == 0.5);
    CHECK(downstream::acc_p({false}) == 0.0);
    CHECK_THROWS_AS(downstream::acc_p({}), EmptyInput);
}

TEST_CASE("rmse_p is a mean of per-map RMSEs") {
    auto gt = DepthMap::constant(4, 4, 2.0);
    CHECK(downstream::rmse_p(gt, {gt, gt}) == 0.0);
    // single prediction with constant error e -> e
    auto off = DepthMap::constant(4, 4, 2.5);
    CHECK(downstream::rmse_p(gt, {off}) == doctest::Approx(0.5));
    // per-map RMSEs 1 and 3 -> mean 2
    auto e1 = DepthMap::constant(4, 4, 3.0);
    auto e3 = DepthMap::constant(4, 4, 5.0);
    CHECK(downstream::rmse_p(gt, {e1, e3}) == doctest::Approx(2.0));
    // permutation invariant
    CHECK(downstream::rmse_p(gt, {e3, e1}) == doctest::Approx(2.0));
    // shape mismatch
    CHECK_THROWS_AS(downstream::rmse_p(gt, {DepthMap::constant(3, 4, 2.0)}),
                    DimensionMismatch);
}

TEST_CASE("fit_linear recovers exact lines") {
    std::vector<std::pair<double, double>> pairs;
    for (double x : {0.0, 0.5, 1.0, 2.0}) pairs.emplace_back(x, 2.0 * x + 1.0);
    auto m = downstream::fit_linear(pairs);
    CHECK(m.slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(m.intercept == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(downstream::mse(m, pairs) <= 1e-18);
    CHECK_FALSE(m.degenerate);
    CHECK(downstream::predict(m, 3.0) == doctest::Approx(7.0));
}

TEST_CASE("fit_linear degenerate input falls back to the mean") {
    std::vector<std::pair<double, double>> pairs = {{0.5, 1.0}, {0.5, 3.0}};
    auto m = downstream::fit_linear(pairs);
    CHECK(m.degenerate);
    CHECK(m.slope == 0.0);
    CHECK(m.intercept == doctest::Approx(2.0));
    CHECK_THROWS_AS(downstream::fit_linear({{1.0, 1.0}}), TooFewPairs);
}

TEST_CASE("fit_linear on noisy synthetic data recovers the slope") {
    std::mt19937_64 rng(314);
    std::uniform_real_distribution<double> ux(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 0.01);
    std::vector<std::pair<double, double>> pairs;
    for (int i = 0; i < 200; ++i) {
        const double x = ux(rng);
        pairs.emplace_back(x, -0.3 * x + 0.9 + noise(rng));
    }
    auto m = downstream::fit_linear(pairs);
    CHECK(std::abs(m.slope - (-0.3)) <= 0.02);
    CHECK(downstream::mse(m, pairs) < 2e-4);
}

TEST_CASE("pearson closed forms") {
    std::vector<double> xs = {1, 2, 3};
    CHECK(downstream::pearson(xs, xs) == doctest::Approx(1.0));
    std::vector<double> neg = {-1, -2, -3};
    CHECK(downstream::pearson(xs, neg) == doctest::Approx(-1.0));
    // hand-computed: r = 0.98198...
    std::vector<double> ys = {1, 2, 4};
    CHECK(downstream::pearson(xs, ys) ==
          doctest::Approx(0.9819805060619659).epsilon(1e-12));
    CHECK_THROWS_AS(downstream::pearson(xs, {1, 1, 1}), ZeroVariance);
    CHECK_THROWS_AS(downstream::pearson(xs, {1, 2}), DimensionMismatch);
}

TEST_CASE("pearson is invariant under positive affine transforms") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> xs, ys;
    for (int i = 0; i < 50; ++i) {
        xs.push_back(gauss(rng));
        ys.push_back(0.4 * xs.back() + gauss(rng));
    }
    const double base = downstream::pearson(xs, ys);
    std::vector<double> xs2, ys2;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xs2.push_back(3.7 * xs[i] + 11.0);
        ys2.push_back(0.02 * ys[i] - 5.0);
    }
    CHECK(std::abs(downstream::pearson(xs2, ys2) - base) <= 1e-12);
}

TEST_CASE("quartile_groups on the 8-pair ladder") {
    std::vector<std::pair<double, double>> pairs;
    for (int i = 1; i <= 8; ++i)
        pairs.emplace_back(static_cast<double>(i), static_cast<double>(i));
    auto groups = downstream::quartile_groups(pairs);
    const double expect[4] = {1.5, 3.5, 5.5, 7.5};
    for (int g = 0; g < 4; ++g) {
        CHECK(groups[g].mean_robustness == doctest::Approx(expect[g]));
        CHECK(groups[g].mean_performance == doctest::Approx(expect[g]));
        CHECK(groups[g].count == 2);
    }
}

TEST_CASE("quartile_groups split rule for n = 5") {
    std::vector<std::pair<double, double>> pairs = {
        {1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 0}};
    auto groups = downstream::quartile_groups(pairs);
    CHECK(groups[0].count == 2);
    CHECK(groups[1].count == 1);
    CHECK(groups[2].count == 1);
    CHECK(groups[3].count == 1);
    CHECK_THROWS_AS(downstream::quartile_groups({{1, 1}, {2, 2}, {3, 3}}),
                    TooFewPairs);
}

TEST_CASE("quartile means are decreasing for anti-monotone performance") {
    std::vector<std::pair<double, double>> pairs;
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int i = 0; i < 40; ++i) {
        const double r = uni(rng);
        pairs.emplace_back(r, 1.0 - 0.8 * r);
    }
    auto groups = downstream::quartile_groups(pairs);
    for (int g = 1; g < 4; ++g)
        CHECK(groups[g].mean_performance < groups[g - 1].mean_performance);
}

TEST_CASE("toy classifier predicts by nearest centroid with low-index ties") {
    using metrics::Embedding;
    using metrics::Vec;
    auto mk = [](double x, double y) {
        Vec v(2);
        v << x, y;
        v.normalize();
        return Embedding(v);
    };
    downstream::ToyClassifier clf({[] {
                                       Vec v(2);
                                       v << 1, 0;
                                       return v;
                                   }(),
                                   [] {
                                       Vec v(2);
                                       v << 0, 1;
                                       return v;
                                   }()},
                                  {"a", "b"});
    CHECK(clf.predict(mk(0.9, 0.1)) == 0);
    CHECK(clf.predict(mk(0.1, 0.9)) == 1);
    // exact tie at 45 degrees: lowest index wins
    CHECK(clf.predict(mk(std::sqrt(0.5), std::sqrt(0.5))) == 0);
}
