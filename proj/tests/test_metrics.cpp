#include <doctest.h>

#include <random>

#include "robustkit/metrics.hpp"

using namespace robustkit;
using metrics::Embedding;
using metrics::SamplingMode;
using metrics::SamplingPlan;
using metrics::Vec;

namespace {

Embedding e2(double x, double y) {
    Vec v(2);
    v << x, y;
    return Embedding(v);
}

std::vector<Embedding> tripod_120() {
    const double c = -0.5, s = std::sqrt(3.0) / 2.0;
    return {e2(1, 0), e2(c, s), e2(c, -s)};
}

std::vector<Embedding> random_unit_set(std::mt19937_64& rng, int n, int dim) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Embedding> out;
    for (int i = 0; i < n; ++i) {
        Vec v(dim);
        for (int j = 0; j < dim; ++j) v(j) = gauss(rng);
        v.normalize();
        out.emplace_back(v);
    }
    return out;
}

}  // namespace

TEST_CASE("Embedding construction enforces unit norm") {
    Vec v(2);
    v << 3.0, 4.0;
    CHECK_THROWS_AS(Embedding{v}, NonUnitNorm);
    v << 1.0 + 5e-7, 0.0;
    Embedding ok(v);  // inside tolerance: re-normalized exactly
    CHECK(ok.vector().norm() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("sample_domain equally spaced") {
    SamplingPlan plan;
    plan.m = 5;
    auto vals = metrics::sample_domain(30, 70, plan);
    REQUIRE(vals.size() == 5);
    CHECK(vals == std::vector<double>{30, 40, 50, 60, 70});

    plan.m = 3;
    CHECK(metrics::sample_domain(5, 5, plan) == std::vector<double>{5, 5, 5});

    plan.m = 1;
    CHECK(metrics::sample_domain(2, 9, plan) == std::vector<double>{2});

    CHECK_THROWS_AS(metrics::sample_domain(1, 0, plan), InvalidDomain);
}

TEST_CASE("sample_domain random is reproducible and in range") {
    SamplingPlan plan;
    plan.mode = SamplingMode::Random;
    plan.m = 20;
    plan.seed = 7;
    auto a = metrics::sample_domain(0, 1, plan);
    auto b = metrics::sample_domain(0, 1, plan);
    CHECK(a == b);
    for (double v : a) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    plan.seed = 8;
    CHECK(metrics::sample_domain(0, 1, plan) != a);
}

TEST_CASE("r_cosine closed forms") {
    CHECK(metrics::r_cosine(tripod_120()) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(metrics::r_cosine({e2(1, 0), e2(-1, 0)}) == doctest::Approx(1.0));
    std::vector<Embedding> same(5, e2(0.6, 0.8));
    CHECK(metrics::r_cosine(same) == 0.0);
    CHECK(metrics::r_cosine({e2(1, 0)}) == 0.0);
}

TEST_CASE("r_euclidean closed forms") {
    CHECK(metrics::r_euclidean({e2(1, 0), e2(-1, 0)}) == doctest::Approx(1.0));
    std::vector<Embedding> same(4, e2(1, 0));
    CHECK(metrics::r_euclidean(same) == 0.0);
    CHECK(metrics::r_euclidean(tripod_120()) ==
          doctest::Approx(std::sqrt(0.75)).epsilon(1e-12));
}

TEST_CASE("r_divergence_radius closed forms") {
    CHECK(metrics::r_divergence_radius(tripod_120()) ==
          doctest::Approx(1.0).epsilon(1e-12));
    std::vector<Embedding> same(3, e2(0, 1));
    CHECK(metrics::r_divergence_radius(same) == 0.0);
    CHECK(metrics::r_divergence_radius({e2(1, 0), e2(0, 1)}) ==
          doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("euclidean metric is the square root of the cosine metric") {
    std::mt19937_64 rng(2718);
    std::uniform_int_distribution<int> nd(2, 10), dd(2, 64);
    for (int t = 0; t < 200; ++t) {
        auto es = random_unit_set(rng, nd(rng), dd(rng));
        CHECK(std::abs(metrics::r_euclidean(es) -
                       std::sqrt(metrics::r_cosine(es))) <= 1e-9);
    }
}

TEST_CASE("metrics are bounded and monotone under set growth") {
    std::mt19937_64 rng(99);
    for (int t = 0; t < 50; ++t) {
        auto es = random_unit_set(rng, 8, 6);
        std::vector<Embedding> prefix(es.begin(), es.begin() + 4);
        for (auto metric : {metrics::r_cosine, metrics::r_euclidean,
                            metrics::r_divergence_radius}) {
            const double small = metric(prefix), big = metric(es);
            CHECK(small >= 0.0);
            CHECK(big <= 1.0);
            CHECK(big >= small - 1e-12);
        }
    }
}

TEST_CASE("dimension mismatch is rejected") {
    Vec v3(3);
    v3 << 1, 0, 0;
    CHECK_THROWS_AS(metrics::r_cosine({e2(1, 0), Embedding(v3)}),
                    DimensionMismatch);
}
