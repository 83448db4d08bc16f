#include <doctest.h>

#include <random>

#include "robustkit/enhance.hpp"

using namespace robustkit;
using enhance::EnhanceConfig;
using enhance::Mat;
using enhance::TrainableEmbedder;
using metrics::Vec;

namespace {

Image textured_image(int w, int h, std::uint64_t seed, std::string id) {
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Image img = Image::constant(w, h, 0.0, std::move(id));
    const double fx = 1.0 + 3.0 * uni(rng), fy = 1.0 + 3.0 * uni(rng);
    const double base = 0.3 + 0.4 * uni(rng);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                img.at(y, x, c) = base + 0.25 * std::sin(fx * x + c) *
                                             std::cos(fy * y);
    img.clamp();
    return img;
}

std::vector<Image> corpus(int n, int side, std::uint64_t seed) {
    std::vector<Image> out;
    for (int i = 0; i < n; ++i)
        out.push_back(textured_image(side, side, seed + static_cast<std::uint64_t>(i),
                                     "img" + std::to_string(i)));
    return out;
}

// Independent loss recomputation in extended precision; keeps the central
// difference quotient at h = 1e-6 free of double roundoff.
long double loss_ld(const Mat& W, const std::vector<enhance::detail::Sample>& samples,
                    long double lambda, Eigen::Index pi, Eigen::Index pj,
                    long double delta) {
    const auto rows = W.rows(), cols = W.cols();
    long double total = 0.0L;
    for (const auto& s : samples) {
        std::vector<long double> wu(static_cast<std::size_t>(rows), 0.0L);
        std::vector<long double> wv(static_cast<std::size_t>(rows), 0.0L);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) {
                long double w = W(i, j);
                if (i == pi && j == pj) w += delta;
                wu[static_cast<std::size_t>(i)] += w * (long double)s.phi(j);
                wv[static_cast<std::size_t>(i)] += w * (long double)s.phi_pert(j);
            }
        long double nu = 0, nv = 0, uv = 0, bu = 0;
        for (Eigen::Index i = 0; i < rows; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            nu += wu[ii] * wu[ii];
            nv += wv[ii] * wv[ii];
            uv += wu[ii] * wv[ii];
            bu += (long double)s.base(i) * wu[ii];
        }
        nu = std::sqrt(nu);
        nv = std::sqrt(nv);
        total += -uv / (nu * nv) - lambda * bu / nu;
    }
    return total / static_cast<long double>(samples.size());
}

Mat fd_gradient(const Mat& W, const std::vector<enhance::detail::Sample>& samples,
                double lambda, double h) {
    Mat g = Mat::Zero(W.rows(), W.cols());
    for (Eigen::Index i = 0; i < W.rows(); ++i)
        for (Eigen::Index j = 0; j < W.cols(); ++j)
            g(i, j) = static_cast<double>(
                (loss_ld(W, samples, lambda, i, j, h) -
                 loss_ld(W, samples, lambda, i, j, -h)) /
                (2.0L * static_cast<long double>(h)));
    return g;
}

}  // namespace

TEST_CASE("identity init makes f' coincide with the base embedder") {
    auto fprime = TrainableEmbedder::identity_init(2);
    embed::ToyEmbedder fbase(2);
    Image img = textured_image(16, 16, 9, "x");
    CHECK((fprime.embed(img).vector() - fbase.embed(img).vector()).norm() <
          1e-12);
}

TEST_CASE("loss at W0 with a no-op perturbation is -(1 + lambda)") {
    auto fprime = TrainableEmbedder::identity_init(2);
    embed::ToyEmbedder fbase(2);
    // zero-width noise domain: the perturbation is the identity in effect
    perturb::PerturbationSpec spec =
        perturb::PerturbationSpec::defaults(perturb::PerturbId::GaussianNoise);
    spec.a = spec.b = 0.0;
    EnhanceConfig cfg;
    cfg.lambda = 1.5;
    auto batch = corpus(3, 16, 1);
    auto lb = enhance::loss(fprime, fbase, batch, spec, cfg);
    CHECK(lb.l1 == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(lb.l2 == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(lb.total() == doctest::Approx(-(1.0 + 1.5)).epsilon(1e-12));

    // lambda = 0: total is l1 exactly
    cfg.lambda = 0.0;
    lb = enhance::loss(fprime, fbase, batch, spec, cfg);
    CHECK(lb.total() == lb.l1);
}

TEST_CASE("loss matches an independent cosine recomputation") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int grid = 2;
    const Eigen::Index d = 3 * grid * grid + 3;
    Mat W(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) W(i, j) = gauss(rng);
    W += 3.0 * Mat::Identity(d, d);  // keep outputs away from zero
    TrainableEmbedder fprime(W, grid);
    embed::ToyEmbedder fbase(grid);
    auto spec = perturb::PerturbationSpec::defaults(perturb::PerturbId::GaussianNoise);
    EnhanceConfig cfg;
    auto batch = corpus(3, 16, 33);
    auto lb = enhance::loss(fprime, fbase, batch, spec, cfg, 0);

    // recompute from stored embeddings via the metrics-module cosine
    double l1 = 0.0, l2 = 0.0;
    for (const auto& img : batch) {
        const double k =
            enhance::detail::draw_param(spec, cfg.seed, 0, img.id);
        Image pert = perturb::apply(img, spec, perturb::PerturbParam::of(k),
                                    cfg.seed);
        const Vec u = fprime.embed(img).vector();
        const Vec v = fprime.embed(pert).vector();
        const Vec b = fbase.embed(img).vector();
        l1 += -u.dot(v);
        l2 += -b.dot(u);
    }
    CHECK(lb.l1 == doctest::Approx(l1 / 3.0).epsilon(1e-12));
    CHECK(lb.l2 == doctest::Approx(l2 / 3.0).epsilon(1e-12));
}

TEST_CASE("analytic gradient matches central finite differences") {
    std::mt19937_64 rng(2025);
    std::normal_distribution<double> gauss(0.0, 1.0);
    int failures = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index rows = 3, cols = 5;
        Mat W(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) W(i, j) = gauss(rng);
        std::vector<enhance::detail::Sample> samples;
        for (int s = 0; s < 2; ++s) {
            enhance::detail::Sample smp;
            smp.phi = Vec(cols);
            smp.phi_pert = Vec(cols);
            for (Eigen::Index j = 0; j < cols; ++j) {
                smp.phi(j) = gauss(rng);
                smp.phi_pert(j) = smp.phi(j) + 0.1 * gauss(rng);
            }
            Vec base(rows);
            for (Eigen::Index j = 0; j < rows; ++j) base(j) = gauss(rng);
            base.normalize();
            smp.base = base;
            samples.push_back(std::move(smp));
        }
        const double lambda = trial % 4 * 0.5;
        Mat analytic = enhance::grad_from_samples(W, samples, lambda);
        Mat numeric = fd_gradient(W, samples, lambda, 1e-6);
        double max_rel = 0.0;
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) {
                const double denom = std::max(std::abs(numeric(i, j)), 1e-8);
                max_rel = std::max(max_rel,
                                   std::abs(analytic(i, j) - numeric(i, j)) /
                                       denom);
            }
        if (max_rel >= 1e-5) ++failures;
    }
    CHECK(failures == 0);
}

TEST_CASE("gradient of the utility term vanishes at its optimum") {
    const int grid = 2;
    auto fprime = TrainableEmbedder::identity_init(grid);
    embed::ToyEmbedder fbase(grid);
    auto spec = perturb::PerturbationSpec::defaults(perturb::PerturbId::GaussianNoise);
    spec.a = spec.b = 0.0;  // perturbation is a no-op
    EnhanceConfig cfg;
    cfg.lambda = 1.0;
    auto batch = corpus(2, 16, 5);
    // with W = W0 and no-op perturbation every cosine is at its maximum
    Mat g = enhance::grad(fprime, fbase, batch, spec, cfg);
    CHECK(g.cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("a single gradient step increases the utility cosine") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int grid = 2;
    const Eigen::Index d = 3 * grid * grid + 3;
    Mat W = Mat::Identity(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) W(i, j) += 0.3 * gauss(rng);
    TrainableEmbedder fprime(W, grid);
    embed::ToyEmbedder fbase(grid);
    auto spec = perturb::PerturbationSpec::defaults(perturb::PerturbId::GaussianNoise);
    spec.a = spec.b = 0.0;
    EnhanceConfig cfg;
    cfg.lambda = 100.0;  // dominated by the utility term
    auto batch = corpus(3, 16, 21);
    const double before = enhance::loss(fprime, fbase, batch, spec, cfg).l2;
    Mat g = enhance::grad(fprime, fbase, batch, spec, cfg);
    TrainableEmbedder stepped(Mat(W - 1e-4 * g), grid);
    const double after = enhance::loss(stepped, fbase, batch, spec, cfg).l2;
    CHECK(after < before);  // -cos decreased, so cos increased
}

TEST_CASE("finetune with zero learning rate changes nothing") {
    auto fprime = TrainableEmbedder::identity_init(2);
    embed::ToyEmbedder fbase(2);
    auto spec = perturb::PerturbationSpec::defaults(perturb::PerturbId::GaussianNoise);
    EnhanceConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.epochs = 3;
    auto data = corpus(6, 16, 70);
    const Mat before = fprime.weights();
    auto result = enhance::finetune(std::move(fprime), fbase, data, spec, cfg);
    CHECK((result.embedder.weights() - before).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(result.history.size() == 3);
    CHECK(result.history[0].total == doctest::Approx(result.history[2].total));
}

TEST_CASE("loss decreases with a small enough step on a fixed k assignment") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int grid = 2;
    const Eigen::Index d = 3 * grid * grid + 3;
    Mat W = Mat::Identity(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) W(i, j) += 0.2 * gauss(rng);
    auto spec = perturb::PerturbationSpec::defaults(perturb::PerturbId::GaussianNoise);
    EnhanceConfig cfg;
    auto batch = corpus(4, 16, 90);
    embed::ToyEmbedder fbase(grid);
    TrainableEmbedder fprime(W, grid);
    auto samples = enhance::detail::make_samples(fprime, fbase, batch, spec,
                                                 cfg, /*epoch=*/0);
    double lr = 0.1;
    double current = enhance::loss_from_samples(W, samples, cfg.lambda).total();
    for (int step = 0; step < 30; ++step) {
        const Mat g = enhance::grad_from_samples(W, samples, cfg.lambda);
        for (;;) {
            const Mat cand = W - lr * g;
            const double next =
                enhance::loss_from_samples(cand, samples, cfg.lambda).total();
            if (next <= current || lr <= 1e-9) {
                REQUIRE(next <= current + 1e-12);
                W = cand;
                current = next;
                break;
            }
            lr /= 2.0;
        }
    }
}

TEST_CASE("outputs stay unit norm throughout training") {
    auto fprime = TrainableEmbedder::identity_init(2);
    embed::ToyEmbedder fbase(2);
    auto spec = perturb::PerturbationSpec::defaults(perturb::PerturbId::GaussianNoise);
    EnhanceConfig cfg;
    cfg.epochs = 5;
    cfg.learning_rate = 0.05;
    auto data = corpus(8, 16, 41);
    auto result = enhance::finetune(std::move(fprime), fbase, data, spec, cfg);
    for (const auto& img : data)
        CHECK(std::abs(result.embedder.embed(img).vector().norm() - 1.0) <=
              1e-9);
}
