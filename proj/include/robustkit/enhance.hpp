#pragma once

#include "robustkit/measure.hpp"

namespace robustkit::enhance {

using geometry::Mat;
using metrics::Embedding;
using metrics::Vec;

// Linear map over the toy raw features followed by unit normalization:
// f'(x) = W phi(x) / ||W phi(x)||.  Initializing W to the identity makes
// f' coincide with the frozen base embedder.
class TrainableEmbedder final : public embed::Embedder {
public:
    TrainableEmbedder(Mat W, int grid)
        : W_(std::move(W)), grid_(grid) {
        if (W_.cols() != 3 * grid * grid + 3)
            throw DimensionMismatch("W columns must match raw feature size");
    }

    static TrainableEmbedder identity_init(int grid = 4) {
        const Eigen::Index d = 3 * grid * grid + 3;
        return TrainableEmbedder(Mat::Identity(d, d), grid);
    }

    Eigen::Index dim() const override { return W_.rows(); }
    std::string id() const override {
        return "trainable-grid" + std::to_string(grid_);
    }
    int grid() const { return grid_; }
    const Mat& weights() const { return W_; }
    Mat& weights() { return W_; }

    Vec raw_features(const Image& x) const {
        return embed::toy_features(x, grid_);
    }

    Vec forward_unnormalized(const Image& x) const {
        return W_ * raw_features(x);
    }

    Embedding embed(const Image& x) const override {
        Vec v = forward_unnormalized(x);
        const double norm = v.norm();
        if (norm < 1e-12)
            throw GradientDegenerate("pre-normalization norm below 1e-12");
        return Embedding(Vec(v / norm));
    }

private:
    Mat W_;
    int grid_;
};

struct EnhanceConfig {
    double lambda = 1.0;
    int epochs = 50;
    double learning_rate = 1e-5;
    int batch_size = 32;
    std::int64_t seed = 0;
};

struct LossBreakdown {
    double l1 = 0.0;     // robustness term: -mean cos(f'(x), f'(P(x,k)))
    double l2 = 0.0;     // utility term:    -mean cos(f(x), f'(x))
    double lambda = 1.0;
    double total() const { return l1 + lambda * l2; }
};

namespace detail {

struct Sample {
    Vec phi;       // raw features of x
    Vec phi_pert;  // raw features of P(x, k)
    Vec base;      // frozen embedding f(x), unit norm
};

inline Vec normalized(const Vec& v) {
    const double n = v.norm();
    if (n < 1e-12)
        throw GradientDegenerate("pre-normalization norm below 1e-12");
    return v / n;
}

// k for (epoch, image) is drawn uniformly from [a,b] with its own hashed
// seed, so runs are reproducible and independent of batch order.
inline double draw_param(const perturb::PerturbationSpec& spec,
                         std::int64_t cfg_seed, int epoch,
                         const std::string& image_id) {
    auto rng = make_rng(SeedHasher()
                            .add(cfg_seed)
                            .add(epoch)
                            .add(std::string_view(image_id))
                            .value());
    return std::uniform_real_distribution<double>(spec.a, spec.b)(rng);
}

inline std::vector<Sample> make_samples(const TrainableEmbedder& fprime,
                                        const embed::Embedder& fbase,
                                        const std::vector<Image>& batch,
                                        const perturb::PerturbationSpec& spec,
                                        const EnhanceConfig& cfg, int epoch) {
    std::vector<Sample> out;
    out.reserve(batch.size());
    for (const auto& img : batch) {
        Sample s;
        s.phi = fprime.raw_features(img);
        const double k = draw_param(spec, cfg.seed, epoch, img.id);
        s.phi_pert = fprime.raw_features(
            perturb::apply(img, spec, perturb::PerturbParam::of(k), cfg.seed));
        s.base = fbase.embed(img).vector();
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace detail

inline LossBreakdown loss_from_samples(const Mat& W,
                                       const std::vector<detail::Sample>& samples,
                                       double lambda) {
    if (samples.empty()) throw EmptyInput("loss: empty batch");
    LossBreakdown out;
    out.lambda = lambda;
    for (const auto& s : samples) {
        const Vec u = detail::normalized(W * s.phi);
        const Vec v = detail::normalized(W * s.phi_pert);
        out.l1 += -u.dot(v);
        out.l2 += -s.base.dot(u);
    }
    const double n = static_cast<double>(samples.size());
    out.l1 /= n;
    out.l2 /= n;
    return out;
}

// Analytic gradient of l1 + lambda*l2 with respect to W.  The chain rule
// through u = Wphi/||Wphi|| uses the projected Jacobian (I - u u^T)/||Wphi||;
// both occurrences of f' in the robustness term contribute.
inline Mat grad_from_samples(const Mat& W,
                             const std::vector<detail::Sample>& samples,
                             double lambda) {
    if (samples.empty()) throw EmptyInput("grad: empty batch");
    Mat g = Mat::Zero(W.rows(), W.cols());
    for (const auto& s : samples) {
        const Vec wu = W * s.phi;
        const Vec wv = W * s.phi_pert;
        const double nu = wu.norm(), nv = wv.norm();
        if (nu < 1e-12 || nv < 1e-12)
            throw GradientDegenerate("pre-normalization norm below 1e-12");
        const Vec u = wu / nu, v = wv / nv;
        // d(-cos(u,v))/dW
        const Vec du = -(v - u.dot(v) * u) / nu;
        const Vec dv = -(u - u.dot(v) * v) / nv;
        g.noalias() += du * s.phi.transpose();
        g.noalias() += dv * s.phi_pert.transpose();
        // d(-lambda cos(base,u))/dW
        const Vec db = -lambda * (s.base - u.dot(s.base) * u) / nu;
        g.noalias() += db * s.phi.transpose();
    }
    return g / static_cast<double>(samples.size());
}

inline LossBreakdown loss(const TrainableEmbedder& fprime,
                          const embed::Embedder& fbase,
                          const std::vector<Image>& batch,
                          const perturb::PerturbationSpec& spec,
                          const EnhanceConfig& cfg, int epoch = 0) {
    return loss_from_samples(
        fprime.weights(),
        detail::make_samples(fprime, fbase, batch, spec, cfg, epoch),
        cfg.lambda);
}

inline Mat grad(const TrainableEmbedder& fprime, const embed::Embedder& fbase,
                const std::vector<Image>& batch,
                const perturb::PerturbationSpec& spec, const EnhanceConfig& cfg,
                int epoch = 0) {
    return grad_from_samples(
        fprime.weights(),
        detail::make_samples(fprime, fbase, batch, spec, cfg, epoch),
        cfg.lambda);
}

struct EpochStats {
    int epoch = 0;
    double l1 = 0.0;
    double l2 = 0.0;
    double total = 0.0;
    double probe_rdr = 0.0;  // mean divergence radius on the probe set
    double probe_cos = 0.0;  // mean cos(f(x), f'(x)) on the probe set
};

struct FinetuneResult {
    TrainableEmbedder embedder;
    std::vector<EpochStats> history;
};

inline double probe_mean_rdr(const embed::Embedder& embedder,
                             const std::vector<Image>& probe,
                             const perturb::PerturbationSpec& spec,
                             std::int64_t seed) {
    metrics::SamplingPlan plan;
    double sum = 0.0;
    for (const auto& img : probe)
        sum += metrics::measure(img, spec, plan, embedder, seed).r_dr;
    return sum / static_cast<double>(probe.size());
}

inline double probe_mean_cos(const embed::Embedder& fprime,
                             const embed::Embedder& fbase,
                             const std::vector<Image>& probe) {
    double sum = 0.0;
    for (const auto& img : probe)
        sum += fbase.embed(img).vector().dot(fprime.embed(img).vector());
    return sum / static_cast<double>(probe.size());
}

// Plain gradient descent over seeded mini-batches; the probe set tracks mean
// divergence radius and utility cosine per epoch.
inline FinetuneResult finetune(TrainableEmbedder fprime,
                               const embed::Embedder& fbase,
                               const std::vector<Image>& dataset,
                               const perturb::PerturbationSpec& spec,
                               const EnhanceConfig& cfg,
                               const std::vector<Image>& probe = {}) {
    if (dataset.empty()) throw EmptyInput("finetune: empty dataset");
    FinetuneResult result{std::move(fprime), {}};
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto shuffle_rng = make_rng(
            SeedHasher().add(cfg.seed).add(epoch).add(std::uint64_t{0xb}).value());
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double l1_sum = 0.0, l2_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            std::vector<Image> batch;
            for (std::size_t i = start;
                 i < std::min(order.size(),
                              start + static_cast<std::size_t>(cfg.batch_size));
                 ++i)
                batch.push_back(dataset[order[i]]);
            auto samples = detail::make_samples(result.embedder, fbase, batch,
                                                spec, cfg, epoch);
            const auto lb =
                loss_from_samples(result.embedder.weights(), samples, cfg.lambda);
            const Mat g =
                grad_from_samples(result.embedder.weights(), samples, cfg.lambda);
            if (!g.allFinite())
                throw NonFinite("non-finite gradient at epoch " +
                                std::to_string(epoch));
            result.embedder.weights() -= cfg.learning_rate * g;
            l1_sum += lb.l1;
            l2_sum += lb.l2;
            ++batches;
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.l1 = l1_sum / static_cast<double>(batches);
        stats.l2 = l2_sum / static_cast<double>(batches);
        stats.total = stats.l1 + cfg.lambda * stats.l2;
        if (!probe.empty()) {
            stats.probe_rdr = probe_mean_rdr(result.embedder, probe, spec,
                                             cfg.seed);
            stats.probe_cos = probe_mean_cos(result.embedder, fbase, probe);
        }
        result.history.push_back(stats);
    }
    return result;
}

}  // namespace robustkit::enhance
