#pragma once

#include <optional>

#include "robustkit/geometry.hpp"

namespace robustkit::metrics {

using geometry::Vec;

// Unit-norm embedding vector.  Construction rejects vectors whose norm is
// farther than 1e-6 from 1 and re-normalizes the rest exactly.
class Embedding {
public:
    explicit Embedding(Vec v) {
        if (v.size() == 0) throw EmptyInput("embedding vector is empty");
        if (!v.allFinite()) throw NonFinite("embedding has NaN/Inf");
        const double norm = v.norm();
        if (std::abs(norm - 1.0) > 1e-6)
            throw NonUnitNorm("embedding norm " + format_double(norm) +
                              " is not 1 within 1e-6");
        vec_ = v / norm;
    }

    const Vec& vector() const { return vec_; }
    Eigen::Index dim() const { return vec_.size(); }

private:
    Vec vec_;
};

enum class SamplingMode { Random, EquallySpaced };

struct SamplingPlan {
    SamplingMode mode = SamplingMode::EquallySpaced;
    int m = 5;
    std::int64_t seed = 0;
    bool include_identity = true;
};

// Sampled parameter values on [a, b].  Equally-spaced returns the exact
// endpoints-inclusive grid; m = 1 yields [a].  Random draws are uniform,
// seeded by (plan.seed, a, b) so the same domain resamples identically.
// Neither mode includes the identity parameter; callers prepend it.
inline std::vector<double> sample_domain(double a, double b,
                                         const SamplingPlan& plan) {
    if (!std::isfinite(a) || !std::isfinite(b) || a > b)
        throw InvalidDomain("invalid domain [" + format_double(a) + ", " +
                            format_double(b) + "]");
    if (plan.m < 1) throw InvalidDomain("m must be >= 1");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(plan.m));
    if (plan.mode == SamplingMode::EquallySpaced) {
        if (plan.m == 1) return {a};
        for (int i = 0; i < plan.m; ++i)
            out.push_back(a + i * (b - a) / (plan.m - 1));
    } else {
        auto rng = make_rng(
            SeedHasher().add(plan.seed).add(a).add(b).value());
        std::uniform_real_distribution<double> uni(a, b);
        for (int i = 0; i < plan.m; ++i) out.push_back(uni(rng));
    }
    return out;
}

namespace detail {

inline void check_embeddings(const std::vector<Embedding>& es) {
    if (es.empty()) throw EmptyInput("no embeddings");
    for (const auto& e : es)
        if (e.dim() != es.front().dim())
            throw DimensionMismatch("embeddings have mixed dimensions");
}

}  // namespace detail

// (1 - min pairwise cosine) / 2; exhaustive O(n^2) pair scan.
inline double r_cosine(const std::vector<Embedding>& embeddings) {
    detail::check_embeddings(embeddings);
    if (embeddings.size() == 1) return 0.0;
    double min_cos = 1.0;
    for (std::size_t i = 0; i < embeddings.size(); ++i)
        for (std::size_t j = i + 1; j < embeddings.size(); ++j) {
            const double c = std::clamp(
                embeddings[i].vector().dot(embeddings[j].vector()), -1.0, 1.0);
            min_cos = std::min(min_cos, c);
        }
    return (1.0 - min_cos) / 2.0;
}

// (max pairwise Euclidean distance) / 2.
inline double r_euclidean(const std::vector<Embedding>& embeddings) {
    detail::check_embeddings(embeddings);
    double max_dist = 0.0;
    for (std::size_t i = 0; i < embeddings.size(); ++i)
        for (std::size_t j = i + 1; j < embeddings.size(); ++j)
            max_dist = std::max(
                max_dist,
                (embeddings[i].vector() - embeddings[j].vector()).norm());
    return std::min(max_dist / 2.0, 1.0);
}

// Radius of the minimum enclosing ball of the embedding set; in [0,1]
// because all points lie on the unit sphere.
inline double r_divergence_radius(const std::vector<Embedding>& embeddings) {
    detail::check_embeddings(embeddings);
    std::vector<Vec> pts;
    pts.reserve(embeddings.size());
    for (const auto& e : embeddings) pts.push_back(e.vector());
    const geometry::Ball ball = pts.size() > 64
                                    ? geometry::meb_coreset(pts, 20000)
                                    : geometry::meb_exact(pts);
    return std::clamp(ball.radius, 0.0, 1.0);
}

struct RobustnessRecord {
    std::string image_id;
    std::string perturbation_id;
    std::vector<std::optional<double>> sampled_params;  // nullopt = identity
    double r_cs = 0.0;
    double r_ed = 0.0;
    double r_dr = 0.0;
};

}  // namespace robustkit::metrics
