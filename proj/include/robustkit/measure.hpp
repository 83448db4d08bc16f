#pragma once

#include "robustkit/embed.hpp"
#include "robustkit/metrics.hpp"
#include "robustkit/perturb.hpp"

namespace robustkit::metrics {

inline std::vector<std::optional<double>> sampled_set(
    const perturb::PerturbationSpec& spec, const SamplingPlan& plan) {
    std::vector<std::optional<double>> params;
    if (plan.include_identity) params.push_back(std::nullopt);
    for (double v : sample_domain(spec.a, spec.b, plan)) params.push_back(v);
    return params;
}

// Measure all three robustness metrics for one (image, perturbation,
// sampling plan) triple by perturbing and embedding each sampled parameter.
inline RobustnessRecord measure(const Image& image,
                                const perturb::PerturbationSpec& spec,
                                const SamplingPlan& plan,
                                const embed::Embedder& embedder,
                                std::int64_t perturb_seed = 0) {
    RobustnessRecord rec;
    rec.image_id = image.id;
    rec.perturbation_id = perturb::to_string(spec.id);
    rec.sampled_params = sampled_set(spec, plan);
    std::vector<Embedding> embeddings;
    embeddings.reserve(rec.sampled_params.size());
    try {
        for (const auto& p : rec.sampled_params) {
            const perturb::PerturbParam param =
                p ? perturb::PerturbParam::of(*p)
                  : perturb::PerturbParam::identity();
            embeddings.push_back(
                embedder.embed(perturb::apply(image, spec, param, perturb_seed)));
        }
    } catch (const Error& e) {
        throw Error("image " + image.id + ": " + e.what());
    }
    rec.r_cs = r_cosine(embeddings);
    rec.r_ed = r_euclidean(embeddings);
    rec.r_dr = r_divergence_radius(embeddings);
    return rec;
}

// Same record, but embeddings come from a preloaded store keyed by
// (image id, perturbation id, parameter) instead of running a model.
inline RobustnessRecord measure_with_store(
    const std::string& image_id, const perturb::PerturbationSpec& spec,
    const SamplingPlan& plan, const embed::EmbeddingStore& store) {
    RobustnessRecord rec;
    rec.image_id = image_id;
    rec.perturbation_id = perturb::to_string(spec.id);
    rec.sampled_params = sampled_set(spec, plan);
    std::vector<Embedding> embeddings;
    for (const auto& p : rec.sampled_params)
        embeddings.push_back(store.get(image_id, rec.perturbation_id, p));
    rec.r_cs = r_cosine(embeddings);
    rec.r_ed = r_euclidean(embeddings);
    rec.r_dr = r_divergence_radius(embeddings);
    return rec;
}

// ---- five-property harness -------------------------------------------------

struct PropertyResult {
    std::string name;
    bool pass = false;
    double slack = 0.0;  // worst margin observed; negative means violated
};

struct PropertyReport {
    std::vector<PropertyResult> results;
    bool all_pass() const {
        for (const auto& r : results)
            if (!r.pass) return false;
        return true;
    }
};

namespace detail {

inline std::vector<Embedding> measured_embeddings(
    const Image& image, const perturb::PerturbationSpec& spec,
    const SamplingPlan& plan, const embed::Embedder& embedder) {
    std::vector<Embedding> out;
    for (const auto& p : sampled_set(spec, plan)) {
        const perturb::PerturbParam param =
            p ? perturb::PerturbParam::of(*p) : perturb::PerturbParam::identity();
        out.push_back(embedder.embed(perturb::apply(image, spec, param)));
    }
    return out;
}

// k unit vectors forming a regular k-gon in a random 2-plane of the given
// dimension: they sum to zero, so the worst-robustness premise holds.
inline std::vector<Embedding> regular_polygon_config(int k, Eigen::Index dim,
                                                     std::uint64_t seed) {
    const geometry::Mat M = geometry::random_rotation(dim, seed);
    std::vector<Embedding> out;
    for (int i = 0; i < k; ++i) {
        const double theta = 2.0 * 3.14159265358979323846 * i / k;
        Vec v = std::cos(theta) * M.col(0) + std::sin(theta) * M.col(1);
        out.emplace_back(v);
    }
    return out;
}

}  // namespace detail

// Executes the five metric property checks plus the counterexample showing
// that the cosine metric misses worst robustness while the divergence radius
// attains it.  Failures are reported, never thrown.
inline PropertyReport property_suite(
    const embed::Embedder& embedder, const std::vector<Image>& images,
    const std::vector<perturb::PerturbationSpec>& specs) {
    if (images.empty() || specs.empty()) throw EmptyInput("property_suite");
    PropertyReport report;
    auto push = [&](std::string name, double slack, double tol) {
        report.results.push_back({std::move(name), slack >= -tol, slack});
    };

    // 1. bounded domain: all metrics in [0,1] on real measurements
    {
        double slack = std::numeric_limits<double>::infinity();
        for (const auto& img : images)
            for (const auto& spec : specs) {
                SamplingPlan plan;
                auto es = detail::measured_embeddings(img, spec, plan, embedder);
                for (double v : {r_cosine(es), r_euclidean(es),
                                 r_divergence_radius(es)}) {
                    slack = std::min(slack, v);
                    slack = std::min(slack, 1.0 - v);
                }
            }
        push("bounded_domain", slack, 0.0);
    }

    // 2. monotonicity on nested sampled sets (shared embeddings)
    {
        double slack = std::numeric_limits<double>::infinity();
        for (const auto& img : images)
            for (const auto& spec : specs) {
                SamplingPlan plan;
                plan.m = 9;
                auto es = detail::measured_embeddings(img, spec, plan, embedder);
                std::vector<Embedding> prefix(es.begin(), es.begin() + 5);
                slack = std::min(slack, r_cosine(es) - r_cosine(prefix));
                slack = std::min(slack, r_euclidean(es) - r_euclidean(prefix));
                slack = std::min(slack, r_divergence_radius(es) -
                                            r_divergence_radius(prefix));
            }
        push("monotonicity", slack, 1e-12);
    }

    // 3. best robustness: identical embeddings give exact zeros
    {
        auto e = embedder.embed(images.front());
        std::vector<Embedding> same(6, e);
        const double worst = std::max(
            {r_cosine(same), r_euclidean(same), r_divergence_radius(same)});
        push("best_robustness", -worst, 0.0);
    }

    // 4. worst robustness: zero-sum configurations give radius 1 ...
    {
        double slack = std::numeric_limits<double>::infinity();
        for (int t = 0; t < 10; ++t) {
            const int k = 2 + t % 5;
            const Eigen::Index dim = 2 + 7 * t;
            auto es = detail::regular_polygon_config(
                k, dim, static_cast<std::uint64_t>(t));
            slack = std::min(slack, -(std::abs(r_divergence_radius(es) - 1.0)));
        }
        push("worst_robustness_rdr", slack, 1e-9);

        // ... while the cosine metric stays strictly below 1 whenever more
        // than two distinct directions are involved
        double margin = std::numeric_limits<double>::infinity();
        for (int t = 0; t < 10; ++t) {
            const int k = 3 + 2 * (t % 4);  // odd k: no antipodal pair
            auto es = detail::regular_polygon_config(
                k, 2 + 5 * t, 1000 + static_cast<std::uint64_t>(t));
            margin = std::min(margin, 1.0 - r_cosine(es));
        }
        push("worst_robustness_rcs_violation", margin - 1e-9, 0.0);
    }

    // 5. rotational invariance
    {
        double slack = std::numeric_limits<double>::infinity();
        SamplingPlan plan;
        for (const auto& img : images) {
            auto es = detail::measured_embeddings(img, specs.front(), plan,
                                                  embedder);
            const geometry::Mat M =
                geometry::random_rotation(es.front().dim(), 2024);
            std::vector<Embedding> rotated;
            for (const auto& e : es) rotated.emplace_back(Vec(M * e.vector()));
            slack = std::min(slack,
                             -std::abs(r_cosine(es) - r_cosine(rotated)));
            slack = std::min(slack,
                             -std::abs(r_euclidean(es) - r_euclidean(rotated)));
            slack = std::min(slack, -std::abs(r_divergence_radius(es) -
                                              r_divergence_radius(rotated)));
        }
        push("rotational_invariance", slack, 1e-9);
    }

    // Identity check: the Euclidean metric is the square root of the cosine one
    {
        double slack = std::numeric_limits<double>::infinity();
        for (const auto& img : images)
            for (const auto& spec : specs) {
                SamplingPlan plan;
                auto es = detail::measured_embeddings(img, spec, plan, embedder);
                slack = std::min(
                    slack, -std::abs(r_euclidean(es) - std::sqrt(r_cosine(es))));
            }
        push("euclidean_is_sqrt_cosine", slack, 1e-9);
    }

    return report;
}

}  // namespace robustkit::metrics
