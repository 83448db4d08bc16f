#pragma once

#include <algorithm>
#include <array>
#include <numeric>

#include "robustkit/embed.hpp"

namespace robustkit::downstream {

using metrics::Vec;

enum class PerformanceKind { Accuracy, Rmse };

struct PerformanceRecord {
    std::string image_id;
    std::string perturbation_id;
    double value = 0.0;
    PerformanceKind kind = PerformanceKind::Accuracy;
};

// Fraction of correct predictions across the sampled parameter set.
inline double acc_p(const std::vector<bool>& correct_flags) {
    if (correct_flags.empty()) throw EmptyInput("acc_p: no flags");
    std::size_t correct = 0;
    for (bool f : correct_flags) correct += f ? 1 : 0;
    return static_cast<double>(correct) /
           static_cast<double>(correct_flags.size());
}

struct DepthMap {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    static DepthMap constant(int w, int h, double v) {
        return {w, h, std::vector<double>(static_cast<std::size_t>(w) * h, v)};
    }
};

// Mean over sampled parameters of the per-map RMSE (mean of RMSEs, not the
// RMSE of pooled errors).
inline double rmse_p(const DepthMap& gt, const std::vector<DepthMap>& preds) {
    if (preds.empty()) throw EmptyInput("rmse_p: no predictions");
    double sum = 0.0;
    for (const auto& pred : preds) {
        if (pred.width != gt.width || pred.height != gt.height ||
            pred.values.size() != gt.values.size())
            throw DimensionMismatch("rmse_p: depth map shapes differ");
        double sq = 0.0;
        for (std::size_t i = 0; i < gt.values.size(); ++i) {
            const double d = gt.values[i] - pred.values[i];
            sq += d * d;
        }
        sum += std::sqrt(sq / static_cast<double>(gt.values.size()));
    }
    return sum / static_cast<double>(preds.size());
}

// ---- linear predictor of performance from robustness -----------------------

struct LinearModel {
    double slope = 0.0;
    double intercept = 0.0;
    bool degenerate = false;  // all robustness values equal; fell back to mean
};

inline LinearModel fit_linear(
    const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.size() < 2) throw TooFewPairs("fit_linear needs >= 2 pairs");
    const double n = static_cast<double>(pairs.size());
    double sx = 0, sy = 0;
    for (const auto& [x, y] : pairs) {
        sx += x;
        sy += y;
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (const auto& [x, y] : pairs) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (sxx == 0.0) return {0.0, my, true};
    return {sxy / sxx, my - (sxy / sxx) * mx, false};
}

inline double predict(const LinearModel& model, double robustness) {
    return model.slope * robustness + model.intercept;
}

inline double mse(const LinearModel& model,
                  const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.empty()) throw EmptyInput("mse: no pairs");
    double sum = 0.0;
    for (const auto& [x, y] : pairs) {
        const double r = y - predict(model, x);
        sum += r * r;
    }
    return sum / static_cast<double>(pairs.size());
}

inline double pearson(const std::vector<double>& xs,
                      const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw DimensionMismatch("pearson: length");
    if (xs.size() < 2) throw EmptyInput("pearson needs >= 2 samples");
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0)
        throw ZeroVariance("pearson: zero variance series");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

struct QuartileGroup {
    double mean_robustness = 0.0;
    double mean_performance = 0.0;
    std::size_t count = 0;
};

// Sort ascending by robustness (stable), split into 4 contiguous groups with
// the first n mod 4 groups one element larger, return per-group means.
inline std::array<QuartileGroup, 4> quartile_groups(
    std::vector<std::pair<double, double>> pairs) {
    if (pairs.size() < 4) throw TooFewPairs("quartile_groups needs >= 4 pairs");
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    const std::size_t q = pairs.size() / 4, r = pairs.size() % 4;
    std::array<QuartileGroup, 4> groups{};
    std::size_t pos = 0;
    for (std::size_t g = 0; g < 4; ++g) {
        const std::size_t sz = q + (g < r ? 1 : 0);
        double sr = 0, sp = 0;
        for (std::size_t i = 0; i < sz; ++i) {
            sr += pairs[pos + i].first;
            sp += pairs[pos + i].second;
        }
        groups[g] = {sr / static_cast<double>(sz), sp / static_cast<double>(sz),
                     sz};
        pos += sz;
    }
    return groups;
}

// ---- nearest-centroid toy classifier ---------------------------------------

class ToyClassifier {
public:
    ToyClassifier(std::vector<Vec> centroids, std::vector<std::string> names)
        : centroids_(std::move(centroids)), names_(std::move(names)) {
        if (centroids_.empty() || centroids_.size() != names_.size())
            throw Error("classifier needs one centroid per class");
        for (auto& c : centroids_) c.normalize();
    }

    // per-class mean of embeddings over a labeled corpus, re-normalized
    static ToyClassifier fit(const std::vector<metrics::Embedding>& embeddings,
                             const std::vector<int>& labels,
                             const std::vector<std::string>& names) {
        if (embeddings.size() != labels.size() || embeddings.empty())
            throw Error("fit: embeddings/labels size mismatch");
        std::vector<Vec> sums(names.size());
        std::vector<int> counts(names.size(), 0);
        for (auto& s : sums)
            s = Vec::Zero(embeddings.front().dim());
        for (std::size_t i = 0; i < embeddings.size(); ++i) {
            const auto l = static_cast<std::size_t>(labels[i]);
            sums[l] += embeddings[i].vector();
            ++counts[l];
        }
        for (std::size_t l = 0; l < sums.size(); ++l)
            if (counts[l] == 0) throw Error("fit: class without samples");
        return ToyClassifier(std::move(sums), names);
    }

    // argmax cosine; ties go to the lowest class index
    int predict(const metrics::Embedding& e) const {
        int best = 0;
        double best_cos = -2.0;
        for (std::size_t i = 0; i < centroids_.size(); ++i) {
            const double c = centroids_[i].dot(e.vector());
            if (c > best_cos) {
                best_cos = c;
                best = static_cast<int>(i);
            }
        }
        return best;
    }

    const std::vector<std::string>& class_names() const { return names_; }

private:
    std::vector<Vec> centroids_;
    std::vector<std::string> names_;
};

}  // namespace robustkit::downstream
