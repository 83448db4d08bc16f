#pragma once

#include <fstream>
#include <map>
#include <memory>

#include <nlohmann/json.hpp>

#include "robustkit/image.hpp"
#include "robustkit/metrics.hpp"

namespace robustkit::embed {

using metrics::Embedding;
using metrics::Vec;

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual Eigen::Index dim() const = 0;
    virtual std::string id() const = 0;
    virtual Embedding embed(const Image& x) const = 0;
};

// Raw (pre-normalization) toy feature map: per-cell per-channel means over a
// grid x grid partition, then per-channel global standard deviation.
inline Vec toy_features(const Image& x, int grid) {
    if (std::min(x.width, x.height) < grid)
        throw ImageTooSmall("toy embedder needs min side >= " +
                            std::to_string(grid));
    Vec feat = Vec::Zero(3 * grid * grid + 3);
    std::vector<int> counts(static_cast<std::size_t>(grid) * grid, 0);
    for (int y = 0; y < x.height; ++y) {
        const int gy = std::min(y * grid / x.height, grid - 1);
        for (int px = 0; px < x.width; ++px) {
            const int gx = std::min(px * grid / x.width, grid - 1);
            const int cell = gy * grid + gx;
            ++counts[static_cast<std::size_t>(cell)];
            for (int c = 0; c < 3; ++c)
                feat(3 * cell + c) += x.at(y, px, c);
        }
    }
    for (int cell = 0; cell < grid * grid; ++cell)
        for (int c = 0; c < 3; ++c)
            feat(3 * cell + c) /= counts[static_cast<std::size_t>(cell)];
    // per-channel global standard deviation
    const std::size_t npix = static_cast<std::size_t>(x.width) * x.height;
    for (int c = 0; c < 3; ++c) {
        double mean = 0.0;
        for (int y = 0; y < x.height; ++y)
            for (int px = 0; px < x.width; ++px) mean += x.at(y, px, c);
        mean /= static_cast<double>(npix);
        double var = 0.0;
        for (int y = 0; y < x.height; ++y)
            for (int px = 0; px < x.width; ++px) {
                const double d = x.at(y, px, c) - mean;
                var += d * d;
            }
        feat(3 * grid * grid + c) = std::sqrt(var / static_cast<double>(npix));
    }
    return feat;
}

inline Vec normalize_features(Vec feat) {
    double norm = feat.norm();
    if (norm < 1e-12) {
        feat(0) += 1e-8;
        norm = feat.norm();
    }
    return feat / norm;
}

class ToyEmbedder final : public Embedder {
public:
    explicit ToyEmbedder(int grid = 4) : grid_(grid) {
        if (grid < 1) throw Error("grid must be positive");
    }

    Eigen::Index dim() const override { return 3 * grid_ * grid_ + 3; }
    std::string id() const override { return "toy-grid" + std::to_string(grid_); }
    int grid() const { return grid_; }

    Embedding embed(const Image& x) const override {
        return Embedding(normalize_features(toy_features(x, grid_)));
    }

private:
    int grid_;
};

// ---- file-backed store for externally computed embeddings ------------------
//
// JSON Lines, one object per line:
//   {"id": "...", "perturbation": "...", "param": number|null, "vector": [...]}
// null param encodes the identity parameter.

class EmbeddingStore {
public:
    static EmbeddingStore load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ParseError("cannot open embedding store: " + path);
        EmbeddingStore store;
        store.path_ = path;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(path + ":" + std::to_string(lineno) + ": " +
                                 e.what());
            }
            if (!j.contains("id") || !j.contains("perturbation") ||
                !j.contains("param") || !j.contains("vector"))
                throw ParseError(path + ":" + std::to_string(lineno) +
                                 ": missing required field");
            std::optional<double> param;
            if (!j["param"].is_null()) param = j["param"].get<double>();
            const auto& arr = j["vector"];
            Vec v(static_cast<Eigen::Index>(arr.size()));
            for (std::size_t i = 0; i < arr.size(); ++i)
                v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
            if (store.dim_ == 0) store.dim_ = v.size();
            if (v.size() != store.dim_)
                throw ParseError(path + ":" + std::to_string(lineno) +
                                 ": vector dimension mismatch");
            try {
                store.index_.emplace(
                    key(j["id"].get<std::string>(),
                        j["perturbation"].get<std::string>(), param),
                    Embedding(v));
            } catch (const NonUnitNorm& e) {
                throw NonUnitNorm(path + ":" + std::to_string(lineno) + ": " +
                                  e.what());
            }
        }
        return store;
    }

    const Embedding& get(const std::string& image_id,
                         const std::string& perturbation_id,
                         std::optional<double> param) const {
        auto it = index_.find(key(image_id, perturbation_id, param));
        if (it == index_.end())
            throw MissingKey("no embedding for (" + image_id + ", " +
                             perturbation_id + ", " + param_string(param) + ")");
        return it->second;
    }

    std::size_t size() const { return index_.size(); }
    Eigen::Index dim() const { return dim_; }
    std::string id() const { return "store:" + path_; }

    static std::string param_string(std::optional<double> param) {
        return param ? format_double(*param) : "identity";
    }

private:
    static std::string key(const std::string& image_id,
                           const std::string& perturbation_id,
                           std::optional<double> param) {
        return image_id + "\x1f" + perturbation_id + "\x1f" +
               (param ? "P" + format_double(*param) : "I");
    }

    std::string path_;
    Eigen::Index dim_ = 0;
    std::map<std::string, Embedding> index_;
};

inline void store_write_line(std::ostream& out, const std::string& image_id,
                             const std::string& perturbation_id,
                             std::optional<double> param, const Vec& v) {
    nlohmann::json j;
    j["id"] = image_id;
    j["perturbation"] = perturbation_id;
    if (param)
        j["param"] = *param;
    else
        j["param"] = nullptr;
    j["vector"] = std::vector<double>(v.data(), v.data() + v.size());
    out << j.dump() << "\n";
}

}  // namespace robustkit::embed
