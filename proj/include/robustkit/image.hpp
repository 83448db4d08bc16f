#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "robustkit/common.hpp"

namespace robustkit {

// RGB image, row-major, channel-interleaved, values in [0,1].
struct Image {
    int width = 0;
    int height = 0;
    std::string id;  // used for seeding stochastic perturbations
    std::vector<double> pixels;  // size = width * height * 3

    static constexpr int kChannels = 3;

    double& at(int y, int x, int c) {
        return pixels[static_cast<std::size_t>((y * width + x) * kChannels + c)];
    }
    double at(int y, int x, int c) const {
        return pixels[static_cast<std::size_t>((y * width + x) * kChannels + c)];
    }

    std::size_t size() const { return pixels.size(); }

    bool valid() const {
        if (width <= 0 || height <= 0) return false;
        if (pixels.size() != static_cast<std::size_t>(width) * height * kChannels)
            return false;
        for (double v : pixels)
            if (!std::isfinite(v) || v < 0.0 || v > 1.0) return false;
        return true;
    }

    void clamp() {
        for (double& v : pixels) v = std::clamp(v, 0.0, 1.0);
    }

    static Image constant(int w, int h, double value, std::string id = "") {
        Image img;
        img.width = w;
        img.height = h;
        img.id = std::move(id);
        img.pixels.assign(static_cast<std::size_t>(w) * h * kChannels, value);
        return img;
    }
};

inline bool operator==(const Image& a, const Image& b) {
    return a.width == b.width && a.height == b.height && a.pixels == b.pixels;
}

// Reflect index into [0, n); used for reflect-padded convolutions and warps.
inline int reflect_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * n - 2;
    i = ((i % period) + period) % period;
    return i < n ? i : period - i;
}

inline std::vector<std::uint8_t> to_bytes(const Image& img) {
    std::vector<std::uint8_t> out(img.size());
    for (std::size_t i = 0; i < img.size(); ++i)
        out[i] = static_cast<std::uint8_t>(
            std::lround(std::clamp(img.pixels[i], 0.0, 1.0) * 255.0));
    return out;
}

inline Image from_bytes(const std::uint8_t* data, int w, int h, std::string id) {
    Image img;
    img.width = w;
    img.height = h;
    img.id = std::move(id);
    img.pixels.resize(static_cast<std::size_t>(w) * h * Image::kChannels);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        img.pixels[i] = data[i] / 255.0;
    return img;
}

}  // namespace robustkit
