#pragma once

#include <array>
#include <map>
#include <optional>

#include "robustkit/image.hpp"
#include "robustkit/image_io.hpp"

namespace robustkit::perturb {

enum class PerturbId {
    Jpeg,
    Brightness,
    Contrast,
    Defocus,
    Elastic,
    Fog,
    Frost,
    GaussianNoise,
    Glass,
};

inline constexpr std::array<PerturbId, 9> kAllPerturbations = {
    PerturbId::Jpeg,       PerturbId::Brightness, PerturbId::Contrast,
    PerturbId::Defocus,    PerturbId::Elastic,    PerturbId::Fog,
    PerturbId::Frost,      PerturbId::GaussianNoise, PerturbId::Glass,
};

inline const char* to_string(PerturbId id) {
    switch (id) {
        case PerturbId::Jpeg: return "jpeg";
        case PerturbId::Brightness: return "brightness";
        case PerturbId::Contrast: return "contrast";
        case PerturbId::Defocus: return "defocus";
        case PerturbId::Elastic: return "elastic";
        case PerturbId::Fog: return "fog";
        case PerturbId::Frost: return "frost";
        case PerturbId::GaussianNoise: return "gaussian_noise";
        case PerturbId::Glass: return "glass";
    }
    return "?";
}

inline std::optional<PerturbId> parse_perturb_id(std::string_view name) {
    for (auto id : kAllPerturbations)
        if (name == to_string(id)) return id;
    return std::nullopt;
}

// The identity parameter (nullopt) stands for the distinguished value with
// apply(x, spec, identity) == x.
struct PerturbParam {
    std::optional<double> value;

    static PerturbParam identity() { return {}; }
    static PerturbParam of(double v) { return {v}; }
    bool is_identity() const { return !value.has_value(); }
};

struct PerturbationSpec {
    PerturbId id;
    double a;  // variable-parameter domain [a, b]
    double b;
    std::map<std::string, double> fixed_params;
    bool stochastic = false;

    static PerturbationSpec defaults(PerturbId id) {
        switch (id) {
            case PerturbId::Jpeg:
                return {id, 30.0, 70.0, {}, false};
            case PerturbId::Brightness:
                return {id, 0.1, 0.5, {}, false};
            case PerturbId::Contrast:
                return {id, 0.3, 0.7, {}, false};
            case PerturbId::Defocus:
                return {id, 1.0, 5.0, {{"pre_blur_sigma", 0.5}}, false};
            case PerturbId::Elastic:
                return {id, 0.01, 0.05, {{"smoothing_sigma", 8.0}}, true};
            case PerturbId::Fog:
                return {id, 0.5, 2.5,
                        {{"wibble_decay", 2.0}, {"blend_scale", 0.75}}, true};
            case PerturbId::Frost:
                return {id, 0.2, 0.6,
                        {{"cells", 12.0}, {"streak_length", 9.0},
                         {"threshold", 0.55}}, true};
            case PerturbId::GaussianNoise:
                return {id, 0.02, 0.10, {}, true};
            case PerturbId::Glass:
                return {id, 0.2, 1.0,
                        {{"iterations", 2.0}, {"max_delta", 1.0}}, true};
        }
        throw Error("unknown perturbation id");
    }

    double fixed(const std::string& key) const { return fixed_params.at(key); }
};

// Domain endpoint producing the most distorted output (low quality for JPEG,
// the upper bound for everything else).
inline PerturbParam max_distortion(const PerturbationSpec& spec) {
    return PerturbParam::of(spec.id == PerturbId::Jpeg ? spec.a : spec.b);
}

namespace detail {

inline std::uint64_t perturb_seed(std::int64_t seed, const std::string& image_id,
                                  PerturbId id, double k) {
    return SeedHasher()
        .add(seed)
        .add(std::string_view(image_id))
        .add(std::string_view(to_string(id)))
        .add(k)
        .value();
}

// Separable Gaussian blur with reflect padding, applied per channel.
inline std::vector<double> gaussian_kernel(double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = v;
        sum += v;
    }
    for (double& v : k) v /= sum;
    return k;
}

inline Image gaussian_blur(const Image& img, double sigma) {
    if (sigma <= 0.0) return img;
    const auto kernel = gaussian_kernel(sigma);
    const int radius = static_cast<int>(kernel.size() / 2);
    Image tmp = img, out = img;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i)
                    acc += kernel[static_cast<std::size_t>(i + radius)] *
                           img.at(y, reflect_index(x + i, img.width), c);
                tmp.at(y, x, c) = acc;
            }
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i)
                    acc += kernel[static_cast<std::size_t>(i + radius)] *
                           tmp.at(reflect_index(y + i, img.height), x, c);
                out.at(y, x, c) = acc;
            }
    return out;
}

inline void rgb_to_hsv(double r, double g, double b, double& h, double& s,
                       double& v) {
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double d = mx - mn;
    v = mx;
    s = mx > 0.0 ? d / mx : 0.0;
    if (d == 0.0) {
        h = 0.0;
    } else if (mx == r) {
        h = std::fmod((g - b) / d, 6.0);
    } else if (mx == g) {
        h = (b - r) / d + 2.0;
    } else {
        h = (r - g) / d + 4.0;
    }
    h *= 60.0;
    if (h < 0.0) h += 360.0;
}

inline void hsv_to_rgb(double h, double s, double v, double& r, double& g,
                       double& b) {
    const double c = v * s;
    const double hp = h / 60.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r1 = 0, g1 = 0, b1 = 0;
    if (hp < 1)      { r1 = c; g1 = x; }
    else if (hp < 2) { r1 = x; g1 = c; }
    else if (hp < 3) { g1 = c; b1 = x; }
    else if (hp < 4) { g1 = x; b1 = c; }
    else if (hp < 5) { r1 = x; b1 = c; }
    else             { r1 = c; b1 = x; }
    const double m = v - c;
    r = r1 + m;
    g = g1 + m;
    b = b1 + m;
}

inline double bilinear(const Image& img, double y, double x, int c) {
    const int y0 = static_cast<int>(std::floor(y));
    const int x0 = static_cast<int>(std::floor(x));
    const double fy = y - y0, fx = x - x0;
    const int y0r = reflect_index(y0, img.height);
    const int y1r = reflect_index(y0 + 1, img.height);
    const int x0r = reflect_index(x0, img.width);
    const int x1r = reflect_index(x0 + 1, img.width);
    return (1 - fy) * ((1 - fx) * img.at(y0r, x0r, c) + fx * img.at(y0r, x1r, c)) +
           fy * ((1 - fx) * img.at(y1r, x0r, c) + fx * img.at(y1r, x1r, c));
}

// Diamond-square fractal noise on a (2^n + 1) grid; wibble decays by the
// given factor each subdivision level.
inline std::vector<double> plasma_fractal(int size, double wibble_decay,
                                          std::mt19937_64& rng) {
    int map_size = 1;
    while (map_size + 1 < size) map_size *= 2;
    map_size += 1;  // 2^n + 1 >= size
    std::vector<double> grid(static_cast<std::size_t>(map_size) * map_size, 0.0);
    auto at = [&](int y, int x) -> double& {
        return grid[static_cast<std::size_t>(y) * map_size + x];
    };
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    double wibble = 1.0;
    at(0, 0) = at(0, map_size - 1) = at(map_size - 1, 0) =
        at(map_size - 1, map_size - 1) = uni(rng);
    for (int step = map_size - 1; step > 1; step /= 2) {
        const int half = step / 2;
        // diamond
        for (int y = half; y < map_size; y += step)
            for (int x = half; x < map_size; x += step) {
                const double avg = 0.25 * (at(y - half, x - half) +
                                           at(y - half, x + half) +
                                           at(y + half, x - half) +
                                           at(y + half, x + half));
                at(y, x) = avg + wibble * uni(rng);
            }
        // square
        for (int y = 0; y < map_size; y += half)
            for (int x = (y / half) % 2 == 0 ? half : 0; x < map_size; x += step) {
                double sum = 0.0;
                int cnt = 0;
                if (y - half >= 0) { sum += at(y - half, x); ++cnt; }
                if (y + half < map_size) { sum += at(y + half, x); ++cnt; }
                if (x - half >= 0) { sum += at(y, x - half); ++cnt; }
                if (x + half < map_size) { sum += at(y, x + half); ++cnt; }
                at(y, x) = sum / cnt + wibble * uni(rng);
            }
        wibble /= wibble_decay;
    }
    // crop to requested size, shift to non-negative
    std::vector<double> out(static_cast<std::size_t>(size) * size);
    double mn = std::numeric_limits<double>::infinity();
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            const double v = at(y, x);
            out[static_cast<std::size_t>(y) * size + x] = v;
            mn = std::min(mn, v);
        }
    for (double& v : out) v -= mn;
    return out;
}

// Thresholded, directionally streaked value noise in [0,1]; a procedural
// stand-in for photographic frost textures.
inline std::vector<double> frost_texture(int w, int h, double cells,
                                         double streak_length, double threshold,
                                         std::mt19937_64& rng) {
    const int gw = std::max(2, static_cast<int>(cells));
    const int gh = std::max(2, static_cast<int>(cells));
    std::vector<double> lattice(static_cast<std::size_t>(gw) * gh);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (double& v : lattice) v = uni(rng);
    const double angle = uni(rng) * 3.14159265358979323846;
    const double dx = std::cos(angle), dy = std::sin(angle);
    auto lat = [&](int y, int x) {
        y = ((y % gh) + gh) % gh;
        x = ((x % gw) + gw) % gw;
        return lattice[static_cast<std::size_t>(y) * gw + x];
    };
    auto smooth = [](double t) { return t * t * (3.0 - 2.0 * t); };
    auto value_noise = [&](double fy, double fx) {
        const int y0 = static_cast<int>(std::floor(fy));
        const int x0 = static_cast<int>(std::floor(fx));
        const double ty = smooth(fy - y0), tx = smooth(fx - x0);
        const double a = lat(y0, x0), b = lat(y0, x0 + 1);
        const double c = lat(y0 + 1, x0), d = lat(y0 + 1, x0 + 1);
        return (1 - ty) * ((1 - tx) * a + tx * b) + ty * ((1 - tx) * c + tx * d);
    };
    std::vector<double> tex(static_cast<std::size_t>(w) * h);
    const int steps = std::max(1, static_cast<int>(streak_length));
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            // anisotropic streak: average value noise along a fixed direction
            double acc = 0.0;
            for (int s = 0; s < steps; ++s) {
                const double fy = (y + s * dy) / h * gh;
                const double fx = (x + s * dx) / w * gw;
                acc += value_noise(fy, fx);
            }
            double v = acc / steps;
            // threshold into crystalline patches, keep contrast inside them
            v = v > threshold ? (v - threshold) / (1.0 - threshold) : 0.0;
            tex[static_cast<std::size_t>(y) * w + x] = std::clamp(v, 0.0, 1.0);
        }
    return tex;
}

inline void require_min_side(const Image& img, int min_side, PerturbId id) {
    if (std::min(img.width, img.height) < min_side)
        throw ImageTooSmall(std::string(to_string(id)) +
                            " requires min side >= " + std::to_string(min_side));
}

inline Image apply_jpeg(const Image& x, double k) {
    const int quality = static_cast<int>(std::lround(k));
    auto encoded = jpeg_encode(x, quality);
    Image out = jpeg_decode(encoded, x.id);
    out.clamp();
    return out;
}

inline Image apply_brightness(const Image& x, double k) {
    Image out = x;
    for (int y = 0; y < x.height; ++y)
        for (int px = 0; px < x.width; ++px) {
            double h, s, v;
            rgb_to_hsv(x.at(y, px, 0), x.at(y, px, 1), x.at(y, px, 2), h, s, v);
            v = std::clamp(v + k, 0.0, 1.0);
            hsv_to_rgb(h, s, v, out.at(y, px, 0), out.at(y, px, 1),
                       out.at(y, px, 2));
        }
    out.clamp();
    return out;
}

inline Image apply_contrast(const Image& x, double k) {
    Image out = x;
    const std::size_t npix = static_cast<std::size_t>(x.width) * x.height;
    for (int c = 0; c < 3; ++c) {
        double mean = 0.0;
        for (int y = 0; y < x.height; ++y)
            for (int px = 0; px < x.width; ++px) mean += x.at(y, px, c);
        mean /= static_cast<double>(npix);
        for (int y = 0; y < x.height; ++y)
            for (int px = 0; px < x.width; ++px)
                out.at(y, px, c) =
                    std::clamp(mean + k * (x.at(y, px, c) - mean), 0.0, 1.0);
    }
    return out;
}

inline Image apply_defocus(const Image& x, double k, double pre_blur_sigma) {
    require_min_side(x, 16, PerturbId::Defocus);
    Image pre = gaussian_blur(x, pre_blur_sigma);
    // normalized disk kernel of radius k
    const int radius = static_cast<int>(std::ceil(k));
    std::vector<std::pair<int, int>> offsets;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            if (dx * dx + dy * dy <= k * k + 1e-12) offsets.emplace_back(dy, dx);
    const double weight = 1.0 / static_cast<double>(offsets.size());
    Image out = x;
    for (int y = 0; y < x.height; ++y)
        for (int px = 0; px < x.width; ++px)
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (auto [dy, dx] : offsets)
                    acc += pre.at(reflect_index(y + dy, x.height),
                                  reflect_index(px + dx, x.width), c);
                out.at(y, px, c) = std::clamp(acc * weight, 0.0, 1.0);
            }
    return out;
}

inline Image apply_elastic(const Image& x, double k, double smoothing_sigma,
                           std::mt19937_64& rng) {
    require_min_side(x, 16, PerturbId::Elastic);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Image field = Image::constant(x.width, x.height, 0.0);
    // two white-noise fields stored in channels 0/1, smoothed together
    for (int y = 0; y < x.height; ++y)
        for (int px = 0; px < x.width; ++px) {
            field.at(y, px, 0) = gauss(rng);
            field.at(y, px, 1) = gauss(rng);
        }
    field = gaussian_blur(field, smoothing_sigma);
    double max_abs = 0.0;
    for (int y = 0; y < x.height; ++y)
        for (int px = 0; px < x.width; ++px) {
            max_abs = std::max(max_abs, std::abs(field.at(y, px, 0)));
            max_abs = std::max(max_abs, std::abs(field.at(y, px, 1)));
        }
    const double amplitude = k * std::min(x.width, x.height);
    const double scale = max_abs > 0.0 ? amplitude / max_abs : 0.0;
    Image out = x;
    for (int y = 0; y < x.height; ++y)
        for (int px = 0; px < x.width; ++px) {
            const double sy = y + scale * field.at(y, px, 0);
            const double sx = px + scale * field.at(y, px, 1);
            for (int c = 0; c < 3; ++c)
                out.at(y, px, c) = std::clamp(bilinear(x, sy, sx, c), 0.0, 1.0);
        }
    return out;
}

inline Image apply_fog(const Image& x, double k, double wibble_decay,
                       double blend_scale, std::mt19937_64& rng) {
    const int size = std::max(x.width, x.height);
    auto plasma = plasma_fractal(size, wibble_decay, rng);
    double pmax = 0.0;
    for (double v : plasma) pmax = std::max(pmax, v);
    if (pmax <= 0.0) pmax = 1.0;
    double max_gray = 0.0;
    for (int y = 0; y < x.height; ++y)
        for (int px = 0; px < x.width; ++px)
            max_gray = std::max(max_gray, (x.at(y, px, 0) + x.at(y, px, 1) +
                                           x.at(y, px, 2)) / 3.0);
    Image out = x;
    for (int y = 0; y < x.height; ++y)
        for (int px = 0; px < x.width; ++px) {
            const double t =
                k * plasma[static_cast<std::size_t>(y) * size + px] / pmax;
            for (int c = 0; c < 3; ++c)
                out.at(y, px, c) = std::clamp(
                    (x.at(y, px, c) + t * max_gray) / (1.0 + k * blend_scale),
                    0.0, 1.0);
        }
    return out;
}

inline Image apply_frost(const Image& x, double k, const PerturbationSpec& spec,
                         std::mt19937_64& rng) {
    auto tex = frost_texture(x.width, x.height, spec.fixed("cells"),
                             spec.fixed("streak_length"),
                             spec.fixed("threshold"), rng);
    Image out = x;
    for (int y = 0; y < x.height; ++y)
        for (int px = 0; px < x.width; ++px) {
            const double f = tex[static_cast<std::size_t>(y) * x.width + px];
            for (int c = 0; c < 3; ++c)
                out.at(y, px, c) =
                    std::clamp((1.0 - k) * x.at(y, px, c) + k * f, 0.0, 1.0);
        }
    return out;
}

inline Image apply_gaussian_noise(const Image& x, double k,
                                  std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Image out = x;
    for (double& v : out.pixels) v = std::clamp(v + k * gauss(rng), 0.0, 1.0);
    return out;
}

inline Image apply_glass(const Image& x, double k, int iterations, int max_delta,
                         std::mt19937_64& rng) {
    require_min_side(x, 16, PerturbId::Glass);
    Image out = gaussian_blur(x, k);
    std::uniform_int_distribution<int> delta(-max_delta, max_delta);
    for (int it = 0; it < iterations; ++it)
        for (int y = 0; y < x.height; ++y)
            for (int px = 0; px < x.width; ++px) {
                const int ny = reflect_index(y + delta(rng), x.height);
                const int nx = reflect_index(px + delta(rng), x.width);
                for (int c = 0; c < 3; ++c)
                    std::swap(out.at(y, px, c), out.at(ny, nx, c));
            }
    out.clamp();
    return out;
}

}  // namespace detail

// Apply P(x, k).  The identity parameter returns x unchanged.  Stochastic
// perturbations seed their generator from hash(seed, image id, perturbation
// id, k), so results are reproducible and independent of call order.
inline Image apply(const Image& x, const PerturbationSpec& spec,
                   const PerturbParam& k, std::int64_t seed = 0) {
    if (k.is_identity()) return x;
    const double kv = *k.value;
    if (!std::isfinite(kv) || kv < spec.a - 1e-12 || kv > spec.b + 1e-12)
        throw ParamOutOfDomain(std::string(to_string(spec.id)) + ": parameter " +
                               format_double(kv) + " outside [" +
                               format_double(spec.a) + ", " +
                               format_double(spec.b) + "]");
    auto rng = make_rng(detail::perturb_seed(seed, x.id, spec.id, kv));
    switch (spec.id) {
        case PerturbId::Jpeg:
            return detail::apply_jpeg(x, kv);
        case PerturbId::Brightness:
            return detail::apply_brightness(x, kv);
        case PerturbId::Contrast:
            return detail::apply_contrast(x, kv);
        case PerturbId::Defocus:
            return detail::apply_defocus(x, kv, spec.fixed("pre_blur_sigma"));
        case PerturbId::Elastic:
            return detail::apply_elastic(x, kv, spec.fixed("smoothing_sigma"),
                                         rng);
        case PerturbId::Fog:
            return detail::apply_fog(x, kv, spec.fixed("wibble_decay"),
                                     spec.fixed("blend_scale"), rng);
        case PerturbId::Frost:
            return detail::apply_frost(x, kv, spec, rng);
        case PerturbId::GaussianNoise:
            return detail::apply_gaussian_noise(x, kv, rng);
        case PerturbId::Glass:
            return detail::apply_glass(x, kv,
                                       static_cast<int>(spec.fixed("iterations")),
                                       static_cast<int>(spec.fixed("max_delta")),
                                       rng);
    }
    throw Error("unknown perturbation id");
}

}  // namespace robustkit::perturb
