#pragma once

#include <charconv>
#include <cstdint>
#include <cstring>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace robustkit {

// ---- error types -----------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyInput : Error {
    using Error::Error;
};
struct DimensionMismatch : Error {
    using Error::Error;
};
struct NonFinite : Error {
    using Error::Error;
};
struct TooManyPoints : Error {
    using Error::Error;
};
struct InvalidDomain : Error {
    using Error::Error;
};
struct NonUnitNorm : Error {
    using Error::Error;
};
struct ParamOutOfDomain : Error {
    using Error::Error;
};
struct ImageTooSmall : Error {
    using Error::Error;
};
struct CodecFailure : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct MissingKey : Error {
    using Error::Error;
};
struct ZeroVariance : Error {
    using Error::Error;
};
struct TooFewPairs : Error {
    using Error::Error;
};
struct GradientDegenerate : Error {
    using Error::Error;
};

// ---- deterministic hashing -------------------------------------------------
//
// FNV-1a over an explicit byte stream.  Used to derive RNG seeds from
// structured keys so results are reproducible across runs and independent
// of call order.

class SeedHasher {
public:
    SeedHasher& add_bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            state_ ^= p[i];
            state_ *= 0x100000001b3ull;
        }
        return *this;
    }
    SeedHasher& add(std::uint64_t v) { return add_bytes(&v, sizeof v); }
    SeedHasher& add(std::int64_t v) { return add_bytes(&v, sizeof v); }
    SeedHasher& add(int v) { return add(static_cast<std::int64_t>(v)); }
    SeedHasher& add(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        return add(bits);
    }
    SeedHasher& add(std::string_view s) {
        add(static_cast<std::uint64_t>(s.size()));
        return add_bytes(s.data(), s.size());
    }
    std::uint64_t value() const { return state_; }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ull;
};

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

// ---- canonical number formatting -------------------------------------------
//
// Shortest round-trip decimal.  Store keys and report files both use this,
// so a parameter written by one stage is exact-key matchable by the next.

inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline constexpr const char* kToolkitVersion = "0.1.0";

}  // namespace robustkit
