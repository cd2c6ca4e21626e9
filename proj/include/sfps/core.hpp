#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sfps {

using Tick = std::int64_t;
using EntityId = std::int32_t;

/// Any contract violation in the library surfaces as an Error.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or estimator declaration (CLI maps this to exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

inline void require(bool cond, std::string_view what) {
    if (!cond) throw Error(std::string(what));
}

inline void require_config(bool cond, std::string_view what) {
    if (!cond) throw ConfigError(std::string(what));
}

enum class DroneMode : std::uint8_t { Idle = 0, Protecting, MovingToCharger, Charging, Terminated };

inline constexpr std::size_t kDroneModeCount = 5;
inline constexpr std::array<DroneMode, kDroneModeCount> kAllDroneModes{
    DroneMode::Idle, DroneMode::Protecting, DroneMode::MovingToCharger, DroneMode::Charging,
    DroneMode::Terminated};

inline std::string_view to_string(DroneMode m) {
    switch (m) {
        case DroneMode::Idle: return "IDLE";
        case DroneMode::Protecting: return "PROTECTING";
        case DroneMode::MovingToCharger: return "MOVING_TO_CHARGER";
        case DroneMode::Charging: return "CHARGING";
        case DroneMode::Terminated: return "TERMINATED";
    }
    return "?";
}

inline DroneMode drone_mode_from_string(std::string_view s) {
    for (auto m : kAllDroneModes)
        if (to_string(m) == s) return m;
    throw ConfigError("unknown drone mode: " + std::string(s));
}

/// Seed mixing (splitmix64 finalizer). Used to derive independent streams
/// from one user seed.
constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Deterministic random stream. The conversions below are written out by hand
/// so results do not depend on the standard library's distribution classes.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(mix_seed(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [lo, hi] (inclusive), via rejection sampling.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<std::int64_t>(engine_());
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return lo + static_cast<std::int64_t>(x % span);
    }

    /// Standard normal via Box-Muller (no cached second value).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

private:
    std::mt19937_64 engine_;
};

/// Shortest round-trip text for a double; stable across runs of one build.
inline std::string format_double(double v) {
    if (v == 0.0) return "0";
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

}  // namespace sfps
