#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "sfps/core.hpp"

namespace sfps::ml {

enum class OutputActivation { Identity, Exponential, Softplus };

inline std::string_view to_string(OutputActivation a) {
    switch (a) {
        case OutputActivation::Identity: return "identity";
        case OutputActivation::Exponential: return "exponential";
        case OutputActivation::Softplus: return "softplus";
    }
    return "?";
}

inline OutputActivation output_activation_from_string(std::string_view s) {
    if (s == "identity") return OutputActivation::Identity;
    if (s == "exponential") return OutputActivation::Exponential;
    if (s == "softplus") return OutputActivation::Softplus;
    throw ConfigError("unknown output activation: " + std::string(s));
}

// ln(1 + e^z); the linear and exponential tails kick in past |z| = 30.
inline double softplus(double z) {
    if (z > 30.0) return z;
    if (z < -30.0) return std::exp(z);
    return std::log1p(std::exp(z));
}

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

inline double activation_eval(OutputActivation kind, double z) {
    switch (kind) {
        case OutputActivation::Identity: return z;
        case OutputActivation::Exponential: return std::exp(z);
        case OutputActivation::Softplus: return softplus(z);
    }
    return z;
}

/// d activation / dz at z.
inline double activation_derivative(OutputActivation kind, double z) {
    switch (kind) {
        case OutputActivation::Identity: return 1.0;
        case OutputActivation::Exponential: return std::exp(z);
        case OutputActivation::Softplus: return sigmoid(z);
    }
    return 1.0;
}

inline double relu(double z) { return z > 0.0 ? z : 0.0; }

}  // namespace sfps::ml
