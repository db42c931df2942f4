#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace kanseq {

/// Overflow-safe logistic sigmoid; exact 0/1 saturation only beyond ~|x|=745.
inline double sigmoid(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double tanh_act(double x) { return std::tanh(x); }

inline double relu(double x) { return x > 0.0 ? x : 0.0; }

inline double silu(double x) { return x * sigmoid(x); }

inline double sigmoid_grad_from_value(double s) { return s * (1.0 - s); }

inline double tanh_grad_from_value(double t) { return 1.0 - t * t; }

inline double relu_grad(double x) { return x > 0.0 ? 1.0 : 0.0; }

inline double silu_grad(double x) {
    const double s = sigmoid(x);
    return s * (1.0 + x * (1.0 - s));
}

enum class ActivationKind { Linear, Sigmoid, Tanh, Relu, Silu };

inline double activation(double x, ActivationKind kind) {
    switch (kind) {
        case ActivationKind::Linear: return x;
        case ActivationKind::Sigmoid: return sigmoid(x);
        case ActivationKind::Tanh: return tanh_act(x);
        case ActivationKind::Relu: return relu(x);
        case ActivationKind::Silu: return silu(x);
    }
    throw std::invalid_argument("activation: unknown kind");
}

/// Derivative expressed through the activation's own output value. Silu is
/// excluded (its derivative needs the pre-activation input).
inline double activation_grad_from_value(double y, ActivationKind kind) {
    switch (kind) {
        case ActivationKind::Linear: return 1.0;
        case ActivationKind::Sigmoid: return sigmoid_grad_from_value(y);
        case ActivationKind::Tanh: return tanh_grad_from_value(y);
        case ActivationKind::Relu: return y > 0.0 ? 1.0 : 0.0;
        case ActivationKind::Silu: break;
    }
    throw std::invalid_argument("activation_grad_from_value: unsupported kind");
}

}  // namespace kanseq
