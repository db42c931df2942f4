#pragma once

#include <cmath>
#include <cstddef>

#include "kanseq/model.hpp"

namespace kanseq {

/// Adaptive-moment estimation with bias correction. Moment tensors mirror
/// the trainable-parameter layout.
struct OptimizerState {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_opt = 1e-8;
    std::size_t step = 0;
    ModelParams m;  // first moments
    ModelParams v;  // second moments

    OptimizerState() = default;
    explicit OptimizerState(const ModelParams& params, double lr = 1e-3)
        : learning_rate(lr), m(zeros_like(params)), v(zeros_like(params)) {}
};

inline void optimizer_step(OptimizerState& state, ModelParams& params, ModelParams& grads) {
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(state.beta1, t);
    const double bc2 = 1.0 - std::pow(state.beta2, t);
    auto ps = trainable_tensors(params);
    auto gs = trainable_tensors(grads);
    auto ms = trainable_tensors(state.m);
    auto vs = trainable_tensors(state.v);
    require(ps.size() == gs.size() && ps.size() == ms.size() && ps.size() == vs.size(),
            "optimizer_step: tensor list mismatch");
    for (std::size_t i = 0; i < ps.size(); ++i) {
        Matrix& p = *ps[i].second;
        const Matrix& g = *gs[i].second;
        Matrix& m = *ms[i].second;
        Matrix& v = *vs[i].second;
        require(p.same_shape(g), "optimizer_step: gradient shape mismatch at " + ps[i].first);
        for (std::size_t j = 0; j < p.size(); ++j) {
            m.data[j] = state.beta1 * m.data[j] + (1.0 - state.beta1) * g.data[j];
            v.data[j] = state.beta2 * v.data[j] + (1.0 - state.beta2) * g.data[j] * g.data[j];
            const double m_hat = m.data[j] / bc1;
            const double v_hat = v.data[j] / bc2;
            p.data[j] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.eps_opt);
        }
    }
}

/// Scalar Adam, used where the target is a plain coefficient vector rather
/// than a model (e.g. fitting a single KAN edge).
struct ScalarAdam {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_opt = 1e-8;
    std::size_t step = 0;
    std::vector<double> m, v;

    explicit ScalarAdam(std::size_t n, double lr = 1e-3)
        : learning_rate(lr), m(n, 0.0), v(n, 0.0) {}

    void update(std::vector<double>& params, const std::vector<double>& grads) {
        require(params.size() == m.size() && grads.size() == m.size(),
                "ScalarAdam: size mismatch");
        step += 1;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        for (std::size_t j = 0; j < params.size(); ++j) {
            m[j] = beta1 * m[j] + (1.0 - beta1) * grads[j];
            v[j] = beta2 * v[j] + (1.0 - beta2) * grads[j] * grads[j];
            params[j] -= learning_rate * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + eps_opt);
        }
    }
};

}  // namespace kanseq
