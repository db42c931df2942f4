#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "kanseq/loss.hpp"
#include "kanseq/model.hpp"
#include "kanseq/rng.hpp"

namespace kanseq {

/// Relative error with an absolute floor. Central differences on a loss of
/// order 1 resolve gradients only to about eps/h ~ 1e-11 absolute, so
/// components below the floor are effectively compared absolutely instead of
/// amplifying measurement noise.
inline double relative_error(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::string worst_tensor;
    std::size_t worst_index = 0;
    std::size_t params_checked = 0;
};

/// Miniature-model dimensions for finite-difference verification.
struct GradCheckScale {
    std::size_t batch = 2;
    std::size_t time = 3;
    std::size_t feature = 4;
    std::size_t rnn1 = 3;
    std::size_t rnn2 = 2;
    std::size_t kan_basis = 5;
    std::size_t dense = 4;
};

inline MaskedBatch random_masked_batch(std::size_t batch, std::size_t time, std::size_t dim,
                                       Rng& rng, std::size_t min_len = 1) {
    MaskedBatch mb(batch, time, dim);
    for (std::size_t b = 0; b < batch; ++b) {
        const std::size_t len = min_len + rng.below(time - min_len + 1);
        for (std::size_t t = 0; t < len; ++t) {
            mb.set_real(b, t, true);
            for (std::size_t d = 0; d < dim; ++d)
                mb.features.at(b, t, d) = rng.normal(0.0, 1.0);
        }
    }
    return mb;
}

/// Compares the analytic backward pass against central finite differences
/// (step h) over every trainable scalar. The dropout mask is re-seeded
/// identically for each loss evaluation, and running statistics stay frozen,
/// so the loss is a deterministic function of the parameters.
inline GradCheckReport gradient_check_model(const ModelSpec& spec, ModelParams& params,
                                            const MaskedBatch& batch,
                                            const std::vector<double>& labels,
                                            std::uint64_t dropout_seed, double h = 1e-5) {
    auto loss_at = [&]() {
        Rng rng(dropout_seed);
        Matrix probs = model_forward_train(spec, params, batch, rng, nullptr, false);
        return bce_loss(probs, labels).mean_bce;
    };

    ModelParams grads = zeros_like(params);
    {
        Rng rng(dropout_seed);
        ModelCache cache;
        Matrix probs = model_forward_train(spec, params, batch, rng, &cache, false);
        model_backward_bce(spec, params, batch, labels, cache, probs, grads);
    }

    GradCheckReport report;
    auto ps = trainable_tensors(params);
    auto gs = trainable_tensors(grads);
    for (std::size_t i = 0; i < ps.size(); ++i) {
        Matrix& p = *ps[i].second;
        const Matrix& g = *gs[i].second;
        for (std::size_t j = 0; j < p.size(); ++j) {
            const double saved = p.data[j];
            p.data[j] = saved + h;
            const double lp = loss_at();
            p.data[j] = saved - h;
            const double lm = loss_at();
            p.data[j] = saved;
            const double fd = (lp - lm) / (2.0 * h);
            const double err = relative_error(g.data[j], fd);
            ++report.params_checked;
            if (err > report.max_rel_err) {
                report.max_rel_err = err;
                report.worst_tensor = ps[i].first;
                report.worst_index = j;
            }
        }
    }
    return report;
}

/// Spec operation: builds a random miniature model of the given scale and
/// runs the finite-difference comparison.
inline GradCheckReport gradient_check(CellKind kind, const GradCheckScale& scale,
                                      std::uint64_t seed, bool use_kan = true,
                                      double dropout_rate = 0.3) {
    ModelSpec spec;
    spec.cell_kind = kind;
    spec.feature_dim = scale.feature;
    spec.rnn1_units = scale.rnn1;
    spec.rnn2_units = scale.rnn2;
    spec.use_kan = use_kan;
    spec.kan_num_functions = scale.kan_basis;
    spec.kan_order = 3;
    spec.dense_units = scale.dense;
    spec.dropout_rate = dropout_rate;
    Rng rng(seed);
    ModelParams params = init_model(spec, rng);
    MaskedBatch batch = random_masked_batch(scale.batch, scale.time, scale.feature, rng);
    std::vector<double> labels(scale.batch);
    for (double& y : labels) y = rng.below(2) ? 1.0 : 0.0;
    return gradient_check_model(spec, params, batch, labels, mix_seed(seed, "dropout", 0));
}

/// Isolated head check: dense(sigmoid) + BCE only, no recurrent stack. The
/// fused head gradient admits a much tighter tolerance (1e-6).
inline GradCheckReport gradient_check_dense_head(std::uint64_t seed, std::size_t input_dim = 4,
                                                 std::size_t batch = 8, double h = 1e-5) {
    Rng rng(seed);
    DenseParams dense(input_dim, 1, ActivationKind::Sigmoid);
    detail::glorot_uniform(dense.w, input_dim, 1, rng);
    Matrix x(batch, input_dim);
    for (double& v : x.data) v = rng.normal(0.0, 1.0);
    std::vector<double> labels(batch);
    for (double& y : labels) y = rng.below(2) ? 1.0 : 0.0;

    auto loss_at = [&]() {
        Matrix probs = dense_forward(dense, x);
        return bce_loss(probs, labels).mean_bce;
    };

    DenseParams grads(input_dim, 1, ActivationKind::Sigmoid);
    {
        Matrix probs = dense_forward(dense, x);
        Matrix d_pre(batch, 1);
        for (std::size_t b = 0; b < batch; ++b)
            d_pre(b, 0) = (probs(b, 0) - labels[b]) / static_cast<double>(batch);
        matmul_tn_accum(d_pre, x, grads.w);
        for (std::size_t b = 0; b < batch; ++b) grads.b.data[0] += d_pre(b, 0);
    }

    GradCheckReport report;
    auto check = [&](const std::string& name, Matrix& p, const Matrix& g) {
        for (std::size_t j = 0; j < p.size(); ++j) {
            const double saved = p.data[j];
            p.data[j] = saved + h;
            const double lp = loss_at();
            p.data[j] = saved - h;
            const double lm = loss_at();
            p.data[j] = saved;
            const double err = relative_error(g.data[j], (lp - lm) / (2.0 * h));
            ++report.params_checked;
            if (err > report.max_rel_err) {
                report.max_rel_err = err;
                report.worst_tensor = name;
                report.worst_index = j;
            }
        }
    };
    check("dense.w", dense.w, grads.w);
    check("dense.b", dense.b, grads.b);
    return report;
}

}  // namespace kanseq
