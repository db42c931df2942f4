#pragma once

#include <cmath>
#include <vector>

#include "kanseq/masked_batch.hpp"
#include "kanseq/matrix.hpp"

namespace kanseq {

/// Per-feature batch normalization over a masked sequence batch:
///   y = gamma * (x - mean) / (sqrt(var) + eps) + beta
/// Statistics pool every unmasked (sample, step) position; var is the
/// population variance. Padded positions stay zero.
struct BatchNormParams {
    std::size_t dim = 0;
    double eps = 1e-3;
    double momentum = 0.1;  // running = (1-momentum)*running + momentum*batch
    Matrix gamma, beta;          // 1 x dim, trainable
    Matrix running_mean, running_var;  // 1 x dim, updated during training only

    BatchNormParams() = default;
    explicit BatchNormParams(std::size_t dim_, double eps_ = 1e-3)
        : dim(dim_),
          eps(eps_),
          gamma(1, dim_),
          beta(1, dim_),
          running_mean(1, dim_),
          running_var(1, dim_) {
        for (std::size_t j = 0; j < dim_; ++j) {
            gamma.data[j] = 1.0;
            running_var.data[j] = 1.0;
        }
    }
};

struct BatchNormCache {
    Tensor3 x_hat;
    std::vector<double> mean, std_dev, denom;
    std::size_t count = 0;
};

/// Training-mode forward using batch statistics. Running stats move only
/// when update_running is set, so repeated evaluations (finite differences,
/// validation passes) leave the parameters bit-identical.
inline Tensor3 batch_norm_forward_train(BatchNormParams& p, const Tensor3& x,
                                        const std::vector<std::uint8_t>& mask,
                                        BatchNormCache* cache, bool update_running) {
    require(x.dim == p.dim, "batch_norm: feature dim mismatch");
    require(mask.size() == x.batch * x.time, "batch_norm: mask size mismatch");
    const std::size_t B = x.batch, T = x.time, D = x.dim;
    std::vector<double> mean(D, 0.0), var(D, 0.0);
    std::size_t n = 0;
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t t = 0; t < T; ++t) {
            if (!mask[b * T + t]) continue;
            ++n;
            const double* xr = x.row(b, t);
            for (std::size_t j = 0; j < D; ++j) mean[j] += xr[j];
        }
    require(n >= 2, "batch_norm: train mode needs at least 2 unmasked positions");
    for (std::size_t j = 0; j < D; ++j) mean[j] /= static_cast<double>(n);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t t = 0; t < T; ++t) {
            if (!mask[b * T + t]) continue;
            const double* xr = x.row(b, t);
            for (std::size_t j = 0; j < D; ++j) {
                const double d = xr[j] - mean[j];
                var[j] += d * d;
            }
        }
    std::vector<double> std_dev(D), denom(D);
    for (std::size_t j = 0; j < D; ++j) {
        var[j] /= static_cast<double>(n);
        std_dev[j] = std::sqrt(var[j]);
        denom[j] = std_dev[j] + p.eps;
    }
    Tensor3 y(B, T, D);
    Tensor3 x_hat(B, T, D);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t t = 0; t < T; ++t) {
            if (!mask[b * T + t]) continue;
            const double* xr = x.row(b, t);
            double* yr = y.row(b, t);
            double* hr = x_hat.row(b, t);
            for (std::size_t j = 0; j < D; ++j) {
                hr[j] = (xr[j] - mean[j]) / denom[j];
                yr[j] = p.gamma.data[j] * hr[j] + p.beta.data[j];
            }
        }
    if (update_running) {
        for (std::size_t j = 0; j < D; ++j) {
            p.running_mean.data[j] =
                (1.0 - p.momentum) * p.running_mean.data[j] + p.momentum * mean[j];
            p.running_var.data[j] =
                (1.0 - p.momentum) * p.running_var.data[j] + p.momentum * var[j];
        }
    }
    if (cache) {
        cache->x_hat = std::move(x_hat);
        cache->mean = std::move(mean);
        cache->std_dev = std::move(std_dev);
        cache->denom = std::move(denom);
        cache->count = n;
    }
    return y;
}

/// Inference-mode forward using the stored running statistics.
inline Tensor3 batch_norm_forward_infer(const BatchNormParams& p, const Tensor3& x,
                                        const std::vector<std::uint8_t>& mask) {
    require(x.dim == p.dim, "batch_norm: feature dim mismatch");
    const std::size_t B = x.batch, T = x.time, D = x.dim;
    std::vector<double> denom(D);
    for (std::size_t j = 0; j < D; ++j)
        denom[j] = std::sqrt(std::max(p.running_var.data[j], 0.0)) + p.eps;
    Tensor3 y(B, T, D);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t t = 0; t < T; ++t) {
            if (!mask[b * T + t]) continue;
            const double* xr = x.row(b, t);
            double* yr = y.row(b, t);
            for (std::size_t j = 0; j < D; ++j)
                yr[j] = p.gamma.data[j] * (xr[j] - p.running_mean.data[j]) / denom[j] +
                        p.beta.data[j];
        }
    return y;
}

/// Backward through the training-mode forward. Both the mean and the
/// standard deviation are treated as functions of the batch, giving
///   dx_i = (g/denom)(dy_i - mean(dy)) - (g/std) * x_hat_i * mean(dy*x_hat)
/// per feature, with means over the n unmasked positions. When the batch
/// std is zero the x_hat values are all zero and the second term vanishes.
inline Tensor3 batch_norm_backward(const BatchNormParams& p, const BatchNormCache& cache,
                                   const Tensor3& d_y, const std::vector<std::uint8_t>& mask,
                                   Matrix& d_gamma, Matrix& d_beta) {
    const std::size_t B = d_y.batch, T = d_y.time, D = d_y.dim;
    const double n = static_cast<double>(cache.count);
    std::vector<double> sum_dy(D, 0.0), sum_dy_xhat(D, 0.0);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t t = 0; t < T; ++t) {
            if (!mask[b * T + t]) continue;
            const double* gr = d_y.row(b, t);
            const double* hr = cache.x_hat.row(b, t);
            for (std::size_t j = 0; j < D; ++j) {
                sum_dy[j] += gr[j];
                sum_dy_xhat[j] += gr[j] * hr[j];
            }
        }
    for (std::size_t j = 0; j < D; ++j) {
        d_gamma.data[j] += sum_dy_xhat[j];
        d_beta.data[j] += sum_dy[j];
    }
    Tensor3 d_x(B, T, D);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t t = 0; t < T; ++t) {
            if (!mask[b * T + t]) continue;
            const double* gr = d_y.row(b, t);
            const double* hr = cache.x_hat.row(b, t);
            double* dxr = d_x.row(b, t);
            for (std::size_t j = 0; j < D; ++j) {
                const double g = p.gamma.data[j];
                double v = (g / cache.denom[j]) * (gr[j] - sum_dy[j] / n);
                if (cache.std_dev[j] > 0.0)
                    v -= (g / cache.std_dev[j]) * hr[j] * (sum_dy_xhat[j] / n);
                dxr[j] = v;
            }
        }
    return d_x;
}

}  // namespace kanseq
