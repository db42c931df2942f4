#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <vector>

#include "kanseq/loss.hpp"
#include "kanseq/model.hpp"
#include "kanseq/optimizer.hpp"
#include "kanseq/windows.hpp"

namespace kanseq {

struct TrainConfig {
    std::size_t epochs = 50;
    std::size_t batch_size = 256;
    double learning_rate = 1e-3;
    std::size_t early_stop_patience = 5;
    double validation_fraction = 0.1;
    std::uint64_t seed = 0;

    void validate() const {
        require(batch_size >= 2, "TrainConfig: batch_size >= 2");
        require(validation_fraction >= 0.0 && validation_fraction <= 0.5,
                "TrainConfig: validation_fraction in [0, 0.5]");
    }
};

struct EpochTrace {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_loss = std::numeric_limits<double>::quiet_NaN();
    double elapsed_ms = 0.0;
};

struct TrainResult {
    ModelParams params;
    std::vector<EpochTrace> trace;
    std::size_t best_epoch = 0;  // 1-based; 0 = no validation epochs ran
    double best_val_loss = std::numeric_limits<double>::quiet_NaN();
};

/// Mini-batch training from the given initial parameters. Per-epoch index
/// shuffles, dropout masks, and the validation split all derive from `rng`,
/// so one seed fixes the whole run. With a validation split, early stopping
/// watches the validation loss and the best-validation parameters are
/// returned; otherwise the final parameters are.
inline TrainResult train_from(const ModelSpec& spec, ModelParams params, const Samples& data,
                              const TrainConfig& cfg, Rng& rng) {
    cfg.validate();
    require(!data.empty(), "train: empty data");
    bool has_pos = false, has_neg = false;
    for (const auto& s : data) (s.label == 1 ? has_pos : has_neg) = true;
    require(has_pos && has_neg, "train: both classes must be present");

    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    const std::size_t n_val =
        static_cast<std::size_t>(std::floor(cfg.validation_fraction *
                                            static_cast<double>(data.size())));
    std::vector<std::size_t> val_idx(order.begin(),
                                     order.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_val),
                                       order.end());
    require(!train_idx.empty(), "train: no training samples after validation split");

    MaskedBatch val_batch;
    std::vector<double> val_labels;
    if (n_val > 0) val_batch = make_batch(data, val_idx, &val_labels);

    OptimizerState opt(params, cfg.learning_rate);
    TrainResult result;
    ModelParams best_params = params;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        rng.shuffle(train_idx);
        double loss_sum = 0.0;
        std::size_t loss_count = 0;
        for (std::size_t start = 0; start < train_idx.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(start + cfg.batch_size, train_idx.size());
            if (end - start < 2) break;  // batch-norm needs a real batch
            std::vector<std::size_t> chunk(train_idx.begin() + static_cast<std::ptrdiff_t>(start),
                                           train_idx.begin() + static_cast<std::ptrdiff_t>(end));
            std::vector<double> labels;
            MaskedBatch batch = make_batch(data, chunk, &labels);
            ModelCache cache;
            Matrix probs = model_forward_train(spec, params, batch, rng, &cache, true);
            loss_sum += bce_loss(probs, labels).mean_bce * static_cast<double>(labels.size());
            loss_count += labels.size();
            ModelParams grads = zeros_like(params);
            model_backward_bce(spec, params, batch, labels, cache, probs, grads);
            optimizer_step(opt, params, grads);
        }

        EpochTrace tr;
        tr.epoch = epoch;
        tr.train_loss = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;
        if (n_val > 0) {
            Matrix val_probs = model_forward_infer(spec, params, val_batch);
            tr.val_loss = bce_loss(val_probs, val_labels).mean_bce;
        }
        tr.elapsed_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
        result.trace.push_back(tr);

        if (n_val > 0) {
            if (tr.val_loss < best_val) {
                best_val = tr.val_loss;
                best_params = params;
                result.best_epoch = epoch;
                since_best = 0;
            } else if (++since_best >= cfg.early_stop_patience) {
                break;
            }
        }
    }

    if (n_val > 0 && result.best_epoch > 0) {
        result.params = std::move(best_params);
        result.best_val_loss = best_val;
    } else {
        result.params = std::move(params);
    }
    return result;
}

/// Spec operation: initializes a fresh model from the config seed and trains.
inline TrainResult train(const ModelSpec& spec, const Samples& data, const TrainConfig& cfg) {
    Rng init_rng(mix_seed(cfg.seed, "init"));
    ModelParams params = init_model(spec, init_rng);
    Rng rng(mix_seed(cfg.seed, "train"));
    return train_from(spec, std::move(params), data, cfg, rng);
}

/// Per-epoch trace rows: epoch, train_loss, val_loss, elapsed_ms.
inline void write_trace_csv(std::ostream& out, const std::vector<EpochTrace>& trace) {
    out << "epoch,train_loss,val_loss,elapsed_ms\n";
    char buf[64];
    for (const auto& tr : trace) {
        out << tr.epoch << ',';
        std::snprintf(buf, sizeof buf, "%.17g", tr.train_loss);
        out << buf << ',';
        if (std::isnan(tr.val_loss)) {
            out << "";
        } else {
            std::snprintf(buf, sizeof buf, "%.17g", tr.val_loss);
            out << buf;
        }
        std::snprintf(buf, sizeof buf, "%.3f", tr.elapsed_ms);
        out << ',' << buf << '\n';
    }
}

}  // namespace kanseq
