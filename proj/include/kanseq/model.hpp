#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "kanseq/batch_norm.hpp"
#include "kanseq/cells.hpp"
#include "kanseq/dense.hpp"
#include "kanseq/kan_layer.hpp"
#include "kanseq/masked_batch.hpp"
#include "kanseq/rng.hpp"

namespace kanseq {

enum class CellKind { Lstm, Gru };

inline std::string cell_kind_name(CellKind k) { return k == CellKind::Lstm ? "LSTM" : "GRU"; }

/// Architecture description for the recurrent-KAN stack:
///   masking -> rnn1 (sequences) -> batch_norm -> rnn2 (final state)
///   -> kan layer(s) -> dense(relu) -> dropout -> dense(1, sigmoid).
/// use_kan=false removes the KAN stage, giving the plain GRU/LSTM baseline.
struct ModelSpec {
    CellKind cell_kind = CellKind::Gru;
    std::size_t feature_dim = 9;
    std::size_t rnn1_units = 128;
    std::size_t rnn2_units = 64;
    bool use_kan = true;
    std::size_t kan_output_dim = 1;
    std::size_t kan_num_functions = 10;
    std::size_t kan_order = 3;
    double kan_grid_lo = -3.0;
    double kan_grid_hi = 3.0;
    std::vector<std::size_t> kan_hidden_dims;  // widths of extra stacked KAN layers
    std::size_t dense_units = 64;
    double dropout_rate = 0.3;
    double bn_eps = 1e-3;
    double bn_momentum = 0.1;

    void validate() const {
        require(feature_dim > 0 && rnn1_units > 0 && rnn2_units > 0 && dense_units > 0,
                "ModelSpec: unit counts must be positive");
        require(dropout_rate >= 0.0 && dropout_rate < 1.0, "ModelSpec: dropout_rate in [0,1)");
        if (use_kan) {
            require(kan_output_dim > 0, "ModelSpec: kan_output_dim must be positive");
            require(kan_num_functions >= kan_order + 1,
                    "ModelSpec: kan_num_functions must be >= kan_order + 1");
            require(kan_grid_hi > kan_grid_lo, "ModelSpec: KAN grid must be increasing");
        }
    }

    std::string name() const {
        return cell_kind_name(cell_kind) + (use_kan ? "-KAN" : "");
    }

    std::size_t head_input_dim() const { return use_kan ? kan_output_dim : rnn2_units; }
};

using CellParams = std::variant<LstmParams, GruParams>;

struct ModelParams {
    CellParams rnn1;
    CellParams rnn2;
    BatchNormParams bn;
    std::vector<KanLayerParams> kan;
    DenseParams dense1;
    DenseParams dense2;
};

namespace detail {

template <typename Fn>
void visit_cell(const std::string& prefix, CellParams& cp, Fn&& fn) {
    if (auto* l = std::get_if<LstmParams>(&cp)) {
        fn(prefix + ".w_f", l->w_f);
        fn(prefix + ".w_i", l->w_i);
        fn(prefix + ".w_c", l->w_c);
        fn(prefix + ".w_o", l->w_o);
        fn(prefix + ".b_f", l->b_f);
        fn(prefix + ".b_i", l->b_i);
        fn(prefix + ".b_c", l->b_c);
        fn(prefix + ".b_o", l->b_o);
    } else {
        auto& g = std::get<GruParams>(cp);
        fn(prefix + ".w_z", g.w_z);
        fn(prefix + ".u_z", g.u_z);
        fn(prefix + ".b_z", g.b_z);
        fn(prefix + ".w_r", g.w_r);
        fn(prefix + ".u_r", g.u_r);
        fn(prefix + ".b_r", g.b_r);
        fn(prefix + ".w_h", g.w_h);
        fn(prefix + ".u_h", g.u_h);
        fn(prefix + ".b_h", g.b_h);
    }
}

}  // namespace detail

/// Visits every trainable tensor in a fixed, documented order. The same
/// order drives initialization, Adam state, serialization, and gradcheck.
template <typename Fn>
void for_each_trainable(ModelParams& p, Fn&& fn) {
    detail::visit_cell("rnn1", p.rnn1, fn);
    detail::visit_cell("rnn2", p.rnn2, fn);
    fn("bn.gamma", p.bn.gamma);
    fn("bn.beta", p.bn.beta);
    for (std::size_t i = 0; i < p.kan.size(); ++i) {
        fn("kan" + std::to_string(i) + ".base_weight", p.kan[i].base_weight);
        fn("kan" + std::to_string(i) + ".coeff", p.kan[i].coeff);
    }
    fn("dense1.w", p.dense1.w);
    fn("dense1.b", p.dense1.b);
    fn("dense2.w", p.dense2.w);
    fn("dense2.b", p.dense2.b);
}

template <typename Fn>
void for_each_trainable(const ModelParams& p, Fn&& fn) {
    for_each_trainable(const_cast<ModelParams&>(p),
                       [&fn](const std::string& name, Matrix& m) {
                           fn(name, static_cast<const Matrix&>(m));
                       });
}

/// Non-trainable tensors that still belong in a serialized model.
template <typename Fn>
void for_each_state_tensor(ModelParams& p, Fn&& fn) {
    fn("bn.running_mean", p.bn.running_mean);
    fn("bn.running_var", p.bn.running_var);
}

inline std::vector<std::pair<std::string, Matrix*>> trainable_tensors(ModelParams& p) {
    std::vector<std::pair<std::string, Matrix*>> out;
    for_each_trainable(p, [&out](const std::string& name, Matrix& m) {
        out.emplace_back(name, &m);
    });
    return out;
}

inline std::size_t trainable_count(const ModelParams& p) {
    std::size_t n = 0;
    for_each_trainable(p, [&n](const std::string&, const Matrix& m) { n += m.size(); });
    return n;
}

namespace detail {

inline void glorot_uniform(Matrix& w, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : w.data) v = rng.uniform(-limit, limit);
}

inline CellParams make_cell(CellKind kind, std::size_t hidden, std::size_t input) {
    if (kind == CellKind::Lstm) return LstmParams(hidden, input);
    return GruParams(hidden, input);
}

inline void init_cell(CellParams& cp, Rng& rng) {
    if (auto* l = std::get_if<LstmParams>(&cp)) {
        const std::size_t fan_in = l->hidden + l->input;
        for (Matrix* w : {&l->w_f, &l->w_i, &l->w_c, &l->w_o})
            glorot_uniform(*w, fan_in, l->hidden, rng);
        // biases stay zero; a forget bias of 1 is a common trick but the
        // printed equations carry no such offset
    } else {
        auto& g = std::get<GruParams>(cp);
        for (Matrix* w : {&g.w_z, &g.w_r, &g.w_h}) glorot_uniform(*w, g.input, g.hidden, rng);
        for (Matrix* u : {&g.u_z, &g.u_r, &g.u_h}) glorot_uniform(*u, g.hidden, g.hidden, rng);
    }
}

}  // namespace detail

/// Builds parameter tensors for `spec` and initializes them: Glorot-uniform
/// weight matrices, zero biases, zero spline coefficients, N(0, 0.1) KAN
/// base weights, gamma=1 / beta=0.
inline ModelParams init_model(const ModelSpec& spec, Rng& rng) {
    spec.validate();
    ModelParams p;
    p.rnn1 = detail::make_cell(spec.cell_kind, spec.rnn1_units, spec.feature_dim);
    p.rnn2 = detail::make_cell(spec.cell_kind, spec.rnn2_units, spec.rnn1_units);
    p.bn = BatchNormParams(spec.rnn1_units, spec.bn_eps);
    p.bn.momentum = spec.bn_momentum;
    detail::init_cell(p.rnn1, rng);
    detail::init_cell(p.rnn2, rng);
    if (spec.use_kan) {
        std::vector<std::size_t> widths;
        widths.push_back(spec.rnn2_units);
        for (std::size_t w : spec.kan_hidden_dims) widths.push_back(w);
        widths.push_back(spec.kan_output_dim);
        for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
            KanLayerParams k(widths[i], widths[i + 1], spec.kan_num_functions, spec.kan_order,
                             spec.kan_grid_lo, spec.kan_grid_hi);
            for (double& v : k.base_weight.data) v = rng.normal(0.0, 0.1);
            p.kan.push_back(std::move(k));
        }
    }
    p.dense1 = DenseParams(spec.head_input_dim(), spec.dense_units, ActivationKind::Relu);
    detail::glorot_uniform(p.dense1.w, p.dense1.input, p.dense1.output, rng);
    p.dense2 = DenseParams(spec.dense_units, 1, ActivationKind::Sigmoid);
    detail::glorot_uniform(p.dense2.w, p.dense2.input, p.dense2.output, rng);
    return p;
}

/// Same tensor layout as `like`, all entries zero. Used for gradients and
/// optimizer moments.
inline ModelParams zeros_like(const ModelParams& like) {
    ModelParams z = like;
    for_each_trainable(z, [](const std::string&, Matrix& m) { m.fill(0.0); });
    for_each_state_tensor(z, [](const std::string&, Matrix& m) { m.fill(0.0); });
    return z;
}

struct ModelCache {
    std::variant<LstmSeqCache, GruSeqCache> rnn1_cache;
    std::variant<LstmSeqCache, GruSeqCache> rnn2_cache;
    BatchNormCache bn_cache;
    MaskedBatch rnn2_input;          // batch-norm output plus the original mask
    std::vector<Matrix> kan_inputs;  // kan_inputs[i] feeds kan layer i
    std::vector<KanCache> kan_caches;
    Matrix dense1_in;
    Matrix dense1_out;
    Matrix drop_mult;
    Matrix dense2_in;
};

namespace detail {

inline Tensor3 rnn_forward(const CellParams& cp, const MaskedBatch& batch,
                           std::variant<LstmSeqCache, GruSeqCache>* cache, Matrix* h_final) {
    if (const auto* l = std::get_if<LstmParams>(&cp)) {
        LstmSeqCache local;
        LstmSeqCache* c = cache ? &(cache->emplace<LstmSeqCache>()) : &local;
        Tensor3 out = lstm_forward_batch(*l, batch, c);
        if (h_final) *h_final = c->h_final;
        return out;
    }
    const auto& g = std::get<GruParams>(cp);
    GruSeqCache local;
    GruSeqCache* c = cache ? &(cache->emplace<GruSeqCache>()) : &local;
    Tensor3 out = gru_forward_batch(g, batch, c);
    if (h_final) *h_final = c->h_final;
    return out;
}

inline void rnn_backward(const CellParams& cp, const MaskedBatch& batch,
                         const std::variant<LstmSeqCache, GruSeqCache>& cache,
                         const Tensor3* d_out, const Matrix* d_h_final, CellParams& grads,
                         Tensor3& d_x) {
    if (const auto* l = std::get_if<LstmParams>(&cp)) {
        lstm_backward_batch(*l, batch, std::get<LstmSeqCache>(cache), d_out, d_h_final,
                            std::get<LstmParams>(grads), d_x);
        return;
    }
    gru_backward_batch(std::get<GruParams>(cp), batch, std::get<GruSeqCache>(cache), d_out,
                       d_h_final, std::get<GruParams>(grads), d_x);
}

}  // namespace detail

/// Training-mode forward pass. The dropout mask is drawn from `rng`; pass a
/// cache to enable model_backward_bce. Running batch-norm statistics move
/// only when update_running is set.
inline Matrix model_forward_train(const ModelSpec& spec, ModelParams& params,
                                  const MaskedBatch& batch, Rng& rng, ModelCache* cache,
                                  bool update_running) {
    require(batch.dim() == spec.feature_dim, "model_forward: feature dim mismatch");
    Matrix h_final;
    Tensor3 seq = detail::rnn_forward(params.rnn1, batch,
                                      cache ? &cache->rnn1_cache : nullptr, nullptr);
    Tensor3 normed = batch_norm_forward_train(params.bn, seq, batch.mask,
                                              cache ? &cache->bn_cache : nullptr,
                                              update_running);
    MaskedBatch rnn2_input;
    rnn2_input.features = std::move(normed);
    rnn2_input.mask = batch.mask;
    detail::rnn_forward(params.rnn2, rnn2_input,
                        cache ? &cache->rnn2_cache : nullptr, &h_final);
    if (cache) cache->rnn2_input = std::move(rnn2_input);

    Matrix x = std::move(h_final);
    if (cache) {
        cache->kan_inputs.clear();
        cache->kan_caches.resize(params.kan.size());
    }
    for (std::size_t i = 0; i < params.kan.size(); ++i) {
        if (cache) cache->kan_inputs.push_back(x);
        Matrix y = kan_layer_forward(params.kan[i], x, cache ? &cache->kan_caches[i] : nullptr);
        x = std::move(y);
    }
    if (cache) cache->dense1_in = x;
    Matrix y1 = dense_forward(params.dense1, x);
    Matrix mult;
    Matrix dropped = dropout_forward_train(y1, spec.dropout_rate, rng, mult);
    if (cache) {
        cache->dense1_out = std::move(y1);
        cache->drop_mult = std::move(mult);
        cache->dense2_in = dropped;
    }
    return dense_forward(params.dense2, dropped);
}

/// Inference-mode forward pass: running-stat batch norm, dropout disabled.
inline Matrix model_forward_infer(const ModelSpec& spec, const ModelParams& params,
                                  const MaskedBatch& batch) {
    require(batch.dim() == spec.feature_dim, "model_forward: feature dim mismatch");
    Matrix h_final;
    Tensor3 seq = detail::rnn_forward(params.rnn1, batch, nullptr, nullptr);
    Tensor3 normed = batch_norm_forward_infer(params.bn, seq, batch.mask);
    MaskedBatch rnn2_input;
    rnn2_input.features = std::move(normed);
    rnn2_input.mask = batch.mask;
    detail::rnn_forward(params.rnn2, rnn2_input, nullptr, &h_final);
    Matrix x = std::move(h_final);
    for (const auto& k : params.kan) x = kan_layer_forward(k, x);
    Matrix y1 = dense_forward(params.dense1, x);
    return dense_forward(params.dense2, y1);
}

enum class ForwardMode { Train, Infer };

/// Mode dispatcher; train mode updates running statistics.
inline Matrix model_forward(const ModelSpec& spec, ModelParams& params, const MaskedBatch& batch,
                            ForwardMode mode, Rng& rng) {
    if (mode == ForwardMode::Infer) return model_forward_infer(spec, params, batch);
    return model_forward_train(spec, params, batch, rng, nullptr, true);
}

/// Gradient of mean BCE w.r.t. every trainable tensor, accumulated into
/// `grads` (zeros_like layout). `probs` must come from the forward pass that
/// filled `cache`. The sigmoid head and the loss are fused:
/// d(pre-activation) = (p - y) / N.
inline void model_backward_bce(const ModelSpec& spec, const ModelParams& params,
                               const MaskedBatch& batch, const std::vector<double>& labels,
                               const ModelCache& cache, const Matrix& probs,
                               ModelParams& grads) {
    const std::size_t B = batch.batch();
    require(probs.rows == B && probs.cols == 1, "model_backward: probs shape");
    require(labels.size() == B, "model_backward: label count");

    Matrix d_pre2(B, 1);
    for (std::size_t b = 0; b < B; ++b)
        d_pre2(b, 0) = (probs(b, 0) - labels[b]) / static_cast<double>(B);
    matmul_tn_accum(d_pre2, cache.dense2_in, grads.dense2.w);
    for (std::size_t b = 0; b < B; ++b) grads.dense2.b.data[0] += d_pre2(b, 0);
    Matrix d_drop = matmul(d_pre2, params.dense2.w);

    Matrix d_y1 = dropout_backward(d_drop, cache.drop_mult);
    Matrix d_x = dense_backward(params.dense1, cache.dense1_in, cache.dense1_out, d_y1,
                                grads.dense1);

    for (std::size_t i = params.kan.size(); i-- > 0;)
        d_x = kan_layer_backward(params.kan[i], cache.kan_inputs[i], cache.kan_caches[i], d_x,
                                 grads.kan[i]);

    Tensor3 d_bn_out;
    detail::rnn_backward(params.rnn2, cache.rnn2_input, cache.rnn2_cache, nullptr, &d_x,
                         grads.rnn2, d_bn_out);
    Tensor3 d_seq = batch_norm_backward(params.bn, cache.bn_cache, d_bn_out, batch.mask,
                                        grads.bn.gamma, grads.bn.beta);
    Tensor3 d_input;
    detail::rnn_backward(params.rnn1, batch, cache.rnn1_cache, &d_seq, nullptr, grads.rnn1,
                         d_input);
}

/// Spec operation: single call from batch + labels to gradients.
inline ModelParams backward(const ModelSpec& spec, ModelParams& params, const MaskedBatch& batch,
                            const std::vector<double>& labels, Rng& rng) {
    ModelCache cache;
    Matrix probs = model_forward_train(spec, params, batch, rng, &cache, false);
    ModelParams grads = zeros_like(params);
    model_backward_bce(spec, params, batch, labels, cache, probs, grads);
    return grads;
}

}  // namespace kanseq
