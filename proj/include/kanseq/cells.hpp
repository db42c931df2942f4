#pragma once

#include <vector>

#include "kanseq/activations.hpp"
#include "kanseq/masked_batch.hpp"
#include "kanseq/matrix.hpp"

namespace kanseq {

/// LSTM gate parameters. Every gate matrix acts on the concatenation
/// [h_prev, x_t], so each has shape hidden x (hidden + input).
struct LstmParams {
    std::size_t hidden = 0;
    std::size_t input = 0;
    Matrix w_f, w_i, w_c, w_o;  // hidden x (hidden + input)
    Matrix b_f, b_i, b_c, b_o;  // hidden x 1

    LstmParams() = default;
    LstmParams(std::size_t hidden_, std::size_t input_)
        : hidden(hidden_),
          input(input_),
          w_f(hidden_, hidden_ + input_),
          w_i(hidden_, hidden_ + input_),
          w_c(hidden_, hidden_ + input_),
          w_o(hidden_, hidden_ + input_),
          b_f(hidden_, 1),
          b_i(hidden_, 1),
          b_c(hidden_, 1),
          b_o(hidden_, 1) {}
};

/// GRU parameters: W_* act on x_t (hidden x input), U_* on h_prev
/// (hidden x hidden).
struct GruParams {
    std::size_t hidden = 0;
    std::size_t input = 0;
    Matrix w_z, u_z, b_z;
    Matrix w_r, u_r, b_r;
    Matrix w_h, u_h, b_h;

    GruParams() = default;
    GruParams(std::size_t hidden_, std::size_t input_)
        : hidden(hidden_),
          input(input_),
          w_z(hidden_, input_),
          u_z(hidden_, hidden_),
          b_z(hidden_, 1),
          w_r(hidden_, input_),
          u_r(hidden_, hidden_),
          b_r(hidden_, 1),
          w_h(hidden_, input_),
          u_h(hidden_, hidden_),
          b_h(hidden_, 1) {}
};

/// One LSTM cell update for a single sample:
///   f = sigmoid(W_f [h,x] + b_f), i = sigmoid(W_i [h,x] + b_i)
///   cbar = tanh(W_c [h,x] + b_c), c' = f*c + i*cbar
///   o = sigmoid(W_o [h,x] + b_o), h' = o * tanh(c')
inline void lstm_step(const LstmParams& p, const std::vector<double>& h_prev,
                      const std::vector<double>& c_prev, const std::vector<double>& x,
                      std::vector<double>& h_out, std::vector<double>& c_out) {
    require(h_prev.size() == p.hidden && c_prev.size() == p.hidden && x.size() == p.input,
            "lstm_step: dimension mismatch");
    std::vector<double> z(p.hidden + p.input);
    for (std::size_t j = 0; j < p.hidden; ++j) z[j] = h_prev[j];
    for (std::size_t j = 0; j < p.input; ++j) z[p.hidden + j] = x[j];

    h_out.assign(p.hidden, 0.0);
    c_out.assign(p.hidden, 0.0);
    for (std::size_t j = 0; j < p.hidden; ++j) {
        double af = p.b_f.data[j], ai = p.b_i.data[j], ac = p.b_c.data[j], ao = p.b_o.data[j];
        const double* wf = p.w_f.row_ptr(j);
        const double* wi = p.w_i.row_ptr(j);
        const double* wc = p.w_c.row_ptr(j);
        const double* wo = p.w_o.row_ptr(j);
        for (std::size_t k = 0; k < z.size(); ++k) {
            af += wf[k] * z[k];
            ai += wi[k] * z[k];
            ac += wc[k] * z[k];
            ao += wo[k] * z[k];
        }
        const double f = sigmoid(af), i = sigmoid(ai), cb = tanh_act(ac), o = sigmoid(ao);
        c_out[j] = f * c_prev[j] + i * cb;
        h_out[j] = o * tanh_act(c_out[j]);
    }
}

/// One GRU cell update for a single sample:
///   z = sigmoid(W_z x + U_z h + b_z), r = sigmoid(W_r x + U_r h + b_r)
///   hbar = tanh(W_h x + U_h (r*h) + b_h), h' = z*h + (1-z)*hbar
inline std::vector<double> gru_step(const GruParams& p, const std::vector<double>& h_prev,
                                    const std::vector<double>& x) {
    require(h_prev.size() == p.hidden && x.size() == p.input, "gru_step: dimension mismatch");
    std::vector<double> z(p.hidden), r(p.hidden), h_out(p.hidden);
    for (std::size_t j = 0; j < p.hidden; ++j) {
        double az = p.b_z.data[j], ar = p.b_r.data[j];
        for (std::size_t k = 0; k < p.input; ++k) {
            az += p.w_z(j, k) * x[k];
            ar += p.w_r(j, k) * x[k];
        }
        for (std::size_t k = 0; k < p.hidden; ++k) {
            az += p.u_z(j, k) * h_prev[k];
            ar += p.u_r(j, k) * h_prev[k];
        }
        z[j] = sigmoid(az);
        r[j] = sigmoid(ar);
    }
    for (std::size_t j = 0; j < p.hidden; ++j) {
        double ah = p.b_h.data[j];
        for (std::size_t k = 0; k < p.input; ++k) ah += p.w_h(j, k) * x[k];
        for (std::size_t k = 0; k < p.hidden; ++k) ah += p.u_h(j, k) * (r[k] * h_prev[k]);
        const double hbar = tanh_act(ah);
        h_out[j] = z[j] * h_prev[j] + (1.0 - z[j]) * hbar;
    }
    return h_out;
}

// ---------------------------------------------------------------------------
// Batched sequence passes. Padded steps are state passthrough: hidden (and
// cell) state carries over unchanged, sequence outputs stay zero, and no
// gradient flows through the step.
// ---------------------------------------------------------------------------

struct LstmSeqCache {
    std::vector<Matrix> z;     // per step, batch x (hidden+input)
    std::vector<Matrix> f, i, cbar, o, tanh_c;
    std::vector<Matrix> c;     // post-mask cell state per step
    Matrix h_final, c_final;
};

struct GruSeqCache {
    std::vector<Matrix> z, r, hbar;
    std::vector<Matrix> rh;    // r * h_prev
    std::vector<Matrix> h;     // post-mask hidden per step
    Matrix h_final;
};

namespace detail {

inline Matrix gate_preact(const Matrix& z, const Matrix& w, const Matrix& b) {
    Matrix a = matmul_nt(z, w);
    add_row_vector_inplace(a, b);
    return a;
}

inline void check_batch(const MaskedBatch& batch) {
    for (std::size_t b = 0; b < batch.batch(); ++b)
        require(batch.seq_len(b) > 0, "rnn forward: sequence with all-false mask");
}

}  // namespace detail

/// Runs the LSTM over all steps. Returns outputs (batch x time x hidden,
/// zero at padded steps); finals land in cache.h_final / cache.c_final.
inline Tensor3 lstm_forward_batch(const LstmParams& p, const MaskedBatch& batch,
                                  LstmSeqCache* cache) {
    require(batch.dim() == p.input, "lstm_forward_batch: feature dim mismatch");
    detail::check_batch(batch);
    const std::size_t B = batch.batch(), T = batch.time(), h = p.hidden, in = p.input;
    Matrix H(B, h), C(B, h);
    Tensor3 out(B, T, h);
    if (cache) {
        cache->z.resize(T);
        cache->f.resize(T);
        cache->i.resize(T);
        cache->cbar.resize(T);
        cache->o.resize(T);
        cache->tanh_c.resize(T);
        cache->c.resize(T);
    }
    for (std::size_t t = 0; t < T; ++t) {
        Matrix z(B, h + in);
        for (std::size_t b = 0; b < B; ++b) {
            double* zr = z.row_ptr(b);
            const double* hr = H.row_ptr(b);
            const double* xr = batch.features.row(b, t);
            for (std::size_t j = 0; j < h; ++j) zr[j] = hr[j];
            for (std::size_t j = 0; j < in; ++j) zr[h + j] = xr[j];
        }
        Matrix f = detail::gate_preact(z, p.w_f, p.b_f);
        Matrix i = detail::gate_preact(z, p.w_i, p.b_i);
        Matrix cb = detail::gate_preact(z, p.w_c, p.b_c);
        Matrix o = detail::gate_preact(z, p.w_o, p.b_o);
        Matrix tc(B, h);
        for (std::size_t b = 0; b < B; ++b) {
            const bool real = batch.is_real(b, t);
            double* fr = f.row_ptr(b);
            double* ir = i.row_ptr(b);
            double* cr = cb.row_ptr(b);
            double* orow = o.row_ptr(b);
            double* tr = tc.row_ptr(b);
            double* Hr = H.row_ptr(b);
            double* Cr = C.row_ptr(b);
            for (std::size_t j = 0; j < h; ++j) {
                fr[j] = sigmoid(fr[j]);
                ir[j] = sigmoid(ir[j]);
                cr[j] = tanh_act(cr[j]);
                orow[j] = sigmoid(orow[j]);
                if (real) {
                    Cr[j] = fr[j] * Cr[j] + ir[j] * cr[j];
                    tr[j] = tanh_act(Cr[j]);
                    Hr[j] = orow[j] * tr[j];
                    out.at(b, t, j) = Hr[j];
                }
            }
        }
        if (cache) {
            cache->z[t] = std::move(z);
            cache->f[t] = std::move(f);
            cache->i[t] = std::move(i);
            cache->cbar[t] = std::move(cb);
            cache->o[t] = std::move(o);
            cache->tanh_c[t] = std::move(tc);
            cache->c[t] = C;
        }
    }
    if (cache) {
        cache->h_final = H;
        cache->c_final = std::move(C);
    }
    return out;
}

/// Reverse pass matching lstm_forward_batch. d_out may be null (no per-step
/// gradient) and d_h_final may be null; parameter gradients accumulate into
/// `g`; d_x receives gradients w.r.t. the inputs (zero at padded steps).
inline void lstm_backward_batch(const LstmParams& p, const MaskedBatch& batch,
                                const LstmSeqCache& cache, const Tensor3* d_out,
                                const Matrix* d_h_final, LstmParams& g, Tensor3& d_x) {
    const std::size_t B = batch.batch(), T = batch.time(), h = p.hidden, in = p.input;
    d_x = Tensor3(B, T, in);
    Matrix dH = d_h_final ? *d_h_final : Matrix(B, h);
    Matrix dC(B, h);
    for (std::size_t t = T; t-- > 0;) {
        const Matrix& f = cache.f[t];
        const Matrix& i = cache.i[t];
        const Matrix& cb = cache.cbar[t];
        const Matrix& o = cache.o[t];
        const Matrix& tc = cache.tanh_c[t];
        Matrix daf(B, h), dai(B, h), dac(B, h), dao(B, h);
        Matrix dH_next(B, h), dC_next(B, h);
        for (std::size_t b = 0; b < B; ++b) {
            if (!batch.is_real(b, t)) {
                // passthrough step: gradient carries to t-1 untouched
                for (std::size_t j = 0; j < h; ++j) {
                    dH_next(b, j) = dH(b, j);
                    dC_next(b, j) = dC(b, j);
                }
                continue;
            }
            for (std::size_t j = 0; j < h; ++j) {
                double dh = dH(b, j);
                if (d_out) dh += d_out->at(b, t, j);
                const double d_o = dh * tc(b, j);
                double dc = dC(b, j) + dh * o(b, j) * tanh_grad_from_value(tc(b, j));
                const double c_prev = t == 0 ? 0.0 : cache.c[t - 1](b, j);
                const double d_f = dc * c_prev;
                const double d_i = dc * cb(b, j);
                const double d_cb = dc * i(b, j);
                daf(b, j) = d_f * sigmoid_grad_from_value(f(b, j));
                dai(b, j) = d_i * sigmoid_grad_from_value(i(b, j));
                dac(b, j) = d_cb * tanh_grad_from_value(cb(b, j));
                dao(b, j) = d_o * sigmoid_grad_from_value(o(b, j));
                dC_next(b, j) = dc * f(b, j);
            }
        }
        matmul_tn_accum(daf, cache.z[t], g.w_f);
        matmul_tn_accum(dai, cache.z[t], g.w_i);
        matmul_tn_accum(dac, cache.z[t], g.w_c);
        matmul_tn_accum(dao, cache.z[t], g.w_o);
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t j = 0; j < h; ++j) {
                g.b_f.data[j] += daf(b, j);
                g.b_i.data[j] += dai(b, j);
                g.b_c.data[j] += dac(b, j);
                g.b_o.data[j] += dao(b, j);
            }
        Matrix dz = matmul(daf, p.w_f);
        add_inplace(dz, matmul(dai, p.w_i));
        add_inplace(dz, matmul(dac, p.w_c));
        add_inplace(dz, matmul(dao, p.w_o));
        for (std::size_t b = 0; b < B; ++b) {
            if (!batch.is_real(b, t)) continue;
            for (std::size_t j = 0; j < h; ++j) dH_next(b, j) += dz(b, j);
            double* dxr = d_x.row(b, t);
            for (std::size_t j = 0; j < in; ++j) dxr[j] = dz(b, h + j);
        }
        dH = std::move(dH_next);
        dC = std::move(dC_next);
    }
}

inline Tensor3 gru_forward_batch(const GruParams& p, const MaskedBatch& batch,
                                 GruSeqCache* cache) {
    require(batch.dim() == p.input, "gru_forward_batch: feature dim mismatch");
    detail::check_batch(batch);
    const std::size_t B = batch.batch(), T = batch.time(), h = p.hidden, in = p.input;
    Matrix H(B, h);
    Tensor3 out(B, T, h);
    if (cache) {
        cache->z.resize(T);
        cache->r.resize(T);
        cache->hbar.resize(T);
        cache->rh.resize(T);
        cache->h.resize(T);
    }
    Matrix x_t(B, in);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t b = 0; b < B; ++b) {
            const double* xr = batch.features.row(b, t);
            double* dst = x_t.row_ptr(b);
            for (std::size_t j = 0; j < in; ++j) dst[j] = xr[j];
        }
        Matrix az = matmul_nt(x_t, p.w_z);
        add_inplace(az, matmul_nt(H, p.u_z));
        add_row_vector_inplace(az, p.b_z);
        Matrix ar = matmul_nt(x_t, p.w_r);
        add_inplace(ar, matmul_nt(H, p.u_r));
        add_row_vector_inplace(ar, p.b_r);
        Matrix rh(B, h);
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t j = 0; j < h; ++j) {
                az(b, j) = sigmoid(az(b, j));
                ar(b, j) = sigmoid(ar(b, j));
                rh(b, j) = ar(b, j) * H(b, j);
            }
        Matrix ah = matmul_nt(x_t, p.w_h);
        add_inplace(ah, matmul_nt(rh, p.u_h));
        add_row_vector_inplace(ah, p.b_h);
        for (std::size_t b = 0; b < B; ++b) {
            const bool real = batch.is_real(b, t);
            for (std::size_t j = 0; j < h; ++j) {
                ah(b, j) = tanh_act(ah(b, j));
                if (real) {
                    H(b, j) = az(b, j) * H(b, j) + (1.0 - az(b, j)) * ah(b, j);
                    out.at(b, t, j) = H(b, j);
                }
            }
        }
        if (cache) {
            cache->z[t] = std::move(az);
            cache->r[t] = std::move(ar);
            cache->rh[t] = std::move(rh);
            cache->hbar[t] = std::move(ah);
            cache->h[t] = H;
        }
    }
    if (cache) cache->h_final = std::move(H);
    return out;
}

inline void gru_backward_batch(const GruParams& p, const MaskedBatch& batch,
                               const GruSeqCache& cache, const Tensor3* d_out,
                               const Matrix* d_h_final, GruParams& g, Tensor3& d_x) {
    const std::size_t B = batch.batch(), T = batch.time(), h = p.hidden, in = p.input;
    d_x = Tensor3(B, T, in);
    Matrix dH = d_h_final ? *d_h_final : Matrix(B, h);
    Matrix x_t(B, in), h_prev(B, h);
    for (std::size_t t = T; t-- > 0;) {
        for (std::size_t b = 0; b < B; ++b) {
            const double* xr = batch.features.row(b, t);
            double* dst = x_t.row_ptr(b);
            for (std::size_t j = 0; j < in; ++j) dst[j] = xr[j];
            for (std::size_t j = 0; j < h; ++j)
                h_prev(b, j) = t == 0 ? 0.0 : cache.h[t - 1](b, j);
        }
        const Matrix& z = cache.z[t];
        const Matrix& r = cache.r[t];
        const Matrix& hb = cache.hbar[t];
        Matrix daz(B, h), dar(B, h), dah(B, h);
        Matrix dH_next(B, h);
        for (std::size_t b = 0; b < B; ++b) {
            if (!batch.is_real(b, t)) {
                for (std::size_t j = 0; j < h; ++j) dH_next(b, j) = dH(b, j);
                continue;
            }
            for (std::size_t j = 0; j < h; ++j) {
                double dh = dH(b, j);
                if (d_out) dh += d_out->at(b, t, j);
                const double d_z = dh * (h_prev(b, j) - hb(b, j));
                const double d_hb = dh * (1.0 - z(b, j));
                dH_next(b, j) = dh * z(b, j);
                daz(b, j) = d_z * sigmoid_grad_from_value(z(b, j));
                dah(b, j) = d_hb * tanh_grad_from_value(hb(b, j));
            }
        }
        // dW_h/dU_h from dah, then the r-gate path feeds back into h_prev.
        matmul_tn_accum(dah, x_t, g.w_h);
        matmul_tn_accum(dah, cache.rh[t], g.u_h);
        Matrix drh = matmul(dah, p.u_h);
        for (std::size_t b = 0; b < B; ++b) {
            if (!batch.is_real(b, t)) continue;
            for (std::size_t j = 0; j < h; ++j) {
                const double d_r = drh(b, j) * h_prev(b, j);
                dH_next(b, j) += drh(b, j) * r(b, j);
                dar(b, j) = d_r * sigmoid_grad_from_value(r(b, j));
            }
        }
        matmul_tn_accum(daz, x_t, g.w_z);
        matmul_tn_accum(daz, h_prev, g.u_z);
        matmul_tn_accum(dar, x_t, g.w_r);
        matmul_tn_accum(dar, h_prev, g.u_r);
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t j = 0; j < h; ++j) {
                g.b_z.data[j] += daz(b, j);
                g.b_r.data[j] += dar(b, j);
                g.b_h.data[j] += dah(b, j);
            }
        Matrix dhz = matmul(daz, p.u_z);
        Matrix dhr = matmul(dar, p.u_r);
        Matrix dxz = matmul(daz, p.w_z);
        Matrix dxr_m = matmul(dar, p.w_r);
        Matrix dxh = matmul(dah, p.w_h);
        for (std::size_t b = 0; b < B; ++b) {
            if (!batch.is_real(b, t)) continue;
            for (std::size_t j = 0; j < h; ++j) dH_next(b, j) += dhz(b, j) + dhr(b, j);
            double* dxr = d_x.row(b, t);
            for (std::size_t j = 0; j < in; ++j)
                dxr[j] = dxz(b, j) + dxr_m(b, j) + dxh(b, j);
        }
        dH = std::move(dH_next);
    }
}

}  // namespace kanseq
