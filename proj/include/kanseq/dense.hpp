#pragma once

#include "kanseq/activations.hpp"
#include "kanseq/matrix.hpp"
#include "kanseq/rng.hpp"

namespace kanseq {

struct DenseParams {
    std::size_t input = 0;
    std::size_t output = 0;
    ActivationKind act = ActivationKind::Linear;
    Matrix w;  // output x input
    Matrix b;  // output x 1

    DenseParams() = default;
    DenseParams(std::size_t input_, std::size_t output_, ActivationKind act_)
        : input(input_), output(output_), act(act_), w(output_, input_), b(output_, 1) {}
};

/// x: batch x input; returns act(x W^T + b). The activated output doubles as
/// the backward cache: every supported activation's derivative is a function
/// of its own output.
inline Matrix dense_forward(const DenseParams& p, const Matrix& x) {
    require(x.cols == p.input, "dense_forward: input dim mismatch");
    Matrix y = matmul_nt(x, p.w);
    add_row_vector_inplace(y, p.b);
    for (double& v : y.data) v = activation(v, p.act);
    return y;
}

/// d_out is the gradient at the activated output y (= dense_forward result).
/// Parameter gradients accumulate into g; returns d_x.
inline Matrix dense_backward(const DenseParams& p, const Matrix& x, const Matrix& y,
                             const Matrix& d_out, DenseParams& g) {
    require(d_out.rows == x.rows && d_out.cols == p.output, "dense_backward: d_out shape");
    Matrix d_pre(d_out.rows, d_out.cols);
    for (std::size_t i = 0; i < d_out.data.size(); ++i)
        d_pre.data[i] = d_out.data[i] * activation_grad_from_value(y.data[i], p.act);
    matmul_tn_accum(d_pre, x, g.w);
    for (std::size_t r = 0; r < d_pre.rows; ++r)
        for (std::size_t c = 0; c < d_pre.cols; ++c) g.b.data[c] += d_pre(r, c);
    return matmul(d_pre, p.w);
}

/// Inverted dropout: at train time each element is zeroed with probability
/// `rate` and survivors are scaled by 1/(1-rate), so inference is identity.
/// The multiplier matrix is returned for the backward pass.
inline Matrix dropout_forward_train(const Matrix& x, double rate, Rng& rng, Matrix& multiplier) {
    require(rate >= 0.0 && rate < 1.0, "dropout: rate must be in [0,1)");
    multiplier = Matrix(x.rows, x.cols);
    Matrix y(x.rows, x.cols);
    const double scale = rate == 0.0 ? 1.0 : 1.0 / (1.0 - rate);
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        const double m = rng.uniform() < rate ? 0.0 : scale;
        multiplier.data[i] = m;
        y.data[i] = x.data[i] * m;
    }
    return y;
}

inline Matrix dropout_backward(const Matrix& d_out, const Matrix& multiplier) {
    Matrix d_x(d_out.rows, d_out.cols);
    for (std::size_t i = 0; i < d_out.data.size(); ++i)
        d_x.data[i] = d_out.data[i] * multiplier.data[i];
    return d_x;
}

}  // namespace kanseq
