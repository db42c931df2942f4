#pragma once

#include <cstddef>
#include <vector>

#include "kanseq/activations.hpp"
#include "kanseq/bspline.hpp"
#include "kanseq/matrix.hpp"

namespace kanseq {

/// Kolmogorov-Arnold layer: every edge (q, p) carries its own learnable
/// univariate function phi_{q,p}(x) = base_weight[q][p]*silu(x) +
/// sum_k coeff[q][p][k]*B_k(x), and output q sums the edge functions over
/// the inputs. All edges share one spline grid.
struct KanLayerParams {
    std::size_t input_dim = 0;
    std::size_t output_dim = 0;
    BSplineGrid grid;
    Matrix base_weight;  // output_dim x input_dim
    Matrix coeff;        // output_dim x (input_dim * num_functions)

    KanLayerParams() = default;
    KanLayerParams(std::size_t input_dim_, std::size_t output_dim_, std::size_t num_functions,
                   std::size_t order = 3, double grid_lo = -3.0, double grid_hi = 3.0)
        : input_dim(input_dim_),
          output_dim(output_dim_),
          grid(num_functions, order, grid_lo, grid_hi),
          base_weight(output_dim_, input_dim_),
          coeff(output_dim_, input_dim_ * num_functions) {}

    std::size_t num_functions() const { return grid.num_functions; }

    const double* edge_coeffs(std::size_t q, std::size_t p) const {
        return coeff.row_ptr(q) + p * grid.num_functions;
    }
};

struct KanCache {
    Matrix silu_x;    // batch x input_dim
    Matrix silu_dx;   // batch x input_dim
    Matrix basis;     // batch x (input_dim * K)
    Matrix basis_dx;  // batch x (input_dim * K)
};

/// x: batch x input_dim; returns batch x output_dim. Pass a cache to keep
/// the basis design matrices around for the backward pass.
inline Matrix kan_layer_forward(const KanLayerParams& p, const Matrix& x, KanCache* cache) {
    require(x.cols == p.input_dim, "kan_layer_forward: input dim mismatch");
    const std::size_t B = x.rows, n = p.input_dim, K = p.grid.num_functions;
    Matrix silu_x(B, n), silu_dx(B, n), basis(B, n * K), basis_dx(B, n * K);
    std::vector<double> bd(K);
    for (std::size_t b = 0; b < B; ++b) {
        const double* xr = x.row_ptr(b);
        for (std::size_t j = 0; j < n; ++j) {
            silu_x(b, j) = silu(xr[j]);
            silu_dx(b, j) = silu_grad(xr[j]);
            if (cache) {
                p.grid.eval_with_derivative(xr[j], basis.row_ptr(b) + j * K, bd.data());
                for (std::size_t k = 0; k < K; ++k) basis_dx(b, j * K + k) = bd[k];
            } else {
                p.grid.eval(xr[j], basis.row_ptr(b) + j * K);
            }
        }
    }
    Matrix out = matmul_nt(silu_x, p.base_weight);
    add_inplace(out, matmul_nt(basis, p.coeff));
    if (cache) {
        cache->silu_x = std::move(silu_x);
        cache->silu_dx = std::move(silu_dx);
        cache->basis = std::move(basis);
        cache->basis_dx = std::move(basis_dx);
    }
    return out;
}

inline Matrix kan_layer_forward(const KanLayerParams& p, const Matrix& x) {
    return kan_layer_forward(p, x, nullptr);
}

/// Accumulates parameter gradients into g and returns d_x (batch x input_dim).
inline Matrix kan_layer_backward(const KanLayerParams& p, const Matrix& x,
                                 const KanCache& cache, const Matrix& d_out,
                                 KanLayerParams& g) {
    const std::size_t B = x.rows, n = p.input_dim, K = p.grid.num_functions;
    require(d_out.rows == B && d_out.cols == p.output_dim, "kan_layer_backward: d_out shape");
    matmul_tn_accum(d_out, cache.silu_x, g.base_weight);
    matmul_tn_accum(d_out, cache.basis, g.coeff);
    Matrix d_base_path = matmul(d_out, p.base_weight);  // B x n
    Matrix d_coeff_path = matmul(d_out, p.coeff);       // B x nK
    Matrix d_x(B, n);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t j = 0; j < n; ++j) {
            double v = d_base_path(b, j) * cache.silu_dx(b, j);
            const double* dc = d_coeff_path.row_ptr(b) + j * K;
            const double* bd = cache.basis_dx.row_ptr(b) + j * K;
            for (std::size_t k = 0; k < K; ++k) v += dc[k] * bd[k];
            d_x(b, j) = v;
        }
    return d_x;
}

}  // namespace kanseq
