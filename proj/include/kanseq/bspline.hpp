#pragma once

#include <cstddef>
#include <vector>

#include "kanseq/activations.hpp"
#include "kanseq/matrix.hpp"

namespace kanseq {

/// Clamped uniform B-spline basis on [lo, hi]: `num_functions` basis functions
/// of polynomial degree `degree`, end knots repeated degree+1 times so the
/// basis forms a partition of unity on the whole interval. Inputs outside
/// [lo, hi] are clamped, so every basis function extends as a constant.
struct BSplineGrid {
    std::size_t num_functions = 0;
    std::size_t degree = 0;
    double lo = -1.0;
    double hi = 1.0;
    std::vector<double> knots;  // num_functions + degree + 1, non-decreasing

    BSplineGrid() = default;

    BSplineGrid(std::size_t num_functions_, std::size_t degree_, double lo_, double hi_)
        : num_functions(num_functions_), degree(degree_), lo(lo_), hi(hi_) {
        require(num_functions >= degree + 1, "BSplineGrid: need num_functions >= degree + 1");
        require(hi > lo, "BSplineGrid: grid must be strictly increasing");
        const std::size_t segments = num_functions - degree;
        knots.resize(num_functions + degree + 1);
        for (std::size_t i = 0; i <= degree; ++i) knots[i] = lo;
        for (std::size_t i = 1; i < segments; ++i)
            knots[degree + i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(segments);
        for (std::size_t i = num_functions; i < knots.size(); ++i) knots[i] = hi;
    }

    /// Writes the num_functions basis values at x into out[0..K).
    void eval(double x, double* out) const { eval_impl(x, out, nullptr); }

    /// Basis values plus d/dx of each (derivative is 0 outside [lo, hi]).
    void eval_with_derivative(double x, double* out, double* dout) const {
        eval_impl(x, out, dout);
    }

private:
    void eval_impl(double x, double* out, double* dout) const {
        const std::size_t K = num_functions;
        const std::size_t d = degree;
        const bool outside = x < lo || x > hi;
        if (x < lo) x = lo;
        if (x > hi) x = hi;

        // Degree-0 seed: indicator of the knot span holding x. The top end
        // belongs to the last non-degenerate span so the basis sums to 1 at hi.
        std::vector<double> n(K + d, 0.0);
        if (x >= hi) {
            n[K - 1] = 1.0;
        } else {
            for (std::size_t i = 0; i < K + d; ++i) {
                if (knots[i] <= x && x < knots[i + 1]) {
                    n[i] = 1.0;
                    break;
                }
            }
        }

        std::vector<double> lower;  // degree d-1 values, kept for the derivative
        for (std::size_t deg = 1; deg <= d; ++deg) {
            if (deg == d && dout) lower = n;
            for (std::size_t i = 0; i + deg < K + d; ++i) {
                double left = 0.0, right = 0.0;
                const double den_l = knots[i + deg] - knots[i];
                if (den_l > 0.0) left = (x - knots[i]) / den_l * n[i];
                const double den_r = knots[i + deg + 1] - knots[i + 1];
                if (den_r > 0.0) right = (knots[i + deg + 1] - x) / den_r * n[i + 1];
                n[i] = left + right;
            }
        }

        for (std::size_t i = 0; i < K; ++i) out[i] = n[i];

        if (!dout) return;
        for (std::size_t i = 0; i < K; ++i) {
            if (outside || d == 0) {
                dout[i] = 0.0;
                continue;
            }
            double v = 0.0;
            const double den_l = knots[i + d] - knots[i];
            if (den_l > 0.0) v += lower[i] / den_l;
            const double den_r = knots[i + d + 1] - knots[i + 1];
            if (den_r > 0.0) v -= lower[i + 1] / den_r;
            dout[i] = static_cast<double>(d) * v;
        }
    }
};

/// One learnable edge function: base_weight * silu(x) + sum_k c_k B_k(x).
inline double kan_edge_eval(const std::vector<double>& coeffs, const BSplineGrid& grid,
                            double base_weight, double x) {
    require(coeffs.size() == grid.num_functions, "kan_edge_eval: coefficient count mismatch");
    std::vector<double> basis(grid.num_functions);
    grid.eval(x, basis.data());
    double acc = base_weight * silu(x);
    for (std::size_t k = 0; k < coeffs.size(); ++k) acc += coeffs[k] * basis[k];
    return acc;
}

}  // namespace kanseq
