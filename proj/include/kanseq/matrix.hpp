#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace kanseq {

/// Dense row-major matrix of 64-bit floats. Vectors are stored as n x 1.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    static Matrix zeros(std::size_t r, std::size_t c) { return Matrix(r, c); }

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double* row_ptr(std::size_t i) { return data.data() + i * cols; }
    const double* row_ptr(std::size_t i) const { return data.data() + i * cols; }

    std::size_t size() const { return data.size(); }

    Matrix shape_like_zeroed() const { return Matrix(rows, cols); }

    void fill(double v) { data.assign(rows * cols, v); }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

/// a (m x k) * b (k x n) -> (m x n)
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    require(a.cols == b.rows, "matmul: inner dimensions differ (" + std::to_string(a.cols) +
                                  " vs " + std::to_string(b.rows) + ")");
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ai = a.row_ptr(i);
        double* ci = c.row_ptr(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = ai[k];
            if (aik == 0.0) continue;
            const double* bk = b.row_ptr(k);
            for (std::size_t j = 0; j < b.cols; ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

/// a (m x k) * b^T where b is (n x k) -> (m x n). Both operands walk rows,
/// which is the cache-friendly direction for row-major storage.
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    require(a.cols == b.cols, "matmul_nt: inner dimensions differ");
    Matrix c(a.rows, b.rows);
    const std::size_t k = a.cols;
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ai = a.row_ptr(i);
        double* ci = c.row_ptr(i);
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* bj = b.row_ptr(j);
            double acc = 0.0;
            for (std::size_t t = 0; t < k; ++t) acc += ai[t] * bj[t];
            ci[j] = acc;
        }
    }
    return c;
}

/// a^T (k x m)^T * b (k x n) -> (m x n); accumulates into `out`.
inline void matmul_tn_accum(const Matrix& a, const Matrix& b, Matrix& out) {
    require(a.rows == b.rows, "matmul_tn_accum: outer dimensions differ");
    require(out.rows == a.cols && out.cols == b.cols, "matmul_tn_accum: bad output shape");
    for (std::size_t t = 0; t < a.rows; ++t) {
        const double* at = a.row_ptr(t);
        const double* bt = b.row_ptr(t);
        for (std::size_t i = 0; i < a.cols; ++i) {
            const double ati = at[i];
            if (ati == 0.0) continue;
            double* oi = out.row_ptr(i);
            for (std::size_t j = 0; j < b.cols; ++j) oi[j] += ati * bt[j];
        }
    }
}

inline void add_inplace(Matrix& a, const Matrix& b) {
    require(a.same_shape(b), "add_inplace: shape mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) a.data[i] += b.data[i];
}

inline void axpy_inplace(Matrix& a, double s, const Matrix& b) {
    require(a.same_shape(b), "axpy_inplace: shape mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) a.data[i] += s * b.data[i];
}

inline void scale_inplace(Matrix& a, double s) {
    for (double& v : a.data) v *= s;
}

/// Adds a row vector (1 x n or n x 1) to every row of a (m x n).
inline void add_row_vector_inplace(Matrix& a, const Matrix& v) {
    require(v.size() == a.cols, "add_row_vector_inplace: length mismatch");
    for (std::size_t i = 0; i < a.rows; ++i) {
        double* ai = a.row_ptr(i);
        for (std::size_t j = 0; j < a.cols; ++j) ai[j] += v.data[j];
    }
}

inline bool all_finite(const Matrix& a) {
    for (double v : a.data)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace kanseq
