#pragma once

#include <vector>

#include "kanseq/masked_batch.hpp"
#include "kanseq/matrix.hpp"
#include "kanseq/rng.hpp"

namespace kanseq::testutil {

inline void fill_uniform(Matrix& m, Rng& rng, double lo = -1.0, double hi = 1.0) {
    for (double& v : m.data) v = rng.uniform(lo, hi);
}

inline Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double lo = -1.0,
                            double hi = 1.0) {
    Matrix m(r, c);
    fill_uniform(m, rng, lo, hi);
    return m;
}

inline std::vector<double> random_vector(std::size_t n, Rng& rng, double lo = -1.0,
                                         double hi = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

/// Batch with prefix masks of the given lengths; padded steps hold zeros.
inline MaskedBatch make_prefix_batch(const std::vector<std::size_t>& lens, std::size_t time,
                                     std::size_t dim, Rng& rng) {
    MaskedBatch batch;
    batch.features = Tensor3(lens.size(), time, dim);
    batch.mask.assign(lens.size() * time, 0);
    for (std::size_t b = 0; b < lens.size(); ++b)
        for (std::size_t t = 0; t < lens[b]; ++t) {
            batch.set_real(b, t, true);
            for (std::size_t d = 0; d < dim; ++d)
                batch.features.at(b, t, d) = rng.uniform(-1.0, 1.0);
        }
    batch.validate();
    return batch;
}

}  // namespace kanseq::testutil
