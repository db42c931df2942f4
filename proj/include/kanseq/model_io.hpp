#pragma once

#include <cstring>
#include <fstream>
#include <string>
#include <unordered_map>
#include <utility>

#include "kanseq/model.hpp"
#include "kanseq/samples_io.hpp"

namespace kanseq {

// Model file, format "KSEQMODL" v1 (little-endian):
//   magic[8], version u32, spec block, tensor_count u32,
//   then per tensor: name (u32 length + bytes), rows u64, cols u64, f64 data.
// Tensors cover trainables plus batch-norm running statistics, written in
// the for_each_trainable / for_each_state_tensor order. Round-trips are
// bit-exact.

inline constexpr char kModelMagic[9] = "KSEQMODL";
inline constexpr std::uint32_t kModelVersion = 1;

namespace detail {

inline void write_spec(std::ostream& out, const ModelSpec& spec) {
    write_u32(out, spec.cell_kind == CellKind::Lstm ? 1 : 0);
    write_u64(out, spec.feature_dim);
    write_u64(out, spec.rnn1_units);
    write_u64(out, spec.rnn2_units);
    write_u32(out, spec.use_kan ? 1 : 0);
    write_u64(out, spec.kan_output_dim);
    write_u64(out, spec.kan_num_functions);
    write_u64(out, spec.kan_order);
    write_f64s(out, &spec.kan_grid_lo, 1);
    write_f64s(out, &spec.kan_grid_hi, 1);
    write_u64(out, spec.kan_hidden_dims.size());
    for (std::size_t w : spec.kan_hidden_dims) write_u64(out, w);
    write_u64(out, spec.dense_units);
    write_f64s(out, &spec.dropout_rate, 1);
    write_f64s(out, &spec.bn_eps, 1);
    write_f64s(out, &spec.bn_momentum, 1);
}

inline ModelSpec read_spec(std::istream& in) {
    ModelSpec spec;
    spec.cell_kind = read_u32(in) == 1 ? CellKind::Lstm : CellKind::Gru;
    spec.feature_dim = read_u64(in);
    spec.rnn1_units = read_u64(in);
    spec.rnn2_units = read_u64(in);
    spec.use_kan = read_u32(in) == 1;
    spec.kan_output_dim = read_u64(in);
    spec.kan_num_functions = read_u64(in);
    spec.kan_order = read_u64(in);
    read_f64s(in, &spec.kan_grid_lo, 1);
    read_f64s(in, &spec.kan_grid_hi, 1);
    spec.kan_hidden_dims.resize(read_u64(in));
    for (auto& w : spec.kan_hidden_dims) w = read_u64(in);
    spec.dense_units = read_u64(in);
    read_f64s(in, &spec.dropout_rate, 1);
    read_f64s(in, &spec.bn_eps, 1);
    read_f64s(in, &spec.bn_momentum, 1);
    return spec;
}

}  // namespace detail

inline void save_model(const std::string& path, const ModelSpec& spec,
                       const ModelParams& params) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "save_model: cannot open " + path);
    out.write(kModelMagic, 8);
    detail::write_u32(out, kModelVersion);
    detail::write_spec(out, spec);
    std::uint32_t count = 0;
    for_each_trainable(params, [&count](const std::string&, const Matrix&) { ++count; });
    auto& mutable_params = const_cast<ModelParams&>(params);
    for_each_state_tensor(mutable_params, [&count](const std::string&, Matrix&) { ++count; });
    detail::write_u32(out, count);
    auto write_tensor = [&out](const std::string& name, const Matrix& m) {
        detail::write_string(out, name);
        detail::write_u64(out, m.rows);
        detail::write_u64(out, m.cols);
        detail::write_f64s(out, m.data.data(), m.size());
    };
    for_each_trainable(params, write_tensor);
    for_each_state_tensor(mutable_params,
                          [&write_tensor](const std::string& name, Matrix& m) {
                              write_tensor(name, m);
                          });
    require(out.good(), "save_model: write failure on " + path);
}

inline std::pair<ModelSpec, ModelParams> load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "load_model: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    require(in.good() && std::memcmp(magic, kModelMagic, 8) == 0,
            "load_model: bad magic in " + path);
    require(detail::read_u32(in) == kModelVersion, "load_model: unsupported version");
    const ModelSpec spec = detail::read_spec(in);
    Rng scratch(0);
    ModelParams params = init_model(spec, scratch);
    const std::uint32_t count = detail::read_u32(in);
    std::unordered_map<std::string, Matrix> tensors;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::string name = detail::read_string(in);
        const std::uint64_t rows = detail::read_u64(in);
        const std::uint64_t cols = detail::read_u64(in);
        Matrix m(rows, cols);
        detail::read_f64s(in, m.data.data(), m.size());
        require(in.good(), "load_model: truncated file " + path);
        tensors.emplace(name, std::move(m));
    }
    auto assign = [&tensors, &path](const std::string& name, Matrix& m) {
        auto it = tensors.find(name);
        require(it != tensors.end(), "load_model: " + path + " missing tensor " + name);
        require(it->second.same_shape(m), "load_model: shape mismatch for " + name);
        m = std::move(it->second);
    };
    for_each_trainable(params, assign);
    for_each_state_tensor(params, assign);
    return {spec, std::move(params)};
}

}  // namespace kanseq
