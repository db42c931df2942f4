#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kanseq/windows.hpp"

namespace kanseq {

// Columnar sample container, format "KSEQSAMP" v1 (little-endian):
//   magic[8], version u32, sample_count u64, feature_dim u64
//   per sample: loan_id (u32 length + bytes), cohort_year i32, label u8,
//               time u64, mask (time u8), features (time*dim f64, raw bits)
// Doubles are stored bit-exactly, so round-trips are lossless.

namespace detail {

inline void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline void write_i32(std::ostream& out, std::int32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline void write_f64s(std::ostream& out, const double* p, std::size_t n) {
    out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}
inline void write_string(std::ostream& out, const std::string& s) {
    write_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
inline std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
inline std::int32_t read_i32(std::istream& in) {
    std::int32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
inline void read_f64s(std::istream& in, double* p, std::size_t n) {
    in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}
inline std::string read_string(std::istream& in) {
    const std::uint32_t n = read_u32(in);
    std::string s(n, '\0');
    in.read(s.data(), n);
    return s;
}

}  // namespace detail

inline constexpr char kSamplesMagic[9] = "KSEQSAMP";
inline constexpr std::uint32_t kSamplesVersion = 1;

inline void save_samples(const std::string& path, const Samples& samples) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "save_samples: cannot open " + path);
    out.write(kSamplesMagic, 8);
    detail::write_u32(out, kSamplesVersion);
    detail::write_u64(out, samples.size());
    detail::write_u64(out, samples.empty() ? 0 : samples.front().dim());
    for (const auto& s : samples) {
        detail::write_string(out, s.loan_id);
        detail::write_i32(out, s.cohort_year);
        out.put(static_cast<char>(s.label));
        detail::write_u64(out, s.time());
        out.write(reinterpret_cast<const char*>(s.mask.data()),
                  static_cast<std::streamsize>(s.mask.size()));
        detail::write_f64s(out, s.features.data.data(), s.features.size());
    }
    require(out.good(), "save_samples: write failure on " + path);
}

inline Samples load_samples(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "load_samples: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    require(in.good() && std::memcmp(magic, kSamplesMagic, 8) == 0,
            "load_samples: bad magic in " + path);
    const std::uint32_t version = detail::read_u32(in);
    require(version == kSamplesVersion, "load_samples: unsupported version");
    const std::uint64_t count = detail::read_u64(in);
    const std::uint64_t dim = detail::read_u64(in);
    Samples samples;
    samples.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        Sample s;
        s.loan_id = detail::read_string(in);
        s.cohort_year = detail::read_i32(in);
        s.label = in.get();
        const std::uint64_t time = detail::read_u64(in);
        s.mask.resize(time);
        in.read(reinterpret_cast<char*>(s.mask.data()), static_cast<std::streamsize>(time));
        s.features = Matrix(time, dim);
        detail::read_f64s(in, s.features.data.data(), s.features.size());
        require(in.good(), "load_samples: truncated file " + path);
        samples.push_back(std::move(s));
    }
    return samples;
}

/// JSON sidecar describing a samples file: window spec, feature names, and
/// (when the data was standardized) the per-feature train statistics.
inline void write_samples_sidecar(const std::string& path, const WindowSpec& window,
                                  const std::vector<std::string>& feature_names,
                                  const std::vector<double>* mean = nullptr,
                                  const std::vector<double>* std_dev = nullptr) {
    nlohmann::json j;
    j["format"] = std::string(kSamplesMagic);
    j["version"] = kSamplesVersion;
    j["window"] = {{"feature_len", window.feature_len},
                   {"gap", window.gap},
                   {"obs_len", window.obs_len}};
    j["feature_names"] = feature_names;
    if (mean && std_dev) {
        j["standardization"] = {{"mean", *mean}, {"std", *std_dev}};
    }
    std::ofstream out(path);
    require(out.good(), "write_samples_sidecar: cannot open " + path);
    out << j.dump(2) << '\n';
}

}  // namespace kanseq
