#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "kanseq/model_io.hpp"
#include "kanseq/samples_io.hpp"

#include "test_util.hpp"

using namespace kanseq;

namespace {

std::string temp_path(const std::string& tag) {
    return "/tmp/kanseq_io_" + std::to_string(::getpid()) + "_" + tag;
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& tag) : path(temp_path(tag)) {}
    ~TempFile() { std::remove(path.c_str()); }
};

ModelSpec tiny_spec(CellKind kind, bool use_kan) {
    ModelSpec spec;
    spec.cell_kind = kind;
    spec.feature_dim = 4;
    spec.rnn1_units = 3;
    spec.rnn2_units = 2;
    spec.use_kan = use_kan;
    spec.kan_num_functions = 5;
    spec.dense_units = 3;
    spec.dropout_rate = 0.0;
    return spec;
}

std::map<std::string, std::vector<double>> tensor_map(ModelParams& p) {
    std::map<std::string, std::vector<double>> out;
    for_each_trainable(p, [&out](const std::string& n, Matrix& m) { out[n] = m.data; });
    for_each_state_tensor(p, [&out](const std::string& n, Matrix& m) { out[n] = m.data; });
    return out;
}

}  // namespace

TEST_CASE("samples survive a save/load round trip bit-exactly", "[io][data]") {
    Samples samples;
    Sample a;
    a.loan_id = "F18Q1|000123";
    a.cohort_year = 2018;
    a.label = 1;
    a.features = Matrix(3, 4);
    a.features(0, 0) = 1.0 / 3.0;
    a.features(0, 1) = -0.0;
    a.features(1, 2) = 5e-324;  // smallest denormal
    a.features(2, 3) = std::nextafter(1.0, 2.0);
    a.mask = {1, 1, 0};
    samples.push_back(a);

    Sample b;
    b.loan_id = "";
    b.cohort_year = 1999;
    b.label = 0;
    b.features = Matrix(5, 4);
    for (std::size_t t = 0; t < 5; ++t)
        for (std::size_t d = 0; d < 4; ++d)
            b.features(t, d) = 1e17 + static_cast<double>(t * 4 + d);
    b.mask = {1, 1, 1, 1, 1};
    samples.push_back(b);

    TempFile file("samples.bin");
    save_samples(file.path, samples);
    const Samples back = load_samples(file.path);

    REQUIRE(back.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        REQUIRE(back[i].loan_id == samples[i].loan_id);
        REQUIRE(back[i].cohort_year == samples[i].cohort_year);
        REQUIRE(back[i].label == samples[i].label);
        REQUIRE(back[i].mask == samples[i].mask);
        REQUIRE(back[i].features.rows == samples[i].features.rows);
        REQUIRE(back[i].features.cols == samples[i].features.cols);
        REQUIRE(back[i].features.data == samples[i].features.data);
    }
    REQUIRE(std::signbit(back[0].features(0, 1)));
}

TEST_CASE("an empty sample set round-trips", "[io][data]") {
    TempFile file("empty.bin");
    save_samples(file.path, {});
    REQUIRE(load_samples(file.path).empty());
}

TEST_CASE("corrupt sample files are rejected", "[io][data]") {
    REQUIRE_THROWS_AS(load_samples("/nonexistent/nowhere.bin"), std::invalid_argument);

    TempFile junk("junk.bin");
    {
        std::ofstream out(junk.path, std::ios::binary);
        out << "NOTMAGIC and then some bytes";
    }
    REQUIRE_THROWS_WITH(load_samples(junk.path),
                        Catch::Matchers::ContainsSubstring("bad magic"));

    Samples samples(1);
    samples[0].loan_id = "x";
    samples[0].features = Matrix(4, 3);
    samples[0].mask.assign(4, 1);
    TempFile whole("whole.bin");
    save_samples(whole.path, samples);
    std::ifstream in(whole.path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    TempFile cut("cut.bin");
    {
        std::ofstream out(cut.path, std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 10));
    }
    REQUIRE_THROWS_AS(load_samples(cut.path), std::invalid_argument);
}

TEST_CASE("models round-trip bit-exactly including running statistics", "[io][model]") {
    const ModelSpec spec = tiny_spec(CellKind::Gru, true);
    Rng rng(9);
    ModelParams params = init_model(spec, rng);
    for_each_state_tensor(params, [&rng](const std::string&, Matrix& m) {
        for (double& v : m.data) v = rng.uniform(0.5, 2.0);
    });

    TempFile file("model.bin");
    save_model(file.path, spec, params);
    auto [loaded_spec, loaded] = load_model(file.path);

    REQUIRE(loaded_spec.cell_kind == spec.cell_kind);
    REQUIRE(loaded_spec.feature_dim == spec.feature_dim);
    REQUIRE(loaded_spec.use_kan == spec.use_kan);
    REQUIRE(loaded_spec.kan_num_functions == spec.kan_num_functions);
    REQUIRE(loaded_spec.dropout_rate == spec.dropout_rate);

    const auto want = tensor_map(params);
    const auto got = tensor_map(loaded);
    REQUIRE(got.size() == want.size());
    for (const auto& [name, data] : want) {
        INFO("tensor " << name);
        REQUIRE(got.count(name) == 1);
        REQUIRE(got.at(name) == data);
    }

    Rng data_rng(4);
    const MaskedBatch batch = testutil::make_prefix_batch({5, 3, 4}, 5, spec.feature_dim, data_rng);
    const Matrix a = model_forward_infer(spec, params, batch);
    const Matrix b = model_forward_infer(loaded_spec, loaded, batch);
    REQUIRE(a.data == b.data);
}

TEST_CASE("spec details survive serialization", "[io][model]") {
    ModelSpec spec = tiny_spec(CellKind::Lstm, false);
    spec.kan_hidden_dims = {3};
    spec.kan_grid_lo = -2.5;
    spec.bn_momentum = 0.25;
    Rng rng(2);
    ModelParams params = init_model(spec, rng);
    TempFile file("lstm.bin");
    save_model(file.path, spec, params);
    const ModelSpec back = load_model(file.path).first;
    REQUIRE(back.cell_kind == CellKind::Lstm);
    REQUIRE_FALSE(back.use_kan);
    REQUIRE(back.kan_hidden_dims == std::vector<std::size_t>{3});
    REQUIRE(back.kan_grid_lo == -2.5);
    REQUIRE(back.bn_momentum == 0.25);
}

TEST_CASE("corrupt model files are rejected", "[io][model]") {
    TempFile junk("badmodel.bin");
    {
        std::ofstream out(junk.path, std::ios::binary);
        out << "KSEQWRNG rest";
    }
    REQUIRE_THROWS_WITH(load_model(junk.path),
                        Catch::Matchers::ContainsSubstring("bad magic"));
}

TEST_CASE("the sidecar records window, features, and train statistics", "[io][data]") {
    const WindowSpec window{15, 3, 3};
    const auto& schema = feature_schema();
    const std::vector<double> mean(schema.dim(), 1.5);
    const std::vector<double> sd(schema.dim(), 2.0);

    TempFile with_stats("sidecar.json");
    write_samples_sidecar(with_stats.path, window, schema.names, &mean, &sd);
    std::ifstream in(with_stats.path);
    const nlohmann::json j = nlohmann::json::parse(in);
    REQUIRE(j.at("format") == "KSEQSAMP");
    REQUIRE(j.at("window").at("feature_len") == 15);
    REQUIRE(j.at("window").at("gap") == 3);
    REQUIRE(j.at("window").at("obs_len") == 3);
    REQUIRE(j.at("feature_names").size() == schema.dim());
    REQUIRE(j.at("feature_names").back() == "ib_upb_delta");
    REQUIRE(j.at("standardization").at("mean").size() == schema.dim());

    TempFile bare("sidecar_bare.json");
    write_samples_sidecar(bare.path, window, schema.names);
    std::ifstream in2(bare.path);
    const nlohmann::json j2 = nlohmann::json::parse(in2);
    REQUIRE_FALSE(j2.contains("standardization"));
}
