#pragma once

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "kanseq/experiment.hpp"

namespace kanseq {

// JSON config schema (every key optional; defaults match ExperimentConfig):
// {
//   "scenario": "window_sweep" | "interval_sweep" | "sample_size_sweep"
//             | "cohort_generalization" | "single",
//   "models": ["GRU-KAN", "LSTM-KAN", "GRU", "LSTM"],
//   "trials": 20, "base_seed": 42, "freeze_init": false, "threads": 1,
//   "out_dir": "out",
//   "window": {"feature_len": 15, "gap": 0, "obs_len": 3},
//   "window_values": [12, 15, 18, 21, 24, 27],
//   "gap_values": [3, 4, 5, 6, 7, 8],
//   "interval_total": 21,
//   "budget_values": [2000, 4000, 8000],
//   "cohort_pairs": [[2018, 2019], [2018, 2020]],
//   "train": {"epochs": 50, "batch_size": 256, "learning_rate": 1e-3,
//             "early_stop_patience": 5, "validation_fraction": 0.1},
//   "model": {"rnn1_units": 128, "rnn2_units": 64, "use_kan": true,
//             "kan_output_dim": 1, "kan_num_functions": 10, "kan_order": 3,
//             "kan_grid_lo": -3.0, "kan_grid_hi": 3.0, "kan_hidden_dims": [],
//             "dense_units": 64, "dropout_rate": 0.3,
//             "bn_eps": 1e-3, "bn_momentum": 0.1},
//   "data": {
//     "source": "synthetic" | "freddie",
//     // synthetic:
//     "num_loans": 1000, "test_num_loans": 0, "default_rate": 0.5,
//     "signal_strength": 1.0,
//     "train_year": 2018, "test_year": 2019, "drift_per_year": 0.1,
//     // freddie:
//     "train_paths": [...], "test_paths": [...],
//     "year_paths": {"2018": [...], "2019": [...]},
//     "max_records": 0,
//     "column_map": {"loan_id": 0, "period": 1, "current_actual_upb": 2,
//                    "clds": 3, "remaining_months": 5,
//                    "current_interest_rate": 10, "current_deferred_upb": 11,
//                    "estimated_ltv": 25, "assistance_status_code": 29,
//                    "interest_bearing_upb": 31}
//   }
// }

namespace detail {

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

inline void parse_window(const nlohmann::json& j, WindowSpec& w) {
    maybe(j, "feature_len", w.feature_len);
    maybe(j, "gap", w.gap);
    maybe(j, "obs_len", w.obs_len);
}

inline void parse_model(const nlohmann::json& j, ModelSpec& m) {
    maybe(j, "rnn1_units", m.rnn1_units);
    maybe(j, "rnn2_units", m.rnn2_units);
    maybe(j, "use_kan", m.use_kan);
    maybe(j, "kan_output_dim", m.kan_output_dim);
    maybe(j, "kan_num_functions", m.kan_num_functions);
    maybe(j, "kan_order", m.kan_order);
    maybe(j, "kan_grid_lo", m.kan_grid_lo);
    maybe(j, "kan_grid_hi", m.kan_grid_hi);
    maybe(j, "kan_hidden_dims", m.kan_hidden_dims);
    maybe(j, "dense_units", m.dense_units);
    maybe(j, "dropout_rate", m.dropout_rate);
    maybe(j, "bn_eps", m.bn_eps);
    maybe(j, "bn_momentum", m.bn_momentum);
}

inline void parse_train(const nlohmann::json& j, TrainConfig& t) {
    maybe(j, "epochs", t.epochs);
    maybe(j, "batch_size", t.batch_size);
    maybe(j, "learning_rate", t.learning_rate);
    maybe(j, "early_stop_patience", t.early_stop_patience);
    maybe(j, "validation_fraction", t.validation_fraction);
    maybe(j, "seed", t.seed);
}

inline void parse_column_map(const nlohmann::json& j, ColumnMap& cm) {
    maybe(j, "loan_id", cm.loan_id);
    maybe(j, "period", cm.period);
    maybe(j, "current_actual_upb", cm.current_actual_upb);
    maybe(j, "clds", cm.clds);
    maybe(j, "remaining_months", cm.remaining_months);
    maybe(j, "current_interest_rate", cm.current_interest_rate);
    maybe(j, "current_deferred_upb", cm.current_deferred_upb);
    maybe(j, "estimated_ltv", cm.estimated_ltv);
    maybe(j, "assistance_status_code", cm.assistance_status_code);
    maybe(j, "interest_bearing_upb", cm.interest_bearing_upb);
}

inline void parse_data(const nlohmann::json& j, ExperimentConfig& cfg) {
    std::string source = "synthetic";
    maybe(j, "source", source);
    if (source == "freddie") {
        cfg.use_freddie = true;
        maybe(j, "train_paths", cfg.freddie.train_paths);
        maybe(j, "test_paths", cfg.freddie.test_paths);
        maybe(j, "max_records", cfg.freddie.max_records);
        if (j.contains("year_paths"))
            for (const auto& [year, paths] : j.at("year_paths").items())
                cfg.freddie.year_paths[std::stoi(year)] =
                    paths.get<std::vector<std::string>>();
        if (j.contains("column_map")) parse_column_map(j.at("column_map"), cfg.freddie.column_map);
    } else if (source == "synthetic") {
        cfg.use_freddie = false;
        maybe(j, "num_loans", cfg.synthetic.base.num_loans);
        maybe(j, "test_num_loans", cfg.synthetic.test_num_loans);
        maybe(j, "default_rate", cfg.synthetic.base.default_rate);
        maybe(j, "signal_strength", cfg.synthetic.base.signal_strength);
        maybe(j, "train_year", cfg.synthetic.train_year);
        maybe(j, "test_year", cfg.synthetic.test_year);
        maybe(j, "drift_per_year", cfg.synthetic.drift_per_year);
    } else {
        throw std::invalid_argument("config: unknown data source " + source);
    }
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    if (j.contains("scenario")) cfg.scenario = scenario_from_name(j.at("scenario"));
    detail::maybe(j, "models", cfg.models);
    detail::maybe(j, "trials", cfg.trials);
    detail::maybe(j, "base_seed", cfg.base_seed);
    detail::maybe(j, "freeze_init", cfg.freeze_init);
    detail::maybe(j, "threads", cfg.threads);
    detail::maybe(j, "out_dir", cfg.out_dir);
    detail::maybe(j, "window_values", cfg.window_values);
    detail::maybe(j, "gap_values", cfg.gap_values);
    detail::maybe(j, "interval_total", cfg.interval_total);
    detail::maybe(j, "budget_values", cfg.budget_values);
    if (j.contains("cohort_pairs")) {
        cfg.cohort_pairs.clear();
        for (const auto& pair : j.at("cohort_pairs"))
            cfg.cohort_pairs.emplace_back(pair.at(0).get<int>(), pair.at(1).get<int>());
    }
    if (j.contains("window")) detail::parse_window(j.at("window"), cfg.window);
    if (j.contains("model")) detail::parse_model(j.at("model"), cfg.base_model);
    if (j.contains("train")) detail::parse_train(j.at("train"), cfg.train);
    if (j.contains("data")) detail::parse_data(j.at("data"), cfg);
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "load_config: cannot open " + path);
    nlohmann::json j;
    in >> j;
    return config_from_json(j);
}

}  // namespace kanseq
