#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kanseq/experiment.hpp"
#include "kanseq/version.hpp"

namespace kanseq {

/// Shortest round-trippable decimal form, stable across runs.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    double parsed = 0.0;
    if (std::sscanf(buf, "%lf", &parsed) == 1 && parsed == v) {
        for (int prec = 1; prec < 17; ++prec) {
            char shorter[40];
            std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
            if (std::sscanf(shorter, "%lf", &parsed) == 1 && parsed == v)
                return std::string(shorter);
        }
    }
    return std::string(buf);
}

/// One row per (point, model, trial). Deliberately free of wall-clock data
/// so that re-runs with the same seed are byte-identical; timings go to a
/// separate file.
inline void write_trials_csv(std::ostream& out, const std::vector<TrialResult>& rows) {
    out << "point,model,trial,seed,accuracy,precision,recall,f1,auc,"
           "tp,fp,tn,fn,precision_defined,recall_defined\n";
    for (const auto& r : rows) {
        out << r.point << ',' << r.model << ',' << r.trial << ',' << r.seed << ','
            << fmt_double(r.metrics.accuracy) << ',' << fmt_double(r.metrics.precision) << ','
            << fmt_double(r.metrics.recall) << ',' << fmt_double(r.metrics.f1) << ','
            << fmt_double(r.metrics.auc) << ',' << r.metrics.counts.tp << ','
            << r.metrics.counts.fp << ',' << r.metrics.counts.tn << ',' << r.metrics.counts.fn
            << ',' << (r.metrics.precision_defined ? 1 : 0) << ','
            << (r.metrics.recall_defined ? 1 : 0) << '\n';
    }
}

inline void write_timings_csv(std::ostream& out, const std::vector<TrialResult>& rows) {
    out << "point,model,trial,wall_ms\n";
    char buf[40];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.3f", r.wall_ms);
        out << r.point << ',' << r.model << ',' << r.trial << ',' << buf << '\n';
    }
}

/// Appendix-table shape: per (point, model), mean/best/std for each metric.
inline void write_aggregate_csv(std::ostream& out, const AggregateReport& agg) {
    out << "point,model";
    for (const auto& name : metric_names())
        out << ',' << name << "_mean," << name << "_best," << name << "_std";
    out << ",trials\n";
    for (const auto& row : agg) {
        out << row.point << ',' << row.model;
        for (const auto& name : metric_names()) {
            const auto& m = row.metrics.at(name);
            out << ',' << fmt_double(m.mean) << ',' << fmt_double(m.best) << ','
                << fmt_double(m.std_dev);
        }
        out << ',' << row.trials << '\n';
    }
}

/// Plot-ready series for one metric: rows are sweep points, columns are the
/// models, cell values are trial means.
inline void write_plot_csv(std::ostream& out, const AggregateReport& agg,
                           const std::string& metric) {
    std::vector<std::string> points;
    std::vector<std::string> models;
    for (const auto& row : agg) {
        if (std::find(points.begin(), points.end(), row.point) == points.end())
            points.push_back(row.point);
        if (std::find(models.begin(), models.end(), row.model) == models.end())
            models.push_back(row.model);
    }
    out << "point";
    for (const auto& m : models) out << ',' << m;
    out << '\n';
    for (const auto& p : points) {
        out << p;
        for (const auto& m : models) {
            out << ',';
            for (const auto& row : agg)
                if (row.point == p && row.model == m) {
                    out << fmt_double(row.metrics.at(metric).mean);
                    break;
                }
        }
        out << '\n';
    }
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["scenario"] = scenario_name(cfg.scenario);
    j["models"] = cfg.models;
    j["trials"] = cfg.trials;
    j["base_seed"] = cfg.base_seed;
    j["freeze_init"] = cfg.freeze_init;
    j["threads"] = cfg.threads;
    j["window"] = {{"feature_len", cfg.window.feature_len},
                   {"gap", cfg.window.gap},
                   {"obs_len", cfg.window.obs_len}};
    j["window_values"] = cfg.window_values;
    j["gap_values"] = cfg.gap_values;
    j["interval_total"] = cfg.interval_total;
    j["budget_values"] = cfg.budget_values;
    {
        nlohmann::json pairs = nlohmann::json::array();
        for (const auto& [a, b] : cfg.cohort_pairs) pairs.push_back({a, b});
        j["cohort_pairs"] = pairs;
    }
    j["train"] = {{"epochs", cfg.train.epochs},
                  {"batch_size", cfg.train.batch_size},
                  {"learning_rate", cfg.train.learning_rate},
                  {"early_stop_patience", cfg.train.early_stop_patience},
                  {"validation_fraction", cfg.train.validation_fraction}};
    j["model"] = {{"rnn1_units", cfg.base_model.rnn1_units},
                  {"rnn2_units", cfg.base_model.rnn2_units},
                  {"kan_output_dim", cfg.base_model.kan_output_dim},
                  {"kan_num_functions", cfg.base_model.kan_num_functions},
                  {"kan_order", cfg.base_model.kan_order},
                  {"kan_grid_lo", cfg.base_model.kan_grid_lo},
                  {"kan_grid_hi", cfg.base_model.kan_grid_hi},
                  {"dense_units", cfg.base_model.dense_units},
                  {"dropout_rate", cfg.base_model.dropout_rate},
                  {"bn_eps", cfg.base_model.bn_eps},
                  {"bn_momentum", cfg.base_model.bn_momentum}};
    if (cfg.use_freddie) {
        nlohmann::json f;
        f["train_paths"] = cfg.freddie.train_paths;
        f["test_paths"] = cfg.freddie.test_paths;
        f["max_records"] = cfg.freddie.max_records;
        nlohmann::json years;
        for (const auto& [year, paths] : cfg.freddie.year_paths)
            years[std::to_string(year)] = paths;
        f["year_paths"] = years;
        j["data"] = {{"source", "freddie"}, {"freddie", f}};
    } else {
        const auto& s = cfg.synthetic;
        j["data"] = {{"source", "synthetic"},
                     {"num_loans", s.base.num_loans},
                     {"test_num_loans", s.test_num_loans},
                     {"default_rate", s.base.default_rate},
                     {"signal_strength", s.base.signal_strength},
                     {"train_year", s.train_year},
                     {"test_year", s.test_year},
                     {"drift_per_year", s.drift_per_year}};
    }
    return j;
}

/// Writes a deterministic run manifest: config echo, library version, and
/// per-point data fingerprints. No timestamps, so manifests diff cleanly.
inline nlohmann::json manifest_json(const ExperimentConfig& cfg, const ScenarioResult& result) {
    nlohmann::json j;
    j["library_version"] = kVersion;
    j["config"] = config_to_json(cfg);
    nlohmann::json points = nlohmann::json::array();
    for (const auto& p : result.points) {
        char fp_train[24], fp_test[24];
        std::snprintf(fp_train, sizeof fp_train, "%016llx",
                      static_cast<unsigned long long>(p.train_fingerprint));
        std::snprintf(fp_test, sizeof fp_test, "%016llx",
                      static_cast<unsigned long long>(p.test_fingerprint));
        points.push_back({{"label", p.label},
                          {"window",
                           {{"feature_len", p.window.feature_len},
                            {"gap", p.window.gap},
                            {"obs_len", p.window.obs_len}}},
                          {"train_windows", p.train_windows},
                          {"test_windows", p.test_windows},
                          {"train_default_rate", p.train_default_rate},
                          {"test_default_rate", p.test_default_rate},
                          {"train_fingerprint", fp_train},
                          {"test_fingerprint", fp_test}});
    }
    j["points"] = points;
    return j;
}

/// Emits trials.csv, timings.csv, aggregate.csv, plot_<metric>.csv, and
/// manifest.json under out_dir.
inline void emit_reports(const ExperimentConfig& cfg, const ScenarioResult& result,
                         const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const AggregateReport agg = aggregate_trials(result.rows);
    auto open = [&out_dir](const std::string& name) {
        std::ofstream out(fs::path(out_dir) / name, std::ios::binary);
        require(out.good(), "emit_reports: cannot write " + name + " in " + out_dir);
        return out;
    };
    {
        auto out = open("trials.csv");
        write_trials_csv(out, result.rows);
    }
    {
        auto out = open("timings.csv");
        write_timings_csv(out, result.rows);
    }
    {
        auto out = open("aggregate.csv");
        write_aggregate_csv(out, agg);
    }
    for (const auto& metric : metric_names()) {
        auto out = open("plot_" + metric + ".csv");
        write_plot_csv(out, agg, metric);
    }
    {
        auto out = open("manifest.json");
        out << manifest_json(cfg, result).dump(2) << '\n';
    }
}

}  // namespace kanseq
