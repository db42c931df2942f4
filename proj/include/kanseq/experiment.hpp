#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "kanseq/loan_records.hpp"
#include "kanseq/metrics.hpp"
#include "kanseq/model.hpp"
#include "kanseq/sampling.hpp"
#include "kanseq/synth.hpp"
#include "kanseq/train.hpp"
#include "kanseq/windows.hpp"

namespace kanseq {

enum class Scenario { WindowSweep, IntervalSweep, SampleSizeSweep, CohortGeneralization, Single };

inline std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::WindowSweep: return "window_sweep";
        case Scenario::IntervalSweep: return "interval_sweep";
        case Scenario::SampleSizeSweep: return "sample_size_sweep";
        case Scenario::CohortGeneralization: return "cohort_generalization";
        case Scenario::Single: return "single";
    }
    return "unknown";
}

inline Scenario scenario_from_name(const std::string& name) {
    if (name == "window_sweep") return Scenario::WindowSweep;
    if (name == "interval_sweep") return Scenario::IntervalSweep;
    if (name == "sample_size_sweep") return Scenario::SampleSizeSweep;
    if (name == "cohort_generalization") return Scenario::CohortGeneralization;
    if (name == "single") return Scenario::Single;
    throw std::invalid_argument("unknown scenario: " + name);
}

/// Real-data source: pipe-delimited performance files. For the cohort
/// scenario, per-year file lists; otherwise one train and one test cohort.
struct FreddieSource {
    std::vector<std::string> train_paths;
    std::vector<std::string> test_paths;
    std::map<int, std::vector<std::string>> year_paths;  // cohort scenario
    ColumnMap column_map;
    std::size_t max_records = 0;  // per side; 0 = unlimited
};

/// Synthetic source. The generator's event window and sequence lengths are
/// re-derived per sweep point so that defaults always land inside that
/// point's observation window; cohort drift scales with the year offset.
struct SyntheticSource {
    SynthConfig base;
    std::size_t test_num_loans = 0;  // 0 = same as base.num_loans
    int train_year = 2018;
    int test_year = 2019;
    double drift_per_year = 0.1;
};

struct ExperimentConfig {
    Scenario scenario = Scenario::IntervalSweep;
    std::vector<std::string> models = {"GRU-KAN", "LSTM-KAN"};
    bool use_freddie = false;
    FreddieSource freddie;
    SyntheticSource synthetic;
    WindowSpec window;                           // single scenario / y override
    std::vector<std::size_t> window_values = {12, 15, 18, 21, 24, 27};
    std::vector<std::size_t> gap_values = {3, 4, 5, 6, 7, 8};
    std::size_t interval_total = 21;             // x + g for the interval sweep
    std::vector<std::size_t> budget_values;      // records (freddie) / loans (synthetic)
    std::vector<std::pair<int, int>> cohort_pairs = {
        {2018, 2019}, {2018, 2020}, {2018, 2021}, {2018, 2022}, {2019, 2021}, {2019, 2022}};
    std::size_t trials = 20;
    std::uint64_t base_seed = 42;
    bool freeze_init = false;
    TrainConfig train;
    ModelSpec base_model;
    std::string out_dir = "out";
    std::size_t threads = 1;

    void validate() const {
        require(trials >= 1, "ExperimentConfig: trials >= 1");
        require(!models.empty(), "ExperimentConfig: model list empty");
        if (scenario == Scenario::WindowSweep)
            require(!window_values.empty(), "ExperimentConfig: window sweep values empty");
        if (scenario == Scenario::IntervalSweep)
            require(!gap_values.empty(), "ExperimentConfig: gap sweep values empty");
        if (scenario == Scenario::SampleSizeSweep)
            require(!budget_values.empty(), "ExperimentConfig: budget sweep values empty");
        if (scenario == Scenario::CohortGeneralization)
            require(!cohort_pairs.empty(), "ExperimentConfig: cohort pairs empty");
    }
};

/// Maps a model-list name to a concrete spec derived from the base model.
inline ModelSpec model_spec_for(const std::string& name, const ModelSpec& base,
                                std::size_t feature_dim) {
    ModelSpec spec = base;
    spec.feature_dim = feature_dim;
    if (name == "GRU") {
        spec.cell_kind = CellKind::Gru;
        spec.use_kan = false;
    } else if (name == "LSTM") {
        spec.cell_kind = CellKind::Lstm;
        spec.use_kan = false;
    } else if (name == "GRU-KAN") {
        spec.cell_kind = CellKind::Gru;
        spec.use_kan = true;
    } else if (name == "LSTM-KAN") {
        spec.cell_kind = CellKind::Lstm;
        spec.use_kan = true;
    } else {
        throw std::invalid_argument("unknown model name: " + name +
                                    " (expected GRU, LSTM, GRU-KAN, or LSTM-KAN)");
    }
    return spec;
}

struct TrialResult {
    std::string point;
    std::string model;
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    MetricsReport metrics;
    double wall_ms = 0.0;
};

struct PointInfo {
    std::string label;
    WindowSpec window;
    std::size_t train_windows = 0;
    std::size_t test_windows = 0;
    double train_default_rate = 0.0;
    double test_default_rate = 0.0;
    std::uint64_t train_fingerprint = 0;
    std::uint64_t test_fingerprint = 0;
};

struct ScenarioResult {
    std::vector<TrialResult> rows;
    std::vector<PointInfo> points;
};

struct MetricAggregate {
    double mean = 0.0;
    double best = 0.0;
    double std_dev = 0.0;
};

inline const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names = {"accuracy", "precision", "recall", "f1",
                                                   "auc"};
    return names;
}

inline double metric_value(const MetricsReport& m, const std::string& name) {
    if (name == "accuracy") return m.accuracy;
    if (name == "precision") return m.precision;
    if (name == "recall") return m.recall;
    if (name == "f1") return m.f1;
    if (name == "auc") return m.auc;
    throw std::invalid_argument("unknown metric: " + name);
}

struct AggregateRow {
    std::string point;
    std::string model;
    std::map<std::string, MetricAggregate> metrics;  // keyed by metric_names()
    std::size_t trials = 0;
};

using AggregateReport = std::vector<AggregateRow>;

/// Mean, best (max), and sample standard deviation (n-1 denominator; 0 for
/// a single trial) per (point, model, metric). Row order follows first
/// appearance in `results`.
inline AggregateReport aggregate_trials(const std::vector<TrialResult>& results) {
    std::vector<std::pair<std::string, std::string>> keys;
    std::map<std::pair<std::string, std::string>, std::vector<const TrialResult*>> groups;
    for (const auto& r : results) {
        auto key = std::make_pair(r.point, r.model);
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) keys.push_back(key);
        it->second.push_back(&r);
    }
    AggregateReport report;
    for (const auto& key : keys) {
        const auto& rows = groups[key];
        AggregateRow agg;
        agg.point = key.first;
        agg.model = key.second;
        agg.trials = rows.size();
        for (const auto& name : metric_names()) {
            MetricAggregate m;
            double sum = 0.0;
            m.best = -std::numeric_limits<double>::infinity();
            for (const TrialResult* r : rows) {
                const double v = metric_value(r->metrics, name);
                sum += v;
                m.best = std::max(m.best, v);
            }
            m.mean = sum / static_cast<double>(rows.size());
            double ss = 0.0;
            for (const TrialResult* r : rows) {
                const double d = metric_value(r->metrics, name) - m.mean;
                ss += d * d;
            }
            m.std_dev = rows.size() > 1
                            ? std::sqrt(ss / static_cast<double>(rows.size() - 1))
                            : 0.0;
            agg.metrics[name] = m;
        }
        report.push_back(std::move(agg));
    }
    return report;
}

inline std::uint64_t samples_fingerprint(const Samples& samples) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix_bytes = [&h](const void* p, std::size_t n) {
        const auto* bytes = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ULL;
        }
    };
    for (const auto& s : samples) {
        mix_bytes(s.loan_id.data(), s.loan_id.size());
        mix_bytes(&s.label, sizeof s.label);
        mix_bytes(&s.cohort_year, sizeof s.cohort_year);
        mix_bytes(s.mask.data(), s.mask.size());
        mix_bytes(s.features.data.data(), s.features.size() * sizeof(double));
    }
    return h;
}

namespace detail {

struct PointPlan {
    std::string label;
    WindowSpec window;
    std::size_t budget = 0;          // sample-size sweep only
    int train_year = 0, test_year = 0;  // cohort scenario only
};

inline std::vector<PointPlan> plan_points(const ExperimentConfig& cfg) {
    std::vector<PointPlan> points;
    switch (cfg.scenario) {
        case Scenario::WindowSweep:
            for (std::size_t x : cfg.window_values) {
                PointPlan p;
                p.window = WindowSpec{x, 0, cfg.window.obs_len};
                // the published sweep axis counts feature window plus
                // observation period
                p.label = std::to_string(x + cfg.window.obs_len);
                points.push_back(std::move(p));
            }
            break;
        case Scenario::IntervalSweep:
            for (std::size_t g : cfg.gap_values) {
                require(g < cfg.interval_total, "interval sweep: gap must be < interval_total");
                PointPlan p;
                p.window = WindowSpec{cfg.interval_total - g, g, cfg.window.obs_len};
                p.label = std::to_string(g);
                points.push_back(std::move(p));
            }
            break;
        case Scenario::SampleSizeSweep:
            for (std::size_t budget : cfg.budget_values) {
                PointPlan p;
                p.window = cfg.window;
                p.budget = budget;
                p.label = std::to_string(budget);
                points.push_back(std::move(p));
            }
            break;
        case Scenario::CohortGeneralization:
            for (const auto& [train_year, test_year] : cfg.cohort_pairs) {
                require(train_year != test_year,
                        "cohort pair " + std::to_string(train_year) + "->" +
                            std::to_string(test_year) +
                            " violates the out-of-time design (train year == test year)");
                PointPlan p;
                p.window = cfg.window;
                p.window.gap = 3;
                p.train_year = train_year;
                p.test_year = test_year;
                p.label = std::to_string(train_year) + "->" + std::to_string(test_year);
                points.push_back(std::move(p));
            }
            break;
        case Scenario::Single: {
            PointPlan p;
            p.window = cfg.window;
            p.label = "single";
            points.push_back(std::move(p));
            break;
        }
    }
    return points;
}

inline Samples windows_from_sequences(const std::vector<LoanSequence>& seqs,
                                      const WindowSpec& spec) {
    return build_windows(seqs, spec, spec.total());
}

inline SynthConfig synth_for_point(const SyntheticSource& src, const WindowSpec& w,
                                   std::size_t num_loans, int year, double drift,
                                   double signal_strength) {
    SynthConfig cfg = src.base;
    cfg.num_loans = num_loans;
    cfg.signal_strength = signal_strength;
    cfg.event_min = w.feature_len + w.gap;
    cfg.event_max = w.total() - 1;
    cfg.seq_len_min = w.total();
    cfg.seq_len_max = w.total() + 4;
    cfg.start_period = year * 100 + 1;
    cfg.drift = drift;
    return cfg;
}

inline DatasetSplit build_point_split(const ExperimentConfig& cfg, const PointPlan& point,
                                      std::size_t point_index) {
    DatasetSplit split;
    const std::uint64_t data_seed = mix_seed(cfg.base_seed, "data:" + point.label, point_index);
    if (cfg.use_freddie) {
        const auto& fs = cfg.freddie;
        std::vector<std::string> train_paths = fs.train_paths;
        std::vector<std::string> test_paths = fs.test_paths;
        if (cfg.scenario == Scenario::CohortGeneralization) {
            auto tr = fs.year_paths.find(point.train_year);
            auto te = fs.year_paths.find(point.test_year);
            require(tr != fs.year_paths.end() && te != fs.year_paths.end(),
                    "cohort scenario: missing freddie paths for pair " + point.label);
            train_paths = tr->second;
            test_paths = te->second;
        }
        require(!train_paths.empty() && !test_paths.empty(),
                "freddie mode: train/test paths must be configured");
        const std::size_t budget = point.budget > 0 ? point.budget : fs.max_records;
        auto load = [&](const std::vector<std::string>& paths) {
            std::vector<LoanMonthRecord> records;
            ParseReport report;  // shared across files so the budget is global
            for (const auto& path : paths) {
                if (budget > 0 && report.records_parsed >= budget) break;
                auto part = parse_performance_file(path, fs.column_map, report, budget);
                records.insert(records.end(), std::make_move_iterator(part.begin()),
                               std::make_move_iterator(part.end()));
            }
            return assemble_sequences(std::move(records));
        };
        split.train = windows_from_sequences(load(train_paths), point.window);
        split.test = windows_from_sequences(load(test_paths), point.window);
    } else {
        const auto& ss = cfg.synthetic;
        const int train_year =
            cfg.scenario == Scenario::CohortGeneralization ? point.train_year : ss.train_year;
        const int test_year =
            cfg.scenario == Scenario::CohortGeneralization ? point.test_year : ss.test_year;
        const std::size_t train_loans = point.budget > 0 ? point.budget : ss.base.num_loans;
        const std::size_t test_loans_base =
            ss.test_num_loans > 0 ? ss.test_num_loans : ss.base.num_loans;
        const std::size_t test_loans = point.budget > 0 ? point.budget : test_loans_base;
        const double train_drift = ss.base.drift + ss.drift_per_year * (train_year - ss.train_year);
        const double test_drift = ss.base.drift + ss.drift_per_year * (test_year - ss.train_year);
        auto train_seqs = synth_generate(
            synth_for_point(ss, point.window, train_loans, train_year, train_drift,
                            ss.base.signal_strength),
            mix_seed(data_seed, "synth_train"));
        auto test_seqs = synth_generate(
            synth_for_point(ss, point.window, test_loans, test_year, test_drift,
                            ss.base.signal_strength),
            mix_seed(data_seed, "synth_test"));
        split.train = windows_from_sequences(train_seqs, point.window);
        split.test = windows_from_sequences(test_seqs, point.window);
    }
    require(!split.train.empty(),
            "scenario point " + point.label + ": no eligible training windows");
    require(!split.test.empty(), "scenario point " + point.label + ": no eligible test windows");

    std::set<int> train_years, test_years;
    for (const auto& s : split.train) train_years.insert(s.cohort_year);
    for (const auto& s : split.test) test_years.insert(s.cohort_year);
    for (int y : train_years)
        require(test_years.count(y) == 0,
                "scenario point " + point.label +
                    ": train and test share cohort year " + std::to_string(y) +
                    " (out-of-time violation)");

    standardize(split);
    return split;
}

}  // namespace detail

/// Runs one (point, model, trial) cell from first principles: the trial seed
/// is base_seed + trial, and every random stream (undersampling, init,
/// shuffles, dropout) derives from it, so isolated re-runs reproduce rows.
inline TrialResult run_trial(const ExperimentConfig& cfg, const DatasetSplit& split,
                             const std::string& point_label, std::size_t point_index,
                             const std::string& model_name, std::size_t trial) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t trial_seed = cfg.base_seed + trial;

    Rng us_train_rng(mix_seed(trial_seed, "undersample_train", point_index));
    Rng us_test_rng(mix_seed(trial_seed, "undersample_test", point_index));
    Samples train_samples = undersample(split.train, us_train_rng);
    Samples test_samples = undersample(split.test, us_test_rng);

    const std::size_t feature_dim = train_samples.front().dim();
    const ModelSpec spec = model_spec_for(model_name, cfg.base_model, feature_dim);

    const std::uint64_t init_seed =
        cfg.freeze_init ? mix_seed(cfg.base_seed, "init:" + model_name, point_index)
                        : mix_seed(trial_seed, "init:" + model_name, point_index);
    Rng init_rng(init_seed);
    ModelParams params = init_model(spec, init_rng);

    TrainConfig tc = cfg.train;
    tc.seed = mix_seed(trial_seed, "train:" + model_name, point_index);
    Rng train_rng(tc.seed);
    TrainResult trained = train_from(spec, std::move(params), train_samples, tc, train_rng);

    std::vector<double> labels;
    MaskedBatch test_batch = make_batch(test_samples, &labels);
    Matrix probs = model_forward_infer(spec, trained.params, test_batch);

    TrialResult result;
    result.point = point_label;
    result.model = model_name;
    result.trial = trial;
    result.seed = trial_seed;
    result.metrics = evaluate_scores(probs.data, labels);
    result.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

/// Runs every (point, model, trial) cell of the configured scenario. Points
/// are processed sequentially (each holds its dataset in memory once);
/// trials within a point fan out over `cfg.threads` workers.
inline ScenarioResult run_scenario(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto points = detail::plan_points(cfg);
    ScenarioResult out;
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
        const auto& point = points[pi];
        const DatasetSplit split = detail::build_point_split(cfg, point, pi);

        PointInfo info;
        info.label = point.label;
        info.window = point.window;
        info.train_windows = split.train.size();
        info.test_windows = split.test.size();
        info.train_default_rate = static_cast<double>(count_defaults(split.train)) /
                                  static_cast<double>(split.train.size());
        info.test_default_rate = static_cast<double>(count_defaults(split.test)) /
                                 static_cast<double>(split.test.size());
        info.train_fingerprint = samples_fingerprint(split.train);
        info.test_fingerprint = samples_fingerprint(split.test);
        out.points.push_back(info);

        struct Task {
            std::size_t model_index;
            std::size_t trial;
        };
        std::vector<Task> tasks;
        for (std::size_t mi = 0; mi < cfg.models.size(); ++mi)
            for (std::size_t t = 0; t < cfg.trials; ++t) tasks.push_back({mi, t});
        std::vector<TrialResult> rows(tasks.size());

        const std::size_t workers = std::max<std::size_t>(1, cfg.threads);
        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        auto worker = [&]() {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= tasks.size()) return;
                try {
                    rows[i] = run_trial(cfg, split, point.label, pi, cfg.models[tasks[i].model_index],
                                        tasks[i].trial);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        };
        if (workers == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }
        if (error) std::rethrow_exception(error);
        for (auto& row : rows) out.rows.push_back(std::move(row));
    }
    return out;
}

inline ScenarioResult run_window_sweep(ExperimentConfig cfg) {
    cfg.scenario = Scenario::WindowSweep;
    return run_scenario(cfg);
}
inline ScenarioResult run_interval_sweep(ExperimentConfig cfg) {
    cfg.scenario = Scenario::IntervalSweep;
    return run_scenario(cfg);
}
inline ScenarioResult run_sample_size_sweep(ExperimentConfig cfg) {
    cfg.scenario = Scenario::SampleSizeSweep;
    return run_scenario(cfg);
}
inline ScenarioResult run_cohort_generalization(ExperimentConfig cfg) {
    cfg.scenario = Scenario::CohortGeneralization;
    return run_scenario(cfg);
}

}  // namespace kanseq
