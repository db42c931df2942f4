#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "kanseq/config.hpp"
#include "kanseq/gradcheck.hpp"
#include "kanseq/kanseq.hpp"

namespace {

using namespace kanseq;

struct GlobalOpts {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;
    std::size_t threads = 0;
};

ExperimentConfig make_config(const GlobalOpts& g) {
    ExperimentConfig cfg;
    if (!g.config_path.empty()) cfg = load_config(g.config_path);
    if (g.seed_set) cfg.base_seed = g.seed;
    if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
    if (g.threads > 0) cfg.threads = g.threads;
    return cfg;
}

void print_aggregate(const AggregateReport& agg) {
    std::printf("%-14s %-10s", "point", "model");
    for (const auto& name : metric_names()) std::printf(" %9s", name.c_str());
    std::printf("\n");
    for (const auto& row : agg) {
        std::printf("%-14s %-10s", row.point.c_str(), row.model.c_str());
        for (const auto& name : metric_names())
            std::printf(" %9.4f", row.metrics.at(name).mean);
        std::printf("\n");
    }
}

int run_scenario_cmd(const GlobalOpts& g, Scenario scenario) {
    ExperimentConfig cfg = make_config(g);
    cfg.scenario = scenario;
    const ScenarioResult result = run_scenario(cfg);
    emit_reports(cfg, result, cfg.out_dir);
    print_aggregate(aggregate_trials(result.rows));
    std::printf("reports written to %s\n", cfg.out_dir.c_str());
    return 0;
}

int cmd_gradcheck(std::size_t seeds, std::uint64_t base_seed) {
    bool ok = true;
    for (const char* model : {"GRU-KAN", "LSTM-KAN"}) {
        const CellKind kind = std::string(model) == "GRU-KAN" ? CellKind::Gru : CellKind::Lstm;
        for (std::size_t s = 0; s < seeds; ++s) {
            const auto report = gradient_check(kind, GradCheckScale{}, base_seed + s);
            const bool pass = report.max_rel_err <= 1e-4;
            ok = ok && pass;
            std::printf("%s seed %llu: max rel err %.3e over %zu params (%s)%s\n", model,
                        static_cast<unsigned long long>(base_seed + s), report.max_rel_err,
                        report.params_checked, report.worst_tensor.c_str(),
                        pass ? "" : "  FAIL");
        }
    }
    const auto dense = gradient_check_dense_head(base_seed);
    const bool dense_ok = dense.max_rel_err <= 1e-6;
    ok = ok && dense_ok;
    std::printf("dense+sigmoid head: max rel err %.3e%s\n", dense.max_rel_err,
                dense_ok ? "" : "  FAIL");
    return ok ? 0 : 1;
}

void write_performance_format(const std::string& path,
                              const std::vector<LoanSequence>& seqs) {
    std::ofstream out(path);
    require(out.good(), "cannot open " + path);
    const ColumnMap cm;
    const std::size_t width = cm.max_index() + 1;
    for (const auto& seq : seqs)
        for (const auto& m : seq.months) {
            std::vector<std::string> fields(width);
            fields[cm.loan_id] = m.loan_id;
            fields[cm.period] = std::to_string(m.period);
            char buf[40];
            auto put = [&](std::size_t idx, double v) {
                std::snprintf(buf, sizeof buf, "%.2f", v);
                fields[idx] = buf;
            };
            put(cm.current_actual_upb, m.current_actual_upb);
            fields[cm.clds] = m.clds_flag ? "RA" : std::to_string(m.clds);
            fields[cm.remaining_months] = std::to_string(m.remaining_months);
            std::snprintf(buf, sizeof buf, "%.3f", m.current_interest_rate);
            fields[cm.current_interest_rate] = buf;
            put(cm.current_deferred_upb, m.current_deferred_upb);
            put(cm.estimated_ltv, m.estimated_ltv);
            fields[cm.assistance_status_code] = m.assistance_status_code;
            put(cm.interest_bearing_upb, m.interest_bearing_upb);
            for (std::size_t i = 0; i < width; ++i) {
                if (i) out << '|';
                out << fields[i];
            }
            out << '\n';
        }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kanseq: recurrent-KAN sequence models for loan-default early prediction"};
    app.require_subcommand(1);
    app.fallthrough();  // lets --config/--seed/--out/--threads follow the subcommand

    GlobalOpts g;
    app.add_option("--config", g.config_path, "JSON experiment config file");
    app.add_option("--seed", g.seed, "base seed override")->each([&g](const std::string&) {
        g.seed_set = true;
    });
    app.add_option("--out", g.out_dir, "output directory override");
    app.add_option("--threads", g.threads, "worker threads for trials");

    auto* window_sweep = app.add_subcommand("window-sweep", "sweep the feature window length");
    auto* interval_sweep =
        app.add_subcommand("interval-sweep", "sweep the blank interval (gap) length");
    auto* sample_sweep = app.add_subcommand("sample-sweep", "sweep the raw-record budget");
    auto* cohorts = app.add_subcommand("cohorts", "train/test across cohort-year pairs");
    auto* single = app.add_subcommand("single", "one point with the configured window");

    auto* train_cmd = app.add_subcommand("train", "train one model on a samples file");
    std::string samples_path, model_out = "model.bin", trace_out, model_name = "GRU-KAN";
    train_cmd->add_option("--samples", samples_path, "samples binary (balanced, standardized)")
        ->required();
    train_cmd->add_option("--model-out", model_out, "output model file");
    train_cmd->add_option("--trace-out", trace_out, "per-epoch CSV trace file");
    train_cmd->add_option("--model", model_name, "GRU | LSTM | GRU-KAN | LSTM-KAN");

    auto* score_cmd = app.add_subcommand("score", "evaluate a model on a samples file");
    std::string score_model, score_samples;
    score_cmd->add_option("--model", score_model, "model file")->required();
    score_cmd->add_option("--samples", score_samples, "samples binary")->required();

    auto* gradcheck_cmd =
        app.add_subcommand("gradcheck", "finite-difference gradient verification");
    std::size_t gradcheck_seeds = 5;
    gradcheck_cmd->add_option("--seeds", gradcheck_seeds, "number of seeds");

    auto* synth_cmd = app.add_subcommand("synth", "generate synthetic loan data");
    std::size_t synth_loans = 1000;
    double synth_default_rate = 0.5, synth_signal = 1.0;
    std::size_t synth_x = 15, synth_gap = 0, synth_y = 3;
    std::string synth_out = "synth_samples.bin", synth_format = "samples";
    synth_cmd->add_option("--loans", synth_loans, "number of loans");
    synth_cmd->add_option("--default-rate", synth_default_rate, "fraction of default loans");
    synth_cmd->add_option("--signal", synth_signal, "signal strength in [0,1]");
    synth_cmd->add_option("--x", synth_x, "feature window months");
    synth_cmd->add_option("--gap", synth_gap, "blank interval months");
    synth_cmd->add_option("--y", synth_y, "observation window months");
    synth_cmd->add_option("--out-file", synth_out, "output file");
    synth_cmd->add_option("--format", synth_format,
                          "samples (windowed binary) | performance (pipe-delimited)");

    auto* ingest_cmd =
        app.add_subcommand("ingest", "parse performance files into a samples binary");
    std::vector<std::string> ingest_inputs;
    std::string ingest_out = "samples.bin";
    std::size_t ingest_max_records = 0, ingest_x = 15, ingest_gap = 0, ingest_y = 3;
    ingest_cmd->add_option("--input", ingest_inputs, "performance file(s)")->required();
    ingest_cmd->add_option("--out-file", ingest_out, "output samples binary");
    ingest_cmd->add_option("--max-records", ingest_max_records, "record budget (0 = all)");
    ingest_cmd->add_option("--x", ingest_x, "feature window months");
    ingest_cmd->add_option("--gap", ingest_gap, "blank interval months");
    ingest_cmd->add_option("--y", ingest_y, "observation window months");

    CLI11_PARSE(app, argc, argv);

    try {
        if (window_sweep->parsed()) return run_scenario_cmd(g, Scenario::WindowSweep);
        if (interval_sweep->parsed()) return run_scenario_cmd(g, Scenario::IntervalSweep);
        if (sample_sweep->parsed()) return run_scenario_cmd(g, Scenario::SampleSizeSweep);
        if (cohorts->parsed()) return run_scenario_cmd(g, Scenario::CohortGeneralization);
        if (single->parsed()) return run_scenario_cmd(g, Scenario::Single);

        if (train_cmd->parsed()) {
            ExperimentConfig cfg = make_config(g);
            Samples samples = load_samples(samples_path);
            require(!samples.empty(), "train: samples file is empty");
            const ModelSpec spec =
                model_spec_for(model_name, cfg.base_model, samples.front().dim());
            TrainConfig tc = cfg.train;
            tc.seed = cfg.base_seed;
            const TrainResult result = train(spec, samples, tc);
            save_model(model_out, spec, result.params);
            if (!trace_out.empty()) {
                std::ofstream trace(trace_out);
                write_trace_csv(trace, result.trace);
            }
            std::printf("trained %s for %zu epochs (best epoch %zu), model -> %s\n",
                        spec.name().c_str(), result.trace.size(), result.best_epoch,
                        model_out.c_str());
            return 0;
        }

        if (score_cmd->parsed()) {
            auto [spec, params] = load_model(score_model);
            Samples samples = load_samples(score_samples);
            require(!samples.empty(), "score: samples file is empty");
            std::vector<double> labels;
            MaskedBatch batch = make_batch(samples, &labels);
            Matrix probs = model_forward_infer(spec, params, batch);
            const MetricsReport m = evaluate_scores(probs.data, labels);
            std::printf("model: %s  samples: %zu\n", spec.name().c_str(), samples.size());
            std::printf("accuracy  %.4f\nprecision %.4f%s\nrecall    %.4f%s\nf1        %.4f\n"
                        "auc       %.4f\n",
                        m.accuracy, m.precision, m.precision_defined ? "" : " (degenerate)",
                        m.recall, m.recall_defined ? "" : " (degenerate)", m.f1, m.auc);
            std::printf("counts: tp=%zu fp=%zu tn=%zu fn=%zu (threshold %.2f)\n", m.counts.tp,
                        m.counts.fp, m.counts.tn, m.counts.fn, m.threshold);
            return 0;
        }

        if (gradcheck_cmd->parsed()) {
            const std::uint64_t base = g.seed_set ? g.seed : 1;
            return cmd_gradcheck(gradcheck_seeds, base);
        }

        if (synth_cmd->parsed()) {
            const WindowSpec window{synth_x, synth_gap, synth_y};
            SyntheticSource src;
            src.base.num_loans = synth_loans;
            src.base.default_rate = synth_default_rate;
            src.base.signal_strength = synth_signal;
            const SynthConfig scfg = detail::synth_for_point(
                src, window, synth_loans, src.train_year, 0.0, synth_signal);
            const std::uint64_t seed = g.seed_set ? g.seed : 42;
            const auto seqs = synth_generate(scfg, seed);
            if (synth_format == "performance") {
                write_performance_format(synth_out, seqs);
                std::printf("wrote %zu loans (performance format) -> %s\n", seqs.size(),
                            synth_out.c_str());
            } else {
                Samples samples = build_windows(seqs, window, window.total());
                save_samples(synth_out, samples);
                write_samples_sidecar(synth_out + ".json", window, feature_schema().names);
                std::printf("wrote %zu samples (%zu defaults) -> %s\n", samples.size(),
                            count_defaults(samples), synth_out.c_str());
            }
            return 0;
        }

        if (ingest_cmd->parsed()) {
            ExperimentConfig cfg = make_config(g);
            const WindowSpec window{ingest_x, ingest_gap, ingest_y};
            std::vector<LoanMonthRecord> records;
            ParseReport report;
            for (const auto& path : ingest_inputs) {
                if (ingest_max_records > 0 && report.records_parsed >= ingest_max_records) break;
                auto part = parse_performance_file(path, cfg.freddie.column_map, report,
                                                   ingest_max_records);
                records.insert(records.end(), std::make_move_iterator(part.begin()),
                               std::make_move_iterator(part.end()));
            }
            const auto seqs = assemble_sequences(std::move(records));
            WindowBuildReport wreport;
            Samples samples = build_windows(seqs, window, window.total(), &wreport);
            save_samples(ingest_out, samples);
            write_samples_sidecar(ingest_out + ".json", window, feature_schema().names);
            std::printf("parsed %zu records (%zu skipped), %zu loans, %zu windows "
                        "(%zu defaults) -> %s\n",
                        report.records_parsed, report.lines_skipped, seqs.size(),
                        samples.size(), count_defaults(samples), ingest_out.c_str());
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
