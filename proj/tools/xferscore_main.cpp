// xferscore: transferability metrics over feature embeddings.
//
// Subcommands: score, evaluate, synth, bench, stability. Exit codes: 0 on
// success, 2 on input/validation errors, 3 on numerical failures.

#include <CLI11.hpp>

#include <sys/utsname.h>
#include <json.hpp>

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "xferscore/bench.hpp"
#include "xferscore/correlation.hpp"
#include "xferscore/entropy_metrics.hpp"
#include "xferscore/harness.hpp"
#include "xferscore/hscore.hpp"
#include "xferscore/io.hpp"
#include "xferscore/logme.hpp"
#include "xferscore/nleep.hpp"
#include "xferscore/rng.hpp"
#include "xferscore/synth.hpp"
#include "xferscore/version.hpp"

namespace {

using json = nlohmann::ordered_json;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct OutputSink {
    std::string format = "tsv";  // tsv | json
    std::string out_path;        // empty -> stdout

    void write(const std::string& header_comment, const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows, json jdoc) const {
        std::ostringstream ss;
        if (format == "json") {
            ss << jdoc.dump(2) << '\n';
        } else {
            ss << "# " << header_comment << '\n';
            for (std::size_t i = 0; i < columns.size(); ++i)
                ss << (i ? "\t" : "") << columns[i];
            ss << '\n';
            for (const auto& row : rows) {
                for (std::size_t i = 0; i < row.size(); ++i) ss << (i ? "\t" : "") << row[i];
                ss << '\n';
            }
        }
        if (out_path.empty()) {
            std::cout << ss.str();
        } else {
            std::ofstream f(out_path, std::ios::binary);
            if (!f) throw xfer::ParseError("cannot write " + out_path);
            f << ss.str();
        }
    }
};

std::string header(std::uint64_t seed, int threads) {
    std::ostringstream ss;
    ss << "xferscore " << xfer::kVersion << " seed=" << seed << " threads=" << threads;
    return ss.str();
}

json header_json(std::uint64_t seed, int threads) {
    json j;
    j["version"] = xfer::kVersion;
    j["seed"] = seed;
    j["threads"] = threads;
    return j;
}

int default_threads() {
    if (const char* env = std::getenv("XFERSCORE_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

std::string hardware_string() {
    utsname u{};
    std::string s = uname(&u) == 0 ? std::string(u.machine) + "/" + u.sysname : "unknown";
    std::ifstream cpuinfo("/proc/cpuinfo");
    std::string line;
    while (std::getline(cpuinfo, line)) {
        if (line.rfind("model name", 0) == 0) {
            const auto pos = line.find(':');
            if (pos != std::string::npos) {
                std::string model = line.substr(pos + 1);
                // compact: drop spaces so the header stays one token
                std::string out;
                for (char ch : model)
                    if (!std::isspace(static_cast<unsigned char>(ch))) out += ch;
                s += "/" + out;
            }
            break;
        }
    }
    return s;
}

std::vector<std::string> parse_metric_list(const std::string& arg, bool have_softpred) {
    std::vector<std::string> metrics;
    if (arg == "all") {
        // expands to every metric computable from the provided inputs
        for (const auto& m : xfer::all_metric_names()) {
            const bool needs_softpred =
                m == "nce" || m == "leep" || m == "n_nce" || m == "n_leep";
            if (!needs_softpred || have_softpred) metrics.push_back(m);
        }
    } else {
        std::stringstream ss(arg);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (!tok.empty()) metrics.push_back(tok);
        }
    }
    if (metrics.empty()) throw xfer::ValidationError("no metrics requested");
    const auto& all = xfer::all_metric_names();
    for (const auto& m : metrics) {
        if (std::find(all.begin(), all.end(), m) == all.end())
            throw xfer::ValidationError("unknown metric '" + m + "'");
        const bool needs_softpred = m == "nce" || m == "leep" || m == "n_nce" || m == "n_leep";
        if (needs_softpred && !have_softpred)
            throw xfer::ValidationError("metric '" + m + "' requires --softpred");
    }
    return metrics;
}

// ---------------------------------------------------------------- score ----

int cmd_score(const std::string& features_path, const std::string& labels_path,
              const std::string& softpred_path, const std::string& metrics_arg,
              std::optional<int> q, std::uint64_t seed, const OutputSink& sink) {
    const auto metrics = parse_metric_list(metrics_arg, !softpred_path.empty());

    const xfer::FeatureMatrix F = xfer::load_feature_matrix_auto(features_path);
    const xfer::LabelVector Y = xfer::load_labels(labels_path);
    if (Y.labels.size() != F.rows())
        throw xfer::DimensionError("labels/features row count mismatch");
    std::optional<xfer::SoftPredictionMatrix> theta;
    if (!softpred_path.empty()) {
        theta = xfer::load_soft_predictions(softpred_path);
        if (theta->rows() != F.rows())
            throw xfer::DimensionError("softpred/features row count mismatch");
    }

    std::vector<std::vector<std::string>> rows;
    json jrows = json::array();
    const double h_y = xfer::label_entropy(Y);

    for (const auto& name : metrics) {
        double value = 0.0;
        std::string detail;
        if (name == "hscore") {
            const auto r = xfer::hscore_original(F, Y);
            value = r.value;
            detail = "path=" + std::string(xfer::to_string(r.path));
        } else if (name == "hscore_shrunk") {
            xfer::HScoreOptions opt;
            opt.project_to = q;
            opt.projection_seed = xfer::derive_seed(seed, "metric.hscore_shrunk.projection", 0);
            const auto r = xfer::hscore_shrunk(F, Y, opt);
            value = r.value;
            detail = "alpha=" + fmt6(r.alpha_used) + ";path=" + xfer::to_string(r.path);
            if (r.q_projected) detail += ";q=" + std::to_string(*r.q_projected);
            if (!r.warning.empty()) detail += ";warning=" + r.warning;
        } else if (name == "nce" || name == "n_nce") {
            const double raw = xfer::nce(Y, xfer::argmax_labels(*theta));
            value = name == "nce" ? raw : xfer::normalize_metric(raw, h_y);
            if (name == "n_nce") detail = "raw=" + fmt6(raw) + ";h_y=" + fmt6(h_y);
        } else if (name == "leep" || name == "n_leep") {
            std::vector<int> dropped;
            const double raw = xfer::leep(Y, *theta, &dropped);
            value = name == "leep" ? raw : xfer::normalize_metric(raw, h_y);
            if (!dropped.empty()) detail = "dropped_columns=" + std::to_string(dropped.size());
            if (name == "n_leep") {
                if (!detail.empty()) detail += ";";
                detail += "raw=" + fmt6(raw) + ";h_y=" + fmt6(h_y);
            }
        } else if (name == "nleep" || name == "n_nleep") {
            xfer::NleepOptions opt;
            opt.seed = xfer::derive_seed(seed, "metric.nleep", 0);
            const auto r = xfer::nleep(F, Y, opt);
            value = name == "nleep" ? r.value : xfer::normalize_metric(r.value, h_y);
            detail = "K=" + std::to_string(r.K) + ";q=" + std::to_string(r.q) +
                     ";gmm_converged=" + (r.gmm_converged ? "1" : "0");
            if (name == "n_nleep") detail += ";raw=" + fmt6(r.value) + ";h_y=" + fmt6(h_y);
        } else if (name == "logme") {
            const auto r = xfer::logme(F, Y);
            int iters = 0;
            for (int it : r.iterations_per_class) iters = std::max(iters, it);
            value = r.value;
            detail = "max_iterations=" + std::to_string(iters) +
                     ";converged=" + (r.converged ? "1" : "0");
        }
        rows.push_back({name, fmt(value), detail});
        json jr;
        jr["metric"] = name;
        jr["value"] = value;
        jr["detail"] = detail;
        jrows.push_back(jr);
    }

    json jdoc = header_json(seed, 1);
    jdoc["rows"] = jrows;
    sink.write(header(seed, 1), {"metric", "value", "detail"}, rows, jdoc);
    return 0;
}

// ------------------------------------------------------------- evaluate ----

int cmd_evaluate(const std::string& manifest, const std::string& metrics_arg,
                 const std::string& target_arg, std::uint64_t seed, const std::string& q_arg,
                 int threads, bool exact_p, const OutputSink& sink) {
    auto tasks = xfer::load_task_bundle(manifest);
    bool all_softpred = true;
    for (auto& t : tasks) all_softpred = all_softpred && t.has_softpred();
    const auto metrics = parse_metric_list(metrics_arg, all_softpred);

    std::optional<int> q;
    if (q_arg == "auto") {
        // common projection dimension: the smallest embedding width across
        // the bundle, capped at 128
        std::uint64_t min_d = 128;
        for (const auto& t : tasks) {
            const std::uint64_t d = t.features ? static_cast<std::uint64_t>(t.features->cols())
                                               : xfer::peek_matrix_shape(t.features_path).second;
            min_d = std::min(min_d, d);
        }
        q = static_cast<int>(min_d);
    } else if (!q_arg.empty()) {
        const int v = std::atoi(q_arg.c_str());
        if (v <= 0) throw xfer::ValidationError("--q must be a positive integer or 'auto'");
        q = v;
    }
    const xfer::EvalTarget target = target_arg == "relative"
                                        ? xfer::EvalTarget::relative_accuracy
                                        : xfer::EvalTarget::accuracy;

    xfer::EvalOptions opts;
    opts.seed = seed;
    opts.hscore_q = q;
    opts.threads = threads;
    opts.exact_p = exact_p;
    const auto report = xfer::evaluate_metrics(tasks, metrics, target, opts);

    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';

    std::vector<std::vector<std::string>> rows;
    json jrows = json::array();
    for (const auto& r : report.rows) {
        if (!r.error.empty()) {
            rows.push_back({r.metric_name, "nan", "nan", "nan", "nan", std::to_string(r.n), "!"});
        } else {
            rows.push_back({r.metric_name, fmt(r.r_pearson), fmt(r.p_pearson), fmt(r.r_spearman),
                            fmt(r.p_spearman), std::to_string(r.n), r.significant ? "" : "*"});
        }
        json jr;
        jr["metric"] = r.metric_name;
        if (r.error.empty()) {
            jr["r_pearson"] = r.r_pearson;
            jr["p_pearson"] = r.p_pearson;
            jr["r_spearman"] = r.r_spearman;
            jr["p_spearman"] = r.p_spearman;
        } else {
            jr["error"] = r.error;
        }
        jr["n"] = r.n;
        jr["sig_flag"] = r.error.empty() ? (r.significant ? "" : "*") : "!";
        jrows.push_back(jr);
    }

    json jdoc = header_json(seed, threads);
    jdoc["target"] = xfer::to_string(target);
    jdoc["rows"] = jrows;
    sink.write(header(seed, threads) + " target=" + xfer::to_string(target),
               {"metric", "r_pearson", "p_pearson", "r_spearman", "p_spearman", "n", "sig_flag"},
               rows, jdoc);
    return 0;
}

// ---------------------------------------------------------------- synth ----

int cmd_synth(const xfer::SyntheticSpec& spec, const std::string& prefix, bool csv,
              const std::string& manifest, double accuracy, const OutputSink& sink) {
    auto [F, Y] = xfer::make_classification(spec);

    const std::string features_path = prefix + "_features" + (csv ? ".csv" : ".fmb");
    const std::string labels_path = prefix + "_labels" + (csv ? ".txt" : ".flb");
    if (csv) {
        xfer::save_matrix_csv(F, features_path);
        xfer::save_labels_text(Y, labels_path);
    } else {
        xfer::save_matrix_fmb(F, features_path);
        xfer::save_labels_flb(Y, labels_path);
    }

    if (!manifest.empty()) {
        xfer::TaskRecord rec;
        rec.id = std::filesystem::path(prefix).filename().string();
        rec.features_path = features_path;
        rec.labels_path = labels_path;
        rec.accuracy = accuracy;
        rec.num_classes = spec.num_classes;
        xfer::append_manifest_row(manifest, rec);
    }

    std::vector<std::vector<std::string>> rows = {
        {"features", features_path},
        {"labels", labels_path},
        {"n", std::to_string(spec.n)},
        {"d", std::to_string(spec.d)},
        {"classes", std::to_string(spec.num_classes)},
    };
    json jdoc = header_json(spec.seed, 1);
    jdoc["features"] = features_path;
    jdoc["labels"] = labels_path;
    jdoc["n"] = spec.n;
    jdoc["d"] = spec.d;
    jdoc["classes"] = spec.num_classes;
    sink.write(header(spec.seed, 1), {"key", "value"}, rows, jdoc);
    return 0;
}

// ---------------------------------------------------------------- bench ----

int cmd_bench(const xfer::BenchConfig& config, const OutputSink& sink) {
    const auto table = xfer::run_timing(config);

    std::vector<std::vector<std::string>> rows;
    json jrows = json::array();
    for (const auto& r : table.rows) {
        rows.push_back({std::to_string(r.cell.n), std::to_string(r.cell.d),
                        std::to_string(r.cell.C), r.metric, fmt6(r.ms_median), fmt6(r.ms_iqr),
                        r.stable ? "" : "unstable"});
        json jr;
        jr["n"] = r.cell.n;
        jr["d"] = r.cell.d;
        jr["C"] = r.cell.C;
        jr["metric"] = r.metric;
        jr["ms_median"] = r.ms_median;
        jr["ms_iqr"] = r.ms_iqr;
        jr["stable"] = r.stable;
        jrows.push_back(jr);
    }
    for (std::size_t i = 0; i < table.speedup.size(); ++i) {
        const auto& cell = config.grid[i];
        rows.push_back({std::to_string(cell.n), std::to_string(cell.d), std::to_string(cell.C),
                        "speedup_logme_over_hscore_shrunk", fmt6(table.speedup[i]), "0", ""});
        json jr;
        jr["n"] = cell.n;
        jr["d"] = cell.d;
        jr["C"] = cell.C;
        jr["metric"] = "speedup_logme_over_hscore_shrunk";
        jr["ms_median"] = table.speedup[i];
        jr["ms_iqr"] = 0.0;
        jr["stable"] = true;
        jrows.push_back(jr);
    }

    json jdoc = header_json(config.seed, 1);
    jdoc["hardware"] = hardware_string();
    jdoc["reps"] = config.repetitions;
    jdoc["rows"] = jrows;
    sink.write(header(config.seed, 1) + " reps=" + std::to_string(config.repetitions) +
                   " hardware=" + hardware_string(),
               {"n", "d", "C", "metric", "ms_median", "ms_iqr", "flag"}, rows, jdoc);
    return 0;
}

// ------------------------------------------------------------ stability ----

int cmd_stability(const xfer::StabilityConfig& config, std::uint64_t seed,
                  const OutputSink& sink) {
    const auto rows_data = xfer::run_stability(config);

    std::vector<std::vector<std::string>> rows;
    json jrows = json::array();
    for (const auto& r : rows_data) {
        rows.push_back({std::to_string(r.seed), std::to_string(r.n),
                        std::isnan(r.alpha) ? "-" : fmt6(r.alpha), r.metric, fmt(r.value),
                        fmt(r.ratio)});
        json jr;
        jr["seed"] = r.seed;
        jr["n"] = r.n;
        if (std::isnan(r.alpha))
            jr["alpha"] = nullptr;
        else
            jr["alpha"] = r.alpha;
        jr["metric"] = r.metric;
        jr["value"] = r.value;
        jr["ratio"] = r.ratio;
        jrows.push_back(jr);
    }

    json jdoc = header_json(seed, 1);
    jdoc["rows"] = jrows;
    sink.write(header(seed, 1), {"seed", "n", "alpha", "metric", "value", "ratio"}, rows, jdoc);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"transferability metrics over feature embeddings"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may appear after the subcommand

    OutputSink sink;
    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "root seed for all randomness")->capture_default_str();

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--format", sink.format, "output format")
            ->check(CLI::IsMember({"tsv", "json"}))
            ->capture_default_str();
        cmd->add_option("--out", sink.out_path, "output file (default stdout)");
    };

    // score
    std::string features_path, labels_path, softpred_path, metrics_arg = "all";
    int q_flag = -1;
    auto* score = app.add_subcommand("score", "compute metrics for one dataset");
    score->add_option("--features", features_path, "feature matrix (csv or fmb)")->required();
    score->add_option("--labels", labels_path, "labels (text or flb)")->required();
    score->add_option("--softpred", softpred_path, "soft predictions (csv or fmb)");
    score->add_option("--metrics", metrics_arg, "comma list or 'all'")->capture_default_str();
    score->add_option("--q", q_flag, "random projection dimension for hscore_shrunk");
    add_common(score);

    // evaluate
    std::string manifest_path, target_arg = "accuracy", q_arg;
    int threads = default_threads();
    bool exact_p = false;
    auto* evaluate = app.add_subcommand("evaluate", "correlate metrics with accuracy");
    evaluate->add_option("--manifest", manifest_path, "task manifest (tsv)")->required();
    evaluate->add_option("--metrics", metrics_arg, "comma list or 'all'");
    evaluate->add_option("--target", target_arg, "correlation target")
        ->check(CLI::IsMember({"accuracy", "relative"}))
        ->capture_default_str();
    evaluate->add_option("--threads", threads, "parallel tasks (env XFERSCORE_THREADS)");
    evaluate->add_option("--q", q_arg,
                         "hscore_shrunk projection dimension: integer, or 'auto' for"
                         " min(embedding widths, 128) across the bundle");
    evaluate->add_flag("--exact-p", exact_p, "exact permutation p-values (n <= 10)");
    add_common(evaluate);

    // synth
    xfer::SyntheticSpec spec;
    spec.n = 100;
    spec.d = 10;
    spec.d_informative = 10;
    std::string prefix = "task";
    std::string synth_manifest;
    double accuracy = 0.0;
    bool csv_out = false;
    auto* synth = app.add_subcommand("synth", "generate a synthetic task");
    synth->add_option("--n", spec.n, "samples")->capture_default_str();
    synth->add_option("--d", spec.d, "feature dimension")->capture_default_str();
    synth->add_option("--informative", spec.d_informative, "informative dimensions")
        ->capture_default_str();
    synth->add_option("--classes", spec.num_classes, "classes")->capture_default_str();
    synth->add_option("--sep", spec.class_sep, "class separation")->capture_default_str();
    synth->add_option("--out-prefix", prefix, "output path prefix")->capture_default_str();
    synth->add_flag("--csv", csv_out, "write csv/text instead of fmb/flb");
    synth->add_option("--manifest", synth_manifest, "append a row to this manifest");
    synth->add_option("--accuracy", accuracy,
                      "accuracy recorded in the manifest row (placeholder)");
    add_common(synth);

    // bench
    std::string grid_arg = "table5", cells_arg;
    xfer::BenchConfig bench_config;
    auto* bench = app.add_subcommand("bench", "timing benchmark");
    bench->add_option("--grid", grid_arg, "named grid")->check(CLI::IsMember({"table5"}));
    bench->add_option("--cells", cells_arg, "custom grid 'NxDxC,NxDxC,...'");
    bench->add_option("--reps", bench_config.repetitions, "timed repetitions")
        ->capture_default_str();
    bench->add_option("--warmup", bench_config.warmup, "discarded warmup runs")
        ->capture_default_str();
    bench->add_option("--informative", bench_config.d_informative, "informative dimensions")
        ->capture_default_str();
    add_common(bench);

    // stability
    xfer::StabilityConfig stab_config;
    std::string preset = "desk", sizes_arg, seeds_arg;
    auto* stability = app.add_subcommand("stability", "sample-size stability study");
    stability->add_option("--preset", preset, "desk or paper")
        ->check(CLI::IsMember({"desk", "paper"}))
        ->capture_default_str();
    stability->add_option("--d", stab_config.d, "feature dimension");
    stability->add_option("--informative", stab_config.d_informative, "informative dimensions");
    stability->add_option("--classes", stab_config.C, "classes");
    stability->add_option("--sep", stab_config.class_sep, "class separation");
    stability->add_option("--nref", stab_config.n_reference, "reference sample size");
    stability->add_option("--sizes", sizes_arg, "comma list of sample sizes");
    stability->add_option("--seeds", seeds_arg, "comma list of seeds");
    add_common(stability);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const std::optional<int> q = q_flag >= 0 ? std::optional<int>(q_flag) : std::nullopt;
        if (score->parsed())
            return cmd_score(features_path, labels_path, softpred_path, metrics_arg, q, seed,
                             sink);
        if (evaluate->parsed())
            return cmd_evaluate(manifest_path, metrics_arg, target_arg, seed, q_arg, threads,
                                exact_p, sink);
        if (synth->parsed()) {
            spec.seed = seed;
            return cmd_synth(spec, prefix, csv_out, synth_manifest, accuracy, sink);
        }
        if (bench->parsed()) {
            bench_config.seed = seed;
            if (!cells_arg.empty()) {
                std::stringstream ss(cells_arg);
                std::string tok;
                while (std::getline(ss, tok, ',')) {
                    xfer::BenchCell cell;
                    if (std::sscanf(tok.c_str(), "%dx%dx%d", &cell.n, &cell.d, &cell.C) != 3)
                        throw xfer::ValidationError("bad cell '" + tok + "', expected NxDxC");
                    bench_config.grid.push_back(cell);
                }
            } else {
                bench_config.grid = xfer::table5_grid();
            }
            return cmd_bench(bench_config, sink);
        }
        if (stability->parsed()) {
            xfer::StabilityConfig base = preset == "paper" ? xfer::paper_stability_preset()
                                                           : xfer::desk_stability_preset();
            // explicit flags override the preset
            if (stability->count("--d")) base.d = stab_config.d;
            if (stability->count("--informative")) base.d_informative = stab_config.d_informative;
            if (stability->count("--classes")) base.C = stab_config.C;
            if (stability->count("--sep")) base.class_sep = stab_config.class_sep;
            if (stability->count("--nref")) base.n_reference = stab_config.n_reference;
            auto parse_ints = [](const std::string& s) {
                std::vector<long long> out;
                std::stringstream ss(s);
                std::string tok;
                while (std::getline(ss, tok, ',')) out.push_back(std::stoll(tok));
                return out;
            };
            if (!sizes_arg.empty()) {
                base.sample_sizes.clear();
                for (long long v : parse_ints(sizes_arg))
                    base.sample_sizes.push_back(static_cast<int>(v));
            }
            if (!seeds_arg.empty()) {
                base.seeds.clear();
                for (long long v : parse_ints(seeds_arg))
                    base.seeds.push_back(static_cast<std::uint64_t>(v));
            }
            return cmd_stability(base, seed, sink);
        }
    } catch (const xfer::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const xfer::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
