#include "xferscore/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <mutex>
#include <set>
#include <thread>

#include "xferscore/correlation.hpp"
#include "xferscore/entropy_metrics.hpp"
#include "xferscore/hscore.hpp"
#include "xferscore/logme.hpp"
#include "xferscore/nleep.hpp"
#include "xferscore/rng.hpp"

namespace xfer {

const std::vector<std::string>& all_metric_names() {
    static const std::vector<std::string> names = {"hscore", "hscore_shrunk", "nce",
                                                   "nleep",  "leep",          "n_nce",
                                                   "n_leep", "n_nleep",       "logme"};
    return names;
}

double compute_metric(const std::string& name, TaskRecord& task, const EvalOptions& opts) {
    const FeatureMatrix& F = task.get_features();
    const LabelVector& Y = task.get_labels();
    if (Y.labels.size() != F.rows())
        throw DimensionError("task " + task.id + ": labels/features row count mismatch");

    auto normalized = [&](double raw) { return normalize_metric(raw, label_entropy(Y)); };

    if (name == "hscore") return hscore_original(F, Y).value;
    if (name == "hscore_shrunk") {
        HScoreOptions h;
        h.project_to = opts.hscore_q;
        h.projection_seed =
            derive_seed(opts.seed, "metric.hscore_shrunk.projection." + task.id);
        return hscore_shrunk(F, Y, h).value;
    }
    if (name == "nce") return nce(Y, argmax_labels(task.get_softpred()));
    if (name == "n_nce") return normalized(nce(Y, argmax_labels(task.get_softpred())));
    if (name == "leep") return leep(Y, task.get_softpred());
    if (name == "n_leep") return normalized(leep(Y, task.get_softpred()));
    if (name == "nleep" || name == "n_nleep") {
        NleepOptions o;
        o.seed = derive_seed(opts.seed, "metric.nleep." + task.id);
        const double raw = nleep(F, Y, o).value;
        return name == "nleep" ? raw : normalized(raw);
    }
    if (name == "logme") return logme(F, Y).value;
    throw ValidationError("unknown metric '" + name + "'");
}

EvalReport evaluate_metrics(std::vector<TaskRecord>& tasks,
                            const std::vector<std::string>& metrics, EvalTarget target,
                            const EvalOptions& opts) {
    if (tasks.size() < 3) throw DegenerateInputError("evaluation needs at least 3 tasks");
    if (metrics.empty()) throw ValidationError("no metrics requested");
    {
        std::set<std::string> ids;
        for (const auto& t : tasks)
            if (!ids.insert(t.id).second)
                throw ValidationError("duplicate task id '" + t.id + "'");
    }
    for (const auto& m : metrics) {
        const auto& all = all_metric_names();
        if (std::find(all.begin(), all.end(), m) == all.end())
            throw ValidationError("unknown metric '" + m + "'");
    }

    EvalReport report;
    const std::size_t n_tasks = tasks.size(), n_metrics = metrics.size();

    // values[m][t]: NaN marks a missing (metric, task) pair
    std::vector<std::vector<double>> values(
        n_metrics, std::vector<double>(n_tasks, std::numeric_limits<double>::quiet_NaN()));
    std::vector<std::string> failures(n_metrics);

    std::atomic<std::size_t> next{0};
    std::mutex mu;
    auto worker = [&]() {
        for (std::size_t t = next.fetch_add(1); t < n_tasks; t = next.fetch_add(1)) {
            for (std::size_t m = 0; m < n_metrics; ++m) {
                try {
                    values[m][t] = compute_metric(metrics[m], tasks[t], opts);
                } catch (const Error& e) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (failures[m].empty())
                        failures[m] = "task " + tasks[t].id + ": " + e.what();
                }
            }
        }
    };
    const int n_threads = std::max(1, std::min<int>(opts.threads, static_cast<int>(n_tasks)));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // targets
    std::vector<double> target_values(n_tasks);
    for (std::size_t t = 0; t < n_tasks; ++t) {
        target_values[t] = target == EvalTarget::accuracy
                               ? tasks[t].accuracy
                               : relative_accuracy(tasks[t].accuracy, tasks[t].num_classes);
    }
    if (target == EvalTarget::relative_accuracy) {
        for (auto& task : tasks) {
            const LabelVector& Y = task.get_labels();
            Vector counts = Vector::Zero(Y.num_classes);
            for (Eigen::Index i = 0; i < Y.labels.size(); ++i) counts(Y.labels(i)) += 1.0;
            const double ratio = counts.maxCoeff() / std::max(counts.minCoeff(), 1.0);
            if (ratio > 1.5) {
                report.warnings.push_back("task " + task.id + ": class imbalance " +
                                          std::to_string(ratio) +
                                          " exceeds 1.5:1; relative accuracy assumes balance");
            }
        }
    }

    // normalize to task-id order so the report is exactly independent of the
    // bundle ordering
    std::vector<std::size_t> by_id(n_tasks);
    std::iota(by_id.begin(), by_id.end(), std::size_t{0});
    std::sort(by_id.begin(), by_id.end(),
              [&](std::size_t a, std::size_t b) { return tasks[a].id < tasks[b].id; });

    for (std::size_t m = 0; m < n_metrics; ++m) {
        CorrelationReport row;
        row.metric_name = metrics[m];
        row.target = target;
        std::vector<double> xs, ys;
        for (std::size_t t : by_id) {
            if (std::isnan(values[m][t])) continue;
            xs.push_back(values[m][t]);
            ys.push_back(target_values[t]);
        }
        row.n = static_cast<int>(xs.size());
        try {
            if (row.n < 3) throw DegenerateInputError("fewer than 3 tasks produced a value");
            const Correlation cp = pearson(xs, ys);
            const Correlation cs = spearman(xs, ys);
            row.r_pearson = cp.r;
            row.r_spearman = cs.r;
            if (opts.exact_p) {
                row.p_pearson = permutation_pvalue(xs, ys, false);
                row.p_spearman = permutation_pvalue(xs, ys, true);
            } else {
                row.p_pearson = cp.p;
                row.p_spearman = cs.p;
            }
            row.significant = row.p_pearson <= 0.05;
        } catch (const Error& e) {
            row.error = !failures[m].empty() && row.n < 3
                            ? std::string(e.what()) + " (" + failures[m] + ")"
                            : e.what();
        }
        report.rows.push_back(std::move(row));
    }
    std::sort(report.rows.begin(), report.rows.end(),
              [](const auto& a, const auto& b) { return a.metric_name < b.metric_name; });
    return report;
}

}  // namespace xfer
