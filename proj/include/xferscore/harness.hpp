#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xferscore/io.hpp"
#include "xferscore/types.hpp"

namespace xfer {

enum class EvalTarget { accuracy, relative_accuracy };

inline const char* to_string(EvalTarget t) {
    return t == EvalTarget::accuracy ? "accuracy" : "relative_accuracy";
}

struct CorrelationReport {
    std::string metric_name;
    double r_pearson = 0.0;
    double p_pearson = 1.0;
    double r_spearman = 0.0;
    double p_spearman = 1.0;
    int n = 0;  // tasks that produced a value for this metric
    EvalTarget target = EvalTarget::accuracy;
    bool significant = false;  // p_pearson <= 0.05
    std::string error;         // non-empty when the row could not be computed
};

struct EvalOptions {
    std::uint64_t seed = 0;
    std::optional<int> hscore_q;  // random projection for hscore_shrunk
    int threads = 1;
    bool exact_p = false;  // exact permutation p-values (n <= 10)
};

struct EvalReport {
    std::vector<CorrelationReport> rows;  // sorted by metric name
    std::vector<std::string> warnings;
};

/// The canonical metric set, in the order `score` prints them.
const std::vector<std::string>& all_metric_names();

/// Computes one metric on one task. Seeded metrics derive their stream from
/// (seed, metric, task id), so adding a metric never perturbs another and
/// bundle order is immaterial.
double compute_metric(const std::string& name, TaskRecord& task, const EvalOptions& opts);

/// Scores every metric on every task and correlates against the chosen
/// target. Tasks failing a metric are excluded pairwise (reduced n per row);
/// rows come back sorted by metric name and are independent of task order.
EvalReport evaluate_metrics(std::vector<TaskRecord>& tasks,
                            const std::vector<std::string>& metrics, EvalTarget target,
                            const EvalOptions& opts = {});

}  // namespace xfer
