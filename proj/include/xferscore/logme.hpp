#pragma once

#include <vector>

#include "xferscore/types.hpp"

namespace xfer {

struct LogMEResult {
    double value = 0.0;  // mean over classes of log-evidence / n_t
    std::vector<int> iterations_per_class;
    bool converged = true;
    /// log-evidence after each fixed-point iteration, one trace per class
    std::vector<std::vector<double>> evidence_trace;
};

struct LogMEOptions {
    int max_iter = 100;
    double tol = 1e-3;  // relative change of (alpha, beta)
};

/// Bayesian linear-head evidence maximized per one-vs-rest class via
/// fixed-point updates of the prior/noise precisions, sharing a single thin
/// SVD of F across classes.
LogMEResult logme(const Eigen::Ref<const Matrix>& F, const LabelVector& Y,
                  const LogMEOptions& opts = {});

}  // namespace xfer
