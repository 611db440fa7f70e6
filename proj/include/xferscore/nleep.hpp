#pragma once

#include <cstdint>
#include <optional>

#include "xferscore/gmm.hpp"
#include "xferscore/types.hpp"

namespace xfer {

struct NleepOptions {
    std::optional<int> K;  // mixture components; defaults to C
    std::optional<int> q;  // projection dimension; defaults to min(64, d)
    std::uint64_t seed = 0;
    GmmOptions gmm;
};

struct NleepResult {
    double value = 0.0;
    bool gmm_converged = true;
    int K = 0;
    int q = 0;
};

/// LEEP against the posterior responsibilities of a diagonal GMM fitted on
/// randomly projected, standardized features.
NleepResult nleep(const Eigen::Ref<const Matrix>& F, const LabelVector& Y,
                  const NleepOptions& opts = {});

}  // namespace xfer
