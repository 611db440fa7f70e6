#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "xferscore/synth.hpp"
#include "xferscore/types.hpp"

namespace xfer {

enum class HScorePath { dense, woodbury, pseudoinverse };

inline const char* to_string(HScorePath p) {
    switch (p) {
        case HScorePath::dense: return "dense";
        case HScorePath::woodbury: return "woodbury";
        default: return "pseudoinverse";
    }
}

struct HScoreResult {
    double value = 0.0;
    double alpha_used = 0.0;
    HScorePath path = HScorePath::dense;
    std::optional<int> q_projected;
    std::string warning;  // empty when clean
};

struct HScoreOptions {
    std::optional<double> alpha;    // fixed shrinkage; Ledoit-Wolf when absent
    std::optional<int> project_to;  // Gaussian random projection before scoring
    std::uint64_t projection_seed = 0;
    bool standardize = true;  // z-normalize before covariance estimation
};

/// Original H-score tr(pinv(Sigma_f) Sigma_z) on centered (not scaled)
/// features; pseudo-inverse cutoff at 1e-10 times the largest eigenvalue.
HScoreResult hscore_original(const Eigen::Ref<const Matrix>& F, const LabelVector& Y);

/// Shrinkage H-score tr(inv(Sigma_alpha) (1-alpha) Sigma_z). Branches on
/// n_t < d into the Woodbury fast path (all solves n x n), otherwise solves
/// the d x d shrunk covariance directly; ties n_t == d take the dense branch.
HScoreResult hscore_shrunk(const Eigen::Ref<const Matrix>& F, const LabelVector& Y,
                           const HScoreOptions& opts = {});

/// Large-sample surrogate for the population H-score: hscore_original on a
/// single n_ref-sample draw of the generator. Requires n_ref >= 10 d.
double hscore_population_reference(const SyntheticSpec& generator, int n_ref);

}  // namespace xfer
