#pragma once

#include <string>
#include <vector>

#include "xferscore/types.hpp"

namespace xfer {

/// Empirical joint distribution of (pseudo-label z, true label y);
/// rows index z in {0..C_s-1}, columns index y in {0..C-1}.
struct EmpiricalJoint {
    Matrix joint;       // C_s x C, sums to 1
    Vector marginal_z;  // length C_s, row sums
};

EmpiricalJoint empirical_joint(const LabelVector& Y, const LabelVector& Z);

/// Shannon entropy of the label prior, natural log; 0 for single-class input.
double label_entropy(const LabelVector& Y);

/// Negative conditional entropy -H(Y|Z), always in [-H(Y), 0].
double nce(const LabelVector& Y, const LabelVector& Z);

/// Row argmax of a soft-prediction matrix; ties break to the lowest index.
/// The label space keeps all C_s columns even if some never win.
LabelVector argmax_labels(const Eigen::Ref<const Matrix>& theta);

/// Log expected empirical predictor. Columns of theta with zero total mass
/// are dropped from the inner sum (reported via `dropped` when non-null);
/// the inner expectation is clamped at 1e-12 before the log.
double leep(const LabelVector& Y, const Eigen::Ref<const Matrix>& theta,
            std::vector<int>* dropped = nullptr);

/// 1 + raw/H(Y); requires H(Y) > 0.
double normalize_metric(double raw, double label_entropy_y);

}  // namespace xfer
