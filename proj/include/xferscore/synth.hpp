#pragma once

#include <cstdint>
#include <utility>

#include "xferscore/types.hpp"

namespace xfer {

/// Multi-class Gaussian-cluster generator configuration.
struct SyntheticSpec {
    int n = 0;
    int d = 0;
    int d_informative = 0;
    int num_classes = 2;
    double class_sep = 1.0;
    std::uint64_t seed = 0;
};

/// Gaussian clusters at distinct hypercube vertices (+-class_sep per
/// informative coordinate); the informative block of each cluster is passed
/// through a per-cluster random linear map with Uniform(-1,1) entries, the
/// remaining d - d_informative columns are i.i.d. standard normal noise.
/// Class counts are balanced to within one sample and rows are shuffled.
std::pair<FeatureMatrix, LabelVector> make_classification(const SyntheticSpec& spec);

/// Keeps a random subset of classes and a fixed number of samples per kept
/// class; kept classes are relabeled 0..k-1 in ascending original order and
/// row order is preserved.
std::pair<FeatureMatrix, LabelVector> subsample_classes(const Eigen::Ref<const Matrix>& F,
                                                        const LabelVector& Y,
                                                        int classes_to_keep, int per_class,
                                                        std::uint64_t seed);

/// Binary task with n1 ~ Uniform[n_min, n_max] minority samples (label 0) and
/// ratio * n1 majority samples (label 1), drawn from two random classes.
std::pair<FeatureMatrix, LabelVector> make_imbalanced_pair(const Eigen::Ref<const Matrix>& F,
                                                           const LabelVector& Y, int n_min,
                                                           int n_max, int ratio,
                                                           std::uint64_t seed);

}  // namespace xfer
