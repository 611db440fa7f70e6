#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace xfer {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntVector = Eigen::VectorXi;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Feature matrix F: one row per sample, one column per embedding dimension.
using FeatureMatrix = Matrix;

/// Soft predictions theta: n_t x C_s, rows on the probability simplex.
using SoftPredictionMatrix = Matrix;

/// Per-sample class labels remapped to the contiguous range {0..C-1}.
/// Loaders guarantee that every class in the range occurs at least once;
/// derived label vectors (e.g. argmax pseudo-labels) may leave classes empty.
struct LabelVector {
    IntVector labels;
    int num_classes = 0;
    /// new id -> original id, in order of first appearance (empty if untouched)
    std::vector<long long> original_ids;

    Eigen::Index size() const { return labels.size(); }
};

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : Error {
    using Error::Error;
};
struct ValidationError : Error {
    using Error::Error;
};
struct MissingFieldError : Error {
    using Error::Error;
};
struct DegenerateInputError : Error {
    using Error::Error;
};
struct NumericalError : Error {
    using Error::Error;
};
struct DimensionError : Error {
    using Error::Error;
};
struct SpecError : Error {
    using Error::Error;
};
struct InsufficientDataError : Error {
    using Error::Error;
};

}  // namespace xfer
