#pragma once

#include <cstdint>
#include <vector>

#include "xferscore/types.hpp"

namespace xfer {

/// Diagonal-covariance Gaussian mixture fitted by EM.
struct GmmModel {
    Vector weights;    // length K, simplex
    Matrix means;      // K x q
    Matrix variances;  // K x q, floored
    double loglik = 0.0;
    bool converged = false;
    int iterations = 0;
    std::vector<double> loglik_trace;  // one entry per EM iteration
};

struct GmmOptions {
    int max_iter = 200;
    double tol = 1e-6;                   // relative log-likelihood change
    double variance_floor_scale = 1e-6;  // times the mean feature variance
};

/// Fits by EM from k-means++-style seeding (seeded centers, uniform weights,
/// global variances). Deterministic given (X, K, seed, options).
GmmModel fit_gmm_diagonal(const Eigen::Ref<const Matrix>& X, int K, std::uint64_t seed,
                          const GmmOptions& opts = {});

/// Posterior responsibilities, n x K with rows on the simplex.
Matrix gmm_responsibilities(const GmmModel& model, const Eigen::Ref<const Matrix>& X);

}  // namespace xfer
