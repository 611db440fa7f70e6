#pragma once

#include <cmath>

#include "xferscore/rng.hpp"
#include "xferscore/types.hpp"

namespace xfer {

struct ProjectionSpec {
    int q = 128;
    std::uint64_t seed = 0;
};

/// Builds the d x q Gaussian projection matrix V with i.i.d. N(0, 1/q)
/// entries. Each column gets its own substream derived from (seed, column),
/// so generation order is immaterial.
inline Matrix gaussian_projection_matrix(Eigen::Index d, const ProjectionSpec& spec) {
    if (spec.q < 1) throw DimensionError("projection dimension must be >= 1");
    if (spec.q > d) throw DimensionError("projection dimension q exceeds feature dimension d");
    Matrix V(d, spec.q);
    const double scale = 1.0 / std::sqrt(static_cast<double>(spec.q));
    for (int j = 0; j < spec.q; ++j) {
        Rng stream(derive_seed(spec.seed, "grp.column", static_cast<std::uint64_t>(j)));
        for (Eigen::Index i = 0; i < d; ++i) V(i, j) = stream.normal() * scale;
    }
    return V;
}

/// F V, the projected features.
inline Matrix gaussian_random_projection(const Eigen::Ref<const Matrix>& F,
                                         const ProjectionSpec& spec) {
    return F * gaussian_projection_matrix(F.cols(), spec);
}

}  // namespace xfer
