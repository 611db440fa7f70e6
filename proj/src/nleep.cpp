#include "xferscore/nleep.hpp"

#include <algorithm>

#include "xferscore/covariance.hpp"
#include "xferscore/entropy_metrics.hpp"
#include "xferscore/projection.hpp"
#include "xferscore/rng.hpp"

namespace xfer {

NleepResult nleep(const Eigen::Ref<const Matrix>& F, const LabelVector& Y,
                  const NleepOptions& opts) {
    if (Y.labels.size() != F.rows()) throw DimensionError("labels/features row count mismatch");
    NleepResult res;
    res.K = opts.K.value_or(Y.num_classes);
    res.q = opts.q.value_or(std::min<int>(64, static_cast<int>(F.cols())));
    if (F.rows() < res.K) throw DegenerateInputError("nleep needs n_t >= K");

    Matrix X = gaussian_random_projection(
        F, ProjectionSpec{res.q, derive_seed(opts.seed, "nleep.projection")});
    X = center_and_standardize(X);

    const GmmModel gmm = fit_gmm_diagonal(X, res.K, derive_seed(opts.seed, "nleep.gmm"), opts.gmm);
    res.gmm_converged = gmm.converged;

    const Matrix theta = gmm_responsibilities(gmm, X);
    res.value = leep(Y, theta);
    return res;
}

}  // namespace xfer
