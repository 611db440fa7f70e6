#include "xferscore/hscore.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "xferscore/covariance.hpp"
#include "xferscore/projection.hpp"

namespace xfer {

namespace {

void check_inputs(const Eigen::Ref<const Matrix>& F, const LabelVector& Y) {
    if (Y.num_classes < 2) throw DegenerateInputError("H-score needs at least 2 classes");
    if (F.rows() < 2) throw DegenerateInputError("H-score needs at least 2 samples");
    if (!F.allFinite()) throw ValidationError("features contain NaN/Inf");
}

// tr(pinv(Sigma) Sigma_z) via the eigendecomposition of Sigma; Sigma_z is
// never materialized, only R with Sigma_z = (1/n) R R^T.
double pinv_trace(const Matrix& sigma, const Matrix& R, Eigen::Index n) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    const Vector& evals = es.eigenvalues();
    const double cutoff = 1e-10 * std::max(0.0, evals.maxCoeff());
    const Matrix A = es.eigenvectors().transpose() * R;  // d x C
    double h = 0.0;
    for (Eigen::Index i = 0; i < evals.size(); ++i)
        if (evals(i) > cutoff) h += A.row(i).squaredNorm() / evals(i);
    return h / static_cast<double>(n);
}

}  // namespace

HScoreResult hscore_original(const Eigen::Ref<const Matrix>& F, const LabelVector& Y) {
    check_inputs(F, Y);
    const Matrix Fc = center_columns(F);
    const ClassStats cs = class_stats(Fc, Y);

    HScoreResult res;
    res.path = HScorePath::pseudoinverse;
    res.alpha_used = 0.0;
    if (cs.R.squaredNorm() == 0.0) return res;  // Sigma_z = 0

    const Matrix sigma = sample_covariance(Fc);
    res.value = pinv_trace(sigma, cs.R, Fc.rows());
    if (!std::isfinite(res.value)) throw NumericalError("H-score is not finite");
    return res;
}

HScoreResult hscore_shrunk(const Eigen::Ref<const Matrix>& F, const LabelVector& Y,
                           const HScoreOptions& opts) {
    check_inputs(F, Y);
    if (opts.alpha && (*opts.alpha < 0.0 || *opts.alpha > 1.0))
        throw ValidationError("alpha outside [0,1]");

    HScoreResult res;
    Matrix Fw;
    if (opts.project_to) {
        Fw = gaussian_random_projection(F, ProjectionSpec{*opts.project_to, opts.projection_seed});
        res.q_projected = *opts.project_to;
    } else {
        Fw = F;
    }
    Fw = opts.standardize ? center_and_standardize(Fw) : center_columns(Fw);

    const Eigen::Index n = Fw.rows(), d = Fw.cols();
    const ClassStats cs = class_stats(Fw, Y);
    const double r_norm2 = cs.R.squaredNorm();
    const double sigma_bar = Fw.squaredNorm() / (static_cast<double>(n) * d);

    if (opts.standardize && sigma_bar > 0.0) {
        // after z-normalization sigma_bar is 1 unless columns were degenerate
        const bool degenerate = (Fw.colwise().squaredNorm().array() == 0.0).any();
        if (!degenerate && std::abs(sigma_bar - 1.0) >= 1e-6)
            throw NumericalError("standardization failed to reach unit average variance");
    }

    if (r_norm2 == 0.0 || sigma_bar == 0.0) {
        // all class means coincide (Sigma_z = 0) or all-constant features;
        // the score is 0 for every alpha
        res.path = n < d ? HScorePath::woodbury : HScorePath::dense;
        if (opts.alpha) {
            res.alpha_used = *opts.alpha;
        } else if (sigma_bar == 0.0) {
            res.alpha_used = 1.0;  // no anisotropy information at all
        } else {
            res.alpha_used = ledoit_wolf_alpha(Fw);
        }
        return res;
    }

    if (n < d) {
        Matrix K = Matrix::Zero(n, n);
        K.selfadjointView<Eigen::Lower>().rankUpdate(Fw);
        K.triangularView<Eigen::Upper>() = K.adjoint();

        const double alpha = opts.alpha ? *opts.alpha : ledoit_wolf_alpha_from_gram(K, d);
        res.alpha_used = alpha;

        if (alpha == 0.0) {
            // W is singular; fall back to the pseudo-inverse H-score
            res.path = HScorePath::pseudoinverse;
            res.warning = "alpha=0 on the n_t < d branch; used pseudo-inverse";
            res.value = pinv_trace(sample_covariance(Fw), cs.R, n);
            return res;
        }
        res.path = HScorePath::woodbury;
        if (alpha == 1.0) return res;  // (1-alpha) factor annihilates the score

        Matrix W = (1.0 - alpha) * K;
        W.diagonal().array() += static_cast<double>(n) * alpha * sigma_bar;
        Eigen::LLT<Matrix> llt(W);
        if (llt.info() != Eigen::Success)
            throw NumericalError("Woodbury system is not positive definite");
        const Matrix G = Fw * cs.R;  // n x C
        const double quad = (G.array() * llt.solve(G).array()).sum();
        res.value = (1.0 - alpha) / (static_cast<double>(n) * alpha * sigma_bar) *
                    (r_norm2 - (1.0 - alpha) * quad);
    } else {
        const Matrix sigma = sample_covariance(Fw);
        const double alpha = opts.alpha ? *opts.alpha : ledoit_wolf_alpha(Fw);
        res.alpha_used = alpha;
        res.path = HScorePath::dense;
        if (alpha == 1.0) return res;

        const Matrix sigma_a = shrunk_covariance(sigma, alpha, sigma_bar);
        Eigen::LLT<Matrix> llt(sigma_a);
        if (llt.info() != Eigen::Success) {
            // alpha = 0 with singular sample covariance
            res.path = HScorePath::pseudoinverse;
            res.warning = "shrunk covariance not positive definite; used pseudo-inverse";
            res.value = (1.0 - alpha) * pinv_trace(sigma, cs.R, n);
            return res;
        }
        // tr(inv(Sigma_a) R R^T) = ||L^-1 R||_F^2
        Matrix LR = cs.R;
        llt.matrixL().solveInPlace(LR);
        res.value = (1.0 - alpha) / static_cast<double>(n) * LR.squaredNorm();
    }
    if (!std::isfinite(res.value)) throw NumericalError("shrunk H-score is not finite");
    if (res.value < 0.0 && res.value > -1e-9) res.value = 0.0;
    return res;
}

double hscore_population_reference(const SyntheticSpec& generator, int n_ref) {
    if (n_ref < 10 * generator.d)
        throw DegenerateInputError("population reference needs n_ref >= 10 d");
    SyntheticSpec spec = generator;
    spec.n = n_ref;
    auto [F, Y] = make_classification(spec);
    return hscore_original(F, Y).value;
}

}  // namespace xfer
