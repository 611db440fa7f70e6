#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "xferscore/types.hpp"

namespace xfer {

/// Per-class first-moment statistics of a (centered) feature matrix.
/// R packs the class means column-wise as sqrt(n_c) * mean_c, so that
/// (1/n_t) R R^T is the sample covariance of the class-conditional means.
struct ClassStats {
    Vector class_counts;  // length C
    Matrix class_means;   // C x d
    Matrix R;             // d x C, column c = sqrt(n_c) * mean_c
    Vector global_mean;   // length d (of the input as given)
};

/// Sample covariance with the population convention: (1/n_t) F^T F.
/// Expects F centered; symmetric PSD by construction.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> sample_covariance(const Eigen::MatrixBase<Derived>& F) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = F.rows(), d = F.cols();
    DenseMatrix<Scalar> sigma = DenseMatrix<Scalar>::Zero(d, d);
    sigma.template selfadjointView<Eigen::Lower>().rankUpdate(F.derived().adjoint(),
                                                              Scalar(1) / Scalar(n));
    sigma.template triangularView<Eigen::Upper>() = sigma.adjoint();
    return sigma;
}

/// Centers columns and scales each to unit population standard deviation.
/// Zero-variance columns (std < 1e-12) are centered and left unscaled.
inline Matrix center_and_standardize(const Eigen::Ref<const Matrix>& F) {
    const Eigen::Index n = F.rows();
    if (n < 2) throw DegenerateInputError("center_and_standardize: need at least 2 rows");
    Matrix out = F.rowwise() - F.colwise().mean();
    Vector std = (out.colwise().squaredNorm() / static_cast<double>(n)).cwiseSqrt();
    for (Eigen::Index j = 0; j < out.cols(); ++j)
        if (std(j) >= 1e-12) out.col(j) /= std(j);
    return out;
}

inline Matrix center_columns(const Eigen::Ref<const Matrix>& F) {
    return F.rowwise() - F.colwise().mean();
}

namespace detail {

inline void check_labels(const Eigen::Ref<const Matrix>& F, const LabelVector& Y) {
    if (Y.labels.size() != F.rows())
        throw DimensionError("labels/features row count mismatch");
    if (Y.num_classes < 1) throw ValidationError("num_classes must be >= 1");
    if ((Y.labels.array() < 0).any() || (Y.labels.array() >= Y.num_classes).any())
        throw ValidationError("label outside {0..C-1}");
}

}  // namespace detail

inline ClassStats class_stats(const Eigen::Ref<const Matrix>& F, const LabelVector& Y) {
    detail::check_labels(F, Y);
    const Eigen::Index n = F.rows(), d = F.cols();
    const int C = Y.num_classes;
    ClassStats cs;
    cs.class_counts = Vector::Zero(C);
    cs.class_means = Matrix::Zero(C, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int c = Y.labels(i);
        cs.class_counts(c) += 1.0;
        cs.class_means.row(c) += F.row(i);
    }
    for (int c = 0; c < C; ++c) {
        if (cs.class_counts(c) == 0.0)
            throw DegenerateInputError("class " + std::to_string(c) + " has no samples");
        cs.class_means.row(c) /= cs.class_counts(c);
    }
    cs.R = cs.class_means.transpose() * cs.class_counts.cwiseSqrt().asDiagonal();
    cs.global_mean = F.colwise().mean();
    return cs;
}

/// Ledoit-Wolf optimal shrinkage intensity, clipped to [0, 1]. Expects F
/// centered. Uses the streaming identity
///   sum_i ||f_i f_i^T - Sigma||^2 = (1/d) * [ sum_i (f_i.f_i)^2 - n tr(Sigma^2) ]
/// so the rank-one outer products are never materialized; matrix norms follow
/// the tr(A A^T)/d convention.
template <typename Derived>
double ledoit_wolf_alpha(const Eigen::MatrixBase<Derived>& F) {
    const Eigen::Index n = F.rows(), d = F.cols();
    if (n < 2) throw DegenerateInputError("ledoit_wolf_alpha: need at least 2 rows");
    const Matrix sigma = sample_covariance(F.derived());
    const double tr_sigma2 = sigma.squaredNorm();
    const double sigma_bar = sigma.trace() / static_cast<double>(d);
    const double sum_sq = F.derived().rowwise().squaredNorm().array().square().sum();
    const double num_sum = std::max(0.0, sum_sq - static_cast<double>(n) * tr_sigma2);
    const double num = num_sum / static_cast<double>(d) / (static_cast<double>(n) * n);
    const double den =
        (tr_sigma2 - static_cast<double>(d) * sigma_bar * sigma_bar) / static_cast<double>(d);
    if (den < 1e-18) return 1.0;
    return std::clamp(num / den, 0.0, 1.0);
}

/// Same estimator computed from the Gram matrix K = F F^T (n x n) without
/// forming the d x d covariance; exact up to round-off. Used on the n_t < d
/// fast path where K is available anyway.
inline double ledoit_wolf_alpha_from_gram(const Eigen::Ref<const Matrix>& K, Eigen::Index d) {
    const Eigen::Index n = K.rows();
    if (n < 2) throw DegenerateInputError("ledoit_wolf_alpha: need at least 2 rows");
    const double nn = static_cast<double>(n);
    const double tr_sigma2 = K.squaredNorm() / (nn * nn);
    const double sigma_bar = K.trace() / (nn * static_cast<double>(d));
    const double sum_sq = K.diagonal().array().square().sum();
    const double num_sum = std::max(0.0, sum_sq - nn * tr_sigma2);
    const double num = num_sum / static_cast<double>(d) / (nn * nn);
    const double den =
        (tr_sigma2 - static_cast<double>(d) * sigma_bar * sigma_bar) / static_cast<double>(d);
    if (den < 1e-18) return 1.0;
    return std::clamp(num / den, 0.0, 1.0);
}

/// Shrunk covariance model: sample covariance, shrinkage intensity, average
/// variance and the class statistics that the H-score couples to it.
struct ShrunkCovarianceModel {
    Matrix sigma_f;
    double alpha = 0.0;
    double sigma_bar = 0.0;
    ClassStats stats;
};

inline ShrunkCovarianceModel fit_shrunk_covariance(const Eigen::Ref<const Matrix>& F,
                                                   const LabelVector& Y,
                                                   std::optional<double> alpha = std::nullopt) {
    ShrunkCovarianceModel m;
    m.sigma_f = sample_covariance(F);
    m.sigma_bar = m.sigma_f.trace() / static_cast<double>(F.cols());
    m.alpha = alpha ? *alpha : ledoit_wolf_alpha(F);
    if (m.alpha < 0.0 || m.alpha > 1.0) throw ValidationError("alpha outside [0,1]");
    m.stats = class_stats(F, Y);
    return m;
}

/// (1 - alpha) Sigma_f + alpha sigma_bar I_d
template <typename Derived>
DenseMatrix<typename Derived::Scalar> shrunk_covariance(const Eigen::MatrixBase<Derived>& sigma_f,
                                                        double alpha, double sigma_bar) {
    using Scalar = typename Derived::Scalar;
    DenseMatrix<Scalar> out = (Scalar(1) - Scalar(alpha)) * sigma_f.derived();
    out.diagonal().array() += Scalar(alpha) * Scalar(sigma_bar);
    return out;
}

inline Matrix shrunk_covariance(const ShrunkCovarianceModel& m) {
    return shrunk_covariance(m.sigma_f, m.alpha, m.sigma_bar);
}

/// Per-class covariances about the class means, each with the 1/n_c
/// convention. With weights n_c/n_t the law of total covariance
///   Sigma_f = sum_c (n_c/n_t) Sigma_{f|c} + Sigma_z
/// holds exactly for centered F.
inline std::vector<Matrix> class_conditional_covariances(const Eigen::Ref<const Matrix>& F,
                                                         const LabelVector& Y) {
    detail::check_labels(F, Y);
    const int C = Y.num_classes;
    const Eigen::Index d = F.cols();
    const ClassStats cs = class_stats(F, Y);
    std::vector<Matrix> covs(C, Matrix::Zero(d, d));
    for (Eigen::Index i = 0; i < F.rows(); ++i) {
        const int c = Y.labels(i);
        const Vector dev = F.row(i).transpose() - cs.class_means.row(c).transpose();
        covs[c].selfadjointView<Eigen::Lower>().rankUpdate(dev);
    }
    for (int c = 0; c < C; ++c) {
        covs[c] /= cs.class_counts(c);
        covs[c].triangularView<Eigen::Upper>() = covs[c].adjoint();
    }
    return covs;
}

}  // namespace xfer
