#include "xferscore/entropy_metrics.hpp"

#include <cmath>

namespace xfer {

EmpiricalJoint empirical_joint(const LabelVector& Y, const LabelVector& Z) {
    if (Y.labels.size() != Z.labels.size())
        throw DimensionError("label vectors differ in length");
    const Eigen::Index n = Y.labels.size();
    if (n == 0) throw DegenerateInputError("empty label vectors");

    EmpiricalJoint ej;
    ej.joint = Matrix::Zero(Z.num_classes, Y.num_classes);
    for (Eigen::Index i = 0; i < n; ++i) ej.joint(Z.labels(i), Y.labels(i)) += 1.0;
    ej.joint /= static_cast<double>(n);
    ej.marginal_z = ej.joint.rowwise().sum();
    return ej;
}

double label_entropy(const LabelVector& Y) {
    const Eigen::Index n = Y.labels.size();
    if (n == 0) throw DegenerateInputError("empty label vector");
    Vector counts = Vector::Zero(Y.num_classes);
    for (Eigen::Index i = 0; i < n; ++i) counts(Y.labels(i)) += 1.0;
    double h = 0.0;
    for (Eigen::Index c = 0; c < counts.size(); ++c) {
        if (counts(c) == 0.0) continue;
        const double p = counts(c) / static_cast<double>(n);
        h -= p * std::log(p);
    }
    return h;
}

double nce(const LabelVector& Y, const LabelVector& Z) {
    const EmpiricalJoint ej = empirical_joint(Y, Z);
    // sum_{y,z} p(y,z) log p(y|z); every term is <= 0
    double v = 0.0;
    for (Eigen::Index z = 0; z < ej.joint.rows(); ++z) {
        if (ej.marginal_z(z) == 0.0) continue;
        for (Eigen::Index y = 0; y < ej.joint.cols(); ++y) {
            const double pyz = ej.joint(z, y);
            if (pyz == 0.0) continue;
            v += pyz * std::log(pyz / ej.marginal_z(z));
        }
    }
    return v;
}

LabelVector argmax_labels(const Eigen::Ref<const Matrix>& theta) {
    const Eigen::Index n = theta.rows(), cs = theta.cols();
    if (n == 0 || cs == 0) throw DegenerateInputError("empty soft-prediction matrix");
    IntVector z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        int best = 0;
        for (Eigen::Index j = 1; j < cs; ++j)
            if (theta(i, j) > theta(i, best)) best = static_cast<int>(j);
        z(i) = best;
    }
    return LabelVector{std::move(z), static_cast<int>(cs), {}};
}

double leep(const LabelVector& Y, const Eigen::Ref<const Matrix>& theta,
            std::vector<int>* dropped) {
    const Eigen::Index n = theta.rows(), cs = theta.cols();
    if (Y.labels.size() != n) throw DimensionError("labels/theta row count mismatch");
    if (n == 0) throw DegenerateInputError("empty inputs");

    const Vector mass = theta.colwise().sum();  // total source-class mass
    if (dropped) dropped->clear();

    // empirical predictor P(y|z) = sum_i theta_i[z] 1[y_i=y] / mass[z]
    Matrix pred = Matrix::Zero(cs, Y.num_classes);
    for (Eigen::Index i = 0; i < n; ++i) pred.col(Y.labels(i)) += theta.row(i).transpose();
    for (Eigen::Index z = 0; z < cs; ++z) {
        if (mass(z) > 0.0) {
            pred.row(z) /= mass(z);
        } else {
            pred.row(z).setZero();  // column contributes nothing below
            if (dropped) dropped->push_back(static_cast<int>(z));
        }
    }

    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double expectation = theta.row(i).dot(pred.col(Y.labels(i)).transpose());
        total += std::log(std::max(expectation, 1e-12));
    }
    return total / static_cast<double>(n);
}

double normalize_metric(double raw, double label_entropy_y) {
    if (label_entropy_y <= 0.0)
        throw DegenerateInputError("metric normalization needs H(Y) > 0");
    return 1.0 + raw / label_entropy_y;
}

}  // namespace xfer
