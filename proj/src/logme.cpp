#include "xferscore/logme.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace xfer {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double evidence(double alpha, double beta, double n, const Vector& s, double m2, double e) {
    // log p(y | F, alpha, beta); the flat directions (s_j = 0) cancel exactly
    double penalty = 0.0;
    for (Eigen::Index j = 0; j < s.size(); ++j)
        penalty += std::log((alpha + beta * s(j)) / alpha);
    return 0.5 * (n * std::log(beta) - n * kLog2Pi - beta * e - alpha * m2 - penalty);
}

}  // namespace

LogMEResult logme(const Eigen::Ref<const Matrix>& F, const LabelVector& Y,
                  const LogMEOptions& opts) {
    const Eigen::Index n = F.rows();
    if (Y.num_classes < 2) throw DegenerateInputError("LogME needs at least 2 classes");
    if (n < 2) throw DegenerateInputError("LogME needs at least 2 samples");
    if (Y.labels.size() != n) throw DimensionError("labels/features row count mismatch");
    if (!F.allFinite()) throw ValidationError("features contain NaN/Inf");

    Eigen::BDCSVD<Matrix> svd(F, Eigen::ComputeThinU);
    if (svd.info() != Eigen::Success) throw NumericalError("SVD failed");
    const Vector s = svd.singularValues().array().square();  // eigenvalues of F^T F
    const Matrix& U = svd.matrixU();
    const double nn = static_cast<double>(n);

    auto clamp = [](double x) { return std::clamp(x, 1e-12, 1e12); };

    LogMEResult res;
    double total = 0.0;
    for (int c = 0; c < Y.num_classes; ++c) {
        Vector y(n);
        for (Eigen::Index i = 0; i < n; ++i) y(i) = Y.labels(i) == c ? 1.0 : 0.0;
        const double y2 = y.squaredNorm();
        const Vector z = U.transpose() * y;
        const Vector z2 = z.array().square();

        double alpha = 1.0, beta = 1.0, m2 = 0.0, e = y2;
        std::vector<double> trace;
        int it = 0;
        bool cls_converged = false;
        for (; it < opts.max_iter; ++it) {
            const Vector t = (alpha + beta * s.array()).matrix();
            const double gamma = (beta * s.array() / t.array()).sum();
            m2 = (beta * beta * s.array() * z2.array() / t.array().square()).sum();
            e = y2 - z2.sum() + (alpha * alpha * z2.array() / t.array().square()).sum();
            e = std::max(e, 1e-300);

            trace.push_back(evidence(alpha, beta, nn, s, m2, e));

            const double alpha_new = clamp(m2 > 0.0 ? gamma / m2 : 1e12);
            const double beta_new = clamp((nn - gamma) / e);
            const double delta = std::max(std::abs(alpha_new - alpha) / alpha,
                                          std::abs(beta_new - beta) / beta);
            alpha = alpha_new;
            beta = beta_new;
            if (delta < opts.tol) {
                cls_converged = true;
                ++it;
                break;
            }
        }
        {
            const Vector t = (alpha + beta * s.array()).matrix();
            m2 = (beta * beta * s.array() * z2.array() / t.array().square()).sum();
            e = std::max(y2 - z2.sum() + (alpha * alpha * z2.array() / t.array().square()).sum(),
                         1e-300);
            trace.push_back(evidence(alpha, beta, nn, s, m2, e));
        }
        total += trace.back() / nn;
        res.iterations_per_class.push_back(it);
        res.converged = res.converged && cls_converged;
        res.evidence_trace.push_back(std::move(trace));
    }
    res.value = total / Y.num_classes;
    if (!std::isfinite(res.value)) throw NumericalError("LogME evidence is not finite");
    return res;
}

}  // namespace xfer
