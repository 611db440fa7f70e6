#include "xferscore/gmm.hpp"

#include <cmath>
#include <limits>

#include "xferscore/rng.hpp"

namespace xfer {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// log N(x_i | mu_k, diag(var_k)) for all (i, k)
Matrix log_densities(const Eigen::Ref<const Matrix>& X, const GmmModel& m) {
    const Eigen::Index n = X.rows(), q = X.cols(), K = m.means.rows();
    Matrix logp(n, K);
    for (Eigen::Index k = 0; k < K; ++k) {
        const double log_norm =
            -0.5 * (static_cast<double>(q) * kLog2Pi + m.variances.row(k).array().log().sum());
        const Matrix dev2 = (X.rowwise() - m.means.row(k)).array().square();
        const Vector inv_var = m.variances.row(k).transpose().cwiseInverse();
        logp.col(k) = (-0.5 * (dev2 * inv_var)).array() + log_norm;
    }
    return logp;
}

// responsibilities from weighted log densities; returns total log-likelihood
double normalize_posteriors(const GmmModel& m, Matrix& logp) {
    const Eigen::Index n = logp.rows(), K = logp.cols();
    for (Eigen::Index k = 0; k < K; ++k)
        logp.col(k).array() += std::log(std::max(m.weights(k), 1e-300));
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mx = logp.row(i).maxCoeff();
        const double lse = mx + std::log((logp.row(i).array() - mx).exp().sum());
        ll += lse;
        logp.row(i) = (logp.row(i).array() - lse).exp();
    }
    return ll;
}

// k-means++ seeding: first center uniform, then proportional to squared
// distance from the chosen set.
Matrix seed_centers(const Eigen::Ref<const Matrix>& X, int K, Rng& rng) {
    const Eigen::Index n = X.rows();
    Matrix centers(K, X.cols());
    centers.row(0) = X.row(rng.bounded(static_cast<std::uint64_t>(n)));
    Vector d2 = (X.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int k = 1; k < K; ++k) {
        const double total = d2.sum();
        Eigen::Index pick = 0;
        if (total > 0.0) {
            double target = rng.uniform() * total, acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += d2(i);
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.bounded(static_cast<std::uint64_t>(n));
        }
        centers.row(k) = X.row(pick);
        d2 = d2.cwiseMin((X.rowwise() - centers.row(k)).rowwise().squaredNorm());
    }
    return centers;
}

}  // namespace

GmmModel fit_gmm_diagonal(const Eigen::Ref<const Matrix>& X, int K, std::uint64_t seed,
                          const GmmOptions& opts) {
    const Eigen::Index n = X.rows(), q = X.cols();
    if (K < 1) throw DegenerateInputError("GMM needs K >= 1");
    if (n < K) throw DegenerateInputError("GMM needs n >= K");
    if (!X.allFinite()) throw ValidationError("GMM input contains NaN/Inf");

    const Vector col_var =
        (X.rowwise() - X.colwise().mean()).colwise().squaredNorm() / static_cast<double>(n);
    const double floor_v = std::max(opts.variance_floor_scale * col_var.mean(), 1e-300);

    GmmModel m;
    Rng rng(derive_seed(seed, "gmm.init"));
    m.means = seed_centers(X, K, rng);
    m.weights = Vector::Constant(K, 1.0 / K);
    m.variances = col_var.transpose().replicate(K, 1).cwiseMax(floor_v);

    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < opts.max_iter; ++it) {
        Matrix resp = log_densities(X, m);
        const double ll = normalize_posteriors(m, resp);
        m.loglik = ll;
        m.loglik_trace.push_back(ll);
        m.iterations = it + 1;

        // M-step
        const Vector nk = resp.colwise().sum();
        for (Eigen::Index k = 0; k < K; ++k) {
            if (nk(k) < 1e-10) continue;  // starved component keeps its parameters
            m.weights(k) = nk(k) / static_cast<double>(n);
            m.means.row(k) = (resp.col(k).transpose() * X) / nk(k);
            const Matrix dev2 = (X.rowwise() - m.means.row(k)).array().square();
            m.variances.row(k) = (resp.col(k).transpose() * dev2) / nk(k);
        }
        m.variances = m.variances.cwiseMax(floor_v);
        m.weights /= m.weights.sum();

        if (std::isfinite(prev_ll) &&
            std::abs(ll - prev_ll) <= opts.tol * std::max(1.0, std::abs(ll))) {
            m.converged = true;
            break;
        }
        prev_ll = ll;
    }
    return m;
}

Matrix gmm_responsibilities(const GmmModel& model, const Eigen::Ref<const Matrix>& X) {
    Matrix resp = log_densities(X, model);
    normalize_posteriors(model, resp);
    return resp;
}

}  // namespace xfer
