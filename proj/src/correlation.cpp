#include "xferscore/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace xfer {

namespace stats {

namespace {

// Lentz's continued fraction for the incomplete beta, as in the classic
// numerical-recipes formulation.
double incbeta_cf(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-15;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

}  // namespace

double incbeta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * incbeta_cf(a, b, x) / a;
    return 1.0 - front * incbeta_cf(b, a, 1.0 - x) / b;
}

double t_two_sided_p(double t, double nu) {
    if (!std::isfinite(t)) return 0.0;
    // 2 * sf(|t|) = I_{nu/(nu+t^2)}(nu/2, 1/2)
    return incbeta(nu / 2.0, 0.5, nu / (nu + t * t));
}

}  // namespace stats

namespace {

void check_pair(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw DimensionError("correlation inputs differ in length");
    if (x.size() < 3) throw DegenerateInputError("correlation needs at least 3 points");
}

double pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw DegenerateInputError("correlation undefined for a constant vector");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

Correlation with_t_pvalue(double r, std::size_t n) {
    Correlation c;
    c.r = r;
    const double nu = static_cast<double>(n) - 2.0;
    const double denom = 1.0 - r * r;
    const double t = denom <= 0.0 ? std::numeric_limits<double>::infinity()
                                  : r * std::sqrt(nu / denom);
    c.p = stats::t_two_sided_p(t, nu);
    return c;
}

}  // namespace

std::vector<double> midranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

Correlation pearson(const std::vector<double>& x, const std::vector<double>& y) {
    check_pair(x, y);
    return with_t_pvalue(pearson_r(x, y), x.size());
}

Correlation spearman(const std::vector<double>& x, const std::vector<double>& y) {
    check_pair(x, y);
    return with_t_pvalue(pearson_r(midranks(x), midranks(y)), x.size());
}

double permutation_pvalue(const std::vector<double>& x, const std::vector<double>& y,
                          bool use_spearman) {
    check_pair(x, y);
    if (x.size() > 10)
        throw ValidationError("exact permutation p-value supports n <= 10 only");
    const std::vector<double> xr = use_spearman ? midranks(x) : x;
    const std::vector<double> yr = use_spearman ? midranks(y) : y;
    const double observed = std::abs(pearson_r(xr, yr));

    std::vector<double> perm = yr;
    std::sort(perm.begin(), perm.end());
    std::size_t hits = 0, total = 0;
    do {
        ++total;
        if (std::abs(pearson_r(xr, perm)) >= observed - 1e-12) ++hits;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(hits) / static_cast<double>(total);
}

double relative_accuracy(double accuracy, int num_classes) {
    if (num_classes < 2) throw DegenerateInputError("relative accuracy needs C >= 2");
    if (accuracy < 0.0 || accuracy > 1.0) throw ValidationError("accuracy outside [0,1]");
    return (accuracy - 1.0 / num_classes) * num_classes;
}

}  // namespace xfer
