#pragma once

#include <vector>

#include "xferscore/types.hpp"

namespace xfer {

struct Correlation {
    double r = 0.0;
    double p = 1.0;
};

/// Sample Pearson correlation with a two-sided p-value from the
/// t = r sqrt((n-2)/(1-r^2)) statistic on n-2 degrees of freedom.
Correlation pearson(const std::vector<double>& x, const std::vector<double>& y);

/// Pearson on midranks (average ranks for ties), same p-value approximation.
Correlation spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Exact two-sided permutation p-value for the given statistic (pearson or
/// spearman r), enumerating all n! permutations; limited to n <= 10.
double permutation_pvalue(const std::vector<double>& x, const std::vector<double>& y,
                          bool use_spearman);

/// Midranks of v: ties share the average of the ranks they occupy (1-based).
std::vector<double> midranks(const std::vector<double>& v);

/// (accuracy - 1/C) * C, the gain over the chance baseline.
double relative_accuracy(double accuracy, int num_classes);

namespace stats {

/// Regularized incomplete beta I_x(a, b) by continued fraction.
double incbeta(double a, double b, double x);

/// Two-sided p-value of a Student-t statistic with nu degrees of freedom.
double t_two_sided_p(double t, double nu);

}  // namespace stats

}  // namespace xfer
