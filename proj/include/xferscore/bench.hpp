#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "xferscore/types.hpp"

namespace xfer {

struct BenchCell {
    int n = 0, d = 0, C = 0;
};

struct BenchConfig {
    std::vector<BenchCell> grid;
    int repetitions = 7;
    int warmup = 2;
    std::uint64_t seed = 0;
    int d_informative = 100;
};

/// The seven (n_t, d, C) cells of the timing study.
std::vector<BenchCell> table5_grid();

struct TimingRow {
    BenchCell cell;
    std::string metric;  // logme | hscore | hscore_shrunk
    double ms_median = 0.0;
    double ms_iqr = 0.0;
    double cov = 0.0;  // coefficient of variation across repetitions
    bool stable = true;
    double value = 0.0;  // metric value from the last repetition
};

struct TimingTable {
    std::vector<TimingRow> rows;
    /// per-cell median ratio logme / hscore_shrunk, grid order
    std::vector<double> speedup;
};

/// Generates each cell once, then times {logme, hscore, hscore_shrunk} with
/// warmup runs discarded; medians over repetitions. A row with fewer than 5
/// repetitions or a coefficient of variation above 30% is flagged unstable.
TimingTable run_timing(const BenchConfig& config);

struct StabilityConfig {
    int d = 200;
    int d_informative = 100;
    int C = 10;
    double class_sep = 0.35;
    std::vector<int> sample_sizes = {100, 200, 400, 800, 1600};
    int n_reference = 100000;
    /// multiples of the per-run Ledoit-Wolf alpha, plus the fixed alpha=1 row
    std::vector<double> alpha_scales = {0.01, 0.1, 1.0, 10.0};
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
};

/// Desk-scale reproduction preset (runs in seconds).
StabilityConfig desk_stability_preset();

/// Full-paper-scale preset (d=1000, 10^6-sample reference; needs ~8 GB RAM).
StabilityConfig paper_stability_preset();

struct StabilityRow {
    std::uint64_t seed = 0;
    int n = 0;
    double alpha = std::numeric_limits<double>::quiet_NaN();  // NaN for the plain H-score
    std::string metric;  // hscore | hscore_shrunk[alpha*] | hscore_shrunk[...] | reference
    double value = 0.0;
    double ratio = 0.0;  // value / per-seed reference
};

std::vector<StabilityRow> run_stability(const StabilityConfig& config);

}  // namespace xfer
