#include "xferscore/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>

#include "xferscore/hscore.hpp"
#include "xferscore/logme.hpp"
#include "xferscore/rng.hpp"
#include "xferscore/synth.hpp"

namespace xfer {

namespace {

using Clock = std::chrono::steady_clock;

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * (v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

TimingRow time_metric(const BenchCell& cell, const std::string& name,
                      const std::function<double()>& fn, int warmup, int reps) {
    for (int i = 0; i < warmup; ++i) fn();
    std::vector<double> ms;
    double last = 0.0;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = Clock::now();
        last = fn();
        const auto t1 = Clock::now();
        ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    TimingRow row;
    row.cell = cell;
    row.metric = name;
    row.ms_median = median(ms);
    row.ms_iqr = quantile(ms, 0.75) - quantile(ms, 0.25);
    const double mean = std::accumulate(ms.begin(), ms.end(), 0.0) / ms.size();
    double var = 0.0;
    for (double m : ms) var += (m - mean) * (m - mean);
    row.cov = mean > 0.0 ? std::sqrt(var / ms.size()) / mean : 0.0;
    row.stable = reps >= 5 && row.cov <= 0.30;
    row.value = last;
    return row;
}

}  // namespace

std::vector<BenchCell> table5_grid() {
    return {{500, 500, 50},  {500, 1000, 50}, {500, 5000, 50}, {500, 1000, 10},
            {500, 1000, 100}, {100, 1000, 50}, {1000, 1000, 50}};
}

TimingTable run_timing(const BenchConfig& config) {
    if (config.grid.empty()) throw ValidationError("empty benchmark grid");
    if (config.repetitions < 3) throw ValidationError("need at least 3 repetitions");

    TimingTable table;
    for (std::size_t ci = 0; ci < config.grid.size(); ++ci) {
        const BenchCell& cell = config.grid[ci];
        SyntheticSpec spec;
        spec.n = cell.n;
        spec.d = cell.d;
        spec.d_informative = std::min(config.d_informative, cell.d);
        spec.num_classes = cell.C;
        spec.seed = derive_seed(config.seed, "bench.cell", ci);
        auto [F, Y] = make_classification(spec);

        const auto t_logme = time_metric(
            cell, "logme", [&] { return logme(F, Y).value; }, config.warmup, config.repetitions);
        const auto t_h = time_metric(
            cell, "hscore", [&] { return hscore_original(F, Y).value; }, config.warmup,
            config.repetitions);
        const auto t_ha = time_metric(
            cell, "hscore_shrunk", [&] { return hscore_shrunk(F, Y).value; }, config.warmup,
            config.repetitions);
        table.speedup.push_back(t_logme.ms_median / t_ha.ms_median);
        table.rows.push_back(t_logme);
        table.rows.push_back(t_h);
        table.rows.push_back(t_ha);
    }
    return table;
}

StabilityConfig desk_stability_preset() { return StabilityConfig{}; }

StabilityConfig paper_stability_preset() {
    StabilityConfig c;
    c.d = 1000;
    c.d_informative = 500;
    c.C = 10;
    c.class_sep = 1.0;
    c.sample_sizes = {500, 1000, 2000, 4000, 8000, 16000};
    c.n_reference = 1000000;
    return c;
}

std::vector<StabilityRow> run_stability(const StabilityConfig& config) {
    if (config.sample_sizes.empty()) throw ValidationError("no sample sizes");
    if (*std::max_element(config.sample_sizes.begin(), config.sample_sizes.end()) >=
        config.n_reference)
        throw ValidationError("sample sizes must stay below n_reference");
    if (config.seeds.empty()) throw ValidationError("no seeds");

    std::vector<StabilityRow> rows;
    SyntheticSpec base;
    base.d = config.d;
    base.d_informative = config.d_informative;
    base.num_classes = config.C;
    base.class_sep = config.class_sep;

    for (std::uint64_t seed : config.seeds) {
        SyntheticSpec ref_spec = base;
        ref_spec.seed = derive_seed(seed, "stability.reference");
        const double reference = hscore_population_reference(ref_spec, config.n_reference);
        rows.push_back({seed, config.n_reference, std::numeric_limits<double>::quiet_NaN(),
                        "reference", reference, 1.0});

        for (std::size_t ni = 0; ni < config.sample_sizes.size(); ++ni) {
            const int n = config.sample_sizes[ni];
            SyntheticSpec spec = base;
            spec.n = n;
            spec.seed = derive_seed(seed, "stability.sample", ni);
            auto [F, Y] = make_classification(spec);

            const double h = hscore_original(F, Y).value;
            rows.push_back({seed, n, std::numeric_limits<double>::quiet_NaN(), "hscore", h,
                            h / reference});

            const HScoreResult at_star = hscore_shrunk(F, Y);
            rows.push_back({seed, n, at_star.alpha_used, "hscore_shrunk[alpha*]", at_star.value,
                            at_star.value / reference});

            for (double scale : config.alpha_scales) {
                if (scale == 1.0) continue;  // alpha* itself already reported
                const double alpha = std::min(scale * at_star.alpha_used, 1.0);
                HScoreOptions opt;
                opt.alpha = alpha;
                const double v = hscore_shrunk(F, Y, opt).value;
                char label[64];
                std::snprintf(label, sizeof label, "hscore_shrunk[%galpha*]", scale);
                rows.push_back({seed, n, alpha, label, v, v / reference});
            }
            {
                HScoreOptions opt;
                opt.alpha = 1.0;
                const double v = hscore_shrunk(F, Y, opt).value;
                rows.push_back({seed, n, 1.0, "hscore_shrunk[alpha=1]", v, v / reference});
            }
        }
    }
    return rows;
}

}  // namespace xfer
