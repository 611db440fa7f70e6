// correlation statistics, the meta-evaluation harness, benchmark plumbing

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "xferscore/bench.hpp"
#include "xferscore/covariance.hpp"
#include "xferscore/correlation.hpp"
#include "xferscore/harness.hpp"
#include "xferscore/hscore.hpp"
#include "xferscore/rng.hpp"
#include "xferscore/synth.hpp"

using namespace xfer;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    return v;
}

// brute-force rank-then-pearson with midranks
double spearman_bruteforce(const std::vector<double>& x, const std::vector<double>& y) {
    auto rank = [](const std::vector<double>& v) {
        const std::size_t n = v.size();
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i) {
            double less = 0, equal = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (v[j] < v[i]) ++less;
                if (v[j] == v[i]) ++equal;
            }
            r[i] = less + 0.5 * (equal - 1) + 1.0;
        }
        return r;
    };
    const auto rx = rank(x), ry = rank(y);
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / rx.size();
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / ry.size();
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

std::vector<TaskRecord> synthetic_bundle(int n_tasks, std::uint64_t seed) {
    std::vector<TaskRecord> tasks;
    for (int t = 0; t < n_tasks; ++t) {
        SyntheticSpec spec;
        spec.n = 150;
        spec.d = 20;
        spec.d_informative = 10;
        spec.num_classes = 4;
        spec.class_sep = 0.3 + 1.7 * t / (n_tasks - 1.0);
        spec.seed = derive_seed(seed, "bundle.task", t);
        auto [f, y] = make_classification(spec);
        TaskRecord rec;
        rec.id = "task" + std::to_string(t);
        rec.features = std::move(f);
        rec.labels = std::move(y);
        rec.num_classes = 4;
        rec.accuracy = 0.5;
        tasks.push_back(std::move(rec));
    }
    return tasks;
}

}  // namespace

// ---------------------------------------------------------- correlation ----

TEST_CASE("relative accuracy") {
    CHECK(relative_accuracy(0.1, 10) == doctest::Approx(0.0));
    CHECK(relative_accuracy(1.0, 10) == doctest::Approx(9.0));
    CHECK(relative_accuracy(0.6, 5) == doctest::Approx(2.0));
    CHECK_THROWS_AS(relative_accuracy(0.5, 1), DegenerateInputError);
}

TEST_CASE("student-t tail probabilities match reference values") {
    struct Case {
        double t, nu, p;
    };
    const Case cases[] = {
        {0.5, 3, 0.651447964848151},    {1.0, 8, 0.34659350708733416},
        {2.5, 18, 0.02230802023202223}, {4.0, 48, 0.0002180124713615777},
        {0.1, 5, 0.9242301411546604},   {7.3, 10, 2.6012790226164558e-05},
    };
    for (const auto& c : cases)
        CHECK(stats::t_two_sided_p(c.t, c.nu) == doctest::Approx(c.p).epsilon(1e-9));
}

TEST_CASE("pearson matches a high-precision reference") {
    const std::vector<double> x = {0.00123,   0.298746, -0.274138, -0.890592, -0.454671,
                                   -0.991647, 0.060144, 1.340215,  -0.492207, -0.620475};
    const std::vector<double> y = {0.343873,  0.488818,  -0.14552, -1.363801, -0.384213,
                                   -0.306605, -0.892835, 0.751841, -1.724622, -1.399056};
    const Correlation c = pearson(x, y);
    CHECK(c.r == doctest::Approx(0.687664633889232).epsilon(1e-10));
    CHECK(std::abs(c.p - 0.02797057079379744) < 1e-6);

    const Correlation s = spearman(x, y);
    CHECK(s.r == doctest::Approx(0.6727272727272727).epsilon(1e-10));
    CHECK(std::abs(s.p - 0.0330412225454377) < 1e-6);
}

TEST_CASE("pearson exact limits") {
    const std::vector<double> x = random_vector(15, 3);
    std::vector<double> y(15), z(15);
    for (int i = 0; i < 15; ++i) {
        y[i] = 2.0 * x[i] + 1.0;
        z[i] = -x[i];
    }
    CHECK(pearson(x, y).r == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pearson(x, y).p < 1e-12);
    CHECK(pearson(x, z).r == doctest::Approx(-1.0).epsilon(1e-12));

    // affine maps with random slopes
    Rng rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        const double a = rng.uniform() * 4 + 0.1;
        const double b = rng.normal();
        std::vector<double> w(15);
        for (int i = 0; i < 15; ++i) w[i] = a * x[i] + b;
        CHECK(pearson(x, w).r == doctest::Approx(1.0).epsilon(1e-12));
    }

    const std::vector<double> constant(15, 2.5);
    CHECK_THROWS_AS(pearson(x, constant), DegenerateInputError);
    CHECK_THROWS_AS(pearson({1.0, 2.0}, {1.0, 2.0}), DegenerateInputError);
}

TEST_CASE("spearman handles monotone transforms and ties") {
    const std::vector<double> x = random_vector(25, 5);
    std::vector<double> cubed(25);
    for (int i = 0; i < 25; ++i) cubed[i] = x[i] * x[i] * x[i];
    CHECK(spearman(x, cubed).r == doctest::Approx(1.0).epsilon(1e-12));

    const std::vector<double> ranks = midranks({1.0, 2.0, 2.0, 3.0});
    CHECK(ranks == std::vector<double>{1.0, 2.5, 2.5, 4.0});

    // frozen reference with ties
    const std::vector<double> x2 = {1, 2, 2, 3, 5, 5, 5, 7};
    const std::vector<double> y2 = {2, 1, 4, 3, 6, 5, 8, 7};
    const Correlation s = spearman(x2, y2);
    CHECK(s.r == doctest::Approx(0.8470243628419076).epsilon(1e-10));
    CHECK(std::abs(s.p - 0.007954270632103367) < 1e-6);
}

TEST_CASE("spearman equals brute-force rank-then-pearson") {
    for (std::uint64_t s = 0; s < 100; ++s) {
        std::vector<double> x = random_vector(20, 100 + s);
        std::vector<double> y = random_vector(20, 200 + s);
        // introduce ties in a third of the trials
        if (s % 3 == 0)
            for (int i = 0; i < 20; i += 4) x[i] = x[(i + 4) % 20];
        CHECK(spearman(x, y).r ==
              doctest::Approx(spearman_bruteforce(x, y)).epsilon(1e-12));
    }
}

TEST_CASE("exact permutation p-value counts extreme rearrangements") {
    const std::vector<double> x = {1.0, 2.0, 3.0};
    const std::vector<double> y = {1.0, 2.0, 3.0};
    // of the 6 permutations, only the two monotone ones reach |r| = 1
    CHECK(permutation_pvalue(x, y, false) == doctest::Approx(2.0 / 6.0));
    CHECK(permutation_pvalue(x, y, true) == doctest::Approx(2.0 / 6.0));

    const std::vector<double> big = random_vector(11, 6);
    CHECK_THROWS_AS(permutation_pvalue(big, big, false), ValidationError);
}

// -------------------------------------------------------------- harness ----

TEST_CASE("harness recovers a planted monotone relationship") {
    auto tasks = synthetic_bundle(20, 77);
    // accuracy := affine(H_alpha) + small noise
    std::vector<double> h(tasks.size());
    for (std::size_t t = 0; t < tasks.size(); ++t)
        h[t] = hscore_shrunk(*tasks[t].features, *tasks[t].labels).value;
    const double lo = *std::min_element(h.begin(), h.end());
    const double hi = *std::max_element(h.begin(), h.end());
    Rng noise(78);
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        const double clean = 0.35 + 0.55 * (h[t] - lo) / (hi - lo);
        tasks[t].accuracy = std::clamp(clean + 0.05 * 0.55 * noise.normal(), 0.0, 1.0);
    }

    EvalOptions opts;
    opts.seed = 5;
    const auto report =
        evaluate_metrics(tasks, {"hscore_shrunk", "logme"}, EvalTarget::accuracy, opts);
    REQUIRE(report.rows.size() == 2);
    const auto& row = report.rows[0];  // sorted: hscore_shrunk before logme
    CHECK(row.metric_name == "hscore_shrunk");
    CHECK(row.error.empty());
    CHECK(row.n == 20);
    CHECK(row.r_pearson > 0.9);
    CHECK(row.p_pearson < 0.05);
    CHECK(row.significant);
}

TEST_CASE("harness reports degenerate metric columns") {
    auto tasks = synthetic_bundle(5, 79);
    for (auto& t : tasks) {
        // constant features -> hscore_shrunk = 0 on every task
        t.features = Matrix::Ones(40, 4);
        LabelVector y{IntVector(40), 2, {}};
        for (int i = 0; i < 40; ++i) y.labels(i) = i % 2;
        t.labels = y;
        t.accuracy = 0.4 + 0.1 * (t.id.back() - '0');
    }
    const auto report = evaluate_metrics(tasks, {"hscore_shrunk"}, EvalTarget::accuracy, {});
    REQUIRE(report.rows.size() == 1);
    CHECK_FALSE(report.rows[0].error.empty());
}

TEST_CASE("harness excludes failing tasks pairwise") {
    auto tasks = synthetic_bundle(6, 80);
    Rng rng(81);
    for (std::size_t t = 0; t < tasks.size(); ++t) tasks[t].accuracy = 0.3 + 0.1 * rng.uniform();
    // one task has a single class: hscore fails there, others survive
    tasks[2].labels = LabelVector{IntVector::Zero(150), 1, {}};
    const auto report = evaluate_metrics(tasks, {"hscore"}, EvalTarget::accuracy, {});
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].error.empty());
    CHECK(report.rows[0].n == 5);
}

TEST_CASE("harness is independent of task order and thread count") {
    auto tasks = synthetic_bundle(12, 83);
    Rng rng(84);
    for (auto& t : tasks) t.accuracy = 0.2 + 0.6 * rng.uniform();

    EvalOptions serial;
    serial.seed = 9;
    const auto base = evaluate_metrics(tasks, {"hscore_shrunk", "nleep"},
                                       EvalTarget::accuracy, serial);

    // metric seeds are keyed by task id, so a reordered bundle and a
    // multi-threaded run both reproduce the identical report
    auto shuffled = tasks;
    std::rotate(shuffled.begin(), shuffled.begin() + 5, shuffled.end());
    EvalOptions threaded = serial;
    threaded.threads = 4;
    const auto par = evaluate_metrics(shuffled, {"hscore_shrunk", "nleep"},
                                      EvalTarget::accuracy, threaded);
    REQUIRE(base.rows.size() == par.rows.size());
    for (std::size_t i = 0; i < base.rows.size(); ++i) {
        CHECK(base.rows[i].metric_name == par.rows[i].metric_name);
        CHECK(base.rows[i].r_pearson == par.rows[i].r_pearson);
        CHECK(base.rows[i].p_pearson == par.rows[i].p_pearson);
        CHECK(base.rows[i].r_spearman == par.rows[i].r_spearman);
    }

    auto duped = tasks;
    duped[3].id = duped[4].id;
    CHECK_THROWS_AS(
        evaluate_metrics(duped, {"hscore_shrunk"}, EvalTarget::accuracy, serial),
        ValidationError);
}

TEST_CASE("constant class count makes spearman agree across targets") {
    auto tasks = synthetic_bundle(10, 85);
    Rng rng(86);
    for (auto& t : tasks) t.accuracy = 0.3 + 0.5 * rng.uniform();

    EvalOptions opts;
    const auto acc = evaluate_metrics(tasks, {"hscore_shrunk"}, EvalTarget::accuracy, opts);
    const auto rel =
        evaluate_metrics(tasks, {"hscore_shrunk"}, EvalTarget::relative_accuracy, opts);
    CHECK(acc.rows[0].r_spearman ==
          doctest::Approx(rel.rows[0].r_spearman).epsilon(1e-12));
    // pearson agrees too: relative accuracy is affine in accuracy at fixed C
    CHECK(acc.rows[0].r_pearson == doctest::Approx(rel.rows[0].r_pearson).epsilon(1e-12));
}

TEST_CASE("imbalance warning fires for relative accuracy") {
    auto tasks = synthetic_bundle(3, 87);
    for (auto& t : tasks) t.accuracy = 0.5;
    // make task 0 imbalanced 4:1
    LabelVector y{IntVector(150), 2, {}};
    for (int i = 0; i < 150; ++i) y.labels(i) = i < 120 ? 0 : 1;
    tasks[0].labels = y;
    tasks[0].accuracy = 0.41;
    tasks[1].accuracy = 0.52;
    tasks[2].accuracy = 0.63;
    const auto report =
        evaluate_metrics(tasks, {"hscore_shrunk"}, EvalTarget::relative_accuracy, {});
    CHECK_FALSE(report.warnings.empty());
}

TEST_CASE("evaluation needs at least three tasks") {
    auto tasks = synthetic_bundle(2, 88);
    CHECK_THROWS_AS(evaluate_metrics(tasks, {"hscore"}, EvalTarget::accuracy, {}),
                    DegenerateInputError);
}

// ---------------------------------------------------------------- bench ----

TEST_CASE("timing harness produces sane rows") {
    BenchConfig config;
    config.grid = {{60, 30, 3}, {40, 80, 3}};
    config.repetitions = 5;
    config.warmup = 1;
    config.seed = 13;
    const TimingTable table = run_timing(config);
    REQUIRE(table.rows.size() == 6);
    REQUIRE(table.speedup.size() == 2);
    for (const auto& row : table.rows) {
        CHECK(row.ms_median >= 0.0);
        CHECK(std::isfinite(row.value));
    }
    for (double s : table.speedup) CHECK(s > 0.0);
    CHECK_THROWS_AS(run_timing(BenchConfig{}), ValidationError);

    // correctness piggyback: the timed shrunk score on the n < d cell equals
    // a dense evaluation of the same data
    SyntheticSpec spec;
    spec.n = 40;
    spec.d = 80;
    spec.d_informative = std::min(config.d_informative, 80);
    spec.num_classes = 3;
    spec.seed = derive_seed(config.seed, "bench.cell", 1);
    auto [f, y] = make_classification(spec);
    const HScoreResult fast = hscore_shrunk(f, y);
    REQUIRE(fast.path == HScorePath::woodbury);
    const Matrix fs = center_and_standardize(f);
    const Matrix sigma = sample_covariance(fs);
    const double sigma_bar = sigma.trace() / 80.0;
    const Matrix sigma_a = shrunk_covariance(sigma, fast.alpha_used, sigma_bar);
    const ClassStats cs = class_stats(fs, y);
    const Matrix sigma_z = cs.R * cs.R.transpose() / 40.0;
    const double dense = (1.0 - fast.alpha_used) * sigma_a.ldlt().solve(sigma_z).trace();
    CHECK(fast.value == doctest::Approx(dense).epsilon(1e-8));
    const auto& timed = table.rows[5];  // hscore_shrunk row of the second cell
    REQUIRE(timed.metric == "hscore_shrunk");
    CHECK(timed.value == doctest::Approx(dense).epsilon(1e-8));
}

TEST_CASE("fewer than five repetitions flags every row unstable") {
    BenchConfig config;
    config.grid = {{50, 20, 3}};
    config.repetitions = 3;
    config.warmup = 0;
    const TimingTable table = run_timing(config);
    for (const auto& row : table.rows) CHECK_FALSE(row.stable);
}

TEST_CASE("shrunk-score stability ratios approach 1 as n grows") {
    const auto rows = run_stability(desk_stability_preset());
    std::map<int, std::vector<double>> by_n;
    for (const auto& r : rows)
        if (r.metric == "hscore_shrunk[alpha*]") by_n[r.n].push_back(r.ratio);
    std::vector<double> gap;  // |median ratio - 1| over the increasing grid
    for (const auto& [n, ratios] : by_n) {
        std::vector<double> v = ratios;
        std::sort(v.begin(), v.end());
        gap.push_back(std::abs(v[v.size() / 2] - 1.0));
    }
    int inversions = 0;
    for (std::size_t i = 1; i < gap.size(); ++i)
        if (gap[i] > gap[i - 1] + 1e-12) ++inversions;
    CHECK(inversions <= 1);
}

TEST_CASE("stability harness emits normalized ratios") {
    StabilityConfig config;
    config.d = 24;
    config.d_informative = 12;
    config.C = 3;
    config.class_sep = 0.5;
    config.sample_sizes = {30, 60};
    config.n_reference = 400;
    config.seeds = {0, 1};
    const auto rows = run_stability(config);

    int alpha_one = 0, references = 0;
    for (const auto& r : rows) {
        if (r.metric == "reference") {
            ++references;
            CHECK(r.ratio == 1.0);
        }
        if (r.metric == "hscore_shrunk[alpha=1]") {
            ++alpha_one;
            CHECK(r.value == 0.0);
        }
        if (r.metric == "hscore_shrunk[alpha*]") {
            CHECK(r.alpha >= 0.0);
            CHECK(r.alpha <= 1.0);
            CHECK(std::isfinite(r.ratio));
        }
    }
    CHECK(references == 2);
    CHECK(alpha_one == 2 * 2);  // seeds x sample sizes

    StabilityConfig bad = config;
    bad.n_reference = 50;
    CHECK_THROWS_AS(run_stability(bad), ValidationError);
}
