#include "xferscore/synth.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <vector>

#include "xferscore/rng.hpp"

namespace xfer {

namespace {

// Distinct vertices of {-1,+1}^d_inf, sampled by rejection.
std::vector<std::vector<double>> hypercube_vertices(int count, int d_inf, Rng& rng) {
    if (d_inf < 63 && count > (1LL << d_inf))
        throw SpecError("more classes than hypercube vertices (2^d_informative)");
    std::set<std::vector<signed char>> seen;
    std::vector<std::vector<double>> verts;
    while (static_cast<int>(verts.size()) < count) {
        std::vector<signed char> bits(d_inf);
        for (auto& b : bits) b = rng.bounded(2) ? 1 : -1;
        if (!seen.insert(bits).second) continue;
        verts.emplace_back(bits.begin(), bits.end());
    }
    return verts;
}

}  // namespace

std::pair<FeatureMatrix, LabelVector> make_classification(const SyntheticSpec& spec) {
    if (spec.n < 1 || spec.d < 1) throw SpecError("n and d must be >= 1");
    if (spec.d_informative < 0 || spec.d_informative > spec.d)
        throw SpecError("d_informative must lie in [0, d]");
    if (spec.num_classes < 2) throw SpecError("need at least 2 classes");
    if (spec.n < spec.num_classes) throw SpecError("need at least one sample per class");

    const int n = spec.n, d = spec.d, di = spec.d_informative, C = spec.num_classes;

    Rng vert_rng(derive_seed(spec.seed, "synth.vertices"));
    const auto verts = hypercube_vertices(C, di, vert_rng);

    std::vector<int> counts(C, n / C);
    for (int c = 0; c < n % C; ++c) counts[c] += 1;

    Matrix F(n, d);
    IntVector labels(n);
    Rng noise_rng(derive_seed(spec.seed, "synth.noise"));
    Rng mix_rng(derive_seed(spec.seed, "synth.mixing"));

    int row = 0;
    for (int c = 0; c < C; ++c) {
        const int k = counts[c];
        auto block = F.middleRows(row, k);
        noise_rng.fill_normal(block);
        if (di > 0) {
            // per-cluster random linear map over the informative block
            Matrix A(di, di);
            for (Eigen::Index jj = 0; jj < A.cols(); ++jj)
                for (Eigen::Index ii = 0; ii < A.rows(); ++ii)
                    A(ii, jj) = 2.0 * mix_rng.uniform() - 1.0;
            block.leftCols(di) = (block.leftCols(di) * A).eval();
            for (int j = 0; j < di; ++j)
                block.col(j).array() += spec.class_sep * verts[c][j];
        }
        labels.segment(row, k).setConstant(c);
        row += k;
    }

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng shuffle_rng(derive_seed(spec.seed, "synth.shuffle"));
    shuffle_rng.shuffle(perm);

    Matrix Fs(n, d);
    IntVector ys(n);
    for (int i = 0; i < n; ++i) {
        Fs.row(i) = F.row(perm[i]);
        ys(i) = labels(perm[i]);
    }
    return {std::move(Fs), LabelVector{std::move(ys), C, {}}};
}

std::pair<FeatureMatrix, LabelVector> subsample_classes(const Eigen::Ref<const Matrix>& F,
                                                        const LabelVector& Y, int classes_to_keep,
                                                        int per_class, std::uint64_t seed) {
    const int C = Y.num_classes;
    if (classes_to_keep < 1 || classes_to_keep > C)
        throw InsufficientDataError("cannot keep " + std::to_string(classes_to_keep) +
                                    " of " + std::to_string(C) + " classes");

    Rng rng(derive_seed(seed, "subsample.classes"));
    std::vector<int> all(C);
    std::iota(all.begin(), all.end(), 0);
    rng.shuffle(all);
    std::vector<int> kept(all.begin(), all.begin() + classes_to_keep);
    std::sort(kept.begin(), kept.end());

    std::vector<int> new_id(C, -1);
    for (int k = 0; k < classes_to_keep; ++k) new_id[kept[k]] = k;

    // per-class row indices, in original order
    std::vector<std::vector<int>> rows(C);
    for (Eigen::Index i = 0; i < Y.labels.size(); ++i) rows[Y.labels(i)].push_back(i);

    Rng pick_rng(derive_seed(seed, "subsample.rows"));
    std::vector<int> selected;
    for (int c : kept) {
        if (static_cast<int>(rows[c].size()) < per_class)
            throw InsufficientDataError("class " + std::to_string(c) + " has only " +
                                        std::to_string(rows[c].size()) + " samples, need " +
                                        std::to_string(per_class));
        std::vector<int> idx = rows[c];
        pick_rng.shuffle(idx);
        selected.insert(selected.end(), idx.begin(), idx.begin() + per_class);
    }
    std::sort(selected.begin(), selected.end());

    Matrix Fs(selected.size(), F.cols());
    IntVector ys(selected.size());
    for (std::size_t i = 0; i < selected.size(); ++i) {
        Fs.row(i) = F.row(selected[i]);
        ys(i) = new_id[Y.labels(selected[i])];
    }
    return {std::move(Fs), LabelVector{std::move(ys), classes_to_keep, {}}};
}

std::pair<FeatureMatrix, LabelVector> make_imbalanced_pair(const Eigen::Ref<const Matrix>& F,
                                                           const LabelVector& Y, int n_min,
                                                           int n_max, int ratio,
                                                           std::uint64_t seed) {
    if (n_min < 1 || n_max < n_min) throw SpecError("invalid minority range");
    if (ratio < 1) throw SpecError("ratio must be >= 1");
    const int C = Y.num_classes;
    if (C < 2) throw InsufficientDataError("need at least 2 classes");

    Rng rng(derive_seed(seed, "imbalance"));
    const int n1 = n_min + static_cast<int>(rng.bounded(n_max - n_min + 1));
    const int n2 = ratio * n1;

    std::vector<std::vector<int>> rows(C);
    for (Eigen::Index i = 0; i < Y.labels.size(); ++i) rows[Y.labels(i)].push_back(i);

    std::vector<int> order(C);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    int c1 = -1, c2 = -1;
    for (int a : order) {
        if (static_cast<int>(rows[a].size()) < n1) continue;
        for (int b : order) {
            if (b == a || static_cast<int>(rows[b].size()) < n2) continue;
            c1 = a;
            c2 = b;
            break;
        }
        if (c1 >= 0) break;
    }
    if (c1 < 0)
        throw InsufficientDataError("no class pair supports " + std::to_string(n1) + " + " +
                                    std::to_string(n2) + " samples");

    auto take = [&](int c, int k) {
        std::vector<int> idx = rows[c];
        rng.shuffle(idx);
        idx.resize(k);
        std::sort(idx.begin(), idx.end());
        return idx;
    };
    const auto i1 = take(c1, n1);
    const auto i2 = take(c2, n2);

    Matrix Fs(n1 + n2, F.cols());
    IntVector ys(n1 + n2);
    int r = 0;
    for (int i : i1) {
        Fs.row(r) = F.row(i);
        ys(r++) = 0;
    }
    for (int i : i2) {
        Fs.row(r) = F.row(i);
        ys(r++) = 1;
    }
    return {std::move(Fs), LabelVector{std::move(ys), 2, {}}};
}

}  // namespace xfer
