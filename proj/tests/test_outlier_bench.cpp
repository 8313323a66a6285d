#include "fuse/outlier_bench.hpp"

#include <gtest/gtest.h>

#include "fuse/rng.hpp"

using fuse::Matrix;

namespace {

// Tight Gaussian cluster plus a ring of far-out anomalies.
fuse::LabeledData planted_outliers(std::size_t n_in, std::size_t n_out, std::uint64_t seed) {
    fuse::Rng rng(seed);
    fuse::LabeledData data;
    data.features = Matrix(n_in + n_out, 2);
    data.labels.assign(n_in + n_out, 0);
    for (std::size_t i = 0; i < n_in; ++i) {
        data.features(i, 0) = rng.gaussian(0.5);
        data.features(i, 1) = rng.gaussian(0.5);
    }
    for (std::size_t i = 0; i < n_out; ++i) {
        const double angle = rng.uniform(0.0, 6.283185307179586);
        const double radius = rng.uniform(4.0, 6.0);
        data.features(n_in + i, 0) = radius * std::cos(angle);
        data.features(n_in + i, 1) = radius * std::sin(angle);
        data.labels[n_in + i] = 1;
    }
    return data;
}

fuse::OutlierBenchOptions small_options(bool tuned) {
    fuse::OutlierBenchOptions opt;
    opt.tuned = tuned;
    opt.hidden = 8;
    opt.epochs = 30;
    opt.seed = 1;
    return opt;
}

}  // namespace

TEST(OutlierBench, FixedModeSeparatesPlantedOutliers) {
    const auto data = planted_outliers(100, 20, 3);
    const auto result = fuse::run_outlier_bench(data.features, data.labels,
                                                small_options(false));
    EXPECT_EQ(result.global.folds, 5);
    EXPECT_EQ(result.local.folds, 5);
    EXPECT_EQ(result.fused.folds, 0);  // fixed mode has no tuned variant
    EXPECT_GT(result.global.mean_roc, 0.8);
    EXPECT_GT(result.local.mean_roc, 0.8);
    // fixed mode pins the config
    for (const auto& sel : result.local.per_fold) {
        EXPECT_EQ(sel.metric, fuse::Metric::L2);
        EXPECT_EQ(sel.eta, 1.0);
        EXPECT_EQ(sel.t, 1.0);
    }
    for (const auto& sel : result.global.per_fold) EXPECT_EQ(sel.t, 0.0);
}

TEST(OutlierBench, TunedModeSelectsWithinGrid) {
    const auto data = planted_outliers(60, 15, 4);
    auto opt = small_options(true);
    opt.epochs = 10;
    const auto result = fuse::run_outlier_bench(data.features, data.labels, opt);
    EXPECT_EQ(result.fused.folds, 5);
    EXPECT_GT(result.fused.mean_roc, 0.8);
    for (const auto& sel : result.fused.per_fold) {
        EXPECT_GE(sel.t, 0.1);
        EXPECT_LE(sel.t, 0.9);
        const bool eta_in_grid = sel.eta == 0.1 || sel.eta == 0.2 || sel.eta == 0.5 ||
                                 sel.eta == 1.0 || sel.eta == 2.0;
        EXPECT_TRUE(eta_in_grid);
    }
}

TEST(OutlierBench, SingleClassFoldsAreSkippedWithWarning) {
    // 2 anomalies among 60: some validation/test folds end up single-class
    const auto data = planted_outliers(58, 2, 5);
    const auto result = fuse::run_outlier_bench(data.features, data.labels,
                                                small_options(false));
    EXPECT_LT(result.global.folds, 5);
    EXPECT_FALSE(result.warnings.empty());
    for (const auto& w : result.warnings)
        EXPECT_NE(w.find("skipped"), std::string::npos);
}

TEST(OutlierBench, DeterministicUnderSeed) {
    const auto data = planted_outliers(70, 14, 6);
    const auto a = fuse::run_outlier_bench(data.features, data.labels, small_options(false));
    const auto b = fuse::run_outlier_bench(data.features, data.labels, small_options(false));
    EXPECT_EQ(a.local.mean_roc, b.local.mean_roc);
    EXPECT_EQ(a.global.mean_prc, b.global.mean_prc);
}
