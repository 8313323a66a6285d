#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <string>
#include <vector>

#include "fuse/adam.hpp"
#include "fuse/dissimilarity.hpp"
#include "fuse/network.hpp"
#include "fuse/sampling.hpp"

namespace fuse {

struct TrainConfig {
    std::size_t epochs = 30;
    std::size_t batch_size = 128;
    std::size_t dsm_resamples = 8;  // R
    double eta = 1.0;
    std::size_t anchors_per_pair = 64;
    Scheme scheme = Scheme::S1;
    Metric metric = Metric::L2;
    std::size_t hidden = 32;  // q, encoder width and feature dimension
    double lr = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 0;

    void validate() const {
        if (epochs < 1) throw parameter_error("train: epochs must be >= 1");
        if (batch_size < 1) throw parameter_error("train: batch_size must be >= 1");
        if (!(eta > 0.0)) throw parameter_error("train: eta must be positive");
        if (hidden < 1) throw parameter_error("train: hidden width must be >= 1");
        if (anchors_per_pair < 1) throw parameter_error("train: anchors_per_pair must be >= 1");
    }
};

struct EpochLogEntry {
    std::size_t epoch;
    double global_loss;
    double local_loss;
    double wall_ms;
};

struct TrainedModel {
    FuseParams params;
    double q01 = 0.0;  // calibration quantiles of the local potential
    double q99 = 0.0;
    TrainConfig config;
    std::vector<std::string> warnings;
    std::vector<EpochLogEntry> log;
};

// Order-statistic quantiles with linear interpolation between closest ranks
// (position h = (n-1) * prob).
inline std::pair<double, double> calibration_quantiles(std::vector<double> values) {
    if (values.size() < 2)
        throw contract_error("calibration_quantiles: need at least 2 values");
    std::sort(values.begin(), values.end());
    auto at = [&](double prob) {
        const double h = static_cast<double>(values.size() - 1) * prob;
        const std::size_t lo = static_cast<std::size_t>(h);
        const double frac = h - static_cast<double>(lo);
        if (lo + 1 >= values.size()) return values.back();
        return values[lo] + frac * (values[lo + 1] - values[lo]);
    };
    return {at(0.01), at(0.99)};
}

namespace detail {

inline Matrix gather_rows(const Matrix& z, const std::vector<std::size_t>& idx) {
    Matrix out(idx.size(), z.cols);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const double* src = z.row(idx[i]);
        std::copy(src, src + z.cols, out.row(i));
    }
    return out;
}

}  // namespace detail

// Alternating training loop: per epoch one pass of pairwise-ranking updates
// followed by R denoising score-matching passes, all through one shared Adam
// state. Pair lists and noise batches are sharded into `batch_size`
// mini-batches with one optimizer step per shard. Calibration quantiles of
// the local potential over the training rows are frozen at the end.
inline TrainedModel train(const Matrix& z, const TrainConfig& cfg) {
    cfg.validate();
    const std::size_t n = z.rows;
    if (cfg.scheme == Scheme::S4) {
        if (n < 2) throw parameter_error("train: need n >= 2");
    } else if (n < 9) {
        throw parameter_error("train: need n >= 9 for schemes s1-s3");
    }

    TrainedModel model;
    model.config = cfg;

    Rng rng(cfg.seed);
    model.params = init_params(rng, z.cols, cfg.hidden);
    AdamState adam(z.cols, cfg.hidden, cfg.lr);
    adam.beta1 = cfg.adam_beta1;
    adam.beta2 = cfg.adam_beta2;
    adam.epsilon = cfg.adam_epsilon;

    const Matrix dist = pairwise_dissimilarity(z, cfg.metric);
    if (*std::max_element(dist.data.begin(), dist.data.end()) == 0.0)
        model.warnings.push_back(
            "degenerate data: all rows identical, every preference ties to 0");

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();

        EpochPlan plan = make_plan(rng, n, cfg.scheme, cfg.anchors_per_pair);
        PreferenceBatch prefs = empirical_preference(dist, plan, rng);

        double global_loss_acc = 0.0;
        std::size_t global_count = 0;
        for (std::size_t start = 0; start < prefs.pairs.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(start + cfg.batch_size, prefs.pairs.size());
            std::vector<std::size_t> lhs, rhs;
            std::vector<double> targets;
            lhs.reserve(stop - start);
            rhs.reserve(stop - start);
            targets.reserve(stop - start);
            for (std::size_t k = start; k < stop; ++k) {
                lhs.push_back(prefs.pairs[k].i);
                rhs.push_back(prefs.pairs[k].j);
                targets.push_back(prefs.pairs[k].pi_hat);
            }
            auto lg = grad_global_loss(model.params, detail::gather_rows(z, lhs),
                                       detail::gather_rows(z, rhs), targets);
            adam_step(model.params, adam, lg.grad);
            global_loss_acc += lg.loss * static_cast<double>(stop - start);
            global_count += stop - start;
        }

        double local_loss_acc = 0.0;
        std::size_t local_count = 0;
        for (std::size_t r = 0; r < cfg.dsm_resamples; ++r) {
            auto [z_noisy, eps] = dsm_batch(rng, z, cfg.eta);
            for (std::size_t start = 0; start < n; start += cfg.batch_size) {
                const std::size_t stop = std::min(start + cfg.batch_size, n);
                std::vector<std::size_t> idx(stop - start);
                for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = start + k;
                auto lg = grad_local_loss(model.params, detail::gather_rows(z_noisy, idx),
                                          detail::gather_rows(eps, idx), cfg.eta);
                adam_step(model.params, adam, lg.grad);
                local_loss_acc += lg.loss * static_cast<double>(stop - start);
                local_count += stop - start;
            }
        }

        if (!model.params.all_finite())
            throw numeric_error("train: non-finite parameter after epoch " +
                                std::to_string(epoch));

        const auto t1 = std::chrono::steady_clock::now();
        model.log.push_back(
            {epoch, global_count ? global_loss_acc / static_cast<double>(global_count) : 0.0,
             local_count ? local_loss_acc / static_cast<double>(local_count) : 0.0,
             std::chrono::duration<double, std::milli>(t1 - t0).count()});
    }

    auto [q01, q99] = calibration_quantiles(local_potential(model.params, z));
    model.q01 = q01;
    model.q99 = q99;
    return model;
}

}  // namespace fuse
