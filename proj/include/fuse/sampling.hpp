#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "fuse/common.hpp"
#include "fuse/matrix.hpp"
#include "fuse/rng.hpp"

namespace fuse {

// Anchor/candidate sampling schemes for the pairwise ranking head.
//   S1: disjoint thirds, index-matched pairs, anchor subsets per pair
//   S2: disjoint thirds, full candidate product, anchor subsets per pair
//   S3: disjoint thirds, full candidate product, every anchor
//   S4: every point is anchor and candidate, all ordered pairs
enum class Scheme { S1, S2, S3, S4 };

inline std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::S1: return "s1";
        case Scheme::S2: return "s2";
        case Scheme::S3: return "s3";
        case Scheme::S4: return "s4";
    }
    return "s1";
}

inline Scheme scheme_from_name(const std::string& s) {
    if (s == "s1" || s == "S1" || s == "1") return Scheme::S1;
    if (s == "s2" || s == "S2" || s == "2") return Scheme::S2;
    if (s == "s3" || s == "S3" || s == "3") return Scheme::S3;
    if (s == "s4" || s == "S4" || s == "4") return Scheme::S4;
    throw parameter_error("unknown scheme '" + s + "' (expected s1..s4)");
}

struct EpochPlan {
    Scheme scheme = Scheme::S1;
    std::vector<std::size_t> anchors;      // S0
    std::vector<std::size_t> candidates1;  // S1
    std::vector<std::size_t> candidates2;  // S2
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::size_t anchors_per_pair = 64;
};

struct PreferencePair {
    std::size_t i;
    std::size_t j;
    double pi_hat;  // fraction of anchors preferring i
};

struct PreferenceBatch {
    std::vector<PreferencePair> pairs;
};

// Builds the per-epoch anchor/candidate layout. For S1-S3 the sample is
// split into disjoint thirds; when n is not divisible by 3 the remainder
// goes to the anchor set (extra anchors sharpen pi_hat at no pair cost).
inline EpochPlan make_plan(Rng& rng, std::size_t n, Scheme scheme,
                           std::size_t anchors_per_pair = 64) {
    EpochPlan plan;
    plan.scheme = scheme;

    if (scheme == Scheme::S4) {
        if (n < 1) throw parameter_error("make_plan: need n >= 1 for scheme s4");
        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = i;
        plan.anchors = all;
        plan.candidates1 = all;
        plan.candidates2 = all;
        plan.pairs.reserve(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) plan.pairs.emplace_back(i, j);
        plan.anchors_per_pair = n;
        rng.shuffle(plan.pairs);
        return plan;
    }

    if (n < 3) throw parameter_error("make_plan: need n >= 3 for schemes s1-s3");
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm);
    const std::size_t third = n / 3;
    plan.candidates1.assign(perm.begin(), perm.begin() + third);
    plan.candidates2.assign(perm.begin() + third, perm.begin() + 2 * third);
    plan.anchors.assign(perm.begin() + 2 * third, perm.end());

    if (scheme == Scheme::S1) {
        rng.shuffle(plan.candidates1);
        rng.shuffle(plan.candidates2);
        plan.pairs.reserve(third);
        for (std::size_t k = 0; k < third; ++k)
            plan.pairs.emplace_back(plan.candidates1[k], plan.candidates2[k]);
        plan.anchors_per_pair = anchors_per_pair;
    } else {
        plan.pairs.reserve(third * third);
        for (std::size_t a : plan.candidates1)
            for (std::size_t b : plan.candidates2) plan.pairs.emplace_back(a, b);
        plan.anchors_per_pair = scheme == Scheme::S2 ? anchors_per_pair : plan.anchors.size();
        rng.shuffle(plan.pairs);
    }
    return plan;
}

// Empirical preference pi_hat for every planned pair: the fraction of
// anchors strictly closer to the first candidate. Ties vote for neither
// side, so pi_hat(i,j) + pi_hat(j,i) = 1 only holds tie-free. Anchors are
// re-drawn per pair, without replacement; if the anchor set is not larger
// than the budget, all of it is used.
inline PreferenceBatch empirical_preference(const Matrix& dist, const EpochPlan& plan,
                                            Rng& rng) {
    require(dist.rows == dist.cols, "empirical_preference: dist must be square");
    require(!plan.anchors.empty(), "empirical_preference: empty anchor set");

    const bool use_all = plan.anchors_per_pair >= plan.anchors.size();
    PreferenceBatch batch;
    batch.pairs.reserve(plan.pairs.size());
    for (auto [i, j] : plan.pairs) {
        std::size_t wins = 0;
        std::size_t total = 0;
        auto tally = [&](std::size_t a) {
            if (dist(i, a) < dist(j, a)) ++wins;
            ++total;
        };
        if (use_all) {
            for (std::size_t a : plan.anchors) tally(a);
        } else {
            for (std::size_t a : rng.sample_without_replacement(plan.anchors,
                                                                plan.anchors_per_pair))
                tally(a);
        }
        batch.pairs.push_back({i, j, static_cast<double>(wins) / static_cast<double>(total)});
    }
    return batch;
}

// One Gaussian perturbation pass: eps ~ N(0, eta^2 I) row-wise and the
// corresponding noisy inputs.
inline std::pair<Matrix, Matrix> dsm_batch(Rng& rng, const Matrix& z, double eta) {
    if (!(eta > 0.0)) throw parameter_error("dsm_batch: eta must be positive");
    Matrix eps = rng_gaussian(rng, z.rows, z.cols, eta);
    Matrix z_noisy(z.rows, z.cols);
    for (std::size_t i = 0; i < z.data.size(); ++i) z_noisy.data[i] = z.data[i] + eps.data[i];
    return {z_noisy, eps};
}

}  // namespace fuse
