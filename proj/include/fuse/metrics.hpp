#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

#include "fuse/common.hpp"
#include "fuse/matrix.hpp"

namespace fuse {

// Fractional (average) ranks, 1-based; ties share the mean rank.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double mean_rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
        i = j + 1;
    }
    return ranks;
}

// Spearman's rho: Pearson correlation of average-ranked values.
inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    require(a.size() == b.size(), "spearman: length mismatch");
    require(a.size() >= 2, "spearman: need at least 2 values");
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = ra[i] - ma, db = rb[i] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if (va == 0.0 || vb == 0.0)
        throw undefined_metric_error("spearman: zero rank variance");
    return cov / std::sqrt(va * vb);
}

namespace detail {

// Strict inversion count (left > right) by merge sort.
inline std::size_t count_inversions(std::vector<double>& v, std::vector<double>& buf,
                                    std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::size_t inv = count_inversions(v, buf, lo, mid) + count_inversions(v, buf, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[i] <= v[j]) {
            buf[k++] = v[i++];
        } else {
            inv += mid - i;
            buf[k++] = v[j++];
        }
    }
    while (i < mid) buf[k++] = v[i++];
    while (j < hi) buf[k++] = v[j++];
    std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
    return inv;
}

inline double tie_pair_count(const std::vector<double>& sorted_keys) {
    double total = 0.0;
    std::size_t i = 0;
    while (i < sorted_keys.size()) {
        std::size_t j = i;
        while (j + 1 < sorted_keys.size() && sorted_keys[j + 1] == sorted_keys[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        total += t * (t - 1.0) / 2.0;
        i = j + 1;
    }
    return total;
}

}  // namespace detail

// Kendall's tau-b, tie-corrected, via the sort-and-count formulation:
// discordant pairs are inversions of b after sorting by (a, b).
inline double kendall(const std::vector<double>& a, const std::vector<double>& b) {
    require(a.size() == b.size(), "kendall: length mismatch");
    require(a.size() >= 2, "kendall: need at least 2 values");
    const std::size_t n = a.size();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (a[x] != a[y]) return a[x] < a[y];
        return b[x] < b[y];
    });

    const double n0 = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;

    // Tie pair counts: n1 in a, n2 in b, n3 jointly.
    double n1 = 0.0, n3 = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && a[order[j + 1]] == a[order[i]]) ++j;
        const double t = static_cast<double>(j - i + 1);
        n1 += t * (t - 1.0) / 2.0;
        std::size_t u = i;
        while (u <= j) {
            std::size_t v = u;
            while (v + 1 <= j && b[order[v + 1]] == b[order[u]]) ++v;
            const double tt = static_cast<double>(v - u + 1);
            n3 += tt * (tt - 1.0) / 2.0;
            u = v + 1;
        }
        i = j + 1;
    }
    std::vector<double> b_sorted = b;
    std::sort(b_sorted.begin(), b_sorted.end());
    const double n2 = detail::tie_pair_count(b_sorted);

    std::vector<double> b_seq(n), buf(n);
    for (std::size_t k = 0; k < n; ++k) b_seq[k] = b[order[k]];
    const double discordant =
        static_cast<double>(detail::count_inversions(b_seq, buf, 0, n));
    const double concordant = n0 - n1 - n2 + n3 - discordant;

    const double denom = (n0 - n1) * (n0 - n2);
    if (denom <= 0.0) throw undefined_metric_error("kendall: all values tied");
    return (concordant - discordant) / std::sqrt(denom);
}

struct ScoredLabels {
    std::vector<double> scores;
    std::vector<int> labels;  // 1 = anomaly / positive

    void check() const {
        require(scores.size() == labels.size(), "scored labels: length mismatch");
        bool pos = false, neg = false;
        for (int l : labels) {
            if (l == 1) pos = true;
            else if (l == 0) neg = true;
            else throw contract_error("scored labels: labels must be 0 or 1");
        }
        if (!pos || !neg)
            throw undefined_metric_error("AUC undefined: both classes must be present");
    }
};

// AUC-ROC via the Mann-Whitney statistic (average ranks give ties half
// credit).
inline double auc_roc(const ScoredLabels& sl) {
    sl.check();
    const auto ranks = average_ranks(sl.scores);
    double rank_sum = 0.0;
    double npos = 0.0;
    for (std::size_t i = 0; i < sl.labels.size(); ++i) {
        if (sl.labels[i] == 1) {
            rank_sum += ranks[i];
            npos += 1.0;
        }
    }
    const double nneg = static_cast<double>(sl.labels.size()) - npos;
    return (rank_sum - npos * (npos + 1.0) / 2.0) / (npos * nneg);
}

// Average precision: sum_k (R_k - R_{k-1}) P_k over the descending-score
// sweep, with tied scores processed as one block.
inline double auc_prc(const ScoredLabels& sl) {
    sl.check();
    const std::size_t n = sl.scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return sl.scores[x] > sl.scores[y];
    });

    double total_pos = 0.0;
    for (int l : sl.labels) total_pos += l;

    double tp = 0.0, fp = 0.0, ap = 0.0, prev_recall = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && sl.scores[order[j + 1]] == sl.scores[order[i]]) ++j;
        for (std::size_t k = i; k <= j; ++k) {
            if (sl.labels[order[k]] == 1) tp += 1.0;
            else fp += 1.0;
        }
        const double recall = tp / total_pos;
        const double precision = tp / (tp + fp);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j + 1;
    }
    return ap;
}

// Symmetrized k-nearest-neighbor graph with 0/1 weights.
struct NeighborGraph {
    std::size_t n = 0;
    std::size_t k = 0;
    std::vector<std::vector<std::size_t>> neighbors;  // sorted, symmetric
    std::vector<std::size_t> degree;

    bool has_edge(std::size_t i, std::size_t j) const {
        return std::binary_search(neighbors[i].begin(), neighbors[i].end(), j);
    }
};

// Directed kNN by Euclidean distance, ties broken toward the lower index,
// then symmetrized: W = max(A, A^T).
inline NeighborGraph knn_graph(const Matrix& z, std::size_t k) {
    const std::size_t n = z.rows;
    if (n <= k) throw parameter_error("knn_graph: need n > k");
    require(k >= 1, "knn_graph: k must be >= 1");

    std::vector<std::vector<std::size_t>> adj(n);
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t i = 0; i < n; ++i) {
        cand.clear();
        cand.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            cand.emplace_back(squared_distance(z.row(i), z.row(j), z.cols), j);
        }
        std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
        for (std::size_t t = 0; t < k; ++t) adj[i].push_back(cand[t].second);
    }
    // symmetrize
    NeighborGraph g;
    g.n = n;
    g.k = k;
    g.neighbors.assign(n, {});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j : adj[i]) {
            g.neighbors[i].push_back(j);
            g.neighbors[j].push_back(i);
        }
    g.degree.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& nb = g.neighbors[i];
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
        g.degree[i] = nb.size();
    }
    return g;
}

// Normalized Laplacian quadratic form s^T L s / |s|^2, evaluated as the
// half-sum of squared differences over edges.
inline double graph_smoothness(const NeighborGraph& g, const std::vector<double>& s) {
    require(s.size() == g.n, "graph_smoothness: score length mismatch");
    double norm2 = 0.0;
    for (double v : s) norm2 += v * v;
    if (norm2 == 0.0) throw undefined_metric_error("graph_smoothness: zero score vector");
    double acc = 0.0;
    for (std::size_t i = 0; i < g.n; ++i)
        for (std::size_t j : g.neighbors[i])
            if (j > i) {
                const double d = s[i] - s[j];
                acc += d * d;
            }
    return acc / norm2;
}

// (s - min) / (max - min); a constant vector maps to all 0.5.
inline std::vector<double> minmax_normalize(const std::vector<double>& s) {
    require(!s.empty(), "minmax_normalize: empty input");
    const auto [mn, mx] = std::minmax_element(s.begin(), s.end());
    std::vector<double> out(s.size());
    if (*mx == *mn) {
        std::fill(out.begin(), out.end(), 0.5);
        return out;
    }
    const double span = *mx - *mn;
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = (s[i] - *mn) / span;
    return out;
}

// Median over `repeats` of (wall time of op(data) / rows). Monotonic clock.
inline double time_per_sample(const std::function<void(const Matrix&)>& op, const Matrix& data,
                              std::size_t repeats) {
    require(repeats >= 1, "time_per_sample: repeats must be >= 1");
    std::vector<double> times(repeats);
    for (std::size_t r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        op(data);
        const auto t1 = std::chrono::steady_clock::now();
        times[r] = std::chrono::duration<double>(t1 - t0).count() /
                   static_cast<double>(data.rows);
    }
    std::sort(times.begin(), times.end());
    return times[repeats / 2];
}

}  // namespace fuse
