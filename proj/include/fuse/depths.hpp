#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "fuse/common.hpp"
#include "fuse/matrix.hpp"
#include "fuse/rng.hpp"

namespace fuse {

enum class DepthMethod { MAH, SPA, POT, PRO, TUKEY, KDE };

inline std::string depth_method_name(DepthMethod m) {
    switch (m) {
        case DepthMethod::MAH: return "mah";
        case DepthMethod::SPA: return "spa";
        case DepthMethod::POT: return "pot";
        case DepthMethod::PRO: return "pro";
        case DepthMethod::TUKEY: return "tukey";
        case DepthMethod::KDE: return "kde";
    }
    return "mah";
}

inline DepthMethod depth_method_from_name(const std::string& s) {
    if (s == "mah") return DepthMethod::MAH;
    if (s == "spa") return DepthMethod::SPA;
    if (s == "pot") return DepthMethod::POT;
    if (s == "pro") return DepthMethod::PRO;
    if (s == "tukey") return DepthMethod::TUKEY;
    if (s == "kde") return DepthMethod::KDE;
    throw parameter_error("unknown depth method '" + s +
                          "' (expected mah, spa, pot, pro, tukey or kde)");
}

struct DepthRequest {
    Matrix reference;
    Matrix queries;
    DepthMethod method = DepthMethod::MAH;
    std::size_t directions = 0;  // 0: use the clip(n 2^(d-1), 100, 50000) rule
    std::uint64_t seed = 0;
    double bandwidth = 0.0;  // 0: method default (Scott-style rules)

    void check() const {
        require(reference.cols == queries.cols,
                "depth: reference and query dimensions disagree");
        require(reference.rows >= 2, "depth: need at least 2 reference points");
        if (!reference.all_finite() || !queries.all_finite())
            throw contract_error("depth: non-finite input");
    }
};

// Direction budget shared by the projection-based approximations.
inline std::size_t direction_count(const DepthRequest& req) {
    if (req.directions > 0) return req.directions;
    const double raw = static_cast<double>(req.reference.rows) *
                       std::pow(2.0, static_cast<double>(req.reference.cols) - 1.0);
    return static_cast<std::size_t>(std::clamp(raw, 100.0, 50000.0));
}

namespace detail {

inline std::vector<double> sample_mean(const Matrix& x) { return column_means(x); }

inline Matrix sample_covariance(const Matrix& x, const std::vector<double>& mean,
                                double ridge) {
    const std::size_t n = x.rows, d = x.cols;
    Matrix cov(d, d);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = x.row(i);
        for (std::size_t a = 0; a < d; ++a) {
            const double da = row[a] - mean[a];
            for (std::size_t b = a; b < d; ++b) cov(a, b) += da * (row[b] - mean[b]);
        }
    }
    const double denom = static_cast<double>(n - 1);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            double v = cov(a, b) / denom;
            if (a == b) v += ridge;
            cov(a, b) = v;
            cov(b, a) = v;
        }
    return cov;
}

inline double median_inplace(std::vector<double>& v) {
    const std::size_t n = v.size();
    auto mid = v.begin() + n / 2;
    std::nth_element(v.begin(), mid, v.end());
    if (n % 2 == 1) return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

inline void random_unit_direction(Rng& rng, std::vector<double>& u) {
    double norm = 0.0;
    do {
        norm = 0.0;
        for (double& v : u) {
            v = rng.gaussian();
            norm += v * v;
        }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (double& v : u) v /= norm;
}

}  // namespace detail

// D(x) = 1 / (1 + (x - mean)^T (Cov + 1e-9 I)^(-1) (x - mean)), quadratic
// form evaluated through a Cholesky solve.
inline std::vector<double> mahalanobis_depth(const DepthRequest& req) {
    req.check();
    const std::size_t d = req.reference.cols;
    const auto mean = detail::sample_mean(req.reference);
    const Matrix l = cholesky(detail::sample_covariance(req.reference, mean, 1e-9));

    std::vector<double> out(req.queries.rows);
    std::vector<double> diff(d);
    for (std::size_t i = 0; i < req.queries.rows; ++i) {
        const double* row = req.queries.row(i);
        for (std::size_t a = 0; a < d; ++a) diff[a] = row[a] - mean[a];
        const auto y = forward_solve(l, diff);  // quadratic form = |L^-1 diff|^2
        out[i] = 1.0 / (1.0 + dot(y.data(), y.data(), d));
    }
    return out;
}

// D(x) = 1 - | mean_i s(x - X_i) | with the spatial sign s (s(0) = 0).
// No whitening: the whitened variant orders points by Mahalanobis radius,
// which contradicts the reported reference behavior of this baseline on
// anisotropic data (it tracks Euclidean centrality there).
inline std::vector<double> spatial_depth(const DepthRequest& req) {
    req.check();
    const std::size_t n = req.reference.rows, d = req.reference.cols;

    std::vector<double> out(req.queries.rows);
    std::vector<double> acc(d);
    for (std::size_t i = 0; i < req.queries.rows; ++i) {
        const double* q = req.queries.row(i);
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            const double* ref = req.reference.row(k);
            double norm2 = 0.0;
            for (std::size_t a = 0; a < d; ++a) {
                const double v = q[a] - ref[a];
                norm2 += v * v;
            }
            if (norm2 == 0.0) continue;
            const double inv = 1.0 / std::sqrt(norm2);
            for (std::size_t a = 0; a < d; ++a) acc[a] += (q[a] - ref[a]) * inv;
        }
        double norm2 = 0.0;
        for (std::size_t a = 0; a < d; ++a) {
            const double v = acc[a] / static_cast<double>(n);
            norm2 += v * v;
        }
        out[i] = 1.0 - std::sqrt(norm2);
    }
    return out;
}

// D(x) = mean_i exp(-beta |x - X_i|^2), beta from Scott's rule n^(-2/(d+4))
// clamped below at 1e-12; no whitening. An explicit bandwidth overrides beta.
inline std::vector<double> potential_depth(const DepthRequest& req) {
    req.check();
    const std::size_t n = req.reference.rows, d = req.reference.cols;
    double beta = req.bandwidth;
    if (beta <= 0.0)
        beta = std::max(std::pow(static_cast<double>(n), -2.0 / (static_cast<double>(d) + 4.0)),
                        1e-12);

    std::vector<double> out(req.queries.rows);
    for (std::size_t i = 0; i < req.queries.rows; ++i) {
        const double* qrow = req.queries.row(i);
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            acc += std::exp(-beta * squared_distance(qrow, req.reference.row(k), d));
        out[i] = acc / static_cast<double>(n);
    }
    return out;
}

// Stahel-Donoho outlyingness over random unit directions, inverted to a
// depth: D(x) = 1 / (1 + max_k |<x,u_k> - med_k| / mad_k). A direction with
// zero MAD contributes 0 when the numerator is also 0 and infinity otherwise.
inline std::vector<double> projection_depth(const DepthRequest& req) {
    req.check();
    const std::size_t n = req.reference.rows, d = req.reference.cols;
    const std::size_t directions = direction_count(req);
    Rng rng(req.seed);

    std::vector<double> max_out(req.queries.rows, 0.0);
    std::vector<double> u(d), proj(n), absdev(n);
    for (std::size_t k = 0; k < directions; ++k) {
        detail::random_unit_direction(rng, u);
        for (std::size_t i = 0; i < n; ++i) proj[i] = dot(req.reference.row(i), u.data(), d);
        std::vector<double> work = proj;
        const double med = detail::median_inplace(work);
        for (std::size_t i = 0; i < n; ++i) absdev[i] = std::abs(proj[i] - med);
        const double mad = detail::median_inplace(absdev);

        for (std::size_t i = 0; i < req.queries.rows; ++i) {
            const double dev = std::abs(dot(req.queries.row(i), u.data(), d) - med);
            double ratio;
            if (mad > 0.0)
                ratio = dev / mad;
            else
                ratio = dev == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
            max_out[i] = std::max(max_out[i], ratio);
        }
    }

    std::vector<double> out(req.queries.rows);
    for (std::size_t i = 0; i < req.queries.rows; ++i)
        out[i] = std::isinf(max_out[i]) ? 0.0 : 1.0 / (1.0 + max_out[i]);
    return out;
}

// Univariate halfspace depth of t within sorted sample v.
inline double tukey_depth_1d(double t, const std::vector<double>& sorted) {
    const auto lo = std::lower_bound(sorted.begin(), sorted.end(), t);
    const auto hi = std::upper_bound(sorted.begin(), sorted.end(), t);
    const std::size_t below_or_eq = static_cast<std::size_t>(hi - sorted.begin());
    const std::size_t above_or_eq = sorted.size() - static_cast<std::size_t>(lo - sorted.begin());
    return static_cast<double>(std::min(below_or_eq, above_or_eq)) /
           static_cast<double>(sorted.size());
}

// Projection-min approximation of halfspace depth: minimum univariate depth
// over random unit directions.
inline std::vector<double> tukey_depth(const DepthRequest& req) {
    req.check();
    const std::size_t n = req.reference.rows, d = req.reference.cols;
    const std::size_t directions = direction_count(req);
    Rng rng(req.seed);

    std::vector<double> out(req.queries.rows, 1.0);
    std::vector<double> u(d), proj(n);
    for (std::size_t k = 0; k < directions; ++k) {
        detail::random_unit_direction(rng, u);
        for (std::size_t i = 0; i < n; ++i) proj[i] = dot(req.reference.row(i), u.data(), d);
        std::sort(proj.begin(), proj.end());
        for (std::size_t i = 0; i < req.queries.rows; ++i) {
            const double t = dot(req.queries.row(i), u.data(), d);
            out[i] = std::min(out[i], tukey_depth_1d(t, proj));
        }
    }
    return out;
}

// Gaussian kernel density: mean_i (2 pi h^2)^(-d/2) exp(-|x-X_i|^2 / 2h^2).
// Without an explicit bandwidth the data are standardized per coordinate by
// the reference statistics and h = n^(-1/(d+4)).
inline std::vector<double> kde_score(const DepthRequest& req) {
    req.check();
    const std::size_t n = req.reference.rows, d = req.reference.cols;

    Matrix ref = req.reference;
    Matrix q = req.queries;
    double h = req.bandwidth;
    if (h <= 0.0) {
        if (req.bandwidth < 0.0) throw parameter_error("kde: bandwidth must be positive");
        const auto mean = detail::sample_mean(req.reference);
        std::vector<double> scale(d, 1.0);
        for (std::size_t a = 0; a < d; ++a) {
            double var = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double v = req.reference(i, a) - mean[a];
                var += v * v;
            }
            var /= static_cast<double>(n - 1);
            if (var > 0.0) scale[a] = std::sqrt(var);
        }
        auto standardize = [&](Matrix& m) {
            for (std::size_t i = 0; i < m.rows; ++i)
                for (std::size_t a = 0; a < d; ++a)
                    m(i, a) = (m(i, a) - mean[a]) / scale[a];
        };
        standardize(ref);
        standardize(q);
        h = std::pow(static_cast<double>(n), -1.0 / (static_cast<double>(d) + 4.0));
    }

    const double inv2h2 = 1.0 / (2.0 * h * h);
    const double norm = std::pow(2.0 * std::numbers::pi * h * h,
                                 -static_cast<double>(d) / 2.0);
    std::vector<double> out(q.rows);
    for (std::size_t i = 0; i < q.rows; ++i) {
        const double* qrow = q.row(i);
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            acc += std::exp(-squared_distance(qrow, ref.row(k), d) * inv2h2);
        out[i] = norm * acc / static_cast<double>(n);
    }
    return out;
}

inline std::vector<double> depth_scores(const DepthRequest& req) {
    switch (req.method) {
        case DepthMethod::MAH: return mahalanobis_depth(req);
        case DepthMethod::SPA: return spatial_depth(req);
        case DepthMethod::POT: return potential_depth(req);
        case DepthMethod::PRO: return projection_depth(req);
        case DepthMethod::TUKEY: return tukey_depth(req);
        case DepthMethod::KDE: return kde_score(req);
    }
    throw parameter_error("depth_scores: unknown method");
}

}  // namespace fuse
