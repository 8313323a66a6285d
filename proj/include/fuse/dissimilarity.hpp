#pragma once

#include <cmath>
#include <string>

#include "fuse/common.hpp"
#include "fuse/matrix.hpp"

namespace fuse {

enum class Metric { L1, L2, Cosine };

inline std::string metric_name(Metric m) {
    switch (m) {
        case Metric::L1: return "l1";
        case Metric::L2: return "l2";
        case Metric::Cosine: return "cosine";
    }
    return "l2";
}

inline Metric metric_from_name(const std::string& s) {
    if (s == "l1" || s == "L1") return Metric::L1;
    if (s == "l2" || s == "L2") return Metric::L2;
    if (s == "cosine" || s == "Cosine") return Metric::Cosine;
    throw parameter_error("unknown metric '" + s + "' (expected l1, l2 or cosine)");
}

// Full n x n dissimilarity matrix: symmetric, zero diagonal.
// Cosine distance is 1 - <u,v>/(|u||v|); rows with zero norm are rejected.
inline Matrix pairwise_dissimilarity(const Matrix& z, Metric metric) {
    require(z.rows > 0, "pairwise_dissimilarity: empty input");
    const std::size_t n = z.rows, d = z.cols;
    Matrix dist(n, n);

    std::vector<double> norms;
    if (metric == Metric::Cosine) {
        norms.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            norms[i] = std::sqrt(dot(z.row(i), z.row(i), d));
            if (norms[i] == 0.0)
                throw data_error("pairwise_dissimilarity: zero-norm row " + std::to_string(i) +
                                 " under cosine metric");
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double v = 0.0;
            switch (metric) {
                case Metric::L1: {
                    const double* a = z.row(i);
                    const double* b = z.row(j);
                    for (std::size_t k = 0; k < d; ++k) v += std::abs(a[k] - b[k]);
                    break;
                }
                case Metric::L2:
                    v = std::sqrt(squared_distance(z.row(i), z.row(j), d));
                    break;
                case Metric::Cosine: {
                    const double c = dot(z.row(i), z.row(j), d) / (norms[i] * norms[j]);
                    v = 1.0 - c;
                    if (v < 0.0) v = 0.0;  // rounding can push identical rows below 0
                    break;
                }
            }
            dist(i, j) = v;
            dist(j, i) = v;
        }
    }
    return dist;
}

}  // namespace fuse
