#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fuse/csv.hpp"
#include "fuse/inference.hpp"
#include "fuse/matrix.hpp"
#include "fuse/rng.hpp"

namespace fuse {

enum class Family { Normal, StudentT10, Uniform, GaussMix4 };

inline std::string family_name(Family f) {
    switch (f) {
        case Family::Normal: return "normal";
        case Family::StudentT10: return "student_t";
        case Family::Uniform: return "uniform";
        case Family::GaussMix4: return "mixture";
    }
    return "normal";
}

inline Family family_from_name(const std::string& s) {
    if (s == "normal") return Family::Normal;
    if (s == "student_t" || s == "student-t" || s == "t") return Family::StudentT10;
    if (s == "uniform") return Family::Uniform;
    if (s == "mixture" || s == "gauss_mix4") return Family::GaussMix4;
    throw parameter_error("unknown family '" + s +
                          "' (expected normal, student_t, uniform or mixture)");
}

struct SyntheticSpec {
    Family family = Family::Normal;
    std::size_t n = 1000;
    std::size_t d = 2;
    std::uint64_t seed = 0;
};

struct SyntheticData {
    Matrix samples;  // n x d
    Matrix centers;  // population centers: 1 x d, or 4 x d for the mixture
};

namespace detail {

// Random SPD covariance: A A^T + d I with standard normal A, rescaled to
// unit average diagonal. Only the elliptical shape matters downstream.
inline Matrix random_spd(Rng& rng, std::size_t d) {
    Matrix a(d, d);
    for (double& v : a.data) v = rng.gaussian();
    Matrix m = matmul_nt(a, a);
    for (std::size_t i = 0; i < d; ++i) m(i, i) += static_cast<double>(d);
    double tr = 0.0;
    for (std::size_t i = 0; i < d; ++i) tr += m(i, i);
    const double scale = tr / static_cast<double>(d);
    for (double& v : m.data) v /= scale;
    return m;
}

inline double student_t10(Rng& rng) {
    const double z = rng.gaussian();
    double chi2 = 0.0;
    for (int k = 0; k < 10; ++k) {
        const double g = rng.gaussian();
        chi2 += g * g;
    }
    return z / std::sqrt(chi2 / 10.0);
}

}  // namespace detail

inline SyntheticData gen_synthetic(const SyntheticSpec& spec) {
    if (spec.n < 1 || spec.d < 1) throw parameter_error("gen_synthetic: n and d must be >= 1");
    Rng rng(spec.seed);
    SyntheticData out;
    out.samples = Matrix(spec.n, spec.d);

    switch (spec.family) {
        case Family::Normal: {
            const Matrix sigma = detail::random_spd(rng, spec.d);
            const Matrix l = cholesky(sigma);
            std::vector<double> xi(spec.d);
            for (std::size_t i = 0; i < spec.n; ++i) {
                for (double& v : xi) v = rng.gaussian();
                double* row = out.samples.row(i);
                for (std::size_t a = 0; a < spec.d; ++a) {
                    double s = 0.0;
                    for (std::size_t b = 0; b <= a; ++b) s += l(a, b) * xi[b];
                    row[a] = s;
                }
            }
            out.centers = Matrix(1, spec.d);
            break;
        }
        case Family::StudentT10: {
            for (double& v : out.samples.data) v = detail::student_t10(rng);
            out.centers = Matrix(1, spec.d);
            break;
        }
        case Family::Uniform: {
            for (double& v : out.samples.data) v = rng.uniform(-2.0, 2.0);
            out.centers = Matrix(1, spec.d);
            break;
        }
        case Family::GaussMix4: {
            if (spec.d < 2)
                throw parameter_error("gen_synthetic: mixture needs d >= 2");
            // Four equally weighted components at (+-3, +-3) in the first two
            // coordinates, identity covariance.
            out.centers = Matrix(4, spec.d);
            const double signs[4][2] = {{3, 3}, {3, -3}, {-3, 3}, {-3, -3}};
            for (std::size_t c = 0; c < 4; ++c) {
                out.centers(c, 0) = signs[c][0];
                out.centers(c, 1) = signs[c][1];
            }
            for (std::size_t i = 0; i < spec.n; ++i) {
                const std::size_t c = static_cast<std::size_t>(rng.bounded(4));
                double* row = out.samples.row(i);
                for (std::size_t a = 0; a < spec.d; ++a)
                    row[a] = out.centers(c, a) + rng.gaussian();
            }
            break;
        }
    }
    return out;
}

struct LabeledData {
    Matrix features;
    std::vector<int> labels;  // 1 = anomaly
};

// Features CSV plus a single-column 0/1 labels CSV; row counts must match.
inline LabeledData load_labeled(const std::string& data_csv, const std::string& labels_csv) {
    LabeledData out;
    out.features = read_csv_matrix(data_csv);
    const Matrix raw = read_csv_matrix(labels_csv);
    if (raw.cols != 1)
        throw data_error(labels_csv + ": labels must be a single column");
    if (raw.rows != out.features.rows)
        throw data_error("row count mismatch: " + std::to_string(out.features.rows) +
                         " samples vs " + std::to_string(raw.rows) + " labels");
    out.labels.resize(raw.rows);
    for (std::size_t i = 0; i < raw.rows; ++i) {
        const double v = raw(i, 0);
        if (v != 0.0 && v != 1.0)
            throw data_error(labels_csv + ": label at row " + std::to_string(i + 1) +
                             " is not 0 or 1");
        out.labels[i] = static_cast<int>(v);
    }
    return out;
}

// 5-fold layout: uniformly shuffled indices dealt round-robin. For outer
// fold k, fold k is the test set, fold (k+1) mod 5 the validation set and
// the remaining three the training set.
struct FoldPlan {
    std::size_t n = 0;
    std::vector<int> fold;  // in {0..4} per index

    std::vector<std::size_t> indices_of(int f) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < n; ++i)
            if (fold[i] == f) out.push_back(i);
        return out;
    }
    std::vector<std::size_t> train_indices(int k) const {
        const int val = (k + 1) % 5;
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < n; ++i)
            if (fold[i] != k && fold[i] != val) out.push_back(i);
        return out;
    }
    std::vector<std::size_t> validation_indices(int k) const { return indices_of((k + 1) % 5); }
    std::vector<std::size_t> test_indices(int k) const { return indices_of(k); }
};

inline FoldPlan make_folds(Rng& rng, std::size_t n) {
    if (n < 5) throw parameter_error("make_folds: need n >= 5");
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm);
    FoldPlan plan;
    plan.n = n;
    plan.fold.resize(n);
    for (std::size_t i = 0; i < n; ++i) plan.fold[perm[i]] = static_cast<int>(i % 5);
    return plan;
}

// Homotopy scores on a regular 2-D grid, one row per (x, y, t, f).
inline Matrix grid_eval(const TrainedModel& model, double xmin, double xmax, double ymin,
                        double ymax, std::size_t resolution, const std::vector<double>& ts) {
    if (model.params.p != 2)
        throw parameter_error("grid_eval: model must be 2-dimensional");
    if (resolution < 2) throw parameter_error("grid_eval: resolution must be >= 2");
    require(!ts.empty(), "grid_eval: need at least one t");

    Matrix points(resolution * resolution, 2);
    for (std::size_t iy = 0; iy < resolution; ++iy) {
        const double y =
            ymin + (ymax - ymin) * static_cast<double>(iy) / static_cast<double>(resolution - 1);
        for (std::size_t ix = 0; ix < resolution; ++ix) {
            const double x = xmin + (xmax - xmin) * static_cast<double>(ix) /
                                        static_cast<double>(resolution - 1);
            points(iy * resolution + ix, 0) = x;
            points(iy * resolution + ix, 1) = y;
        }
    }
    const GridScores scores = score_grid(model, points, ts);
    Matrix out(points.rows * ts.size(), 4);
    std::size_t r = 0;
    for (std::size_t k = 0; k < ts.size(); ++k)
        for (std::size_t i = 0; i < points.rows; ++i, ++r) {
            out(r, 0) = points(i, 0);
            out(r, 1) = points(i, 1);
            out(r, 2) = ts[k];
            out(r, 3) = scores.f(i, k);
        }
    return out;
}

}  // namespace fuse
