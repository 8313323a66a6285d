#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fuse/common.hpp"

namespace fuse {

// Dense row-major matrix of doubles. Rows are samples, columns features.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // length rows*cols, row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw contract_error(msg);
}

// Standard product a*b.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    require(a.cols == b.rows, "matmul: inner dimensions disagree (" +
                                  std::to_string(a.cols) + " vs " + std::to_string(b.rows) + ")");
    Matrix c(a.rows, b.cols);
    // i-k-j order keeps the inner loop contiguous in both b and c.
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double* crow = c.row(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b.row(k);
            for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

// a * b^T; both operands are traversed along contiguous rows.
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    require(a.cols == b.cols, "matmul_nt: column counts disagree");
    Matrix c(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        for (std::size_t k = 0; k < b.rows; ++k) {
            const double* brow = b.row(k);
            double s = 0.0;
            for (std::size_t j = 0; j < a.cols; ++j) s += arow[j] * brow[j];
            c(i, k) = s;
        }
    }
    return c;
}

// a^T * b, accumulated row by row.
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    require(a.rows == b.rows, "matmul_tn: row counts disagree");
    Matrix c(a.cols, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        const double* brow = b.row(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            double* crow = c.row(k);
            for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

inline Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

inline std::vector<double> column_sums(const Matrix& a) {
    std::vector<double> s(a.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        for (std::size_t j = 0; j < a.cols; ++j) s[j] += arow[j];
    }
    return s;
}

inline std::vector<double> column_means(const Matrix& a) {
    auto s = column_sums(a);
    for (double& v : s) v /= static_cast<double>(a.rows);
    return s;
}

// In-place Cholesky factor L (lower) with a*a^T = m; m must be symmetric.
// Throws numeric_error when the matrix is not positive definite.
inline Matrix cholesky(const Matrix& m) {
    require(m.rows == m.cols, "cholesky: matrix must be square");
    const std::size_t n = m.rows;
    Matrix l(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            if (i == j) {
                if (s <= 0.0 || !std::isfinite(s))
                    throw numeric_error("cholesky: matrix not positive definite");
                l(i, i) = std::sqrt(s);
            } else {
                l(i, j) = s / l(j, j);
            }
        }
    }
    return l;
}

// Solves L y = b for lower-triangular L.
inline std::vector<double> forward_solve(const Matrix& l, const std::vector<double>& b) {
    const std::size_t n = l.rows;
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
        y[i] = s / l(i, i);
    }
    return y;
}

// Solves L^T x = b for lower-triangular L.
inline std::vector<double> backward_solve_t(const Matrix& l, const std::vector<double>& b) {
    const std::size_t n = l.rows;
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * x[k];
        x[i] = s / l(i, i);
    }
    return x;
}

inline double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

inline double squared_distance(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace fuse
