#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tabsynth {

// Dense row-major matrix of doubles. The workhorse container for batches
// (one record per row) and network parameters.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // rows*cols, row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    Matrix(std::size_t r, std::size_t c, std::vector<double> values)
        : rows(r), cols(c), data(std::move(values)) {
        if (data.size() != rows * cols)
            throw std::invalid_argument("Matrix: data length " + std::to_string(data.size()) +
                                        " != " + std::to_string(rows) + "x" + std::to_string(cols));
    }

    // Construction from external input: rejects NaN/Inf.
    static Matrix checked(std::size_t r, std::size_t c, std::vector<double> values) {
        Matrix m(r, c, std::move(values));
        if (!m.all_finite()) throw std::invalid_argument("Matrix: non-finite entry");
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    double* row_ptr(std::size_t i) { return data.data() + i * cols; }
    const double* row_ptr(std::size_t i) const { return data.data() + i * cols; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

namespace detail {
using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
inline Eigen::Map<const EMat> emap(const Matrix& m) {
    return {m.data.data(), static_cast<Eigen::Index>(m.rows), static_cast<Eigen::Index>(m.cols)};
}
inline Eigen::Map<EMat> emap(Matrix& m) {
    return {m.data.data(), static_cast<Eigen::Index>(m.rows), static_cast<Eigen::Index>(m.cols)};
}
inline void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}
}  // namespace detail

// c = a * b
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    detail::require(a.cols == b.rows, "matmul: inner dimensions differ");
    Matrix c(a.rows, b.cols);
    if (a.rows && a.cols && b.cols) detail::emap(c).noalias() = detail::emap(a) * detail::emap(b);
    return c;
}

// c = a * b^T   (a: n x k, b: m x k -> n x m)
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    detail::require(a.cols == b.cols, "matmul_nt: inner dimensions differ");
    Matrix c(a.rows, b.rows);
    if (a.rows && a.cols && b.rows)
        detail::emap(c).noalias() = detail::emap(a) * detail::emap(b).transpose();
    return c;
}

// c = a^T * b   (a: k x n, b: k x m -> n x m)
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    detail::require(a.rows == b.rows, "matmul_tn: inner dimensions differ");
    Matrix c(a.cols, b.cols);
    if (a.cols && a.rows && b.cols)
        detail::emap(c).noalias() = detail::emap(a).transpose() * detail::emap(b);
    return c;
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

// y += x (elementwise)
inline void add_inplace(Matrix& y, const Matrix& x) {
    detail::require(y.same_shape(x), "add_inplace: shape mismatch");
    for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += x.data[i];
}

// y += alpha * x
inline void axpy(double alpha, const Matrix& x, Matrix& y) {
    detail::require(y.same_shape(x), "axpy: shape mismatch");
    for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += alpha * x.data[i];
}

inline void scale_inplace(Matrix& m, double s) {
    for (double& v : m.data) v *= s;
}

inline Matrix hadamard(const Matrix& a, const Matrix& b) {
    detail::require(a.same_shape(b), "hadamard: shape mismatch");
    Matrix c(a.rows, a.cols);
    for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] = a.data[i] * b.data[i];
    return c;
}

// Adds a bias row vector to every row.
inline void add_bias_rows(Matrix& m, const std::vector<double>& b) {
    detail::require(m.cols == b.size(), "add_bias_rows: width mismatch");
    for (std::size_t i = 0; i < m.rows; ++i) {
        double* r = m.row_ptr(i);
        for (std::size_t j = 0; j < m.cols; ++j) r[j] += b[j];
    }
}

// Column sums (used for bias gradients).
inline std::vector<double> col_sums(const Matrix& m) {
    std::vector<double> s(m.cols, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* r = m.row_ptr(i);
        for (std::size_t j = 0; j < m.cols; ++j) s[j] += r[j];
    }
    return s;
}

inline std::vector<double> col_means(const Matrix& m) {
    std::vector<double> s = col_sums(m);
    if (m.rows)
        for (double& v : s) v /= static_cast<double>(m.rows);
    return s;
}

// Horizontal concatenation [a | b].
inline Matrix hcat(const Matrix& a, const Matrix& b) {
    detail::require(a.rows == b.rows, "hcat: row count mismatch");
    Matrix c(a.rows, a.cols + b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        std::copy(a.row_ptr(i), a.row_ptr(i) + a.cols, c.row_ptr(i));
        std::copy(b.row_ptr(i), b.row_ptr(i) + b.cols, c.row_ptr(i) + a.cols);
    }
    return c;
}

// Column slice [col0, col0+width).
inline Matrix slice_cols(const Matrix& m, std::size_t col0, std::size_t width) {
    detail::require(col0 + width <= m.cols, "slice_cols: out of range");
    Matrix s(m.rows, width);
    for (std::size_t i = 0; i < m.rows; ++i)
        std::copy(m.row_ptr(i) + col0, m.row_ptr(i) + col0 + width, s.row_ptr(i));
    return s;
}

inline Matrix take_rows(const Matrix& m, const std::vector<std::size_t>& idx) {
    Matrix s(idx.size(), m.cols);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        detail::require(idx[i] < m.rows, "take_rows: index out of range");
        std::copy(m.row_ptr(idx[i]), m.row_ptr(idx[i]) + m.cols, s.row_ptr(i));
    }
    return s;
}

inline double frobenius_norm(const Matrix& m) {
    double s = 0.0;
    for (double v : m.data) s += v * v;
    return std::sqrt(s);
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    detail::require(a.same_shape(b), "max_abs_diff: shape mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        d = std::max(d, std::abs(a.data[i] - b.data[i]));
    return d;
}

}  // namespace tabsynth
