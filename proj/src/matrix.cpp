#include "fcprune/matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace fcprune {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (data_.size() != rows_ * cols_) {
        throw std::invalid_argument("Matrix: data length " + std::to_string(data_.size()) +
                                    " does not equal rows*cols = " +
                                    std::to_string(rows_ * cols_));
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            throw std::invalid_argument("Matrix: ragged initializer list");
        }
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

std::string shape_str(const Matrix& x) {
    return std::to_string(x.rows()) + "x" + std::to_string(x.cols());
}

Matrix matmul(const Matrix& x, const Matrix& y) {
    if (x.cols() != y.rows()) {
        throw std::invalid_argument("matmul: inner dimensions differ: " + shape_str(x) +
                                    " times " + shape_str(y));
    }
    Matrix out(x.rows(), y.cols(), 0.0);
    const std::size_t n = x.rows(), k = x.cols(), m = y.cols();
    // i-k-j loop order: row-major friendly, fixed accumulation order.
    for (std::size_t i = 0; i < n; ++i) {
        double* orow = out.data() + i * m;
        const double* xrow = x.data() + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double xv = xrow[p];
            if (xv == 0.0) continue;
            const double* yrow = y.data() + p * m;
            for (std::size_t j = 0; j < m; ++j) orow[j] += xv * yrow[j];
        }
    }
    return out;
}

Matrix transpose(const Matrix& x) {
    Matrix out(x.cols(), x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) out(j, i) = x(i, j);
    return out;
}

Matrix relu(const Matrix& x) {
    Matrix out = x;
    for (double& v : out.values())
        if (v < 0.0) v = 0.0;
    return out;
}

double softplus_scalar(double x, double theta) {
    const double tx = theta * x;
    if (tx > 30.0) return x;
    if (tx < -30.0) return 0.0;
    return std::log1p(std::exp(tx)) / theta;
}

Matrix softplus(const Matrix& x, double theta) {
    if (!(theta > 0.0)) throw std::invalid_argument("softplus: theta must be positive");
    Matrix out = x;
    for (double& v : out.values()) v = softplus_scalar(v, theta);
    return out;
}

double sigmoid_scalar(double x, double theta) {
    return 1.0 / (1.0 + std::exp(-theta * x));
}

Matrix softplus_grad(const Matrix& x, double theta) {
    if (!(theta > 0.0)) throw std::invalid_argument("softplus_grad: theta must be positive");
    Matrix out = x;
    for (double& v : out.values()) v = sigmoid_scalar(v, theta);
    return out;
}

double frobenius(const Matrix& x) {
    double s = 0.0;
    for (double v : x.values()) s += v * v;
    return std::sqrt(s);
}

std::vector<double> l2_col_norms(const Matrix& x) {
    std::vector<double> s(x.cols(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) s[j] += x(i, j) * x(i, j);
    for (double& v : s) v = std::sqrt(v);
    return s;
}

double l1_norm(const Matrix& x) {
    double s = 0.0;
    for (double v : x.values()) s += std::abs(v);
    return s;
}

double max_abs(const Matrix& x) {
    double s = 0.0;
    for (double v : x.values()) s = std::max(s, std::abs(v));
    return s;
}

static void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch: " + shape_str(a) +
                                    " vs " + shape_str(b));
    }
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "operator+");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] += b.values()[i];
    return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "operator-");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] -= b.values()[i];
    return out;
}

Matrix operator*(double c, const Matrix& a) {
    Matrix out = a;
    for (double& v : out.values()) v *= c;
    return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "hadamard");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] *= b.values()[i];
    return out;
}

bool is_finite(const Matrix& x) {
    for (double v : x.values())
        if (!std::isfinite(v)) return false;
    return true;
}

Matrix gather_cols(const Matrix& x, const std::vector<std::size_t>& idx) {
    Matrix out(x.rows(), idx.size());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j) {
            if (idx[j] >= x.cols()) throw std::invalid_argument("gather_cols: index out of range");
            out(i, j) = x(i, idx[j]);
        }
    return out;
}

std::vector<double> get_col(const Matrix& x, std::size_t j) {
    if (j >= x.cols()) throw std::invalid_argument("get_col: index out of range");
    std::vector<double> c(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) c[i] = x(i, j);
    return c;
}

Matrix append_ones_row(const Matrix& x) {
    return append_row(x, std::vector<double>(x.cols(), 1.0));
}

Matrix append_row(const Matrix& x, const std::vector<double>& row) {
    if (row.size() != x.cols()) throw std::invalid_argument("append_row: length mismatch");
    Matrix out(x.rows() + 1, x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = x(i, j);
    for (std::size_t j = 0; j < x.cols(); ++j) out(x.rows(), j) = row[j];
    return out;
}

std::size_t count_near_zero(const Matrix& x, double eps) {
    std::size_t n = 0;
    for (double v : x.values())
        if (std::abs(v) <= eps) ++n;
    return n;
}

} // namespace fcprune
