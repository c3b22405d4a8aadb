#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace fcprune {

/// Dense real matrix, row-major storage, double precision everywhere.
///
/// All numeric computation in this project runs in 64-bit floats; float32
/// exists only in the file format and is widened on load.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Core operations. Summation order is fixed (plain sequential loops) so
// results are bit-reproducible for a fixed build.
// ---------------------------------------------------------------------------

/// Standard product X*Y. Throws std::invalid_argument naming both shapes on
/// inner-dimension mismatch.
Matrix matmul(const Matrix& x, const Matrix& y);

Matrix transpose(const Matrix& x);

/// Elementwise max(0, x).
Matrix relu(const Matrix& x);

/// Smoothed rectifier (1/theta)*log(1+exp(theta*x)). Overflow-safe: returns
/// x exactly for theta*x > 30 and 0 for theta*x < -30.
Matrix softplus(const Matrix& x, double theta);
double softplus_scalar(double x, double theta);

/// Derivative of softplus: the logistic sigmoid of theta*x, values in (0,1).
Matrix softplus_grad(const Matrix& x, double theta);
double sigmoid_scalar(double x, double theta);

double frobenius(const Matrix& x);
std::vector<double> l2_col_norms(const Matrix& x);
double l1_norm(const Matrix& x);
double max_abs(const Matrix& x);

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double c, const Matrix& a);
Matrix hadamard(const Matrix& a, const Matrix& b);

bool is_finite(const Matrix& x);

/// Columns `idx` of x gathered into a rows() x idx.size() matrix.
Matrix gather_cols(const Matrix& x, const std::vector<std::size_t>& idx);

std::vector<double> get_col(const Matrix& x, std::size_t j);

/// Copy of x with a constant all-ones row appended at the bottom
/// (bias augmentation of an activation batch).
Matrix append_ones_row(const Matrix& x);

/// Copy of x with `row` appended at the bottom.
Matrix append_row(const Matrix& x, const std::vector<double>& row);

/// Number of entries with |x_ij| <= eps.
std::size_t count_near_zero(const Matrix& x, double eps);

std::string shape_str(const Matrix& x);

} // namespace fcprune
