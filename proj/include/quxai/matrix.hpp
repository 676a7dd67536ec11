#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "quxai/error.hpp"

namespace quxai {

/// Dense row-major matrix of doubles. The one numeric container shared by
/// encoders, learners and harnesses.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    Matrix(std::initializer_list<std::initializer_list<double>> init) {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& r : init) {
            if (r.size() != cols_) fail_invalid("Matrix: ragged initializer");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
        Matrix m;
        m.rows_ = rows.size();
        m.cols_ = rows.empty() ? 0 : rows.front().size();
        m.data_.reserve(m.rows_ * m.cols_);
        for (const auto& r : rows) {
            if (r.size() != m.cols_) fail_invalid("Matrix: ragged rows");
            m.data_.insert(m.data_.end(), r.begin(), r.end());
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::vector<double> column(std::size_t j) const {
        std::vector<double> out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
        return out;
    }

    void set_column(std::size_t j, std::span<const double> values) {
        for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
    }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// In-place Cholesky factorization of a symmetric positive definite matrix
/// (lower triangle). Throws ErrorKind::compute if the matrix is not SPD.
void cholesky_factor(Matrix& a);

/// Solves A x = b for SPD A given its Cholesky factor (as produced by
/// cholesky_factor). b holds one right-hand side per column; result matches.
Matrix cholesky_solve(const Matrix& factor, const Matrix& b);

/// Convenience: factor + solve in one call, leaving `a` untouched.
Matrix solve_spd(Matrix a, const Matrix& b);

} // namespace quxai
