#include "quxai/matrix.hpp"

#include <cmath>

namespace quxai {

void cholesky_factor(Matrix& a) {
    const std::size_t n = a.rows();
    if (n != a.cols()) fail_invalid("cholesky_factor: matrix must be square");
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a(j, j);
        for (std::size_t k = 0; k < j; ++k) diag -= a(j, k) * a(j, k);
        if (!(diag > 0.0)) fail_compute("cholesky_factor: matrix is not positive definite");
        const double ljj = std::sqrt(diag);
        a(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
            a(i, j) = s / ljj;
        }
        for (std::size_t k = j + 1; k < n; ++k) a(j, k) = 0.0;
    }
}

Matrix cholesky_solve(const Matrix& factor, const Matrix& b) {
    const std::size_t n = factor.rows();
    if (b.rows() != n) fail_invalid("cholesky_solve: dimension mismatch");
    Matrix x = b;
    // Forward substitution L y = b.
    for (std::size_t c = 0; c < x.cols(); ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = x(i, c);
            for (std::size_t k = 0; k < i; ++k) s -= factor(i, k) * x(k, c);
            x(i, c) = s / factor(i, i);
        }
        // Back substitution L^T x = y.
        for (std::size_t ii = n; ii > 0; --ii) {
            const std::size_t i = ii - 1;
            double s = x(i, c);
            for (std::size_t k = i + 1; k < n; ++k) s -= factor(k, i) * x(k, c);
            x(i, c) = s / factor(i, i);
        }
    }
    return x;
}

Matrix solve_spd(Matrix a, const Matrix& b) {
    cholesky_factor(a);
    return cholesky_solve(a, b);
}

} // namespace quxai
