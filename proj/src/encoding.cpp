#include "quxai/encoding.hpp"

#include <cmath>
#include <string>

#include "quxai/parallel.hpp"

namespace quxai {

void FeatureMapSpec::validate() const {
    if (n_qubits < 1) fail_invalid("feature map: n_qubits must be >= 1, got " + std::to_string(n_qubits));
    if (max_amplitude_qubits < 1)
        fail_invalid("feature map: max_amplitude_qubits must be >= 1");
    if (!(angle_min <= angle_max)) fail_invalid("feature map: empty angle domain");
}

QubitProbPair qubit_probabilities(double angle) {
    const double c = std::cos(0.5 * angle);
    const double s = std::sin(0.5 * angle);
    return {c * c, s * s};
}

namespace {

void check_finite(std::span<const double> x) {
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (!std::isfinite(x[j]))
            fail_invalid("encoding: non-finite input at component " + std::to_string(j));
    }
}

} // namespace

std::vector<double> amplitude_features(std::span<const double> x, const FeatureMapSpec& spec) {
    spec.validate();
    if (static_cast<int>(x.size()) != spec.n_qubits)
        fail_invalid("amplitude_features: expected " + std::to_string(spec.n_qubits) +
                     " angles, got " + std::to_string(x.size()));
    if (spec.n_qubits > spec.max_amplitude_qubits)
        fail_data("qubit cap exceeded: " + std::to_string(spec.n_qubits) + " qubits requested, cap is " +
                  std::to_string(spec.max_amplitude_qubits));
    check_finite(x);

    // Iterated Kronecker product over qubits 0..D-1; qubit 0 ends up as the
    // most significant bit of the basis-state index.
    std::vector<double> probs{1.0};
    for (int q = 0; q < spec.n_qubits; ++q) {
        const QubitProbPair pair = qubit_probabilities(x[static_cast<std::size_t>(q)]);
        std::vector<double> next(probs.size() * 2);
        for (std::size_t i = 0; i < probs.size(); ++i) {
            next[2 * i] = probs[i] * pair.p0;
            next[2 * i + 1] = probs[i] * pair.p1;
        }
        probs.swap(next);
    }
    return probs;
}

Matrix amplitude_feature_matrix(const Matrix& x, const FeatureMapSpec& spec,
                                std::size_t block_rows) {
    spec.validate();
    if (static_cast<int>(x.cols()) != spec.n_qubits)
        fail_invalid("amplitude_feature_matrix: width " + std::to_string(x.cols()) +
                     " does not match the " + std::to_string(spec.n_qubits) + "-qubit map");
    if (spec.n_qubits > spec.max_amplitude_qubits)
        fail_data("qubit cap exceeded: " + std::to_string(spec.n_qubits) + " qubits requested, cap is " +
                  std::to_string(spec.max_amplitude_qubits));
    if (block_rows == 0) block_rows = 256;

    const std::size_t dim = std::size_t{1} << spec.n_qubits;
    Matrix out(x.rows(), dim);
    const std::size_t n_blocks = (x.rows() + block_rows - 1) / block_rows;
    parallel_for(n_blocks, [&](std::size_t b) {
        const std::size_t lo = b * block_rows;
        const std::size_t hi = std::min(x.rows(), lo + block_rows);
        for (std::size_t i = lo; i < hi; ++i) {
            const std::vector<double> probs = amplitude_features(x.row(i), spec);
            auto dst = out.row(i);
            for (std::size_t j = 0; j < dim; ++j) dst[j] = probs[j];
        }
    });
    return out;
}

double fidelity_kernel(std::span<const double> x, std::span<const double> x_prime) {
    if (x.size() != x_prime.size())
        fail_invalid("fidelity_kernel: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                     std::to_string(x_prime.size()) + ")");
    check_finite(x);
    check_finite(x_prime);
    double k = 1.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        // fabs makes kappa(x, x') bit-identical to kappa(x', x).
        const double c = std::cos(0.5 * std::fabs(x[j] - x_prime[j]));
        k *= c * c;
    }
    return k;
}

Matrix kernel_matrix(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols())
        fail_invalid("kernel_matrix: column mismatch (" + std::to_string(a.cols()) + " vs " +
                     std::to_string(b.cols()) + ")");
    Matrix k(a.rows(), b.rows());
    parallel_for(a.rows(), [&](std::size_t i) {
        for (std::size_t l = 0; l < b.rows(); ++l)
            k(i, l) = fidelity_kernel(a.row(i), b.row(l));
    });
    return k;
}

double kernel_distance(std::span<const double> x, std::span<const double> x_prime) {
    const double radicand = std::max(0.0, 1.0 - fidelity_kernel(x, x_prime));
    return std::sqrt(radicand);
}

Matrix kernel_to_distance(const Matrix& kernel) {
    Matrix d(kernel.rows(), kernel.cols());
    for (std::size_t i = 0; i < kernel.rows(); ++i)
        for (std::size_t j = 0; j < kernel.cols(); ++j)
            d(i, j) = std::sqrt(std::max(0.0, 1.0 - kernel(i, j)));
    return d;
}

} // namespace quxai
