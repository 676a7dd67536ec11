#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "quxai/matrix.hpp"

namespace quxai {

inline constexpr double kPi = 3.14159265358979323846;

enum class Rotation { Rx };

/// Describes the product-state feature map: one RX(x_j) rotation per input
/// feature applied to |0>, qubit j carrying feature j.
struct FeatureMapSpec {
    int n_qubits = 1;
    Rotation rotation = Rotation::Rx;
    // Closed interval of radians inputs are expected to live in. Informational;
    // the map itself is defined for any finite angle.
    double angle_min = 0.0;
    double angle_max = kPi;
    // The amplitude path materializes 2^n_qubits columns; refuse beyond this.
    int max_amplitude_qubits = 16;

    void validate() const;
};

/// One qubit's computational-basis probabilities after RX(angle)|0>.
struct QubitProbPair {
    double p0 = 1.0; // cos^2(angle/2)
    double p1 = 0.0; // sin^2(angle/2)
};

QubitProbPair qubit_probabilities(double angle);

/// Basis-state probabilities of |psi(x)>: the Kronecker product of the
/// per-qubit pairs, qubit 0 being the most significant index bit. Output has
/// 2^D entries summing to 1.
std::vector<double> amplitude_features(std::span<const double> x, const FeatureMapSpec& spec);

/// Encodes every row of X; output is rows x 2^D. Encoding is done in row
/// blocks of `block_rows` so perturbation-heavy callers can bound peak work.
Matrix amplitude_feature_matrix(const Matrix& x, const FeatureMapSpec& spec,
                                std::size_t block_rows = 256);

/// Fidelity kernel |<psi(x)|psi(x')>|^2. The product structure collapses the
/// 2^D inner product to prod_j cos^2((x_j - x'_j)/2), O(D) per pair.
double fidelity_kernel(std::span<const double> x, std::span<const double> x_prime);

/// Entry (i, l) = fidelity_kernel(A[i], B[l]).
Matrix kernel_matrix(const Matrix& a, const Matrix& b);

/// sqrt(1 - kappa), radicand clamped at 0 under roundoff.
double kernel_distance(std::span<const double> x, std::span<const double> x_prime);

/// Elementwise kernel-to-distance transform of a Gram/cross matrix.
Matrix kernel_to_distance(const Matrix& kernel);

} // namespace quxai
