#pragma once

// Seeded random fixtures. All generators take the engine explicitly; nothing
// here holds global state.

#include <cstdint>
#include <random>

#include "clusep/grid.hpp"
#include "clusep/hilbert.hpp"

namespace clusep {

using Rng = std::mt19937_64;

inline Vector random_vector(std::size_t n, Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vector v(static_cast<Eigen::Index>(n));
    for (auto& z : v) z = Complex{g(rng), g(rng)};
    return v;
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = Complex{g(rng), g(rng)};
    return m;
}

inline StateVector random_state(const Dims& dims, Rng& rng) {
    return normalize(StateVector(dims, random_vector(product(dims), rng)));
}

inline Matrix random_hermitian(std::size_t n, Rng& rng) {
    const Matrix g = random_matrix(n, n, rng);
    return (g + g.adjoint()) / 2.0;
}

/// Haar-ish unitary from the QR factor of a Gaussian matrix.
inline Matrix random_unitary(std::size_t n, Rng& rng) {
    Eigen::HouseholderQR<Matrix> qr(random_matrix(n, n, rng));
    return qr.householderQ() * Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
}

/// Density operator of the given rank (rank 0 means full rank).
inline DensityOperator random_density(const Dims& dims, Rng& rng, std::size_t rank = 0) {
    const std::size_t n = product(dims);
    const Matrix g = random_matrix(n, rank == 0 ? n : rank, rng);
    Matrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    rho = (rho + rho.adjoint()).eval() / 2.0;
    return {dims, rho};
}

/// Normalized wavefunction with random amplitudes on `where` and zero elsewhere.
inline WaveFunction random_wavefunction(const GridSpace& space, const Region& where, Rng& rng) {
    const Vector full = random_vector(space.n(), rng);
    Vector a = Vector::Zero(static_cast<Eigen::Index>(space.n()));
    for (std::size_t i : where.points()) a(static_cast<Eigen::Index>(i)) = full(static_cast<Eigen::Index>(i));
    return WaveFunction::normalized(space, std::move(a));
}

inline KernelOperator random_observable(const GridSpace& space, Rng& rng) {
    return {space, random_hermitian(space.n(), rng)};
}

}  // namespace clusep
