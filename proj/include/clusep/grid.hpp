#pragma once

// One-particle position space discretized on a uniform 1-D grid, regions of
// that grid, wavefunctions, kernel observables and D-locality.
//
// Conventions: a WaveFunction stores function values psi(x_i), normalized by
// the Riemann sum sum_i |psi_i|^2 * spacing = 1. A KernelOperator stores
// kernel values a(x_i; x_j); its expectation is the double Riemann sum
// sum_ij a_ij conj(psi_i) psi_j * spacing^2. The Hilbert-space images are
// as_state() = psi * sqrt(spacing) (unit Euclidean norm) and
// as_operator() = a * spacing, so that <v|M|v> reproduces the Riemann sums.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "clusep/hilbert.hpp"

namespace clusep {

class GridSpace {
public:
    GridSpace(std::size_t n, double spacing) : n_(n), spacing_(spacing) {
        if (n_ < 2) throw ValidationError("grid needs at least 2 points, got " + std::to_string(n_));
        if (!(spacing_ > 0.0) || !std::isfinite(spacing_)) throw ValidationError("grid spacing must be positive");
    }

    std::size_t n() const { return n_; }
    double spacing() const { return spacing_; }

    friend bool operator==(const GridSpace&, const GridSpace&) = default;

private:
    std::size_t n_;
    double spacing_;
};

/// Index subset of a grid (sorted, unique).
class Region {
public:
    Region(const GridSpace& space, std::vector<std::size_t> points) : n_(space.n()), points_(std::move(points)) {
        std::sort(points_.begin(), points_.end());
        points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
        if (!points_.empty() && points_.back() >= n_)
            throw ValidationError("region point " + std::to_string(points_.back()) + " outside grid of " +
                                  std::to_string(n_) + " points");
    }

    static Region full(const GridSpace& space) {
        std::vector<std::size_t> all(space.n());
        std::iota(all.begin(), all.end(), std::size_t{0});
        return {space, std::move(all)};
    }

    static Region empty(const GridSpace& space) { return {space, {}}; }

    std::size_t grid_size() const { return n_; }
    const std::vector<std::size_t>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    bool is_empty() const { return points_.empty(); }
    bool contains(std::size_t i) const { return std::binary_search(points_.begin(), points_.end(), i); }

    bool intersects(const Region& other) const {
        return std::any_of(points_.begin(), points_.end(), [&](std::size_t i) { return other.contains(i); });
    }

    bool is_subset_of(const Region& other) const {
        return std::all_of(points_.begin(), points_.end(), [&](std::size_t i) { return other.contains(i); });
    }

    friend bool operator==(const Region&, const Region&) = default;

private:
    std::size_t n_;
    std::vector<std::size_t> points_;
};

class WaveFunction {
public:
    WaveFunction(GridSpace space, Vector amplitudes) : space_(space), amplitudes_(std::move(amplitudes)) {
        if (static_cast<std::size_t>(amplitudes_.size()) != space_.n())
            throw ValidationError("wavefunction has " + std::to_string(amplitudes_.size()) + " amplitudes on a grid of " +
                                  std::to_string(space_.n()) + " points");
    }

    /// Rescales arbitrary amplitudes to unit grid norm.
    static WaveFunction normalized(GridSpace space, Vector amplitudes) {
        WaveFunction w(space, std::move(amplitudes));
        const double n = w.norm();
        if (!(n > tol::kDegenerate)) throw DegenerateError("degenerate vector");
        w.amplitudes_ /= n;
        return w;
    }

    /// Normalized indicator of grid point i.
    static WaveFunction basis(GridSpace space, std::size_t i) {
        if (i >= space.n()) throw ValidationError("basis index out of range");
        Vector a = Vector::Zero(static_cast<Eigen::Index>(space.n()));
        a(static_cast<Eigen::Index>(i)) = 1.0 / std::sqrt(space.spacing());
        return {space, std::move(a)};
    }

    static WaveFunction from_state(GridSpace space, const StateVector& v) {
        if (v.dims() != Dims{space.n()}) throw ValidationError("state vector is not a one-particle grid state");
        return {space, v.amplitudes() / std::sqrt(space.spacing())};
    }

    const GridSpace& space() const { return space_; }
    const Vector& amplitudes() const { return amplitudes_; }

    double norm() const { return amplitudes_.norm() * std::sqrt(space_.spacing()); }
    bool is_normalized(double tolerance = tol::kNorm) const {
        return std::abs(amplitudes_.squaredNorm() * space_.spacing() - 1.0) <= tolerance;
    }

    /// Discretized L2 inner product <this|other>.
    Complex inner(const WaveFunction& other) const {
        if (!(other.space_ == space_)) throw ValidationError("wavefunctions live on different grids");
        return amplitudes_.dot(other.amplitudes_) * space_.spacing();
    }

    StateVector as_state() const { return {Dims{space_.n()}, amplitudes_ * std::sqrt(space_.spacing())}; }

private:
    GridSpace space_;
    Vector amplitudes_;
};

/// Discretized kernel a(x_i; x_j).
class KernelOperator {
public:
    KernelOperator(GridSpace space, Matrix entries) : space_(space), entries_(std::move(entries)) {
        const auto n = static_cast<Eigen::Index>(space_.n());
        if (entries_.rows() != n || entries_.cols() != n)
            throw ValidationError("kernel must be " + std::to_string(n) + "x" + std::to_string(n));
    }

    /// Kernel of the identity, delta(x - x'), i.e. I / spacing.
    static KernelOperator resolution_of_identity(GridSpace space) {
        const auto n = static_cast<Eigen::Index>(space.n());
        return {space, Matrix::Identity(n, n) / space.spacing()};
    }

    /// Multiplication by the indicator function of `region`.
    static KernelOperator position_projector(GridSpace space, const Region& region) {
        const auto n = static_cast<Eigen::Index>(space.n());
        Matrix m = Matrix::Zero(n, n);
        for (std::size_t i : region.points()) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0 / space.spacing();
        return {space, std::move(m)};
    }

    const GridSpace& space() const { return space_; }
    const Matrix& entries() const { return entries_; }
    bool is_hermitian(double tolerance = tol::kOperator) const {
        return max_abs(entries_ - entries_.adjoint()) <= tolerance;
    }

    Operator as_operator() const { return {Dims{space_.n()}, entries_ * space_.spacing()}; }

private:
    GridSpace space_;
    Matrix entries_;
};

inline Region support(const WaveFunction& psi, double threshold = tol::kNorm) {
    if (threshold < 0.0) throw ValidationError("support threshold must be nonnegative");
    std::vector<std::size_t> points;
    for (std::size_t i = 0; i < psi.space().n(); ++i)
        if (std::abs(psi.amplitudes()(static_cast<Eigen::Index>(i))) > threshold) points.push_back(i);
    return {psi.space(), std::move(points)};
}

/// Every kernel entry with a row or column outside D vanishes.
inline bool is_d_local(const KernelOperator& a, const Region& d, double tolerance = tol::kNorm) {
    const auto n = static_cast<Eigen::Index>(a.space().n());
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const bool inside = d.contains(static_cast<std::size_t>(i)) && d.contains(static_cast<std::size_t>(j));
            if (!inside && std::abs(a.entries()(i, j)) > tolerance) return false;
        }
    return true;
}

/// P_D a P_D: the truncation of a kernel to the block D x D.
inline KernelOperator localize(const KernelOperator& a, const Region& d) {
    const auto n = static_cast<Eigen::Index>(a.space().n());
    Matrix m = Matrix::Zero(n, n);
    for (std::size_t i : d.points())
        for (std::size_t j : d.points()) {
            const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
            m(ii, jj) = a.entries()(ii, jj);
        }
    return {a.space(), std::move(m)};
}

inline double expectation(const KernelOperator& a, const WaveFunction& psi) {
    if (!(a.space() == psi.space())) throw ValidationError("observable and wavefunction live on different grids");
    if (!a.is_hermitian()) throw ValidationError("observable must be Hermitian");
    if (!psi.is_normalized()) throw ValidationError("wavefunction must be normalized");
    const double h = psi.space().spacing();
    const Complex value = psi.amplitudes().dot(a.entries() * psi.amplitudes()) * h * h;
    if (std::abs(value.imag()) > tol::kOperator)
        throw Error("expectation has imaginary residual " + format_complex(value));
    return value.real();
}

}  // namespace clusep
