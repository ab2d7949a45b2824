#pragma once

// Permutation symmetrizers for identical bosons and fermions, the symmetrized
// two-particle state and observable, and the injection map that absorbs one
// particle into an N-particle system of the same type.

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clusep/grid.hpp"
#include "clusep/hilbert.hpp"

namespace clusep {

enum class Statistics { Bose, Fermi };

inline std::string_view to_string(Statistics s) { return s == Statistics::Bose ? "bose" : "fermi"; }

inline std::optional<Statistics> parse_statistics(std::string_view s) {
    if (s == "bose" || s == "Bose" || s == "boson") return Statistics::Bose;
    if (s == "fermi" || s == "Fermi" || s == "fermion") return Statistics::Fermi;
    return std::nullopt;
}

/// Largest tensor-product dimension any symmetrizer may act on.
inline constexpr std::size_t kMaxSymmetrizerDimension = 4096;

using Permutation = std::vector<std::size_t>;

inline std::vector<Permutation> all_permutations(std::size_t n) {
    Permutation p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    std::vector<Permutation> out;
    do out.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
    return out;
}

inline int permutation_sign(const Permutation& p) {
    int sign = 1;
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = i + 1; j < p.size(); ++j)
            if (p[i] > p[j]) sign = -sign;
    return sign;
}

namespace detail {

inline std::size_t checked_power(std::size_t d, std::size_t n) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) {
        total *= d;
        if (total > kMaxSymmetrizerDimension)
            throw ValidationError("size budget exceeded: " + std::to_string(n) + " particles of dimension " +
                                  std::to_string(d) + " need dimension " + std::to_string(d) + "^" +
                                  std::to_string(n) + " > " + std::to_string(kMaxSymmetrizerDimension));
    }
    return total;
}

// Flat index whose digit k is the digit perm[k] of `in`.
inline std::size_t permuted_index(std::size_t in, const Permutation& perm, std::size_t d, std::vector<std::size_t>& digits) {
    const std::size_t n = perm.size();
    for (std::size_t k = n; k-- > 0;) {
        digits[k] = in % d;
        in /= d;
    }
    std::size_t out = 0;
    for (std::size_t k = 0; k < n; ++k) out = out * d + digits[perm[k]];
    return out;
}

}  // namespace detail

/// U_perm on (C^d)^{⊗N}: factor k of the image is factor perm[k] of the argument.
inline Operator permutation_operator(const Permutation& perm, std::size_t d) {
    const std::size_t dim = detail::checked_power(d, perm.size());
    const auto n = static_cast<Eigen::Index>(dim);
    Matrix m = Matrix::Zero(n, n);
    std::vector<std::size_t> digits(perm.size());
    for (std::size_t in = 0; in < dim; ++in)
        m(static_cast<Eigen::Index>(detail::permuted_index(in, perm, d, digits)), static_cast<Eigen::Index>(in)) = 1.0;
    return {Dims(perm.size(), d), std::move(m)};
}

struct Symmetrizer {
    std::size_t n_particles;
    std::size_t one_particle_dim;
    Statistics stats;
    Operator matrix;

    StateVector apply(const StateVector& v) const { return matrix * v; }

    /// v lies in the (anti)symmetric sector: ||P v - v|| <= tolerance.
    bool contains(const StateVector& v, double tolerance = tol::kOperator) const {
        return (apply(v).amplitudes() - v.amplitudes()).norm() <= tolerance;
    }
};

/// (1/N!) sum over permutations of (sign) U_perm.
inline Symmetrizer build_symmetrizer(std::size_t n_particles, std::size_t d, Statistics stats) {
    if (n_particles < 1) throw ValidationError("symmetrizer needs at least one particle");
    if (d < 2) throw ValidationError("one-particle dimension must be at least 2");
    const std::size_t dim = detail::checked_power(d, n_particles);

    const auto perms = all_permutations(n_particles);
    const double norm = 1.0 / static_cast<double>(perms.size());
    const auto n = static_cast<Eigen::Index>(dim);
    Matrix m = Matrix::Zero(n, n);
    std::vector<std::size_t> digits(n_particles);
    for (const auto& perm : perms) {
        const double weight = (stats == Statistics::Fermi ? permutation_sign(perm) : 1) * norm;
        for (std::size_t in = 0; in < dim; ++in)
            m(static_cast<Eigen::Index>(detail::permuted_index(in, perm, d, digits)), static_cast<Eigen::Index>(in)) += weight;
    }
    return {n_particles, d, stats, Operator(Dims(n_particles, d), std::move(m))};
}

/// normalize(psi ⊗ phi ± phi ⊗ psi) in the Hilbert representation.
inline StateVector symmetrize_two_particle_state(const WaveFunction& psi, const WaveFunction& phi, Statistics stats) {
    if (!(psi.space() == phi.space())) throw ValidationError("wavefunctions live on different grids");
    const StateVector a = psi.as_state(), b = phi.as_state();
    const StateVector ab = tensor(a, b), ba = tensor(b, a);
    return normalize(stats == Statistics::Bose ? ab + ba : ab - ba);
}

/// a ⊗ 1 + 1 ⊗ a on the two-particle Hilbert space. Delta kernels carry the
/// 1/spacing quadrature weight, so this equals M ⊗ I + I ⊗ M with
/// M = a.as_operator().
inline Operator symmetrize_two_particle_observable(const KernelOperator& a) {
    if (!a.is_hermitian()) throw ValidationError("observable must be Hermitian");
    const Operator m = a.as_operator();
    const Operator id = Operator::identity(m.dims_in());
    const Operator left = tensor(m, id), right = tensor(id, m);
    return {left.dims_out(), left.dims_in(), left.matrix() + right.matrix()};
}

/// P_S ∘ P^{(N+1)}: symmetrize psi ⊗ Psi over all N+1 factors and project to
/// the unit sphere.
inline StateVector inject(const StateVector& psi, const StateVector& big_psi, Statistics stats) {
    if (psi.dims().size() != 1) throw ValidationError("injected particle must be a one-factor state");
    const std::size_t d = psi.dim();
    const std::size_t n = big_psi.dims().size();
    if (big_psi.dims() != Dims(n, d))
        throw ValidationError("target system dims " + format_dims(big_psi.dims()) + " are not copies of " +
                              std::to_string(d));
    if (!build_symmetrizer(n, d, stats).contains(big_psi))
        throw ValidationError(std::string("target state is not in the ") +
                              (stats == Statistics::Bose ? "symmetric" : "antisymmetric") + " sector");
    return normalize(build_symmetrizer(n + 1, d, stats).apply(tensor(psi, big_psi)));
}

}  // namespace clusep
