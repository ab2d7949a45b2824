#pragma once

// Local registrations with and without a remote identical particle, the
// cluster-separability comparison, and the separation-status predicate.

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "clusep/grid.hpp"
#include "clusep/identicals.hpp"
#include "clusep/random.hpp"

namespace clusep {

/// Average of `a` on a lone particle in state psi.
inline double experiment_one(const WaveFunction& psi, const KernelOperator& a) { return expectation(a, psi); }

/// Average of the symmetrized observable on the symmetrized state of psi and
/// a second identical particle in phi.
inline double experiment_two(const WaveFunction& psi, const WaveFunction& phi, const KernelOperator& a, Statistics stats) {
    if (!psi.is_normalized() || !phi.is_normalized()) throw ValidationError("wavefunction must be normalized");
    if (!(a.space() == psi.space())) throw ValidationError("observable and wavefunction live on different grids");
    const StateVector state = symmetrize_two_particle_state(psi, phi, stats);
    const Operator obs = symmetrize_two_particle_observable(a);
    const Complex value = state.inner(obs * state);
    if (std::abs(value.imag()) > tol::kOperator)
        throw Error("expectation has imaginary residual " + format_complex(value));
    return value.real();
}

struct SeparabilityReport {
    double avg_experiment_one;
    double avg_experiment_two;
    double discrepancy;
    /// <phi|A phi>, the term a remote particle contributes when psi ⊥ phi.
    double disturbance_term;
    /// experiment_two - experiment_one - disturbance_term.
    double disturbance_residual;
    /// |<psi|phi>|
    double overlap;
    bool d_local;
    bool supports_disjoint;
};

inline SeparabilityReport check_cluster_separability(const WaveFunction& psi, const WaveFunction& phi,
                                                     const KernelOperator& a, const Region& d, Statistics stats) {
    SeparabilityReport r{};
    r.avg_experiment_one = experiment_one(psi, a);
    r.avg_experiment_two = experiment_two(psi, phi, a, stats);
    r.discrepancy = std::abs(r.avg_experiment_two - r.avg_experiment_one);
    r.disturbance_term = experiment_one(phi, a);
    r.disturbance_residual = r.avg_experiment_two - r.avg_experiment_one - r.disturbance_term;
    r.overlap = std::abs(psi.inner(phi));
    r.d_local = is_d_local(a, d);
    r.supports_disjoint = !support(phi).intersects(d);
    return r;
}

struct SeparationWitness {
    KernelOperator observable;
    std::size_t partner;
    std::size_t trial;
    double discrepancy;
    std::string description;
};

struct SeparationStatus {
    Region region;
    bool holds;
    /// supp psi ∩ D ≠ ∅
    bool support_meets_region;
    std::optional<SeparationWitness> witness;
};

/// Tests whether psi has separation status D in the presence of `others`:
/// psi must reach into D, and `trials` seeded random D-local observables must
/// give the lone-particle average against every partner.
inline SeparationStatus separation_status(const WaveFunction& psi, const std::vector<WaveFunction>& others,
                                          const Region& d, Statistics stats, std::size_t trials, std::uint64_t seed,
                                          double tolerance = tol::kOperator) {
    if (trials < 1) throw ValidationError("separation status needs at least one trial");
    SeparationStatus status{d, false, support(psi).intersects(d), std::nullopt};
    if (!status.support_meets_region) return status;

    Rng rng(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        const KernelOperator a = localize(random_observable(psi.space(), rng), d);
        const double alone = experiment_one(psi, a);
        for (std::size_t k = 0; k < others.size(); ++k) {
            const double gap = std::abs(experiment_two(psi, others[k], a, stats) - alone);
            if (gap > tolerance) {
                std::ostringstream os;
                os << "trial " << t << ": random D-local observable disturbed by partner " << k << " (|Δ| = " << gap
                   << ")";
                status.witness = SeparationWitness{a, k, t, gap, os.str()};
                return status;
            }
        }
    }
    status.holds = true;
    return status;
}

}  // namespace clusep
