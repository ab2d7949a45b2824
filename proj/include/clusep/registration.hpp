#pragma once

// Registration by an array of detectors. Each detector k owns a region D_k,
// M_k particles identical with the measured one (state T_k) and a two-state
// pointer A'_k. When the measured particle is absorbed by detector k it is
// symmetrized together with that detector's particles:
//
//   W_kk = nu_k^2 P^{(M_k+1)} (|phi_k><phi_k| ⊗ T_k) P^{(M_k+1)}
//
// and the intermediate state is the gemenge
//
//   sum_k p_k  T_1 ⊗ ... ⊗ W_kk ⊗ ... ⊗ T_N ⊗ |pointer_k><pointer_k|.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "clusep/assertion.hpp"
#include "clusep/bcl.hpp"
#include "clusep/gemenge.hpp"
#include "clusep/grid.hpp"
#include "clusep/identicals.hpp"
#include "clusep/separability.hpp"

namespace clusep {

struct DetectorSpec {
    Region region;
    /// State of the detector's particles identical with the measured one;
    /// empty when the detector holds none.
    std::optional<DensityOperator> particles;
    StateVector pointer_ready = StateVector::basis({2}, 0);
    StateVector pointer_fired = StateVector::basis({2}, 1);

    std::size_t particle_count() const { return particles ? particles->dims().size() : 0; }
};

/// Pure (anti)symmetrized product of the given one-particle orbitals.
inline DensityOperator occupied_state(const std::vector<StateVector>& orbitals, Statistics stats) {
    if (orbitals.empty()) throw ValidationError("occupied state needs at least one orbital");
    StateVector product_state = orbitals.front();
    for (std::size_t i = 1; i < orbitals.size(); ++i) product_state = tensor(product_state, orbitals[i]);
    const auto sym = build_symmetrizer(orbitals.size(), orbitals.front().dim(), stats);
    return DensityOperator::pure(normalize(sym.apply(product_state)));
}

struct Absorption {
    DensityOperator w;
    double nu_squared;
};

/// W and its normalization nu^2 = 1 / tr[P (|phi><phi| ⊗ T) P].
inline Absorption build_w(const StateVector& phi, const std::optional<DensityOperator>& particles, Statistics stats) {
    if (!phi.is_normalized()) throw ValidationError("absorbed state must be normalized");
    if (phi.dims().size() != 1) throw ValidationError("absorbed state must be a one-particle state");
    const DensityOperator absorbed = DensityOperator::pure(phi);
    if (!particles) return {absorbed, 1.0};

    const std::size_t d = phi.dim();
    const std::size_t m = particles->dims().size();
    if (particles->dims() != Dims(m, d)) throw ValidationError("detector particle state is not on copies of the one-particle space");
    const auto sym = build_symmetrizer(m + 1, d, stats);
    const Matrix& p = sym.matrix.matrix();
    const Matrix raw = p * tensor(absorbed, *particles).matrix() * p;
    const double tr = raw.trace().real();
    if (!(tr > tol::kDegenerate)) throw DegenerateError("degenerate absorption");
    const double nu2 = 1.0 / tr;
    return {DensityOperator(Dims(m + 1, d), nu2 * raw), nu2};
}

/// Which one-particle state enters W_kk.
enum class AbsorbedState {
    /// Phi_k, the conditional post-measurement state of the outcome.
    Conditional,
    /// The first post-state of the outcome, post_k1.
    FirstPostState,
};

class RegistrationModel {
public:
    static RegistrationModel build(GridSpace space, Region preparation, EigenStructure eig,
                                   std::vector<std::vector<StateVector>> post_states,
                                   std::vector<DetectorSpec> detectors, Statistics stats,
                                   AbsorbedState absorbed = AbsorbedState::Conditional) {
        const std::size_t n = eig.outcome_count();
        if (eig.system_dims() != Dims{space.n()}) throw ValidationError("measured system must be one grid particle");
        if (detectors.size() != n)
            throw ValidationError("need one detector per outcome: " + std::to_string(n) + " outcomes, " +
                                  std::to_string(detectors.size()) + " detectors");
        if (post_states.size() != n) throw ValidationError("need one post-state group per outcome");

        for (std::size_t k = 0; k < n; ++k) {
            const auto& det = detectors[k];
            if (det.region.grid_size() != space.n()) throw ValidationError("detector region is on a different grid");
            if (det.region.intersects(preparation))
                throw ValidationError("detector " + std::to_string(k) + " region overlaps the preparation region");
            for (std::size_t j = 0; j < k; ++j)
                if (det.region.intersects(detectors[j].region))
                    throw ValidationError("detector regions " + std::to_string(j) + " and " + std::to_string(k) +
                                          " overlap");
            for (std::size_t l = 0; l < post_states[k].size(); ++l) {
                const auto w = WaveFunction::from_state(space, post_states[k][l]);
                if (!support(w).is_subset_of(det.region))
                    throw ValidationError("post-state (" + std::to_string(k) + "," + std::to_string(l) +
                                          ") is not supported in detector region " + std::to_string(k));
            }
            if (det.particles) {
                const std::size_t m = det.particle_count();
                if (det.particles->dims() != Dims(m, space.n()))
                    throw ValidationError("detector " + std::to_string(k) + " particles are not grid particles");
                const Matrix p = build_symmetrizer(m, space.n(), stats).matrix.matrix();
                const Matrix& t = det.particles->matrix();
                if (max_abs(Matrix(p * t * p - t)) > tol::kOperator)
                    throw ValidationError("detector " + std::to_string(k) + " particle state is not in the " +
                                          std::string(to_string(stats)) + " sector");
            }
            if (det.pointer_ready.dims() != det.pointer_fired.dims() || det.pointer_ready.dims().size() != 1)
                throw ValidationError("detector " + std::to_string(k) + " pointer states must share one factor");
            if (!det.pointer_ready.is_normalized() || !det.pointer_fired.is_normalized() ||
                std::abs(det.pointer_ready.inner(det.pointer_fired)) > tol::kOperator)
                throw ValidationError("detector " + std::to_string(k) + " pointer states are not orthonormal");
        }

        const double cross = orthonormality_residual(post_states);
        if (cross > tol::kOperator)
            throw ValidationError("post-states of different detectors are not orthonormal (residual " +
                                  std::to_string(cross) + ")");

        StateVector ready = detectors.front().pointer_ready;
        for (std::size_t k = 1; k < n; ++k) ready = tensor(ready, detectors[k].pointer_ready);
        std::vector<StateVector> pointers;
        for (std::size_t k = 0; k < n; ++k) {
            StateVector ptr = k == 0 ? detectors[0].pointer_fired : detectors[0].pointer_ready;
            for (std::size_t j = 1; j < n; ++j)
                ptr = tensor(ptr, j == k ? detectors[j].pointer_fired : detectors[j].pointer_ready);
            pointers.push_back(std::move(ptr));
        }
        auto coupling = build_coupling(std::move(eig), std::move(ready), std::move(pointers), std::move(post_states));
        return RegistrationModel(space, std::move(preparation), std::move(coupling), std::move(detectors), stats,
                                 absorbed);
    }

    /// max over label pairs of |<post_kl|post_mn> - delta_km delta_ln|.
    static double orthonormality_residual(const std::vector<std::vector<StateVector>>& post) {
        double worst = 0.0;
        for (std::size_t k = 0; k < post.size(); ++k)
            for (std::size_t l = 0; l < post[k].size(); ++l)
                for (std::size_t m = 0; m < post.size(); ++m)
                    for (std::size_t j = 0; j < post[m].size(); ++j) {
                        const Complex expected = (k == m && l == j) ? 1.0 : 0.0;
                        worst = std::max(worst, std::abs(post[k][l].inner(post[m][j]) - expected));
                    }
        return worst;
    }

    const GridSpace& space() const { return space_; }
    const Region& preparation() const { return preparation_; }
    const MeasurementCoupling& coupling() const { return coupling_; }
    const std::vector<DetectorSpec>& detectors() const { return detectors_; }
    Statistics stats() const { return stats_; }
    AbsorbedState absorbed() const { return absorbed_; }
    double cross_orthonormality_residual() const { return orthonormality_residual(coupling_.post_states()); }

    std::size_t total_detector_particles() const {
        std::size_t total = 0;
        for (const auto& d : detectors_) total += d.particle_count();
        return total;
    }

private:
    RegistrationModel(GridSpace space, Region preparation, MeasurementCoupling coupling,
                      std::vector<DetectorSpec> detectors, Statistics stats, AbsorbedState absorbed)
        : space_(space), preparation_(std::move(preparation)), coupling_(std::move(coupling)),
          detectors_(std::move(detectors)), stats_(stats), absorbed_(absorbed) {}

    GridSpace space_;
    Region preparation_;
    MeasurementCoupling coupling_;
    std::vector<DetectorSpec> detectors_;
    Statistics stats_;
    AbsorbedState absorbed_;
};

/// One group of identical-particle factors inside a gemenge component.
struct FactorBlock {
    std::size_t detector;
    std::size_t particles;
    bool holds_system;
};

struct IntermediateState {
    GemengeState gemenge;
    /// Outcome index of each gemenge component.
    std::vector<std::size_t> retained;
    /// nu_k^2 per outcome; empty for outcomes dropped at p_k = 0.
    std::vector<std::optional<double>> nu_squared;
    std::vector<double> probabilities;
    std::vector<std::vector<FactorBlock>> layouts;
    std::vector<std::size_t> pointer_factors;
    MeasurementOutcome outcome;
};

inline IntermediateState intermediate_state(const RegistrationModel& model, const StateVector& phi) {
    MeasurementOutcome outcome = measure(model.coupling(), phi);
    const auto& dets = model.detectors();
    const std::size_t n = dets.size();

    std::vector<std::size_t> retained;
    double kept = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        if (outcome.probabilities[k] > tol::kDegenerate) {
            retained.push_back(k);
            kept += outcome.probabilities[k];
        }

    std::vector<std::optional<double>> nus(n);
    std::vector<GemengeComponent> components;
    std::vector<std::vector<FactorBlock>> layouts;
    for (std::size_t k : retained) {
        const StateVector& absorbed = model.absorbed() == AbsorbedState::Conditional
                                          ? *outcome.collapsed[k]
                                          : model.coupling().post_states()[k].front();
        Absorption a = build_w(absorbed, dets[k].particles, model.stats());
        nus[k] = a.nu_squared;

        std::optional<DensityOperator> state;
        std::vector<FactorBlock> layout;
        auto append = [&state](const DensityOperator& block) { state = state ? tensor(*state, block) : block; };
        for (std::size_t j = 0; j < n; ++j) {
            if (j == k) {
                append(a.w);
                layout.push_back({j, dets[j].particle_count() + 1, true});
            } else if (dets[j].particles) {
                append(*dets[j].particles);
                layout.push_back({j, dets[j].particle_count(), false});
            }
        }
        append(DensityOperator::pure(outcome.pointers[k]));
        components.push_back({outcome.probabilities[k] / kept, std::move(*state)});
        layouts.push_back(std::move(layout));
    }

    std::vector<std::size_t> pointer_factors(outcome.apparatus_dims.size());
    std::iota(pointer_factors.begin(), pointer_factors.end(), model.total_detector_particles() + 1);
    auto probabilities = outcome.probabilities;
    return {GemengeState::mixed(std::move(components)), std::move(retained), std::move(nus),
            std::move(probabilities), std::move(layouts), std::move(pointer_factors), std::move(outcome)};
}

struct RegistrationReport {
    std::vector<Assertion> assertions;
    ObjectificationReport objectification;
    IntermediateState state;

    bool all_pass() const { return clusep::all_pass(assertions); }
};

namespace detail {

// Occupied orbitals of the detectors' particles, from the one-particle
// marginals of each T_k.
inline std::vector<WaveFunction> detector_orbitals(const RegistrationModel& model) {
    std::vector<WaveFunction> out;
    for (const auto& det : model.detectors()) {
        if (!det.particles) continue;
        const auto marginal = partial_trace(*det.particles, {0});
        Eigen::SelfAdjointEigenSolver<Matrix> solver(marginal.matrix());
        for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i)
            if (solver.eigenvalues()(i) > tol::kOperator)
                out.push_back(WaveFunction::from_state(model.space(), StateVector({model.space().n()}, solver.eigenvectors().col(i))));
    }
    return out;
}

}  // namespace detail

inline RegistrationReport verify_model(const RegistrationModel& model, const StateVector& phi, std::uint64_t seed = 0,
                                       std::size_t trials = 8) {
    IntermediateState st = intermediate_state(model, phi);
    const auto& g = st.gemenge;
    const auto& out = st.outcome;
    std::vector<Assertion> as;

    as.push_back(check_at_most("post_state_orthonormality", model.cross_orthonormality_residual(), tol::kOperator));
    {
        const Matrix& u = model.coupling().unitary().matrix();
        as.push_back(check_at_most("coupling_unitarity",
                                   max_abs(Matrix(u.adjoint() * u - Matrix::Identity(u.rows(), u.cols()))),
                                   tol::kOperator));
    }
    const DensityOperator mix = mixture(g);
    as.push_back(check_at_most("mixture_trace", std::abs(mix.trace() - 1.0), tol::kOperator));

    double comp_trace = 0.0, weight_gap = 0.0;
    for (std::size_t c = 0; c < g.size(); ++c) {
        comp_trace = std::max(comp_trace, std::abs(g.components()[c].state.trace() - 1.0));
        weight_gap = std::max(weight_gap, std::abs(g.components()[c].weight - out.probabilities[st.retained[c]]));
    }
    as.push_back(check_at_most("component_traces", comp_trace, tol::kOperator));
    as.push_back(check_at_most("weights_match_probabilities", weight_gap, tol::kOperator));

    {
        const auto marginal = partial_trace(mix, st.pointer_factors);
        Matrix expected = Matrix::Zero(marginal.matrix().rows(), marginal.matrix().cols());
        for (std::size_t k = 0; k < out.pointers.size(); ++k)
            expected += out.probabilities[k] * Operator::projector(out.pointers[k]).matrix();
        as.push_back(check_at_most("pointer_marginal", max_abs(Matrix(marginal.matrix() - expected)), tol::kOperator));
    }

    ObjectificationReport obj = check_objectification(out, g, st.pointer_factors);
    as.push_back({"objectification", obj.satisfied(),
                  std::max({obj.off_diagonal_norm, obj.diagonal_residual, obj.span_residual}), tol::kOperator});

    {
        const auto psi = WaveFunction::from_state(model.space(), phi);
        const auto before = separation_status(psi, detail::detector_orbitals(model), model.preparation(),
                                              model.stats(), trials, seed);
        as.push_back({"separation_status_before_entry", before.holds, before.holds ? 0.0 : 1.0, 0.0});
    }
    {
        // After absorption the measured particle only appears inside the
        // symmetrized block of the detector that fired.
        double violations = 0.0;
        for (std::size_t c = 0; c < st.layouts.size(); ++c) {
            const std::size_t k = st.retained[c];
            std::size_t holders = 0;
            for (const auto& b : st.layouts[c]) {
                if (!b.holds_system) continue;
                ++holders;
                if (b.detector != k || b.particles != model.detectors()[k].particle_count() + 1) violations += 1.0;
            }
            if (holders != 1) violations += 1.0;
        }
        as.push_back(check_at_most("system_absorbed_in_detector_block", violations, 0.0));
    }
    return {std::move(as), obj, std::move(st)};
}

}  // namespace clusep
