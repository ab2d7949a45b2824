#pragma once

// Unitary premeasurement model: a coupling U on system ⊗ apparatus with
// U (phi_kl ⊗ ready) = post_kl ⊗ pointer_k, its action on arbitrary inputs,
// the reduced apparatus state, and the objectification conditions
//   (A) the apparatus state is sum_k p_k |pointer_k><pointer_k|;
//   (B) that convex combination is the gemenge structure of the state.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "clusep/gemenge.hpp"
#include "clusep/hilbert.hpp"

namespace clusep {

/// Eigenvalues o_k with orthonormal eigenvector groups {phi_kl}.
class EigenStructure {
public:
    /// The eigenvectors must span the whole system space.
    static EigenStructure complete(std::vector<double> eigenvalues, std::vector<std::vector<StateVector>> eigenvectors) {
        EigenStructure e(std::move(eigenvalues), std::move(eigenvectors));
        if (!e.complete_) throw ValidationError("eigenvectors do not span the system space");
        return e;
    }

    /// The eigenvectors span a subspace (the states the preparation can
    /// produce); inputs to a measurement must lie in it.
    static EigenStructure on_subspace(std::vector<double> eigenvalues,
                                      std::vector<std::vector<StateVector>> eigenvectors) {
        return {std::move(eigenvalues), std::move(eigenvectors)};
    }

    /// Groups the eigenvectors of a Hermitian operator by eigenvalue.
    static EigenStructure from_observable(const Operator& o, double merge_tolerance = 1e-8) {
        if (!o.is_hermitian()) throw ValidationError("observable must be Hermitian");
        Eigen::SelfAdjointEigenSolver<Matrix> solver(o.matrix());
        std::vector<double> values;
        std::vector<std::vector<StateVector>> vectors;
        for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
            const double v = solver.eigenvalues()(i);
            if (values.empty() || std::abs(v - values.back()) > merge_tolerance) {
                values.push_back(v);
                vectors.emplace_back();
            }
            vectors.back().emplace_back(o.dims_in(), solver.eigenvectors().col(i));
        }
        return complete(std::move(values), std::move(vectors));
    }

    const std::vector<double>& eigenvalues() const { return values_; }
    const std::vector<std::vector<StateVector>>& eigenvectors() const { return vectors_; }
    std::size_t outcome_count() const { return values_.size(); }
    std::size_t multiplicity(std::size_t k) const { return vectors_.at(k).size(); }
    const Dims& system_dims() const { return vectors_.front().front().dims(); }
    bool is_complete() const { return complete_; }

    /// Spectral projector P_k = sum_l |phi_kl><phi_kl|.
    Matrix projector(std::size_t k) const {
        const auto n = static_cast<Eigen::Index>(product(system_dims()));
        Matrix p = Matrix::Zero(n, n);
        for (const auto& v : vectors_.at(k)) p += v.amplitudes() * v.amplitudes().adjoint();
        return p;
    }

    /// Projector onto the span of all eigenvectors.
    Matrix domain_projector() const {
        Matrix p = projector(0);
        for (std::size_t k = 1; k < outcome_count(); ++k) p += projector(k);
        return p;
    }

private:
    EigenStructure(std::vector<double> eigenvalues, std::vector<std::vector<StateVector>> eigenvectors)
        : values_(std::move(eigenvalues)), vectors_(std::move(eigenvectors)) {
        if (values_.empty() || values_.size() != vectors_.size())
            throw ValidationError("need one nonempty eigenvector group per eigenvalue");
        for (std::size_t k = 0; k < values_.size(); ++k) {
            if (vectors_[k].empty()) throw ValidationError("eigenvalue " + std::to_string(k) + " has no eigenvectors");
            for (std::size_t j = 0; j < k; ++j)
                if (values_[j] == values_[k]) throw ValidationError("eigenvalues must be distinct");
        }
        const Dims& dims = vectors_.front().front().dims();
        std::vector<std::pair<std::size_t, std::size_t>> labels;
        for (std::size_t k = 0; k < vectors_.size(); ++k)
            for (std::size_t l = 0; l < vectors_[k].size(); ++l) {
                if (vectors_[k][l].dims() != dims) throw ValidationError("eigenvectors have different dims");
                labels.emplace_back(k, l);
            }
        const std::size_t d = product(dims);
        if (values_.size() > d) throw ValidationError("more outcomes than the system dimension");
        for (std::size_t a = 0; a < labels.size(); ++a)
            for (std::size_t b = a; b < labels.size(); ++b) {
                const auto& va = vectors_[labels[a].first][labels[a].second];
                const auto& vb = vectors_[labels[b].first][labels[b].second];
                const Complex ip = va.inner(vb);
                if (std::abs(ip - Complex{a == b ? 1.0 : 0.0}) > tol::kOperator)
                    throw ValidationError("eigenvectors (" + std::to_string(labels[a].first) + "," +
                                          std::to_string(labels[a].second) + ") and (" +
                                          std::to_string(labels[b].first) + "," + std::to_string(labels[b].second) +
                                          ") are not orthonormal: inner product " + format_complex(ip));
            }
        complete_ = labels.size() == d;
    }

    std::vector<double> values_;
    std::vector<std::vector<StateVector>> vectors_;
    bool complete_ = false;
};

class MeasurementCoupling {
public:
    MeasurementCoupling(EigenStructure eig, StateVector ready, std::vector<StateVector> pointers,
                        std::vector<std::vector<StateVector>> post_states, Operator unitary)
        : eig_(std::move(eig)), ready_(std::move(ready)), pointers_(std::move(pointers)),
          post_states_(std::move(post_states)), unitary_(std::move(unitary)) {}

    const EigenStructure& eig() const { return eig_; }
    const StateVector& ready() const { return ready_; }
    const std::vector<StateVector>& pointers() const { return pointers_; }
    const std::vector<std::vector<StateVector>>& post_states() const { return post_states_; }
    const Operator& unitary() const { return unitary_; }
    const Dims& system_dims() const { return eig_.system_dims(); }
    const Dims& apparatus_dims() const { return ready_.dims(); }

    /// U (phi ⊗ ready), no normalization requirement on phi.
    StateVector evolve(const StateVector& phi) const { return unitary_ * tensor(phi, ready_); }

private:
    EigenStructure eig_;
    StateVector ready_;
    std::vector<StateVector> pointers_;
    std::vector<std::vector<StateVector>> post_states_;
    Operator unitary_;
};

/// Builds U by unitary completion over the pairs phi_kl ⊗ ready -> post_kl ⊗
/// pointer_k in lexicographic (k, l) order.
inline MeasurementCoupling build_coupling(EigenStructure eig, StateVector ready, std::vector<StateVector> pointers,
                                          std::vector<std::vector<StateVector>> post_states) {
    const std::size_t n = eig.outcome_count();
    if (!ready.is_normalized()) throw ValidationError("apparatus ready state must be normalized");
    if (pointers.size() != n)
        throw ValidationError("need " + std::to_string(n) + " pointer states, got " + std::to_string(pointers.size()));
    for (std::size_t k = 0; k < n; ++k) {
        if (pointers[k].dims() != ready.dims()) throw ValidationError("pointer state dims differ from ready state");
        for (std::size_t j = 0; j <= k; ++j) {
            const Complex ip = pointers[j].inner(pointers[k]);
            if (std::abs(ip - Complex{j == k ? 1.0 : 0.0}) > tol::kOperator)
                throw ValidationError("pointer states " + std::to_string(j) + " and " + std::to_string(k) +
                                      " are not orthonormal: inner product " + format_complex(ip));
        }
    }
    if (post_states.size() != n) throw ValidationError("need one post-state group per outcome");
    for (std::size_t k = 0; k < n; ++k) {
        if (post_states[k].size() != eig.multiplicity(k))
            throw ValidationError("post-state group " + std::to_string(k) + " has wrong multiplicity");
        for (std::size_t l = 0; l < post_states[k].size(); ++l) {
            if (post_states[k][l].dims() != eig.system_dims())
                throw ValidationError("post-state dims differ from system dims");
            for (std::size_t j = 0; j <= l; ++j) {
                const Complex ip = post_states[k][j].inner(post_states[k][l]);
                if (std::abs(ip - Complex{j == l ? 1.0 : 0.0}) > tol::kOperator)
                    throw ValidationError("post-states (" + std::to_string(k) + "," + std::to_string(j) + ") and (" +
                                          std::to_string(k) + "," + std::to_string(l) +
                                          ") violate <post_kl|post_kj> = delta_lj: inner product " +
                                          format_complex(ip));
            }
        }
    }

    std::vector<VectorPair> pairs;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < eig.multiplicity(k); ++l)
            pairs.push_back({tensor(eig.eigenvectors()[k][l], ready), tensor(post_states[k][l], pointers[k])});
    Operator u = complete_to_unitary(pairs, concat(eig.system_dims(), ready.dims()));
    return {std::move(eig), std::move(ready), std::move(pointers), std::move(post_states), std::move(u)};
}

/// Coupling with post_kl = phi_kl.
inline MeasurementCoupling build_coupling(EigenStructure eig, StateVector ready, std::vector<StateVector> pointers) {
    auto post = eig.eigenvectors();
    return build_coupling(std::move(eig), std::move(ready), std::move(pointers), std::move(post));
}

struct MeasurementOutcome {
    StateVector final_state;
    std::vector<double> probabilities;
    /// Conditional post-measurement system states; empty where p_k = 0.
    std::vector<std::optional<StateVector>> collapsed;
    DensityOperator apparatus_rho;
    std::vector<StateVector> pointers;
    Dims system_dims;
    Dims apparatus_dims;

    /// Factor indices of the apparatus inside final_state.
    std::vector<std::size_t> apparatus_factors() const {
        std::vector<std::size_t> f(apparatus_dims.size());
        std::iota(f.begin(), f.end(), system_dims.size());
        return f;
    }
};

inline MeasurementOutcome measure(const MeasurementCoupling& c, const StateVector& phi) {
    if (!phi.is_normalized()) throw ValidationError("input state must be normalized");
    if (phi.dims() != c.system_dims()) throw ValidationError("input state dims differ from system dims");
    const auto& eig = c.eig();
    if (!eig.is_complete()) {
        const Vector outside = phi.amplitudes() - eig.domain_projector() * phi.amplitudes();
        if (outside.norm() > tol::kOperator)
            throw ValidationError("input state leaves the span of the measured eigenvectors");
    }

    std::vector<double> p;
    std::vector<std::optional<StateVector>> collapsed;
    for (std::size_t k = 0; k < eig.outcome_count(); ++k) {
        StateVector branch = StateVector::zero(c.system_dims());
        for (std::size_t l = 0; l < eig.multiplicity(k); ++l) {
            const Complex ckl = eig.eigenvectors()[k][l].inner(phi);
            branch = branch + c.post_states()[k][l].scaled(ckl);
        }
        const double pk = branch.inner(branch).real();
        p.push_back(pk);
        if (pk > tol::kDegenerate)
            collapsed.emplace_back(branch.scaled(1.0 / std::sqrt(pk)));
        else
            collapsed.emplace_back(std::nullopt);
    }

    StateVector final_state = c.evolve(phi);
    const std::size_t sys_factors = c.system_dims().size();
    std::vector<std::size_t> keep(c.apparatus_dims().size());
    std::iota(keep.begin(), keep.end(), sys_factors);
    DensityOperator apparatus = partial_trace(DensityOperator::pure(final_state), keep);
    return {std::move(final_state), std::move(p), std::move(collapsed), std::move(apparatus),
            c.pointers(), c.system_dims(), c.apparatus_dims()};
}

/// sum_k sqrt(p_k) Phi_k ⊗ pointer_k over outcomes with p_k > 0.
inline StateVector reconstruct_final_state(const MeasurementOutcome& o) {
    StateVector sum = StateVector::zero(concat(o.system_dims, o.apparatus_dims));
    for (std::size_t k = 0; k < o.probabilities.size(); ++k)
        if (o.collapsed[k]) sum = sum + tensor(*o.collapsed[k], o.pointers[k]).scaled(std::sqrt(o.probabilities[k]));
    return sum;
}

/// sum_kl sqrt(p_k p_l) <Phi_k|Phi_l> |pointer_k><pointer_l|
inline Matrix apparatus_closed_form(const MeasurementOutcome& o) {
    const auto n = static_cast<Eigen::Index>(product(o.apparatus_dims));
    Matrix m = Matrix::Zero(n, n);
    for (std::size_t k = 0; k < o.probabilities.size(); ++k)
        for (std::size_t l = 0; l < o.probabilities.size(); ++l) {
            if (!o.collapsed[k] || !o.collapsed[l]) continue;
            const Complex coeff = std::sqrt(o.probabilities[k] * o.probabilities[l]) * o.collapsed[l]->inner(*o.collapsed[k]);
            m += coeff * o.pointers[k].amplitudes() * o.pointers[l].amplitudes().adjoint();
        }
    return m;
}

inline double reconstruction_residual(const MeasurementOutcome& o) {
    return max_abs(Vector(reconstruct_final_state(o).amplitudes() - o.final_state.amplitudes()));
}

inline double closed_form_residual(const MeasurementOutcome& o) {
    return max_abs(Matrix(apparatus_closed_form(o) - o.apparatus_rho.matrix()));
}

struct ObjectificationReport {
    bool condition_a = false;
    bool condition_b = false;
    /// max_{k≠l} |<pointer_k|rho|pointer_l>|
    double off_diagonal_norm = 0.0;
    /// max_k |<pointer_k|rho|pointer_k> - p_k|
    double diagonal_residual = 0.0;
    /// part of rho outside the pointer span
    double span_residual = 0.0;
    bool gemenge_nontrivial = false;
    bool satisfied() const { return condition_a && condition_b; }
};

/// Checks (A) on the pointer marginal of mixture(claimed) and (B) on the
/// components of `claimed`: every component must reduce to a single pointer
/// projector and the rates per pointer must equal p_k.
inline ObjectificationReport check_objectification(const MeasurementOutcome& o, const GemengeState& claimed,
                                                   const std::vector<std::size_t>& pointer_factors,
                                                   double tolerance = tol::kOperator) {
    ObjectificationReport r;
    const std::size_t n = o.pointers.size();
    const auto pointer_rho = partial_trace(mixture(claimed), pointer_factors);
    if (pointer_rho.dims() != o.apparatus_dims)
        throw ValidationError("pointer factors select dims " + format_dims(pointer_rho.dims()) +
                              ", expected " + format_dims(o.apparatus_dims));

    const Matrix& rho = pointer_rho.matrix();
    Matrix in_span = Matrix::Zero(rho.rows(), rho.cols());
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) {
            const Vector& pk = o.pointers[k].amplitudes();
            const Vector& pl = o.pointers[l].amplitudes();
            const Complex rkl = pk.dot(rho * pl);
            in_span += rkl * pk * pl.adjoint();
            if (k == l)
                r.diagonal_residual = std::max(r.diagonal_residual, std::abs(rkl - o.probabilities[k]));
            else
                r.off_diagonal_norm = std::max(r.off_diagonal_norm, std::abs(rkl));
        }
    r.span_residual = max_abs(Matrix(rho - in_span));
    r.condition_a = r.off_diagonal_norm <= tolerance && r.diagonal_residual <= tolerance && r.span_residual <= tolerance;

    r.gemenge_nontrivial = !is_trivial(claimed);
    std::vector<double> rate(n, 0.0);
    bool matched = true;
    for (const auto& comp : claimed.components()) {
        const auto marginal = partial_trace(comp.state, pointer_factors);
        std::optional<std::size_t> hit;
        for (std::size_t k = 0; k < n && !hit; ++k)
            if (max_abs(Matrix(marginal.matrix() - Operator::projector(o.pointers[k]).matrix())) <= tolerance) hit = k;
        if (!hit) {
            matched = false;
            break;
        }
        rate[*hit] += comp.weight;
    }
    bool rates_ok = matched;
    for (std::size_t k = 0; k < n && rates_ok; ++k) rates_ok = std::abs(rate[k] - o.probabilities[k]) <= tolerance;
    r.condition_b = rates_ok;
    return r;
}

/// Objectification of the bare premeasurement: the only gemenge available is
/// the trivial one of the final vector state.
inline ObjectificationReport check_objectification(const MeasurementOutcome& o, double tolerance = tol::kOperator) {
    return check_objectification(o, GemengeState::pure(o.final_state), o.apparatus_factors(), tolerance);
}

}  // namespace clusep
