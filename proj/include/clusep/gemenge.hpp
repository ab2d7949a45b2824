#pragma once

// Density operators that carry the convex decomposition fixed by their
// preparation (gemenge structure). The decomposition is provenance: it is
// created by preparation constructors and propagated, never inferred from a
// bare matrix.

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "clusep/hilbert.hpp"

namespace clusep {

struct GemengeComponent {
    double weight;
    DensityOperator state;
};

class GemengeState {
public:
    /// Trivial gemenge of a state prepared without any random mixing.
    explicit GemengeState(DensityOperator state) : dims_(state.dims()) {
        components_.push_back({1.0, std::move(state)});
    }

    /// A vector state admits only the trivial gemenge structure.
    static GemengeState pure(const StateVector& v) { return GemengeState(DensityOperator::pure(v)); }

    /// Random mixture of preparations with the given rates.
    static GemengeState mixed(std::vector<GemengeComponent> components) {
        if (components.empty()) throw ValidationError("gemenge needs at least one component");
        double total = 0.0;
        for (std::size_t k = 0; k < components.size(); ++k) {
            const auto& c = components[k];
            if (!(c.weight > 0.0 && c.weight <= 1.0 + tol::kOperator))
                throw ValidationError("gemenge weight " + std::to_string(k) + " is outside (0, 1]");
            if (c.state.dims() != components.front().state.dims())
                throw ValidationError("gemenge components have different dims");
            total += c.weight;
        }
        if (std::abs(total - 1.0) > tol::kOperator)
            throw ValidationError("gemenge weights sum to " + std::to_string(total));
        return GemengeState(std::move(components));
    }

    const std::vector<GemengeComponent>& components() const { return components_; }
    const Dims& dims() const { return dims_; }
    std::size_t size() const { return components_.size(); }

private:
    explicit GemengeState(std::vector<GemengeComponent> components)
        : dims_(components.front().state.dims()), components_(std::move(components)) {}

    Dims dims_;
    std::vector<GemengeComponent> components_;
};

/// sum_k w_k T_k, forgetting the decomposition.
inline DensityOperator mixture(const GemengeState& g) {
    const auto n = static_cast<Eigen::Index>(product(g.dims()));
    Matrix m = Matrix::Zero(n, n);
    for (const auto& c : g.components()) m += c.weight * c.state.matrix();
    return {g.dims(), std::move(m)};
}

inline GemengeState evolve(const GemengeState& g, const Operator& u) {
    if (u.dims_in() != g.dims() || u.dims_out() != g.dims())
        throw ValidationError("evolution dims " + format_dims(u.dims_in()) + " do not match gemenge dims " +
                              format_dims(g.dims()));
    if (!u.is_unitary()) throw ValidationError("evolution operator is not unitary");
    std::vector<GemengeComponent> out;
    out.reserve(g.size());
    for (const auto& c : g.components())
        out.push_back({c.weight, DensityOperator(g.dims(), u.matrix() * c.state.matrix() * u.matrix().adjoint())});
    return GemengeState::mixed(std::move(out));
}

/// Attaches partner state T'_k to component k: (w_k, T_k ⊗ T'_k).
inline GemengeState compose(const GemengeState& g, const std::vector<DensityOperator>& partners) {
    if (partners.size() != g.size())
        throw ValidationError("compose needs one partner per component: got " + std::to_string(partners.size()) +
                              " for " + std::to_string(g.size()));
    std::vector<GemengeComponent> out;
    out.reserve(g.size());
    for (std::size_t k = 0; k < g.size(); ++k)
        out.push_back({g.components()[k].weight, tensor(g.components()[k].state, partners[k])});
    return GemengeState::mixed(std::move(out));
}

/// Merges each group of components into one preparation.
inline GemengeState coarsen(const GemengeState& g, const std::vector<std::vector<std::size_t>>& groups) {
    std::vector<int> seen(g.size(), 0);
    for (const auto& group : groups) {
        if (group.empty()) throw ValidationError("coarsening group is empty");
        for (std::size_t k : group) {
            if (k >= g.size()) throw ValidationError("coarsening index " + std::to_string(k) + " out of range");
            ++seen[k];
        }
    }
    if (std::any_of(seen.begin(), seen.end(), [](int s) { return s != 1; }))
        throw ValidationError("coarsening groups do not partition the components");

    std::vector<GemengeComponent> out;
    for (const auto& group : groups) {
        double w = 0.0;
        const auto n = static_cast<Eigen::Index>(product(g.dims()));
        Matrix m = Matrix::Zero(n, n);
        for (std::size_t k : group) {
            w += g.components()[k].weight;
            m += g.components()[k].weight * g.components()[k].state.matrix();
        }
        out.push_back({w, DensityOperator(g.dims(), m / w)});
    }
    return GemengeState::mixed(std::move(out));
}

inline bool is_trivial(const GemengeState& g, double tolerance = tol::kOperator) {
    const auto& first = g.components().front().state.matrix();
    return std::all_of(g.components().begin(), g.components().end(),
                       [&](const GemengeComponent& c) { return max_abs(c.state.matrix() - first) <= tolerance; });
}

}  // namespace clusep
