#pragma once

// Seeded random fixtures shared by the unit and acceptance suites.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "clusep/clusep.hpp"

namespace fixtures {

using namespace clusep;

inline std::vector<StateVector> orthonormal_set(std::size_t d, std::size_t count, Rng& rng) {
    const Matrix u = random_unitary(d, rng);
    std::vector<StateVector> out;
    for (std::size_t i = 0; i < count; ++i) out.emplace_back(Dims{d}, u.col(static_cast<Eigen::Index>(i)));
    return out;
}

/// Random composition of `total` into `parts` positive integers.
inline std::vector<std::size_t> random_multiplicities(std::size_t total, std::size_t parts, Rng& rng) {
    std::vector<std::size_t> m(parts, 1);
    std::uniform_int_distribution<std::size_t> pick(0, parts - 1);
    for (std::size_t extra = total - parts; extra > 0; --extra) ++m[pick(rng)];
    return m;
}

struct CouplingFixture {
    MeasurementCoupling coupling;
    StateVector input;
};

/// Complete eigenbasis of C^d in `outcomes` groups; post-states of each group
/// are an independent random orthonormal set, so different groups overlap.
/// The apparatus is widened to at least `outcomes` dimensions.
inline CouplingFixture random_coupling(std::uint64_t seed, std::size_t d, std::size_t outcomes, std::size_t apparatus_dim) {
    Rng rng(seed);
    apparatus_dim = std::max(apparatus_dim, outcomes);
    const auto mult = random_multiplicities(d, outcomes, rng);
    const auto basis = orthonormal_set(d, d, rng);
    std::vector<double> values;
    std::vector<std::vector<StateVector>> vecs, post;
    std::size_t next = 0;
    for (std::size_t k = 0; k < outcomes; ++k) {
        values.push_back(static_cast<double>(k) - 0.5);
        vecs.emplace_back(basis.begin() + static_cast<std::ptrdiff_t>(next),
                          basis.begin() + static_cast<std::ptrdiff_t>(next + mult[k]));
        next += mult[k];
        post.push_back(orthonormal_set(d, mult[k], rng));
    }
    const auto app = orthonormal_set(apparatus_dim, outcomes, rng);
    StateVector ready = random_state({apparatus_dim}, rng);
    auto coupling = build_coupling(EigenStructure::complete(values, vecs), ready, app, post);
    return {std::move(coupling), random_state({d}, rng)};
}

/// One-particle state on the grid with random amplitudes on `points`.
inline StateVector state_on(const GridSpace& space, const std::vector<std::size_t>& points, Rng& rng) {
    return random_wavefunction(space, Region(space, points), rng).as_state();
}

struct RegistrationFixture {
    RegistrationModel model;
    StateVector input;
};

/// Two detectors on a 6-point grid: preparation {0,1}, detectors {2,3} and
/// {4,5}. `particles` gives M_k per detector (each ≤ 1).
inline RegistrationFixture two_detector_fixture(std::uint64_t seed, Statistics stats, std::vector<std::size_t> particles) {
    Rng rng(seed);
    const GridSpace space(6, 1.0);
    const std::vector<std::vector<std::size_t>> regions{{2, 3}, {4, 5}};
    const Matrix u = random_unitary(2, rng);
    std::vector<std::vector<StateVector>> vecs(2), post(2);
    for (std::size_t k = 0; k < 2; ++k) {
        Vector v = Vector::Zero(6);
        v.head(2) = u.col(static_cast<Eigen::Index>(k));
        vecs[k].emplace_back(Dims{6}, v);
        post[k].push_back(state_on(space, regions[k], rng));
    }
    std::vector<DetectorSpec> dets;
    for (std::size_t k = 0; k < 2; ++k) {
        std::optional<DensityOperator> t;
        if (particles[k] > 0) t = occupied_state({state_on(space, regions[k], rng)}, stats);
        dets.push_back({Region(space, regions[k]), t});
    }
    auto model = RegistrationModel::build(space, Region(space, {0, 1}), EigenStructure::on_subspace({1.0, -1.0}, vecs),
                                          post, dets, stats);
    return {std::move(model), state_on(space, {0, 1}, rng)};
}

/// Three detectors with two-fold degenerate outcomes on an 8-point grid is too
/// large with particles; this variant uses three nondegenerate outcomes:
/// preparation {0,1,2}, detectors {3,4}, {5,6}, {7}, at most one particle in
/// total.
inline RegistrationFixture three_detector_fixture(std::uint64_t seed, Statistics stats, std::size_t loaded_detector) {
    Rng rng(seed);
    const GridSpace space(8, 0.5);
    const std::vector<std::vector<std::size_t>> regions{{3, 4}, {5, 6}, {7}};
    const Matrix u = random_unitary(3, rng);
    std::vector<std::vector<StateVector>> vecs(3), post(3);
    for (std::size_t k = 0; k < 3; ++k) {
        Vector v = Vector::Zero(8);
        v.head(3) = u.col(static_cast<Eigen::Index>(k));
        vecs[k].emplace_back(Dims{8}, v);
        post[k].push_back(state_on(space, regions[k], rng));
    }
    std::vector<DetectorSpec> dets;
    for (std::size_t k = 0; k < 3; ++k) {
        std::optional<DensityOperator> t;
        // A fermion occupying the single-site detector would block absorption.
        if (k == loaded_detector && k < 2) t = occupied_state({state_on(space, regions[k], rng)}, stats);
        dets.push_back({Region(space, regions[k]), t});
    }
    auto model = RegistrationModel::build(space, Region(space, {0, 1, 2}),
                                          EigenStructure::on_subspace({0.0, 1.0, 2.0}, vecs), post, dets, stats);
    return {std::move(model), state_on(space, {0, 1, 2}, rng)};
}

}  // namespace fixtures
