#pragma once

// Structured-text (JSON) encodings. Complex numbers are [re, im] pairs,
// matrices are arrays of rows.

#include <cmath>
#include <string>

#include <json.hpp>

#include "clusep/assertion.hpp"
#include "clusep/bcl.hpp"
#include "clusep/gemenge.hpp"
#include "clusep/grid.hpp"
#include "clusep/hilbert.hpp"
#include "clusep/separability.hpp"

namespace clusep::io {

using json = nlohmann::json;

/// Non-finite doubles have no JSON encoding; they become null.
inline json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json encode(Complex z) { return json::array({z.real(), z.imag()}); }

inline json encode(const Vector& v) {
    json out = json::array();
    for (const auto& z : v) out.push_back(encode(z));
    return out;
}

inline json encode(const Matrix& m) {
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(encode(Vector(m.row(i).transpose())));
    return out;
}

inline Complex decode_complex(const json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    throw ValidationError("expected a number or an [re, im] pair, got " + j.dump());
}

inline Vector decode_vector(const json& j) {
    if (!j.is_array()) throw ValidationError("expected an array of amplitudes");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = decode_complex(j[i]);
    return v;
}

inline Matrix decode_matrix(const json& j) {
    if (!j.is_array() || j.empty()) throw ValidationError("expected a nonempty array of matrix rows");
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_array() || j[i].size() != cols) throw ValidationError("matrix rows have different lengths");
        m.row(static_cast<Eigen::Index>(i)) = decode_vector(j[i]).transpose();
    }
    return m;
}

inline json encode(const WaveFunction& w) {
    return {{"n", w.space().n()}, {"spacing", w.space().spacing()}, {"amplitudes", encode(w.amplitudes())}};
}

inline json encode(const KernelOperator& a) {
    return {{"n", a.space().n()}, {"spacing", a.space().spacing()}, {"entries", encode(a.entries())}};
}

inline WaveFunction decode_wavefunction(const json& j) {
    return {GridSpace(j.at("n").get<std::size_t>(), j.at("spacing").get<double>()), decode_vector(j.at("amplitudes"))};
}

inline KernelOperator decode_kernel(const json& j) {
    return {GridSpace(j.at("n").get<std::size_t>(), j.at("spacing").get<double>()), decode_matrix(j.at("entries"))};
}

inline json encode(const GemengeState& g) {
    json comps = json::array();
    for (const auto& c : g.components()) comps.push_back({{"weight", c.weight}, {"matrix", encode(c.state.matrix())}});
    return {{"dims", g.dims()}, {"components", comps}};
}

inline GemengeState decode_gemenge(const json& j) {
    const Dims dims = j.at("dims").get<Dims>();
    std::vector<GemengeComponent> comps;
    for (const auto& c : j.at("components"))
        comps.push_back({c.at("weight").get<double>(), DensityOperator(dims, decode_matrix(c.at("matrix")))});
    return GemengeState::mixed(std::move(comps));
}

inline json encode(const Assertion& a) {
    return {{"name", a.name}, {"pass", a.pass}, {"value", number(a.value)}, {"tolerance", a.tolerance}};
}

inline json encode(const ObjectificationReport& r) {
    return {{"condition_A", r.condition_a},
            {"condition_B", r.condition_b},
            {"off_diagonal_norm", r.off_diagonal_norm},
            {"diagonal_residual", r.diagonal_residual},
            {"span_residual", r.span_residual},
            {"gemenge_nontrivial", r.gemenge_nontrivial},
            {"objectification", r.satisfied() ? "satisfied" : "failed"}};
}

inline json encode(const SeparabilityReport& r) {
    return {{"avg_experiment_one", r.avg_experiment_one},
            {"avg_experiment_two", r.avg_experiment_two},
            {"discrepancy", r.discrepancy},
            {"disturbance_term", r.disturbance_term},
            {"disturbance_residual", r.disturbance_residual},
            {"overlap", r.overlap},
            {"d_local", r.d_local},
            {"supports_disjoint", r.supports_disjoint}};
}

inline json encode(const SeparationStatus& s) {
    json w = nullptr;
    if (s.witness)
        w = {{"partner", s.witness->partner},
             {"trial", s.witness->trial},
             {"discrepancy", s.witness->discrepancy},
             {"description", s.witness->description},
             {"observable", encode(s.witness->observable)}};
    return {{"region", s.region.points()}, {"holds", s.holds}, {"support_meets_region", s.support_meets_region},
            {"witness", w}};
}

}  // namespace clusep::io
