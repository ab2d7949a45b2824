#pragma once

// Configuration-driven experiment runner. A configuration is a JSON document
// naming one of the experiments "separability", "bcl" or "registration";
// see README.md for the schema. Reports contain the configuration echo, the
// library version, metrics and named assertions. All numbers in a report are
// produced by the library operations; the timestamp is attached separately
// by with_timestamp() and is the only nondeterministic field.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <future>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "clusep/bcl.hpp"
#include "clusep/grid.hpp"
#include "clusep/io.hpp"
#include "clusep/registration.hpp"
#include "clusep/separability.hpp"

#ifndef CLUSEP_VERSION
#define CLUSEP_VERSION "0.1.0"
#endif

namespace clusep::experiment {

using json = nlohmann::json;

inline constexpr const char* kLibraryVersion = CLUSEP_VERSION;

namespace detail {

inline std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

[[noreturn]] inline void bad_field(const std::string& path, const std::string& what) {
    throw ValidationError("config field '" + path + "': " + what);
}

inline const json& field(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) bad_field(join(path, key), "missing");
    return j.at(key);
}

inline std::size_t index_value(const json& j, const std::string& path) {
    if (!j.is_number_integer() || j.get<long long>() < 0) bad_field(path, "expected a nonnegative integer");
    return j.get<std::size_t>();
}

inline double real_value(const json& j, const std::string& path) {
    if (!j.is_number()) bad_field(path, "expected a number");
    return j.get<double>();
}

inline std::vector<std::size_t> index_list(const json& j, const std::string& path) {
    if (!j.is_array()) bad_field(path, "expected an array of grid indices");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(index_value(j[i], path + "." + std::to_string(i)));
    return out;
}

inline GridSpace parse_grid(const json& cfg) {
    const json& g = field(cfg, "grid", "");
    const std::size_t n = index_value(field(g, "n", "grid"), "grid.n");
    const double h = g.contains("spacing") ? real_value(g.at("spacing"), "grid.spacing") : 1.0;
    try {
        return {n, h};
    } catch (const ValidationError& e) {
        bad_field("grid", e.what());
    }
}

inline Region parse_region(const json& j, const GridSpace& space, const std::string& path) {
    auto points = index_list(j, path);
    for (std::size_t p : points)
        if (p >= space.n()) bad_field(path, "index " + std::to_string(p) + " outside the grid");
    return {space, std::move(points)};
}

inline Statistics parse_stats(const json& cfg) {
    if (!cfg.contains("statistics")) return Statistics::Bose;
    const json& s = cfg.at("statistics");
    if (!s.is_string()) bad_field("statistics", "expected \"bose\" or \"fermi\"");
    auto st = parse_statistics(s.get<std::string>());
    if (!st) bad_field("statistics", "expected \"bose\" or \"fermi\"");
    return *st;
}

inline std::uint64_t parse_seed(const json& cfg) {
    return cfg.contains("seed") ? index_value(cfg.at("seed"), "seed") : 0;
}

inline double tolerance(const json& cfg, const std::string& key, double fallback) {
    if (!cfg.contains("tolerances")) return fallback;
    const json& t = cfg.at("tolerances");
    return t.contains(key) ? real_value(t.at(key), "tolerances." + key) : fallback;
}

inline Vector decode_amplitudes(const json& j, std::size_t n, const std::string& path) {
    Vector v;
    try {
        v = io::decode_vector(j);
    } catch (const ValidationError& e) {
        bad_field(path, e.what());
    }
    if (static_cast<std::size_t>(v.size()) != n) bad_field(path, "expected " + std::to_string(n) + " amplitudes");
    return v;
}

// Raw (unnormalized) amplitudes of a one-particle state specification.
inline Vector raw_state(const json& spec, const GridSpace& space, const std::string& path) {
    const auto n = static_cast<Eigen::Index>(space.n());
    if (spec.is_number_integer()) {
        const std::size_t i = index_value(spec, path);
        if (i >= space.n()) bad_field(path, "basis index outside the grid");
        return Vector::Unit(n, static_cast<Eigen::Index>(i));
    }
    if (!spec.is_object()) bad_field(path, "expected a state specification object");

    if (spec.contains("basis")) {
        const json& b = spec.at("basis");
        const auto idx = b.is_array() ? index_list(b, path + ".basis")
                                      : std::vector<std::size_t>{index_value(b, path + ".basis")};
        Vector coeff = Vector::Ones(static_cast<Eigen::Index>(idx.size()));
        if (spec.contains("coefficients")) coeff = decode_amplitudes(spec.at("coefficients"), idx.size(), path + ".coefficients");
        Vector v = Vector::Zero(n);
        for (std::size_t k = 0; k < idx.size(); ++k) {
            if (idx[k] >= space.n()) bad_field(path + ".basis", "index outside the grid");
            v(static_cast<Eigen::Index>(idx[k])) += coeff(static_cast<Eigen::Index>(k));
        }
        return v;
    }
    if (spec.contains("amplitudes")) return decode_amplitudes(spec.at("amplitudes"), space.n(), path + ".amplitudes");
    if (spec.contains("gaussian")) {
        const json& g = spec.at("gaussian");
        const double c = real_value(field(g, "center", path + ".gaussian"), path + ".gaussian.center");
        const double w = real_value(field(g, "width", path + ".gaussian"), path + ".gaussian.width");
        if (!(w > 0.0)) bad_field(path + ".gaussian.width", "must be positive");
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = std::exp(-0.5 * std::pow((static_cast<double>(i) - c) / w, 2));
        return v;
    }
    if (spec.contains("rotation")) {
        const json& r = spec.at("rotation");
        const std::string rp = path + ".rotation";
        const double angle = real_value(field(r, "angle", rp), rp + ".angle");
        const Vector from = WaveFunction::normalized(space, raw_state(field(r, "from", rp), space, rp + ".from")).amplitudes();
        const Vector to = WaveFunction::normalized(space, raw_state(field(r, "to", rp), space, rp + ".to")).amplitudes();
        return std::cos(angle) * from + std::sin(angle) * to;
    }
    if (spec.contains("random")) {
        const json& r = spec.at("random");
        Rng rng(r.contains("seed") ? index_value(r.at("seed"), path + ".random.seed") : 0);
        const Region where = r.contains("region") ? parse_region(r.at("region"), space, path + ".random.region")
                                                  : Region::full(space);
        return random_wavefunction(space, where, rng).amplitudes();
    }
    bad_field(path, "expected one of basis, amplitudes, gaussian, rotation, random");
}

inline WaveFunction parse_wavefunction(const json& spec, const GridSpace& space, const std::string& path) {
    return WaveFunction::normalized(space, raw_state(spec, space, path));
}

inline StateVector parse_state_vector(const json& spec, const GridSpace& space, const std::string& path) {
    return parse_wavefunction(spec, space, path).as_state();
}

inline KernelOperator parse_observable(const json& spec, const GridSpace& space, const json& cfg,
                                       const std::string& path) {
    if (!spec.is_object()) bad_field(path, "expected an observable specification object");
    const std::string kind = spec.contains("kind") && spec.at("kind").is_string() ? spec.at("kind").get<std::string>() : "";
    const auto n = static_cast<Eigen::Index>(space.n());
    std::optional<KernelOperator> a;
    if (kind == "identity") {
        a = KernelOperator::resolution_of_identity(space);
    } else if (kind == "projector") {
        a = KernelOperator::position_projector(space, parse_region(field(spec, "region", path), space, path + ".region"));
    } else if (kind == "diagonal") {
        const Vector vals = decode_amplitudes(field(spec, "values", path), space.n(), path + ".values");
        a = KernelOperator(space, Matrix(vals.asDiagonal()));
    } else if (kind == "matrix") {
        Matrix m;
        try {
            m = io::decode_matrix(field(spec, "entries", path));
        } catch (const ValidationError& e) {
            bad_field(path + ".entries", e.what());
        }
        if (m.rows() != n || m.cols() != n) bad_field(path + ".entries", "expected an n x n matrix");
        a = KernelOperator(space, m);
    } else if (kind == "random") {
        Rng rng(spec.contains("seed") ? index_value(spec.at("seed"), path + ".seed") : parse_seed(cfg));
        a = random_observable(space, rng);
    } else {
        bad_field(path + ".kind", "expected identity, projector, diagonal, matrix or random");
    }
    if (spec.contains("localize")) {
        const json& loc = spec.at("localize");
        if (loc.is_boolean()) {
            if (loc.get<bool>()) a = localize(*a, parse_region(field(cfg, "region", ""), space, "region"));
        } else {
            a = localize(*a, parse_region(loc, space, path + ".localize"));
        }
    }
    if (!a->is_hermitian()) bad_field(path, "observable must be Hermitian");
    return *a;
}

inline json base_report(const json& cfg, const std::string& experiment) {
    return {{"config_echo", cfg}, {"library_version", kLibraryVersion}, {"experiment", experiment},
            {"metrics", json::object()}, {"assertions", json::array()}};
}

inline json run_separability(const json& cfg) {
    const GridSpace space = parse_grid(cfg);
    const Statistics stats = parse_stats(cfg);
    const Region d = parse_region(field(cfg, "region", ""), space, "region");
    const WaveFunction psi = parse_wavefunction(field(cfg, "psi", ""), space, "psi");
    const WaveFunction phi = parse_wavefunction(field(cfg, "phi", ""), space, "phi");
    const KernelOperator a = parse_observable(field(cfg, "observable", ""), space, cfg, "observable");
    const std::size_t trials = cfg.contains("trials") ? index_value(cfg.at("trials"), "trials") : 8;
    if (trials < 1) bad_field("trials", "must be at least 1");

    const auto report = check_cluster_separability(psi, phi, a, d, stats);
    const auto status = separation_status(psi, {phi}, d, stats, trials, parse_seed(cfg));

    json out = base_report(cfg, "separability");
    out["metrics"] = io::encode(report);
    out["metrics"]["separation_status"] = io::encode(status);
    out["metrics"]["statistics"] = std::string(to_string(stats));

    json& as = out["assertions"];
    if (report.d_local && report.supports_disjoint)
        as.push_back(io::encode(check_at_most("cluster_separability", report.discrepancy,
                                              tolerance(cfg, "discrepancy", tol::kNorm))));
    if (report.overlap <= tol::kNorm)
        as.push_back(io::encode(check_at_most("disturbance_identity", std::abs(report.disturbance_residual),
                                              tolerance(cfg, "operator", tol::kOperator))));
    return out;
}

struct MeasurementSetup {
    GridSpace space;
    Statistics stats;
    Region preparation;
    EigenStructure eig;
    std::vector<std::vector<StateVector>> post_states;
    std::vector<DetectorSpec> detectors;
    StateVector input;
};

inline MeasurementSetup parse_measurement(const json& cfg) {
    const GridSpace space = parse_grid(cfg);
    const Statistics stats = parse_stats(cfg);
    const Region prep = cfg.contains("preparation_region")
                            ? parse_region(cfg.at("preparation_region"), space, "preparation_region")
                            : Region::empty(space);

    const json& obs = field(cfg, "observable", "");
    const json& values_j = field(obs, "eigenvalues", "observable");
    if (!values_j.is_array() || values_j.empty()) bad_field("observable.eigenvalues", "expected a nonempty array");
    std::vector<double> values;
    for (std::size_t k = 0; k < values_j.size(); ++k)
        values.push_back(real_value(values_j[k], "observable.eigenvalues." + std::to_string(k)));

    std::vector<std::vector<StateVector>> vecs;
    if (obs.contains("eigenvectors")) {
        const json& ev = obs.at("eigenvectors");
        if (!ev.is_array() || ev.size() != values.size())
            bad_field("observable.eigenvectors", "expected one group per eigenvalue");
        for (std::size_t k = 0; k < ev.size(); ++k) {
            if (!ev[k].is_array() || ev[k].empty()) bad_field("observable.eigenvectors." + std::to_string(k), "expected a nonempty group");
            vecs.emplace_back();
            for (std::size_t l = 0; l < ev[k].size(); ++l)
                vecs.back().push_back(parse_state_vector(ev[k][l], space, "observable.eigenvectors." + std::to_string(k) + "." + std::to_string(l)));
        }
    } else {
        // Consecutive canonical basis vectors, grouped by multiplicity.
        std::vector<std::size_t> mult(values.size(), 1);
        if (obs.contains("multiplicities")) {
            mult = index_list(obs.at("multiplicities"), "observable.multiplicities");
            if (mult.size() != values.size()) bad_field("observable.multiplicities", "expected one entry per eigenvalue");
        }
        std::size_t next = 0;
        for (std::size_t m : mult) {
            vecs.emplace_back();
            for (std::size_t l = 0; l < m; ++l, ++next) {
                if (next >= space.n()) bad_field("observable.multiplicities", "exceed the grid size");
                vecs.back().push_back(StateVector::basis({space.n()}, next));
            }
        }
    }

    std::vector<std::vector<StateVector>> post = vecs;
    if (cfg.contains("post_states")) {
        const json& ps = cfg.at("post_states");
        if (!ps.is_array() || ps.size() != vecs.size()) bad_field("post_states", "expected one group per eigenvalue");
        for (std::size_t k = 0; k < ps.size(); ++k) {
            if (!ps[k].is_array() || ps[k].size() != vecs[k].size())
                bad_field("post_states." + std::to_string(k), "group size must equal the eigenvalue multiplicity");
            for (std::size_t l = 0; l < ps[k].size(); ++l)
                post[k][l] = parse_state_vector(ps[k][l], space, "post_states." + std::to_string(k) + "." + std::to_string(l));
        }
    }

    std::vector<DetectorSpec> detectors;
    if (cfg.contains("detectors")) {
        const json& ds = cfg.at("detectors");
        if (!ds.is_array()) bad_field("detectors", "expected an array");
        for (std::size_t k = 0; k < ds.size(); ++k) {
            const std::string p = "detectors." + std::to_string(k);
            const Region region = parse_region(field(ds[k], "region", p), space, p + ".region");
            const std::size_t m = ds[k].contains("particles") ? index_value(ds[k].at("particles"), p + ".particles") : 0;
            std::optional<DensityOperator> particles;
            if (m > 0) {
                const auto orb = index_list(field(ds[k], "orbitals", p), p + ".orbitals");
                if (orb.empty()) bad_field(p + ".orbitals", "need at least one orbital");
                std::vector<StateVector> orbitals;
                for (std::size_t i = 0; i < m; ++i) {
                    if (orb[i % orb.size()] >= space.n()) bad_field(p + ".orbitals", "index outside the grid");
                    orbitals.push_back(StateVector::basis({space.n()}, orb[i % orb.size()]));
                }
                particles = occupied_state(orbitals, stats);
            }
            detectors.push_back({region, std::move(particles)});
        }
    }

    StateVector input = parse_state_vector(field(cfg, "input", ""), space, "input");
    // Fewer eigenvectors than grid points: the observable is defined on the
    // subspace the preparation produces.
    EigenStructure eig = EigenStructure::on_subspace(values, vecs);
    return {space, stats, prep, std::move(eig), std::move(post), std::move(detectors), std::move(input)};
}

inline json probabilities_json(const std::vector<double>& p) {
    json out = json::array();
    for (double x : p) out.push_back(x);
    return out;
}

inline json run_bcl(const json& cfg) {
    MeasurementSetup s = parse_measurement(cfg);
    const std::size_t n = s.eig.outcome_count();

    // Apparatus: explicit block, else the detector array's pointers, else
    // canonical vectors of C^{N+1} with e_0 ready.
    StateVector ready = StateVector::basis({n + 1}, 0);
    std::vector<StateVector> pointers;
    for (std::size_t k = 0; k < n; ++k) pointers.push_back(StateVector::basis({n + 1}, k + 1));
    if (cfg.contains("apparatus")) {
        const json& ap = cfg.at("apparatus");
        const std::size_t dim = index_value(field(ap, "dim", "apparatus"), "apparatus.dim");
        if (dim < 1) bad_field("apparatus.dim", "must be positive");
        auto vec = [&](const json& j, const std::string& path) {
            if (j.is_number_integer()) {
                const std::size_t i = index_value(j, path);
                if (i >= dim) bad_field(path, "index outside the apparatus space");
                return StateVector::basis({dim}, i);
            }
            return normalize(StateVector({dim}, decode_amplitudes(j, dim, path)));
        };
        ready = vec(field(ap, "ready", "apparatus"), "apparatus.ready");
        const json& ps = field(ap, "pointers", "apparatus");
        if (!ps.is_array() || ps.size() != n) bad_field("apparatus.pointers", "expected one pointer per eigenvalue");
        pointers.clear();
        for (std::size_t k = 0; k < n; ++k) pointers.push_back(vec(ps[k], "apparatus.pointers." + std::to_string(k)));
    } else if (!s.detectors.empty()) {
        // Same pointer array as the registration model built from this config.
        auto model = RegistrationModel::build(s.space, s.preparation, s.eig, s.post_states, s.detectors, s.stats);
        ready = model.coupling().ready();
        pointers = model.coupling().pointers();
    }

    const auto coupling = build_coupling(std::move(s.eig), std::move(ready), std::move(pointers), std::move(s.post_states));
    const auto outcome = measure(coupling, s.input);
    const auto obj = check_objectification(outcome);

    json out = base_report(cfg, "bcl");
    json& m = out["metrics"];
    m = io::encode(obj);
    m["probabilities"] = probabilities_json(outcome.probabilities);
    m["reconstruction_residual"] = reconstruction_residual(outcome);
    m["closed_form_residual"] = closed_form_residual(outcome);
    m["apparatus_rho"] = io::encode(outcome.apparatus_rho.matrix());
    json overlaps = json::array();
    for (std::size_t k = 0; k < n; ++k) {
        json row = json::array();
        for (std::size_t l = 0; l < n; ++l)
            row.push_back(outcome.collapsed[k] && outcome.collapsed[l]
                              ? json(std::abs(outcome.collapsed[k]->inner(*outcome.collapsed[l])))
                              : json(nullptr));
        overlaps.push_back(row);
    }
    m["collapsed_overlaps"] = overlaps;

    const double tol_op = tolerance(cfg, "operator", tol::kOperator);
    double psum = 0.0;
    for (double p : outcome.probabilities) psum += p;
    const Matrix& u = coupling.unitary().matrix();
    json& as = out["assertions"];
    as.push_back(io::encode(check_at_most("probability_sum", std::abs(psum - 1.0), tol_op)));
    as.push_back(io::encode(check_at_most("final_state_reconstruction", reconstruction_residual(outcome), tol_op)));
    as.push_back(io::encode(check_at_most("apparatus_closed_form", closed_form_residual(outcome), tol_op)));
    as.push_back(io::encode(check_at_most(
        "coupling_unitarity", max_abs(Matrix(u.adjoint() * u - Matrix::Identity(u.rows(), u.cols()))), tol_op)));
    return out;
}

inline json run_registration(const json& cfg) {
    MeasurementSetup s = parse_measurement(cfg);
    if (s.detectors.empty()) bad_field("detectors", "registration needs one detector per eigenvalue");
    AbsorbedState absorbed = AbsorbedState::Conditional;
    if (cfg.contains("absorbed_state")) {
        const json& a = cfg.at("absorbed_state");
        if (a == "conditional")
            absorbed = AbsorbedState::Conditional;
        else if (a == "first_post_state")
            absorbed = AbsorbedState::FirstPostState;
        else
            bad_field("absorbed_state", "expected \"conditional\" or \"first_post_state\"");
    }
    const auto model = RegistrationModel::build(s.space, s.preparation, std::move(s.eig), std::move(s.post_states),
                                                std::move(s.detectors), s.stats, absorbed);
    const std::size_t trials = cfg.contains("trials") ? index_value(cfg.at("trials"), "trials") : 8;
    if (trials < 1) bad_field("trials", "must be at least 1");
    const auto report = verify_model(model, s.input, parse_seed(cfg), trials);
    const auto& st = report.state;

    json out = base_report(cfg, "registration");
    json& m = out["metrics"];
    m = io::encode(report.objectification);
    m["probabilities"] = probabilities_json(st.probabilities);
    json nus = json::array();
    for (const auto& nu : st.nu_squared) nus.push_back(nu ? json(*nu) : json(nullptr));
    m["nu_squared"] = nus;
    m["retained_outcomes"] = st.retained;
    json weights = json::array(), layouts = json::array();
    for (const auto& c : st.gemenge.components()) weights.push_back(c.weight);
    for (const auto& layout : st.layouts) {
        json blocks = json::array();
        for (const auto& b : layout)
            blocks.push_back({{"detector", b.detector}, {"particles", b.particles}, {"holds_system", b.holds_system}});
        layouts.push_back(blocks);
    }
    m["gemenge_weights"] = weights;
    m["component_layouts"] = layouts;
    m["component_dims"] = st.gemenge.dims();
    m["cross_orthonormality_residual"] = model.cross_orthonormality_residual();

    for (const auto& a : report.assertions) out["assertions"].push_back(io::encode(a));
    return out;
}

}  // namespace detail

/// Runs the experiment a configuration names. Throws ValidationError for bad
/// configurations and DegenerateError when a projection annihilates a state.
inline json run(const json& cfg) {
    if (!cfg.is_object()) throw ValidationError("configuration must be a JSON object");
    const json& e = detail::field(cfg, "experiment", "");
    if (!e.is_string()) detail::bad_field("experiment", "expected a string");
    const std::string name = e.get<std::string>();
    if (name == "separability") return detail::run_separability(cfg);
    if (name == "bcl") return detail::run_bcl(cfg);
    if (name == "registration") return detail::run_registration(cfg);
    detail::bad_field("experiment", "expected separability, bcl or registration, got \"" + name + "\"");
}

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline json with_timestamp(json report, const std::string& stamp = utc_timestamp()) {
    report["timestamp"] = stamp;
    return report;
}

/// 17 significant digits: doubles survive a text round trip.
inline std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace detail {

inline std::string cell(const json& j) {
    if (j.is_null()) return "";
    if (j.is_boolean()) return j.get<bool>() ? "true" : "false";
    if (j.is_number_integer()) return std::to_string(j.get<long long>());
    if (j.is_number()) return format_number(j.get<double>());
    if (j.is_string()) return j.get<std::string>();
    if (j.is_array()) {
        std::string out;
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (j[i].is_array() || j[i].is_object()) return "";
            out += (i ? ";" : "") + cell(j[i]);
        }
        return out;
    }
    return "";
}

inline void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& rows) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), rows);
        return;
    }
    if (j.is_array() && std::any_of(j.begin(), j.end(), [](const json& e) { return e.is_array() || e.is_object(); }))
        return;  // matrices and structured lists are JSON-only
    rows.emplace_back(prefix, cell(j));
}

}  // namespace detail

/// CSV rendering of a report: header section,name,value,pass,tolerance.
inline std::string report_csv(const json& report) {
    std::ostringstream os;
    os << "section,name,value,pass,tolerance\n";
    os << "meta,experiment," << report.at("experiment").get<std::string>() << ",,\n";
    os << "meta,library_version," << report.at("library_version").get<std::string>() << ",,\n";
    std::vector<std::pair<std::string, std::string>> rows;
    detail::flatten(report.at("metrics"), "", rows);
    for (const auto& [k, v] : rows) os << "metric," << k << ',' << v << ",,\n";
    for (const auto& a : report.at("assertions"))
        os << "assertion," << a.at("name").get<std::string>() << ',' << detail::cell(a.at("value")) << ','
           << detail::cell(a.at("pass")) << ',' << detail::cell(a.at("tolerance")) << '\n';
    if (report.contains("timestamp")) os << "meta,timestamp," << report.at("timestamp").get<std::string>() << ",,\n";
    return os.str();
}

/// Sets a numeric field addressed by a dotted path ("phi.rotation.angle",
/// "detectors.0.particles"). Throws ValidationError if the path does not name
/// an existing number.
inline json with_parameter(json cfg, const std::string& path, double value) {
    json* node = &cfg;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '.')) {
        if (node->is_object() && node->contains(part)) {
            node = &(*node)[part];
        } else if (node->is_array() && !part.empty() && std::all_of(part.begin(), part.end(), ::isdigit) &&
                   std::stoul(part) < node->size()) {
            node = &(*node)[std::stoul(part)];
        } else {
            throw ValidationError("unknown parameter '" + path + "'");
        }
    }
    if (!node->is_number()) throw ValidationError("parameter '" + path + "' is not a numeric field");
    if (node->is_number_integer()) {
        if (value != std::floor(value) || value < 0) throw ValidationError("parameter '" + path + "' needs integer values");
        *node = static_cast<long long>(value);
    } else {
        *node = value;
    }
    return cfg;
}

inline constexpr const char* kSweepHeader =
    "parameter,value,experiment,discrepancy,off_diagonal_norm,objectification,probabilities,nu_squared";

/// One CSV row per value, in input order. Rows are computed concurrently.
inline std::string sweep(const json& cfg, const std::string& parameter, const std::vector<double>& values) {
    if (values.empty()) throw ValidationError("sweep needs at least one value");
    std::vector<json> configs;
    for (double v : values) configs.push_back(with_parameter(cfg, parameter, v));

    std::vector<std::future<json>> jobs;
    for (const auto& c : configs) jobs.push_back(std::async(std::launch::async, [&c] { return run(c); }));
    std::vector<json> reports;
    for (auto& j : jobs) reports.push_back(j.get());

    std::ostringstream os;
    os << kSweepHeader << '\n';
    for (std::size_t i = 0; i < values.size(); ++i) {
        const json& m = reports[i].at("metrics");
        auto get = [&m](const char* key) { return m.contains(key) ? detail::cell(m.at(key)) : std::string{}; };
        os << parameter << ',' << format_number(values[i]) << ',' << reports[i].at("experiment").get<std::string>()
           << ',' << get("discrepancy") << ',' << get("off_diagonal_norm") << ',' << get("objectification") << ','
           << get("probabilities") << ',' << get("nu_squared") << '\n';
    }
    return os.str();
}

}  // namespace clusep::experiment
