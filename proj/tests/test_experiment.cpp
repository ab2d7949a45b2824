#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "clusep/experiment.hpp"

using namespace clusep;
using experiment::json;

namespace {

json load(const std::string& name) {
    std::ifstream in(std::string(CLUSEP_SAMPLES_DIR) + "/" + name);
    return json::parse(in);
}

const json* assertion(const json& report, const std::string& name) {
    for (const auto& a : report.at("assertions"))
        if (a.at("name") == name) return &a;
    return nullptr;
}

bool all_assertions_pass(const json& report) {
    for (const auto& a : report.at("assertions"))
        if (!a.at("pass").get<bool>()) return false;
    return !report.at("assertions").empty();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::stringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

std::string error_of(const json& cfg) {
    try {
        experiment::run(cfg);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Runner, SeparabilitySample) {
    const auto r = experiment::run(load("separability.json"));
    EXPECT_EQ(r.at("experiment"), "separability");
    EXPECT_EQ(r.at("library_version"), experiment::kLibraryVersion);
    EXPECT_LE(r.at("metrics").at("discrepancy").get<double>(), 1e-12);
    EXPECT_TRUE(r.at("metrics").at("d_local").get<bool>());
    EXPECT_TRUE(r.at("metrics").at("separation_status").at("holds").get<bool>());
    ASSERT_NE(assertion(r, "cluster_separability"), nullptr);
    ASSERT_NE(assertion(r, "disturbance_identity"), nullptr);
    EXPECT_TRUE(all_assertions_pass(r));
    EXPECT_EQ(r.at("config_echo"), load("separability.json"));
}

TEST(Runner, BclSuperpositionFailsBothConditions) {
    const auto r = experiment::run(load("bcl_superposition.json"));
    const auto& m = r.at("metrics");
    EXPECT_FALSE(m.at("condition_A").get<bool>());
    EXPECT_FALSE(m.at("condition_B").get<bool>());
    EXPECT_GT(m.at("off_diagonal_norm").get<double>(), 1e-6);
    EXPECT_EQ(m.at("objectification"), "failed");
    EXPECT_TRUE(all_assertions_pass(r));
}

TEST(Runner, RegistrationAgainstPlainPremeasurement) {
    const auto reg = experiment::run(load("registration.json"));
    const auto bcl = experiment::run(load("bcl.json"));
    EXPECT_EQ(reg.at("metrics").at("objectification"), "satisfied");
    EXPECT_EQ(bcl.at("metrics").at("objectification"), "failed");
    EXPECT_TRUE(all_assertions_pass(reg));
    EXPECT_TRUE(all_assertions_pass(bcl));
    EXPECT_EQ(reg.at("metrics").at("probabilities"), bcl.at("metrics").at("probabilities"));
    const auto& weights = reg.at("metrics").at("gemenge_weights");
    const auto& p = reg.at("metrics").at("probabilities");
    for (std::size_t k = 0; k < weights.size(); ++k) EXPECT_NEAR(weights[k].get<double>(), p[k].get<double>(), 1e-12);
}

TEST(Runner, Deterministic) {
    for (const char* name : {"separability.json", "bcl.json", "registration.json"}) {
        const auto a = experiment::run(load(name)).dump(2);
        const auto b = experiment::run(load(name)).dump(2);
        EXPECT_EQ(a, b) << name;
        const auto stamped = experiment::with_timestamp(experiment::run(load(name)), "2000-01-01T00:00:00Z");
        json stripped = stamped;
        stripped.erase("timestamp");
        EXPECT_EQ(stripped.dump(2), a);
    }
}

TEST(Runner, ErrorsNameTheField) {
    json cfg = load("separability.json");
    cfg.erase("grid");
    EXPECT_EQ(error_of(cfg), "config field 'grid': missing");

    cfg = load("separability.json");
    cfg["region"] = {0, 9};
    EXPECT_NE(error_of(cfg).find("'region'"), std::string::npos);

    cfg = load("separability.json");
    cfg["statistics"] = "anyon";
    EXPECT_NE(error_of(cfg).find("'statistics'"), std::string::npos);

    cfg = load("separability.json");
    cfg["experiment"] = "tomography";
    EXPECT_NE(error_of(cfg).find("'experiment'"), std::string::npos);

    cfg = load("registration.json");
    cfg["detectors"][1]["region"] = {3, 4, 5};
    EXPECT_NE(error_of(cfg).find("overlap"), std::string::npos);

    cfg = load("registration.json");
    cfg["input"] = {{"amplitudes", {1, 2}}};
    EXPECT_NE(error_of(cfg).find("'input.amplitudes'"), std::string::npos);

    cfg = load("registration.json");
    cfg["observable"]["eigenvectors"][0][0] = {{"basis", 7}};
    EXPECT_NE(error_of(cfg).find("observable.eigenvectors.0.0.basis"), std::string::npos);

    EXPECT_NE(error_of(json::array()).find("JSON object"), std::string::npos);
}

TEST(Runner, FermionicFullOccupationIsDegenerate) {
    json cfg = load("registration.json");
    cfg["statistics"] = "fermi";
    cfg["post_states"][0][0] = {{"basis", 3}};
    cfg["detectors"][0]["orbitals"] = {3};
    EXPECT_THROW(experiment::run(cfg), DegenerateError);
}

TEST(Runner, FirstPostStateOption) {
    json cfg = load("registration.json");
    cfg["absorbed_state"] = "first_post_state";
    EXPECT_EQ(experiment::run(cfg).at("metrics").at("objectification"), "satisfied");
    cfg["absorbed_state"] = "other";
    EXPECT_NE(error_of(cfg).find("absorbed_state"), std::string::npos);
}

TEST(ReportCsv, LayoutAndPrecision) {
    const auto r = experiment::with_timestamp(experiment::run(load("separability.json")), "T");
    const auto rows = csv_rows(experiment::report_csv(r));
    ASSERT_GE(rows.size(), 4u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"section", "name", "value", "pass", "tolerance"}));
    EXPECT_EQ(rows[1][1], "experiment");
    EXPECT_EQ(rows.back()[1], "timestamp");
    bool saw_discrepancy = false;
    for (const auto& row : rows) {
        ASSERT_EQ(row.size(), 5u);
        if (row[0] == "metric" && row[1] == "avg_experiment_one") {
            saw_discrepancy = true;
            EXPECT_EQ(std::stod(row[2]), r.at("metrics").at("avg_experiment_one").get<double>());
        }
    }
    EXPECT_TRUE(saw_discrepancy);
    EXPECT_EQ(experiment::format_number(0.1), "0.10000000000000001");
}

TEST(Parameter, Paths) {
    const json cfg = load("registration.json");
    EXPECT_EQ(experiment::with_parameter(cfg, "detectors.0.particles", 2).at("detectors")[0].at("particles"), 2);
    EXPECT_THROW(experiment::with_parameter(cfg, "detectors.0.particles", 1.5), ValidationError);
    EXPECT_THROW(experiment::with_parameter(cfg, "detectors.5.particles", 1), ValidationError);
    EXPECT_THROW(experiment::with_parameter(cfg, "nonsense", 1), ValidationError);
    EXPECT_THROW(experiment::with_parameter(cfg, "statistics", 1), ValidationError);
    EXPECT_DOUBLE_EQ(experiment::with_parameter(load("separability.json"), "phi.rotation.angle", 0.25)
                         .at("phi").at("rotation").at("angle").get<double>(),
                     0.25);
}

TEST(Sweep, RotationAngleGivesMonotoneDiscrepancy) {
    std::vector<double> angles;
    for (int i = 0; i <= 8; ++i) angles.push_back(0.19 * i);
    const auto rows = csv_rows(experiment::sweep(load("separability.json"), "phi.rotation.angle", angles));
    ASSERT_EQ(rows.size(), angles.size() + 1);
    EXPECT_EQ(rows[0][0], "parameter");
    EXPECT_EQ(rows[0][3], "discrepancy");
    double previous = -1.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_EQ(std::stod(rows[i][1]), angles[i - 1]);
        const double d = std::stod(rows[i][3]);
        if (i == 1) {
            EXPECT_LE(d, 1e-12);
        } else {
            EXPECT_GT(d, previous);
        }
        previous = d;
    }
}

TEST(Sweep, DetectorParticlesStartAtUnitNormalization) {
    const auto rows = csv_rows(experiment::sweep(load("registration.json"), "detectors.0.particles", {0, 1, 2}));
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0][7], "nu_squared");
    EXPECT_EQ(rows[1][7].substr(0, 2), "1;");
    EXPECT_EQ(std::stod(rows[1][7]), 1.0);
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i][5], "satisfied");
}

TEST(Sweep, OrderFollowsInput) {
    const auto a = experiment::sweep(load("separability.json"), "phi.rotation.angle", {0.9, 0.1, 0.5});
    const auto rows = csv_rows(a);
    EXPECT_EQ(rows[1][1], "0.90000000000000002");
    EXPECT_EQ(rows[2][1], "0.10000000000000001");
    EXPECT_EQ(a, experiment::sweep(load("separability.json"), "phi.rotation.angle", {0.9, 0.1, 0.5}));
}

TEST(Sweep, Errors) {
    EXPECT_THROW(experiment::sweep(load("separability.json"), "phi.rotation.angle", {}), ValidationError);
    EXPECT_THROW(experiment::sweep(load("separability.json"), "phi.rotation.speed", {1.0}), ValidationError);
}
