#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const std::string kCli = CLUSEP_CLI_PATH;
const std::string kSamples = CLUSEP_SAMPLES_DIR;

fs::path scratch() {
    const fs::path dir = fs::path(CLUSEP_TEST_TMP) / "cli";
    fs::create_directories(dir);
    return dir;
}

int invoke(const std::string& args) {
    const std::string cmd = "\"" + kCli + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write_config(const std::string& name, const json& cfg) {
    const fs::path p = scratch() / name;
    std::ofstream(p) << cfg.dump(2);
    return p;
}

json sample(const std::string& name) { return json::parse(slurp(fs::path(kSamples) / name)); }

}  // namespace

TEST(Cli, RunWritesJsonReport) {
    const auto out = scratch() / "sep.json";
    ASSERT_EQ(invoke("run --config " + kSamples + "/separability.json --out " + out.string()), 0);
    const auto report = json::parse(slurp(out));
    for (const char* key : {"config_echo", "library_version", "experiment", "metrics", "assertions", "timestamp"})
        EXPECT_TRUE(report.contains(key)) << key;
    EXPECT_LE(report.at("metrics").at("discrepancy").get<double>(), 1e-12);
}

TEST(Cli, RunWritesCsvReport) {
    const auto out = scratch() / "reg.csv";
    ASSERT_EQ(invoke("run --config " + kSamples + "/registration.json --out " + out.string() + " --format csv"), 0);
    const auto text = slurp(out);
    EXPECT_EQ(text.substr(0, text.find('\n')), "section,name,value,pass,tolerance");
    EXPECT_NE(text.find("metric,objectification,satisfied"), std::string::npos);
}

TEST(Cli, SeedOverrideIsEchoed) {
    const auto out = scratch() / "seeded.json";
    ASSERT_EQ(invoke("run --config " + kSamples + "/separability.json --out " + out.string() + " --seed 42"), 0);
    EXPECT_EQ(json::parse(slurp(out)).at("config_echo").at("seed"), 42);
}

TEST(Cli, InvalidInputsExitWithTwo) {
    const auto out = (scratch() / "unused.json").string();
    EXPECT_EQ(invoke("run --config " + (scratch() / "missing.json").string() + " --out " + out), 2);
    EXPECT_EQ(invoke("run --config " + kSamples + "/separability.json --out " + out + " --format xml"), 2);
    EXPECT_EQ(invoke("run --out " + out), 2);
    EXPECT_EQ(invoke(""), 2);

    {
        std::ofstream(scratch() / "broken.json") << "{ not json";
        EXPECT_EQ(invoke("run --config " + (scratch() / "broken.json").string() + " --out " + out), 2);
    }
    json cfg = sample("separability.json");
    cfg.erase("psi");
    EXPECT_EQ(invoke("run --config " + write_config("nopsi.json", cfg).string() + " --out " + out), 2);
}

TEST(Cli, DegenerateExitsWithThree) {
    json cfg = sample("registration.json");
    cfg["statistics"] = "fermi";
    cfg["post_states"][0][0] = {{"basis", 3}};
    cfg["detectors"][0]["orbitals"] = {3};
    const auto out = (scratch() / "unused.json").string();
    EXPECT_EQ(invoke("run --config " + write_config("pauli.json", cfg).string() + " --out " + out), 3);

    json sep = sample("separability.json");
    sep["statistics"] = "fermi";
    sep["phi"] = sep["psi"];
    EXPECT_EQ(invoke("run --config " + write_config("parallel.json", sep).string() + " --out " + out), 3);
}

TEST(Cli, Sweep) {
    const auto out = scratch() / "sweep.csv";
    ASSERT_EQ(invoke("sweep --config " + kSamples + "/separability.json --param phi.rotation.angle --values 0,0.3,0.6 --out " +
                     out.string()),
              0);
    const auto text = slurp(out);
    EXPECT_EQ(text.substr(0, text.find('\n')),
              "parameter,value,experiment,discrepancy,off_diagonal_norm,objectification,probabilities,nu_squared");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);

    const auto unused = (scratch() / "unused.csv").string();
    EXPECT_EQ(invoke("sweep --config " + kSamples + "/separability.json --param phi.rotation.angle --values , --out " + unused), 2);
    EXPECT_EQ(invoke("sweep --config " + kSamples + "/separability.json --param no.such.field --values 1 --out " + unused), 2);
    EXPECT_EQ(invoke("sweep --config " + kSamples + "/separability.json --param phi.rotation.angle --values 1,x --out " + unused), 2);
}

TEST(Cli, ReportsAreDeterministicApartFromTimestamp) {
    for (const char* name : {"bcl.json", "registration.json"}) {
        const auto a = scratch() / (std::string("a_") + name), b = scratch() / (std::string("b_") + name);
        ASSERT_EQ(invoke("run --config " + kSamples + "/" + name + " --out " + a.string()), 0);
        ASSERT_EQ(invoke("run --config " + kSamples + "/" + name + " --out " + b.string()), 0);
        auto ja = json::parse(slurp(a)), jb = json::parse(slurp(b));
        ja.erase("timestamp");
        jb.erase("timestamp");
        EXPECT_EQ(ja.dump(2), jb.dump(2));
    }
}
