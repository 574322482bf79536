#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "json.hpp"

namespace fs = std::filesystem;

namespace
{

const std::string exe = GAUDIN_LAB_EXE;
const std::string configs = GAUDIN_LAB_CONFIGS;

struct RunResult {
    int code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

class Cli : public ::testing::Test
{
protected:
    void SetUp() override
    {
        const auto *info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir = fs::temp_directory_path() / "gaudin_lab_cli" / (std::string(info->test_suite_name()) + "_" + info->name());
        fs::remove_all(dir);
        fs::create_directories(dir);
    }

    RunResult run(const std::string &args) const
    {
        const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
        const std::string cmd = "\"" + exe + "\" " + args + " >\"" + out.string() + "\" 2>\"" + err.string() + "\"";
        const int status = std::system(cmd.c_str());
        return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
    }

    std::string config(const std::string &name) const
    {
        return "\"" + configs + "/" + name + "\"";
    }

    fs::path write_config(const std::string &name, const nlohmann::json &j) const
    {
        const fs::path p = dir / name;
        std::ofstream(p) << j.dump(2);
        return p;
    }

    fs::path dir;
};

nlohmann::json read_json(const fs::path &p)
{
    return nlohmann::json::parse(slurp(p));
}

} // namespace

TEST_F(Cli, RationalSampleWritesCsvAndDiagnostics)
{
    const auto r = run("simulate " + config("rational_sl2_three_points.json") + " --out \"" + dir.string() + "\"");
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream csv(slurp(dir / "rational_sl2_three_points.csv"));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "# seed 42");
    std::getline(csv, line);
    EXPECT_EQ(line.rfind("segment,t1,t2,H1_re,H1_im,H2_re,H2_im,casimir_drift,residue_sum_norm,z1_c1_re", 0), 0u);
    const auto columns = std::count(line.begin(), line.end(), ',') + 1;
    EXPECT_EQ(columns, 1 + 2 + 4 + 2 + 2 * 2 * 2);
    std::size_t rows = 0;
    while (std::getline(csv, line)) {
        EXPECT_EQ(std::count(line.begin(), line.end(), ',') + 1, columns);
        ++rows;
    }
    const auto diag = read_json(dir / "rational_sl2_three_points.json");
    EXPECT_EQ(diag["status"], "ok");
    EXPECT_EQ(diag["seed"], 42);
    EXPECT_EQ(diag["samples"].get<std::size_t>(), rows);
    for (double d : diag["diagnostics"]["hamiltonian_drift"]) {
        EXPECT_LT(d, 1e-8);
    }
    EXPECT_LT(diag["diagnostics"]["residue_sum_drift"].get<double>(), 1e-8);
}

TEST_F(Cli, EllipticSampleRuns)
{
    const auto r = run("simulate " + config("elliptic_sl2_two_points.json") + " --out \"" + dir.string() + "\"");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto diag = read_json(dir / "elliptic_sl2_two_points.json");
    EXPECT_EQ(diag["status"], "ok");
    for (double d : diag["diagnostics"]["casimir_drift"]) {
        EXPECT_LT(d, 1e-10);
    }
}

TEST_F(Cli, CoincidentPointsIsConfigError)
{
    const auto r = run("simulate " + config("bad_coincident_points.json") + " --out \"" + dir.string() + "\"");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("coincident points"), std::string::npos) << r.err;
}

TEST_F(Cli, CollisionAbortRecordsLastGoodTime)
{
    const auto r = run("simulate " + config("calogero_moser_collision.json") + " --out \"" + dir.string() + "\"");
    EXPECT_EQ(r.code, 3);
    const auto diag = read_json(dir / "calogero_moser_collision.json");
    EXPECT_EQ(diag["status"], "aborted");
    EXPECT_FALSE(diag["abort"]["reason"].get<std::string>().empty());
    const double t = diag["abort"]["last_good_t"][0];
    EXPECT_GT(t, 0.0);
    EXPECT_LT(t, 5.0);
    // The partial trajectory up to the abort is still written.
    EXPECT_TRUE(fs::exists(dir / "calogero_moser_collision.csv"));
}

TEST_F(Cli, SimulateIsDeterministic)
{
    const fs::path a = dir / "a", b = dir / "b";
    ASSERT_EQ(run("simulate " + config("rational_sl2_three_points.json") + " --out \"" + a.string() + "\"").code, 0);
    ASSERT_EQ(run("simulate " + config("rational_sl2_three_points.json") + " --out \"" + b.string() + "\"").code, 0);
    EXPECT_EQ(slurp(a / "rational_sl2_three_points.csv"), slurp(b / "rational_sl2_three_points.csv"));
    EXPECT_EQ(slurp(a / "rational_sl2_three_points.json"), slurp(b / "rational_sl2_three_points.json"));
}

TEST_F(Cli, SchemaViolationsAreConfigErrors)
{
    auto base = nlohmann::json::parse(slurp(fs::path(configs) / "rational_sl2_three_points.json"));
    base.erase("outputs");

    auto unknown = base;
    unknown["stepsize"] = 0.1;
    EXPECT_EQ(run("simulate \"" + write_config("unknown.json", unknown).string() + "\"").code, 2);

    auto missing = base;
    missing.erase("curve");
    const auto r = run("simulate \"" + write_config("missing.json", missing).string() + "\"");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("curve"), std::string::npos);

    auto bad_complex = base;
    bad_complex["model"]["marked_points"][0] = {1.0};
    EXPECT_EQ(run("simulate \"" + write_config("complex.json", bad_complex).string() + "\"").code, 2);

    auto bad_curve = base;
    bad_curve["curve"] = {{0.0}, {1.0}};
    EXPECT_EQ(run("simulate \"" + write_config("curve.json", bad_curve).string() + "\"").code, 2);

    auto bad_check = base;
    bad_check["checks"] = {"nonsense"};
    EXPECT_EQ(run("simulate \"" + write_config("check.json", bad_check).string() + "\"").code, 2);

    EXPECT_EQ(run("simulate \"" + (dir / "absent.json").string() + "\"").code, 2);
}

TEST_F(Cli, ConfigChecksRunSuites)
{
    auto cfg = nlohmann::json::parse(slurp(fs::path(configs) / "rational_sl2_three_points.json"));
    cfg["checks"] = {"weierstrass"};
    const auto r = run("simulate \"" + write_config("checked.json", cfg).string() + "\" --out \"" + dir.string() + "\"");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto diag = read_json(dir / "rational_sl2_three_points.json");
    ASSERT_EQ(diag["checks"].size(), 1u);
    EXPECT_EQ(diag["checks"][0]["suite"], "weierstrass");
    EXPECT_TRUE(diag["checks"][0]["pass"].get<bool>());
}

TEST_F(Cli, VerifyWeierstrassPasses)
{
    const auto r = run("verify weierstrass");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto report = nlohmann::json::parse(r.out);
    EXPECT_TRUE(report["pass"].get<bool>());
    for (const auto &crit : report["criteria"]) {
        for (const auto &row : crit["checks"]) {
            for (const char *key : {"name", "anchor", "tolerance", "measured", "pass"}) {
                EXPECT_TRUE(row.contains(key)) << key;
            }
            EXPECT_FALSE(row["anchor"].get<std::string>().empty());
        }
    }
}

TEST_F(Cli, VerifyReportsAreByteIdentical)
{
    const auto a = run("verify rational --seed 7");
    const auto b = run("verify rational --seed 7");
    EXPECT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(nlohmann::json::parse(a.out)["seed"], 7);
}

TEST_F(Cli, VerifyWritesReportToOutDir)
{
    const auto r = run("verify univar --seed 3 --out \"" + dir.string() + "\"");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto report = read_json(dir / "verify-univar.json");
    EXPECT_EQ(report["suite"], "univar");
    EXPECT_EQ(report["seed"], 3);
}

TEST_F(Cli, UnknownSuiteIsRejected)
{
    const auto r = run("verify nonsense");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("unknown suite"), std::string::npos);
    EXPECT_EQ(run("").code, 2);
}
