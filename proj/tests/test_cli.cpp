#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code = -1;
    std::string out, err;
};

fs::path work_dir() {
    static const fs::path d = [] {
        fs::path p = fs::temp_directory_path() / ("vortex_spectral_cli_" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CliRun run(const std::string& args, const std::string& env = "") {
    static int n = 0;
    const fs::path o = work_dir() / ("stdout_" + std::to_string(n));
    const fs::path e = work_dir() / ("stderr_" + std::to_string(n++));
    const std::string cmd = "cd " + work_dir().string() + " && " + env + " " + VORTEX_SPECTRAL_BIN + " " + args + " > " +
                            o.string() + " 2> " + e.string();
    const int st = std::system(cmd.c_str());
    CliRun r;
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    r.out = slurp(o);
    r.err = slurp(e);
    return r;
}

// CSV without the leading '#' header line
std::string body(const std::string& csv) { return csv.substr(csv.find('\n') + 1); }

json header_of(const std::string& csv) {
    EXPECT_EQ(csv.rfind("# ", 0), 0u);
    return json::parse(csv.substr(2, csv.find('\n') - 2));
}

}  // namespace

TEST(Cli, LtBound) {
    const CliRun r = run("lt-bound --gamma 2 --out lt.json");
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(slurp(work_dir() / "lt.json"));
    EXPECT_NEAR(j["lambda0"].get<double>(), 1.3326, 0.003);
    EXPECT_NEAR(j["r0"].get<double>(), 0.614489, 1e-3);
    for (const char* k : {"A", "R_tail", "trace_bound"}) EXPECT_TRUE(j.contains(k)) << k;
    EXPECT_EQ(j["header"]["config_hash"].get<std::string>().size(), 16u);
}

TEST(Cli, VortexCsv) {
    const CliRun r = run("vortex --degree 1 --rgrid 0:10:11 --out profile.csv");
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string csv = slurp(work_dir() / "profile.csv");
    const json h = header_of(csv);
    EXPECT_NEAR(h["slope"].get<double>(), 0.5832, 1e-3);
    const std::string b = body(csv);
    EXPECT_EQ(b.substr(0, b.find('\n')), "r,U,dU");
    // %.12e fields
    EXPECT_NE(b.find("1.000000000000e+01,"), std::string::npos);
    EXPECT_EQ(std::count(b.begin(), b.end(), '\n'), 12);
}

TEST(Cli, InvalidFlag) {
    const CliRun r = run("vortex --no-such-flag");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("Usage"), std::string::npos);
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("lt-bound --gamma 1").code, 2);
    EXPECT_EQ(run("evolve --flow heat --f bump:r0=2,w=1 --g bump:r0=2,w=1 --times 1").code, 2);
    EXPECT_EQ(run("evolve --flow kg --operator H2 --f bump:r0=2,w=1 --times 1").code, 2);
    EXPECT_EQ(run("evolve --flow wave --f blob:r0=2 --times 1").code, 2);
}

TEST(Cli, NumericalFailureExitCode) {
    // a flat spectrum is not resolved by the k grid: the truncation check refuses it
    ASSERT_EQ(run("transform forward --operator H2 --f bump:r0=3,w=1 --out F.csv").code, 0);
    std::ifstream in(work_dir() / "F.csv");
    std::ofstream flat(work_dir() / "flat.csv");
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    flat << line << "\n";
    while (std::getline(in, line)) flat << line.substr(0, line.find(',')) << ",1,0\n";
    flat.close();
    const CliRun r = run("transform inverse --operator H2 --in flat.csv");
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("truncation"), std::string::npos) << r.err;
}

TEST(Cli, ConfigFileAndOverride) {
    std::ofstream(work_dir() / "lt.cfg") << "# gap bound\ngamma = 2.5\nr1=7\n";
    const CliRun a = run("lt-bound --config lt.cfg");
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_DOUBLE_EQ(json::parse(a.out)["gamma"].get<double>(), 2.5);
    const CliRun b = run("lt-bound --config lt.cfg --gamma 2");
    const CliRun c = run("lt-bound --gamma 2");
    ASSERT_EQ(b.code, 0);
    ASSERT_EQ(c.code, 0);
    EXPECT_DOUBLE_EQ(json::parse(b.out)["gamma"].get<double>(), 2.0);
    EXPECT_EQ(json::parse(b.out)["header"]["config_hash"], json::parse(c.out)["header"]["config_hash"]);
    EXPECT_NE(json::parse(a.out)["header"]["config_hash"], json::parse(c.out)["header"]["config_hash"]);
    std::ofstream(work_dir() / "bad.cfg") << "gamma\n";
    EXPECT_EQ(run("lt-bound --config bad.cfg").code, 2);
    EXPECT_EQ(run("lt-bound --config missing.cfg").code, 2);
}

TEST(Cli, DeterministicAcrossThreads) {
    const CliRun a = run("measure --operator H1 --kmin 0.05 --kmax 10 --nodes 24 --threads 1");
    const CliRun b = run("measure --operator H1 --kmin 0.05 --kmax 10 --nodes 24", "VORTEX_SPECTRAL_THREADS=3");
    ASSERT_EQ(a.code, 0) << a.err;
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_EQ(body(a.out), body(b.out));
    EXPECT_EQ(header_of(a.out)["config_hash"], header_of(b.out)["config_hash"]);
}

TEST(Cli, ZeroModesSidecar) {
    ASSERT_EQ(run("zero-modes --operator H1 --rgrid 0.1:20:50 --out basis.csv").code, 0);
    const json j = json::parse(slurp(work_dir() / "basis.csv.json"));
    const double c1 = j["c1"], c2 = j["c2"], c3 = j["c3"], c4 = j["c4"];
    EXPECT_NEAR(c2 * c3 - c1 * c4, 1 / std::sqrt(2.0), 1e-5);
    const std::string b = body(slurp(work_dir() / "basis.csv"));
    EXPECT_EQ(b.substr(0, b.find('\n')), "r,phi0,dphi0,theta0,dtheta0");
}

TEST(Cli, EigenfnRegions) {
    const CliRun r = run("eigenfn --operator H2 --k 1.0 --rgrid 0:20:41");
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string b = body(r.out);
    EXPECT_NE(b.find(",inner"), std::string::npos);
    EXPECT_NE(b.find(",outer"), std::string::npos);
    EXPECT_EQ(b.find("nan"), std::string::npos);
}

TEST(Cli, EvolveAndDecayReport) {
    const CliRun e = run("evolve --flow kg --f bump:r0=0.8,w=0.8 --times 1,2,5,10,20,50,100 --out sol.csv");
    ASSERT_EQ(e.code, 0) << e.err;
    const CliRun d = run("decay-report --in sol.csv --flow kg --out report.json");
    ASSERT_EQ(d.code, 0) << d.err;
    const json j = json::parse(slurp(work_dir() / "report.json"));
    EXPECT_EQ(j["entries"].size(), 7u);
    EXPECT_GE(j["exponent"].get<double>(), -1.15);
    EXPECT_LE(j["exponent"].get<double>(), -0.85);
    EXPECT_EQ(run("decay-report --in sol.csv --flow heat --out r2.json").code, 0);
    EXPECT_EQ(run("decay-report --in nothing.csv --flow kg").code, 2);
}

TEST(Cli, TransformRoundTrip) {
    ASSERT_EQ(run("transform forward --operator H2 --f bump:r0=3,w=1 --kmax 40 --out F2.csv").code, 0);
    ASSERT_EQ(run("transform inverse --operator H2 --in F2.csv --out f2.csv").code, 0);
    std::ifstream in(work_dir() / "f2.csv");
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    double err = 0, nrm = 0;
    while (std::getline(in, line)) {
        const double r = std::stod(line.substr(0, line.find(','))), v = std::stod(line.substr(line.find(',') + 1));
        const double x = (r - 3) / 1, b = std::abs(x) < 1 ? std::pow(1 - x * x, 3) : 0.0;
        err = std::max(err, std::abs(v - b));
        nrm = std::max(nrm, b);
    }
    EXPECT_LT(err / nrm, 1e-2);
    EXPECT_EQ(run("transform inverse --operator H2 --rmax 20 --in F2.csv").code, 2);
    EXPECT_EQ(run("transform forward --operator H2").code, 2);
}

TEST(Cli, Eigenvalues) {
    const CliRun r = run("eigenvalues --count 4");
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_FALSE(j["complete"].get<bool>());
    EXPECT_EQ(j["eigenvalues"].size(), 2u);
    EXPECT_NE(r.err.find("increase --rbig"), std::string::npos);
    EXPECT_EQ(run("eigenvalues --count 9").code, 2);
}

TEST(Cli, ReproducePaperOnlyLt) {
    const CliRun r = run("reproduce-paper --only lt --json");
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_TRUE(j["all_pass"].get<bool>());
    for (const auto& c : j["checks"]) EXPECT_EQ(c["group"], "lt");
    // round trip through the parser
    EXPECT_EQ(json::parse(j.dump()), j);
    const CliRun t = run("reproduce-paper --only vortex,zero-modes");
    ASSERT_EQ(t.code, 0) << t.err;
    EXPECT_NE(t.out.find("all checks pass"), std::string::npos);
    EXPECT_EQ(t.out.find(" lt "), std::string::npos);
    EXPECT_EQ(run("reproduce-paper --only nothing").code, 2);
}
