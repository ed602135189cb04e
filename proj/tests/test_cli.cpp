#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const std::string kCli = DWELL_CLI_PATH;
const std::string kFixtures = DWELL_FIXTURES_DIR;

fs::path test_root() {
  static const fs::path root = [] {
    fs::path p = fs::temp_directory_path() / ("dwell_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return root;
}

int run_cli(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<double> last_csv_row(const fs::path& p) {
  std::ifstream in(p);
  std::string line, last;
  std::getline(in, line);  // header
  while (std::getline(in, line))
    if (!line.empty()) last = line;
  std::vector<double> out;
  std::stringstream ss(last);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

std::string spiral_pair_system() { return kFixtures + "/spiral_pair_system.json"; }
std::string spiral_pair_signal() { return kFixtures + "/spiral_pair_signal.json"; }

}  // namespace

TEST(Cli, SimulateSpiralPairDivergenceVisible) {
  const fs::path out = test_root() / "sim_div";
  const int rc = run_cli("simulate --system " + spiral_pair_system() + " --signal " + spiral_pair_signal() +
                         " --x0 1,0 --horizon 58.231097 --dt 0.05 --out " + out.string());
  EXPECT_EQ(rc, 0);
  const auto row = last_csv_row(out / "trajectory.csv");
  ASSERT_EQ(row.size(), 4u);  // t, mode, x1, x2
  const double norm = std::sqrt(row[2] * row[2] + row[3] * row[3]);
  EXPECT_GT(norm, 1.0);  // grew beyond the initial state
}

TEST(Cli, SimulateZeroInitialStateStaysZero) {
  const fs::path out = test_root() / "sim_zero";
  const int rc = run_cli("simulate --system " + spiral_pair_system() + " --signal " + spiral_pair_signal() +
                         " --x0 0,0 --horizon 20 --dt 0.5 --out " + out.string());
  EXPECT_EQ(rc, 0);
  std::ifstream in(out / "trajectory.csv");
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string t, mode, x1, x2;
    std::getline(ss, t, ',');
    std::getline(ss, mode, ',');
    std::getline(ss, x1, ',');
    std::getline(ss, x2, ',');
    EXPECT_EQ(std::stod(x1), 0.0);
    EXPECT_EQ(std::stod(x2), 0.0);
  }
}

TEST(Cli, SimulateSingleModeMonotoneDecay) {
  const fs::path out = test_root() / "sim_decay";
  const fs::path sig = out / "constant.json";
  fs::create_directories(out);
  std::ofstream(sig) << R"({"breakpoints":[0.0],"modes":[1],"tail":{"kind":"constant"},"mode_count":2})";
  const int rc = run_cli("simulate --system " + kFixtures + "/stable_pair_system.json --signal " + sig.string() +
                         " --x0 1,1 --horizon 10 --dt 0.1 --out " + out.string());
  EXPECT_EQ(rc, 0);
  std::ifstream in(out / "trajectory.csv");
  std::string line;
  std::getline(in, line);
  double prev = 1e300;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string f;
    std::vector<double> row;
    while (std::getline(ss, f, ',')) row.push_back(std::stod(f));
    const double norm = std::sqrt(row[2] * row[2] + row[3] * row[3]);
    EXPECT_LE(norm, prev * (1.0 + 1e-12));
    prev = norm;
  }
}

TEST(Cli, SimulateBlowupExitsTwo) {
  const fs::path out = test_root() / "sim_blow";
  const fs::path sys = out / "unstable.json";
  fs::create_directories(out);
  std::ofstream(sys) << R"({"kind":"linear","matrices":[{"rows":1,"cols":1,"data":[2.0]}]})";
  const fs::path sig = out / "constant.json";
  std::ofstream(sig) << R"({"breakpoints":[0.0],"modes":[1],"tail":{"kind":"constant"}})";
  const int rc = run_cli("simulate --system " + sys.string() + " --signal " + sig.string() +
                         " --x0 1 --horizon 40 --dt 0.5 --out " + out.string());
  EXPECT_EQ(rc, 2);
  EXPECT_TRUE(fs::exists(out / "trajectory.csv"));  // partial output still written
}

TEST(Cli, CheckDwellExitCodes) {
  const fs::path out = test_root() / "check_dwell";
  EXPECT_EQ(run_cli("check-dwell --system " + spiral_pair_system() + " --rho 0.001 --tau 2.1 --out " +
                    (out / "ok").string()),
            0);
  EXPECT_TRUE(fs::exists(out / "ok" / "certificate.json"));
  EXPECT_EQ(run_cli("check-dwell --system " + spiral_pair_system() + " --rho 0.001 --tau 0.5 --budget 150 --out " +
                    (out / "short").string()),
            3);
  fs::create_directories(out);
  const fs::path bad = out / "bad.json";
  std::ofstream(bad) << "{ not json";
  EXPECT_EQ(run_cli("check-dwell --system " + bad.string() + " --rho 0.001 --tau 2.1 --out " +
                    (out / "bad").string()),
            1);
}

TEST(Cli, CheckLoadedCertificateAtDifferentTau) {
  // A certificate searched at 2.1 fails when re-checked at 0.5.
  const fs::path out = test_root() / "recheck";
  ASSERT_EQ(run_cli("check-dwell --system " + spiral_pair_system() + " --rho 0.001 --tau 2.1 --out " +
                    (out / "search").string()),
            0);
  EXPECT_EQ(run_cli("check-dwell --system " + spiral_pair_system() + " --cert " +
                    (out / "search" / "certificate.json").string() + " --tau 0.5 --out " + (out / "re").string()),
            3);
}

TEST(Cli, EstimateAdtAndRoundTrip) {
  const fs::path out = test_root() / "adt";
  ASSERT_EQ(run_cli("estimate-adt --system " + spiral_pair_system() + " --rho 1e-6 --grid 48 --out " + out.string()),
            0);
  const std::string csv = slurp(out / "adt_curve.csv");
  EXPECT_EQ(csv.rfind("alpha,nu,tau\n", 0), 0u);
  const std::string report = slurp(out / "adt_report.json");
  EXPECT_NE(report.find("tau_quad"), std::string::npos);

  // Extract the embedded certificate and re-verify through check-adt.
  const auto pos = report.find("\"certificate\"");
  ASSERT_NE(pos, std::string::npos);
  const auto open = report.find('{', pos);
  int depth = 0;
  std::size_t end = open;
  for (std::size_t k = open; k < report.size(); ++k) {
    if (report[k] == '{') ++depth;
    if (report[k] == '}') {
      if (--depth == 0) {
        end = k;
        break;
      }
    }
  }
  std::ofstream cert(out / "cert.json");
  cert << report.substr(open, end - open + 1);
  cert.close();
  EXPECT_EQ(run_cli("check-adt --system " + spiral_pair_system() + " --cert " + (out / "cert.json").string() +
                    " --out " + (out / "verify").string()),
            0);
  EXPECT_EQ(run_cli("check-nonlinear --system " + spiral_pair_system() + " --cert " + (out / "cert.json").string() +
                    " --out " + (out / "nl").string()),
            0);
}

TEST(Cli, TauStarLinearFixture) {
  const fs::path out = test_root() / "tau_star";
  // alpha = 1, tau = 2: rho = 2s, chi = e^2 s, eps = 2 -> tau* = 1.
  ASSERT_EQ(run_cli("tau-star --rho-fn linear:2 --chi linear:7.38905609893065 --epsilon 2 --out " + out.string()),
            0);
  const std::string j = slurp(out / "tau_star.json");
  const auto pos = j.find("\"tau_star\":");
  ASSERT_NE(pos, std::string::npos);
  const double v = std::stod(j.substr(pos + 11));
  EXPECT_NEAR(v, 1.0, 1e-6);
  EXPECT_EQ(slurp(out / "tau_star.csv").rfind("s,integral\n", 0), 0u);
}

TEST(Cli, CounterexampleDefaultPasses) {
  const fs::path out = test_root() / "ce_ok";
  EXPECT_EQ(run_cli("counterexample --out " + out.string()), 0);
  const std::string report = slurp(out / "counterexample_report.json");
  EXPECT_NE(report.find("\"pass\": true"), std::string::npos);
  EXPECT_EQ(report.find("\"pass\": false"), std::string::npos);
}

TEST(Cli, CounterexampleTauOverrideFails) {
  // At tau = 10 the signal leaves the (tau, 2) average class and the ratio
  // check breaks; the report must show which assertions failed.
  const fs::path out = test_root() / "ce_tau";
  EXPECT_EQ(run_cli("counterexample --tau 10 --out " + out.string()), 3);
  const std::string report = slurp(out / "counterexample_report.json");
  EXPECT_NE(report.find("\"pass\": false"), std::string::npos);
}

TEST(Cli, CounterexampleSwappedModesFails) {
  const fs::path out = test_root() / "ce_swap";
  EXPECT_EQ(run_cli("counterexample --swap-modes --out " + out.string()), 3);
  const std::string report = slurp(out / "counterexample_report.json");
  EXPECT_NE(report.find("period map matches closed form"), std::string::npos);
  EXPECT_NE(report.find("\"pass\": false"), std::string::npos);
}

TEST(Cli, DeterministicOutputs) {
  const fs::path a = test_root() / "det_a";
  const fs::path b = test_root() / "det_b";
  const std::string common = "simulate --system " + spiral_pair_system() +
                             " --signal-class adw:1.5:3 --seed 777 --x0 1,0.5 --horizon 30 --dt 0.1 --out ";
  ASSERT_EQ(run_cli(common + a.string()), 0);
  ASSERT_EQ(run_cli(common + b.string()), 0);
  EXPECT_EQ(slurp(a / "trajectory.csv"), slurp(b / "trajectory.csv"));
  const fs::path c = test_root() / "det_c";
  ASSERT_EQ(run_cli("simulate --system " + spiral_pair_system() +
                    " --signal-class adw:1.5:3 --seed 778 --x0 1,0.5 --horizon 30 --dt 0.1 --out " + c.string()),
            0);
  EXPECT_NE(slurp(a / "trajectory.csv"), slurp(c / "trajectory.csv"));
}

TEST(Cli, ConfigFileKeysMirrorFlagsAndFlagsWin) {
  const fs::path out = test_root() / "config";
  fs::create_directories(out);
  const fs::path cfg = out / "run.json";
  std::ofstream(cfg) << R"({"system": ")" << spiral_pair_system() << R"(", "rho": 0.001, "tau": 0.5, "budget": 150})";
  // Config alone: tau 0.5 fails.
  EXPECT_EQ(run_cli("check-dwell --config " + cfg.string() + " --out " + (out / "a").string()), 3);
  // Explicit flag overrides the config tau.
  EXPECT_EQ(run_cli("check-dwell --config " + cfg.string() + " --tau 2.1 --budget 500 --out " +
                    (out / "b").string()),
            0);
}
