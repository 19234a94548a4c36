#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

// Runs the CLI with stderr folded into the captured output.
CliRun run(const std::string& args) {
  const std::string cmd = std::string(QWRES_CLI) + " " + args + " 2>&1";
  CliRun r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

// Runs with stdout only.
CliRun run_stdout(const std::string& args) { return run(args + " 2>/dev/null"); }

std::vector<std::vector<std::string>> csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

const std::string kModels = QWRES_MODELS_DIR;

}  // namespace

TEST(Cli, ValidateGoodModel) {
  const CliRun r = run("validate --model " + kModels + "/ms.json --eps 0.3");
  EXPECT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j["ok"].get<bool>());
  EXPECT_EQ(j["checks"][2]["detail"][0]["steps"], 2);
}

TEST(Cli, ValidateUnbalanced) {
  const CliRun r = run("validate --model " + kModels + "/unbalanced.json");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("NotBalanced"), std::string::npos) << r.out;
}

TEST(Cli, ValidateMixing) {
  const CliRun r = run("validate --model " + kModels + "/mixing.json");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("NotDeterministic"), std::string::npos) << r.out;
}

TEST(Cli, ResonancesMatrixSchrodinger) {
  const CliRun r = run_stdout("resonances --model ms --eps 0.5");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto rows = csv(r.out);
  ASSERT_GE(rows.size(), 2u);
  EXPECT_EQ(rows[0][0], "eps");
  bool found = false;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (std::abs(std::stod(rows[k][1])) < 1e-10 && std::abs(std::stod(rows[k][2]) - 0.70710678118654757) < 1e-10) {
      found = true;
    }
  }
  EXPECT_TRUE(found) << r.out;
}

TEST(Cli, ResonancesCycle) {
  const CliRun r = run_stdout("resonances --model cycle --N 4 --eps 0.6");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto rows = csv(r.out);
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    EXPECT_NEAR(std::hypot(std::stod(rows[k][1]), std::stod(rows[k][2])), 0.8, 1e-10);
  }
}

TEST(Cli, ResonanceTracking) {
  const CliRun r = run_stdout("resonances --model ms --eps-grid 0.01:0.1:5 --track --format json");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_GT(j["rows"].size(), 0u);
}

TEST(Cli, EmptyGridIsUsageError) {
  EXPECT_EQ(run("resonances --model ms --eps-grid 0.1:0.01:0").code, 3);
  EXPECT_EQ(run("resonances --model ms --eps-grid nonsense").code, 3);
}

TEST(Cli, SmatrixAgreesWithClosedForm) {
  const CliRun r = run_stdout("smatrix --model ms --eps 0.3 --z 0.7648421872844885+0.644217687237691i --check-routes");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto rows = csv(r.out);
  ASSERT_EQ(rows.size(), 5u);
  // (row 1, col 1) from the numpy oracle.
  EXPECT_NEAR(std::stod(rows[1][5]), 0.70627561175803966, 1e-10);
  EXPECT_NEAR(std::stod(rows[1][6]), -0.70305273856400141, 1e-10);
  for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_LE(std::stod(rows[k][7]), 1e-8);
}

TEST(Cli, ZeroIsRejected) {
  EXPECT_EQ(run("smatrix --model ms --eps 0.3 --z 0").code, 3);
}

TEST(Cli, BadArgumentsAreUsageErrors) {
  EXPECT_EQ(run("").code, 3);
  EXPECT_EQ(run("smatrix --model ms --eps 0.3 --z 1 --route sideways").code, 3);
  EXPECT_EQ(run("smatrix --model ms --eps 0.9 --z 1").code, 3);
  EXPECT_EQ(run("smatrix --model nope --eps 0.1 --z 1").code, 1);
}

TEST(Cli, SweepDiscrepancySlope) {
  const CliRun r = run_stdout("sweep discrepancy --model random:1 --z 0.921+0.390i --eps-grid 0.001:0.1:10 --format json");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  const double slope = j["fits"][0]["discrepancy_slope"].get<double>();
  EXPECT_GE(slope, 0.9);
  EXPECT_LE(slope, 1.1);
}

TEST(Cli, SweepTunneling) {
  const CliRun r = run_stdout("sweep tunneling --model ms --J 1 --lambda i --eps 0.1 --format json");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  bool seen = false;
  for (const auto& row : j["rows"]) {
    if (row["quantity"] == "T_at_peak") {
      EXPECT_NEAR(std::stod(row["value"].get<std::string>()), 1.0, 1e-10);
      seen = true;
    }
  }
  EXPECT_TRUE(seen);
}

TEST(Cli, SweepComfort) {
  const CliRun r = run("sweep comfort --model cycle --N 4 --lambda i --eps-grid 0.01:0.1:5 --format json");
  EXPECT_EQ(r.code, 0) << r.out;
}

TEST(Cli, BarrierDouble) {
  const CliRun r = run_stdout("barrier --positions 0,1 --coin '0.6,0.8;-0.8,0.6' --coin '0.6,0.8;-0.8,0.6' --z i --graph");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto rows = csv(r.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(std::stod(rows[1][2]), 1.0, 1e-10);
  EXPECT_NEAR(std::stod(rows[1][4]), 1.0, 1e-8);
}

TEST(Cli, BarrierTripleRotation) {
  const CliRun r = run_stdout("barrier --positions 0,2,3 --r 0.5,0.4,0.75 --z i");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NEAR(std::stod(csv(r.out)[1][2]), 1.0, 1e-10);
}

TEST(Cli, BarrierResonances) {
  const CliRun r = run_stdout("barrier --positions 0,1 --r 0.8,0.8 --resonances");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto rows = csv(r.out);
  ASSERT_EQ(rows.size(), 3u);
}

TEST(Cli, BarrierBadSpec) {
  EXPECT_EQ(run("barrier --positions 1,2 --r 0.5,0.5 --z i").code, 1);
}

TEST(Cli, OutputFile) {
  const std::string path = ::testing::TempDir() + "qwres_cli_out.csv";
  std::remove(path.c_str());
  ASSERT_EQ(run("resonances --model ms --eps 0.5 --out " + path).code, 0);
  FILE* f = std::fopen(path.c_str(), "r");
  ASSERT_NE(f, nullptr);
  std::fclose(f);
  std::remove(path.c_str());
}
