#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "grassroots");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = grassroots::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

std::vector<std::string> fields(const std::string& row) {
  std::vector<std::string> f;
  std::istringstream in(row);
  for (std::string x; std::getline(in, x, ',');) f.push_back(x);
  return f;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("grassroots_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Cli, FnCurve) {
  const auto r = invoke({"fn", "--family", "clog", "--phi", "60", "--beta", "0.2", "--points", "101"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto l = lines_of(r.out);
  ASSERT_EQ(l.size(), 102u);
  EXPECT_EQ(l[0], "m,f_m");
  EXPECT_EQ(l[1], "0,0");
  EXPECT_EQ(l[101], "1,1");
  EXPECT_EQ(l[71], "0.7,0.7");
}

TEST(Cli, FnFixedPointsToFile) {
  const auto dir = fresh_dir("fn");
  const auto r = invoke({"fn", "--family", "logistic", "--phi", "60", "--fixed-points", "--out-dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(dir / "fixed_points.csv");
  EXPECT_EQ(csv.rfind("location,stability,derivative\n0.0395368595,stable,", 0), 0u) << csv;
}

TEST(Cli, FnRejectsOutOfDomainParameters) {
  EXPECT_EQ(invoke({"fn", "--family", "clog", "--phi", "30"}).code, 1);
  EXPECT_EQ(invoke({"fn", "--beta", "0.7"}).code, 1);
  EXPECT_EQ(invoke({"fn", "--family", "probit"}).code, 1);
  EXPECT_EQ(invoke({"fn", "--points", "1"}).code, 1);
}

TEST(Cli, SweepWithoutSeedIsAUsageError) {
  const auto r = invoke({"sweep", "--scenario", "hubs"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("seed"), std::string::npos);
}

TEST(Cli, UnknownFlagAndMissingSubcommand) {
  EXPECT_EQ(invoke({"sweep", "--colour", "blue"}).code, 1);
  EXPECT_EQ(invoke({}).code, 1);
}

TEST(Cli, Help) {
  const auto r = invoke({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("sweep"), std::string::npos);
  const auto s = invoke({"sweep", "--help"});
  EXPECT_EQ(s.code, 0);
  EXPECT_NE(s.out.find("--degrees"), std::string::npos);
}

TEST(Cli, NetWritesTables) {
  const auto dir = fresh_dir("net");
  const auto r = invoke({"net", "--seed", "4", "--out-dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("edges=509"), std::string::npos);
  EXPECT_EQ(lines_of(slurp(dir / "edges.csv")).size(), 510u);
  EXPECT_EQ(lines_of(slurp(dir / "nodes.csv")).size(), 257u);
  EXPECT_EQ(invoke({"net", "--n", "64"}).code, 1);
}

TEST(Cli, RunDumpsNodeTable) {
  const auto dir = fresh_dir("run");
  const auto r = invoke({"run", "--scenario", "nearby", "--phi", "90", "--degree", "3", "--seed", "7", "--dump-nodes",
                         "--dump-trajectory", "--out-dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("degree=3"), std::string::npos);
  const auto nodes = lines_of(slurp(dir / "nodes.csv"));
  ASSERT_EQ(nodes.size(), 257u);
  EXPECT_EQ(nodes[0], "id,degree,beta,distance,m_final");
  int innovators = 0;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const auto f = fields(nodes[i]);
    ASSERT_EQ(f.size(), 5u);
    if (f[3] == "0") {
      ++innovators;
      EXPECT_EQ(f[1], "3");
    }
  }
  EXPECT_EQ(innovators, 1);
  const auto traj = lines_of(slurp(dir / "trajectory.csv"));
  EXPECT_EQ(traj[0], "t,mbar");
  EXPECT_EQ(traj[1], "0,0.00390625");
}

TEST(Cli, RunMatchesTheSweepRow) {
  const auto dir = fresh_dir("sweep");
  const auto s = invoke({"sweep", "--scenario", "random", "--phi", "80", "--degrees", "5", "--runs", "3", "--seed", "11",
                         "--workers", "2", "--out-dir", dir.string()});
  ASSERT_EQ(s.code, 0) << s.err;
  const auto rows = lines_of(slurp(dir / "runs.csv"));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(lines_of(slurp(dir / "cells.csv")).size(), 2u);

  const auto r = invoke({"run", "--scenario", "random", "--phi", "80", "--degree", "5", "--run-index", "2", "--seed", "11",
                         "--out-dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  // runs.csv: scenario,phi_deg,degree,run_index,mbar_final,...
  const auto& row = rows[3];
  const auto f = fields(row);
  ASSERT_EQ(f.size(), 7u);
  EXPECT_NE(r.out.find("mbar_final=" + f[4] + " "), std::string::npos) << r.out << " vs " << row;
  EXPECT_NE(r.out.find("t_final=" + f[5] + " "), std::string::npos);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const auto dir = fresh_dir("cfg");
  fs::create_directories(dir);
  std::ofstream(dir / "s.cfg") << "scenario=neutral\nseed=5\ndegrees=2,3\nruns=2\nmax_iters=100\n";
  const auto r = invoke({"sweep", "--config", (dir / "s.cfg").string(), "--runs", "4", "--out-dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("runs=8"), std::string::npos);
  EXPECT_EQ(invoke({"sweep", "--config", (dir / "missing.cfg").string()}).code, 2);
}

TEST(Cli, RegenerationFailureIsARuntimeError) {
  const auto r = invoke({"run", "--n", "16", "--degree", "15", "--regen-limit", "3", "--seed", "1", "--out-dir",
                         fresh_dir("regen").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("degree 15"), std::string::npos);
}
