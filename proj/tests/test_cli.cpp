#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "capcmp/channel.hpp"
#include "capcmp/io.hpp"
#include "capcmp/qam_capacity.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("capcmp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Outcome run(const std::string& args) const {
    const auto out = dir_ / "stdout.txt";
    const auto err = dir_ / "stderr.txt";
    const std::string cmd = std::string("\"") + CAPCMP_CLI_PATH + "\" " + args + " > \"" +
                            out.string() + "\" 2> \"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
  }

  fs::path dir_;
};

TEST_F(Cli, CapacityExamples) {
  EXPECT_EQ(run("capacity --mod 4 --snr-db 60").out, "2.000000000000\n");
  EXPECT_EQ(run("capacity --gaussian --snr-db 0").out, "1.000000000000\n");

  char want[64];
  std::snprintf(want, sizeof want, "%.12f\n",
                capcmp::awgn_qam_capacity(capcmp::db_to_linear(11.0),
                                          capcmp::Constellation::square_qam(16)));
  EXPECT_EQ(run("capacity --mod 16 --snr-db 11").out, want);
}

TEST_F(Cli, UsageErrors) {
  const auto bad = run("capacity --mod 8 --snr-db 10");
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("4, 16, 64, 256, 1024, 4096"), std::string::npos);
  EXPECT_EQ(run("capacity --snr-db 10").code, 2);
  EXPECT_EQ(run("capacity --mod 4 --gaussian --snr-db 10").code, 2);
  EXPECT_EQ(run("scheme --builtin fig3 --mod 16 --snr-db 0:-1:3").code, 2);
  EXPECT_EQ(run("nonsense").code, 2);
  EXPECT_EQ(run("").code, 2);
}

TEST_F(Cli, MissingChannelFileIsIoError) {
  const auto r = run("scheme --channel /nonexistent/ch.json --mod 4 --snr-db 0:1:2");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("/nonexistent/ch.json"), std::string::npos);
}

TEST_F(Cli, SchemeFlatChannelRatioIsOne) {
  std::ofstream(dir_ / "flat.json") << R"({"taps": [1]})";
  const auto csv = dir_ / "flat.csv";
  const auto r = run("scheme --channel \"" + (dir_ / "flat.json").string() +
                     "\" --n 16 --mod 64 --snr-db 0:5:30 --out \"" + csv.string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(slurp(csv));
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, capcmp::io::kCurveCsvHeader);
  int rows = 0;
  while (std::getline(lines, line)) {
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "1") << line;
    ++rows;
  }
  EXPECT_EQ(rows, 7);
  EXPECT_TRUE(fs::exists(dir_ / "flat.csv.manifest.json"));
}

TEST_F(Cli, SchemeFig1SinglePoint) {
  const auto r = run("scheme --builtin fig1 --n 8 --mod 16 --snr-db 11:1:11");
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  double snr, ofdm, dfe, ratio;
  ASSERT_EQ(std::sscanf(row.c_str(), "%lf,%lf,%lf,%lf", &snr, &ofdm, &dfe, &ratio), 4);
  EXPECT_EQ(snr, 11.0);
  EXPECT_GT(dfe, ofdm);
  EXPECT_FALSE(std::getline(lines, row));
}

TEST_F(Cli, ConcavityReportsNoIntervalForQpsk) {
  const auto r = run("concavity --mod 4 --x 0.05:0.01:6 --out \"" + (dir_ / "c.csv").string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("convex intervals: none"), std::string::npos);
  EXPECT_EQ(slurp(dir_ / "c.csv").substr(0, 17), "x,tau_bits,tau_dd");
}

TEST_F(Cli, SimulateIsDeterministicAndReplayable) {
  const std::string args =
      "simulate --builtin fig3 --n 64 --mod 16 --snr-db 11 --blocks 200 --seed 9 --scheme sc-dfe";
  const auto a = run(args);
  const auto b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto j = nlohmann::json::parse(a.out);
  EXPECT_EQ(j["samples"], 64 * 200);
  EXPECT_EQ(j["seed"], 9);
  EXPECT_EQ(j["config"]["fb_len"], 4);

  const auto out = dir_ / "sim.json";
  ASSERT_EQ(run(args + " --out \"" + out.string() + "\"").code, 0);
  EXPECT_EQ(slurp(out), a.out);
}

TEST_F(Cli, SimulateFlatOfdm) {
  const auto r = run("simulate --builtin fig1 --n 8 --snr-db 10 --blocks 2000 --scheme ofdm");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["measured_snr_db"].size(), 8u);
}

TEST_F(Cli, ManifestReplayIsByteIdentical) {
  const auto csv = dir_ / "fig3.csv";
  ASSERT_EQ(run("scheme --builtin fig3 --n 64 --mod 256 --snr-db 0:5:40 --out \"" + csv.string() +
                "\"").code,
            0);
  const auto manifest = dir_ / "fig3.csv.manifest.json";
  const std::string first = slurp(csv);
  const std::string first_manifest = slurp(manifest);
  const auto m = nlohmann::json::parse(first_manifest);
  EXPECT_EQ(m["version"], "0.1.0");
  EXPECT_EQ(m["command"], "scheme");
  EXPECT_EQ(m["outputs"][0]["file"], "fig3.csv");
  EXPECT_EQ(first_manifest.find("time"), std::string::npos);

  fs::remove(csv);
  const auto r = run("replay \"" + manifest.string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(csv), first);
  EXPECT_EQ(slurp(manifest), first_manifest);
}

TEST_F(Cli, ReplayDetectsChangedInput) {
  const auto ch = dir_ / "ch.json";
  std::ofstream(ch) << "[1, 0.5]";
  const auto csv = dir_ / "c.csv";
  ASSERT_EQ(run("scheme --channel \"" + ch.string() + "\" --n 8 --gaussian --snr-db 0:10:20 --out \"" +
                csv.string() + "\"").code,
            0);
  std::ofstream(ch) << "[1, 0.25]";
  EXPECT_EQ(run("replay \"" + (dir_ / "c.csv.manifest.json").string() + "\"").code, 1);
}

TEST_F(Cli, ReproduceFig1) {
  const auto r = run("reproduce fig1 --out \"" + (dir_ / "fig1").string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"fig1_subcarriers.csv", "fig1_schemes.csv", "fig1_summary.txt", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "fig1" / f)) << f;
  }
  EXPECT_NE(r.out.find("PASS 16-QAM gap exceeds 64-QAM gap"), std::string::npos);
  EXPECT_EQ(run("replay \"" + (dir_ / "fig1" / "manifest.json").string() + "\"").code, 0);
}

}  // namespace
