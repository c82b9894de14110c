#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qmeter/wiener.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Scratch directory per test, recreated fresh under the working directory.
fs::path scratch(const std::string& name) {
  const fs::path dir = fs::current_path() / "cli_test_scratch" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunResult run_cli(const std::string& args, const fs::path& dir,
                  const std::string& env_prefix = "") {
  const fs::path out_file = dir / "_stdout.txt";
  const fs::path err_file = dir / "_stderr.txt";
  const std::string cmd = env_prefix + "\"" + QMETER_CLI_PATH + "\" " + args +
                          " >" + out_file.string() + " 2>" + err_file.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  if (status != -1 && WIFEXITED(status)) r.code = WEXITSTATUS(status);
  r.out = slurp(out_file);
  r.err = slurp(err_file);
  return r;
}

fs::path write_config(const fs::path& dir, const std::string& body) {
  const fs::path p = dir / "config.json";
  std::ofstream f(p, std::ios::binary);
  f << body;
  return p;
}

const char* kBaseConfig = R"({
  "omega": 1.0, "gamma": 0.25, "alpha": [0.1, 0.0],
  "t_end": 2.0, "n_steps": 2000, "seed": 42, "n_paths": 2048
})";

std::string first_line(const std::string& text) {
  return text.substr(0, text.find('\n'));
}

TEST(Cli, HelpExitsZeroAndListsSubcommands) {
  const fs::path dir = scratch("help");
  const RunResult r = run_cli("--help", dir);
  EXPECT_EQ(r.code, 0);
  for (const char* sub : {"paths", "expect", "covar", "measure", "window",
                          "fock-check", "limit", "acceptance"})
    EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
}

TEST(Cli, MissingOrUnknownSubcommandIsUsageError) {
  const fs::path dir = scratch("usage");
  EXPECT_EQ(run_cli("", dir).code, 2);
  EXPECT_EQ(run_cli("frobnicate", dir).code, 2);
  EXPECT_EQ(run_cli("expect", dir).code, 2);  // --config is required
}

TEST(Cli, ConfigErrorsExitTwoAndNameTheField) {
  const fs::path dir = scratch("config_errors");

  fs::path cfg = write_config(dir, R"({"omega": 1.0, "gamma": 0.25,
    "alpha": [0.1, 0.0], "t_end": 2.0, "n_steps": 2000, "seed": 42})");
  RunResult r = run_cli("expect --config " + cfg.string(), dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("n_paths"), std::string::npos);

  cfg = write_config(dir, R"({"omega": 1.0, "gamma": 0.25,
    "alpha": [0.1, 0.0], "t_end": 2.0, "n_steps": 2000, "seed": 42,
    "n_paths": 128, "extra_knob": 3})");
  r = run_cli("expect --config " + cfg.string(), dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("extra_knob"), std::string::npos);

  cfg = write_config(dir, R"({"omega": 1.0, "gamma": 0.25, "alpha": 0.1,
    "t_end": 2.0, "n_steps": 2000, "seed": 42, "n_paths": 128})");
  r = run_cli("expect --config " + cfg.string(), dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("alpha"), std::string::npos);

  cfg = write_config(dir, R"({"omega": -2.0, "gamma": 0.25,
    "alpha": [0.1, 0.0], "t_end": 2.0, "n_steps": 2000, "seed": 42,
    "n_paths": 128})");
  r = run_cli("expect --config " + cfg.string(), dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("omega"), std::string::npos);

  cfg = write_config(dir, "{not json");
  EXPECT_EQ(run_cli("expect --config " + cfg.string(), dir).code, 2);

  EXPECT_EQ(run_cli("expect --config " + (dir / "absent.json").string(), dir)
                .code,
            2);
}

TEST(Cli, CoarseGridIsRefusedUnlessOverridden) {
  const fs::path dir = scratch("coarse");
  const fs::path cfg = write_config(dir, R"({
    "omega": 1.0, "gamma": 0.25, "alpha": [0.1, 0.0],
    "t_end": 2.0, "n_steps": 10, "seed": 1, "n_paths": 256
  })");
  const RunResult refused =
      run_cli("expect --config " + cfg.string() + " --out " + dir.string(),
              dir);
  EXPECT_EQ(refused.code, 2);
  EXPECT_NE(refused.err.find("n_steps"), std::string::npos);

  // report-only override: coarse grid allowed, gate disabled
  const RunResult allowed =
      run_cli("expect --config " + cfg.string() + " --out " + dir.string() +
                  " --allow-coarse --max-se 0",
              dir);
  EXPECT_EQ(allowed.code, 0);
}

TEST(Cli, ExpectWritesTheTableAndIsByteStableAcrossThreads) {
  const fs::path dir = scratch("expect");
  const fs::path cfg = write_config(dir, kBaseConfig);
  const fs::path out_a = dir / "a";
  const fs::path out_b = dir / "b";
  const fs::path out_c = dir / "c";

  const RunResult a = run_cli(
      "expect --config " + cfg.string() + " --out " + out_a.string(), dir,
      "QMETER_THREADS=1 ");
  ASSERT_EQ(a.code, 0) << a.err;
  const std::string csv_a = slurp(out_a / "expect.csv");
  EXPECT_EQ(first_line(csv_a), "t,quantity,analytic,estimate,se,deviation_se");
  EXPECT_FALSE(fs::exists(out_a / "failures.json"));

  const RunResult b = run_cli(
      "expect --config " + cfg.string() + " --out " + out_b.string(), dir,
      "QMETER_THREADS=1 ");
  ASSERT_EQ(b.code, 0);
  const RunResult c = run_cli(
      "expect --config " + cfg.string() + " --out " + out_c.string(), dir,
      "QMETER_THREADS=3 ");
  ASSERT_EQ(c.code, 0);
  EXPECT_EQ(csv_a, slurp(out_b / "expect.csv"));
  EXPECT_EQ(csv_a, slurp(out_c / "expect.csv"));

  // a different seed must actually change the estimates
  const fs::path out_d = dir / "d";
  const RunResult d = run_cli("expect --config " + cfg.string() + " --out " +
                                  out_d.string() + " --seed 7",
                              dir);
  ASSERT_EQ(d.code, 0);
  EXPECT_NE(csv_a, slurp(out_d / "expect.csv"));
}

TEST(Cli, ImpossibleGateFailsWithMachineReadableReport) {
  const fs::path dir = scratch("gate");
  const fs::path cfg = write_config(dir, kBaseConfig);
  const RunResult r = run_cli("expect --config " + cfg.string() + " --out " +
                                  dir.string() + " --max-se 0.0001",
                              dir);
  EXPECT_EQ(r.code, 1);
  const json failures = json::parse(slurp(dir / "failures.json"));
  EXPECT_EQ(failures.at("command"), "expect");
  ASSERT_FALSE(failures.at("failures").empty());
  for (const auto& f : failures.at("failures")) {
    EXPECT_TRUE(f.contains("check"));
    EXPECT_TRUE(f.contains("message"));
  }
  EXPECT_NE(r.err.find("FAIL"), std::string::npos);
}

TEST(Cli, PathsWritesCsvAndReplayableDumps) {
  const fs::path dir = scratch("paths");
  const fs::path cfg = write_config(dir, R"({
    "omega": 1.0, "gamma": 0.25, "alpha": [0.1, 0.0],
    "t_end": 2.0, "n_steps": 2000, "seed": 42, "n_paths": 4096
  })");
  const RunResult r = run_cli("paths --config " + cfg.string() + " --out " +
                                  dir.string() + " --paths 3 --dump",
                              dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(first_line(slurp(dir / "path_00000.csv")),
            "t,w,phi,z_re,z_im,y1_re,y1_im,y0,g");
  EXPECT_TRUE(fs::exists(dir / "path_00002.csv"));
  EXPECT_FALSE(fs::exists(dir / "path_00003.csv"));

  // the dump replays to the exact same bits this process generates
  std::ifstream bin(dir / "path_00001.bin", std::ios::binary);
  const qmeter::BrownianPath dumped = qmeter::read_path(bin);
  EXPECT_EQ(dumped.seed, 42u);
  EXPECT_EQ(dumped.stream, 1u);
  const qmeter::BrownianPath local =
      qmeter::sample_path(qmeter::TimeGrid{2.0, 2000}, 42, 1);
  EXPECT_EQ(dumped.w, local.w);
}

TEST(Cli, CovarAndMeasureWriteTheirTables) {
  const fs::path dir = scratch("covar_measure");
  const fs::path cfg = write_config(dir, R"({
    "omega": 1.0, "gamma": 0.25, "alpha": [0.1, 0.0],
    "t_end": 2.0, "n_steps": 2000, "seed": 42, "n_paths": 1024
  })");
  const RunResult cv = run_cli(
      "covar --config " + cfg.string() + " --out " + dir.string(), dir);
  ASSERT_EQ(cv.code, 0) << cv.err;
  EXPECT_EQ(
      first_line(slurp(dir / "covar.csv")),
      "t,form,analytic_re,analytic_im,estimate_re,estimate_im,se_re,se_im,"
      "dev_re,dev_im");

  const RunResult ms = run_cli("measure --config " + cfg.string() + " --out " +
                                   dir.string() + " --n 1",
                               dir);
  ASSERT_EQ(ms.code, 0) << ms.err;
  EXPECT_EQ(first_line(slurp(dir / "measure.csv")),
            "t,mean_n,mean_n_se,var_n,mean_pointer,pointer_se,var_pointer,"
            "resolvable");
}

TEST(Cli, WindowReportsTheRegimeAndResolution) {
  const fs::path dir = scratch("window");
  const fs::path cfg = write_config(dir, R"({
    "omega": 1.0, "gamma": 0.25, "alpha": [0.02, 0.0],
    "t_end": 400.0, "n_steps": 4000, "seed": 11, "n_paths": 1500
  })");
  const RunResult r = run_cli("window --config " + cfg.string() + " --out " +
                                  dir.string() + " --levels 3",
                              dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const json w = json::parse(slurp(dir / "window.json"));
  EXPECT_EQ(w.at("t"), 400.0);
  EXPECT_TRUE(w.at("drive_ok").get<bool>());
  EXPECT_TRUE(w.at("past_noise").get<bool>());
  EXPECT_TRUE(w.at("below_heating").get<bool>());
  EXPECT_TRUE(w.at("window_ok").get<bool>());
  EXPECT_DOUBLE_EQ(w.at("noise_time").get<double>(), 160.0);
  const std::string res = slurp(dir / "resolution.csv");
  EXPECT_EQ(first_line(res),
            "level,pointer_mean,pointer_se,pointer_sd,resolvable_from_next");
  // 3 levels plus the header
  EXPECT_EQ(std::count(res.begin(), res.end(), '\n'), 4);
}

TEST(Cli, FockCheckPassesAndRecordsItsEvidence) {
  const fs::path dir = scratch("fock");
  const fs::path cfg = write_config(dir, R"({
    "omega": 1.0, "gamma": 0.25, "alpha": [0.2, 0.0],
    "t_end": 2.0, "n_steps": 2000, "seed": 1, "n_paths": 8
  })");
  const RunResult r =
      run_cli("fock-check --config " + cfg.string() + " --out " +
                  dir.string() + " --n 1 --periods 50 --dim 32",
              dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(slurp(dir / "fock_check.json"));
  EXPECT_TRUE(j.at("pass").get<bool>());
  EXPECT_EQ(j.at("n"), 1);
  EXPECT_EQ(j.at("dim"), 32);
  EXPECT_NEAR(j.at("mean").get<double>(), 1.08, 1e-6);
  EXPECT_NEAR(j.at("variance").get<double>(), 0.12, 1e-6);
  EXPECT_LT(j.at("block_unitarity_error").get<double>(), 1e-8);

  // a level outside the reliable block is a config error
  EXPECT_EQ(run_cli("fock-check --config " + cfg.string() + " --out " +
                        dir.string() + " --n 20 --dim 32",
                    dir)
                .code,
            2);
}

TEST(Cli, LimitIsReportOnlyByDefault) {
  const fs::path dir = scratch("limit");
  const fs::path cfg = write_config(dir, R"({
    "omega": 1.0, "gamma": 0.5, "alpha": [0.2, 0.0],
    "t_end": 2.0, "n_steps": 2000, "seed": 3, "n_paths": 512
  })");
  // eps far from the limit: biased transforms must still exit 0 by default
  const RunResult r =
      run_cli("limit --config " + cfg.string() + " --out " + dir.string() +
                  " --eps-list 0.05 --t 0.5 --dt-micro 0.05",
              dir);
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f :
       {"limit_number.csv", "limit_pointer.csv", "limit_real.csv"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  const json gauss = json::parse(slurp(dir / "limit_gaussian.json"));
  ASSERT_EQ(gauss.size(), 1u);
  EXPECT_EQ(gauss[0].at("epsilon"), 0.05);
  EXPECT_GT(gauss[0].at("target_var").get<double>(), 0.0);
  EXPECT_EQ(first_line(slurp(dir / "limit_number.csv")),
            "epsilon,lambda,empirical,target,se");
}

}  // namespace
