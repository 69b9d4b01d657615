#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <json.hpp>
#include <string>

#include "test_support.hpp"
#include "waverec/app.hpp"
#include "waverec/config.hpp"
#include "waverec/forward.hpp"
#include "waverec/io.hpp"

using namespace waverec;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int status = 0;
  std::string out;
  std::string err;
};

RunResult run_tool(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + WAVEREC_TOOL_PATH + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                          err.string() + "\"";
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = io::read_text(out.string());
  r.err = io::read_text(err.string());
  return r;
}

std::string write_config(const fs::path& dir, const std::string& name, const ExperimentConfig& cfg) {
  const std::string path = (dir / name).string();
  io::write_text(path, to_json(cfg));
  return path;
}

ExperimentConfig reference(const std::string& name) {
  return load_config(std::string(WAVEREC_CONFIG_DIR) + "/" + name + ".json");
}

std::string arg(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST(Cli, SimulateWritesAllArtifacts) {
  const auto dir = test::scratch_dir("app_sim");
  const auto cfg_path = write_config(dir, "cfg.json", reference("test2"));
  const auto r = run_tool("simulate --config " + arg(cfg_path) + " --out " + arg(dir / "data"), dir);
  ASSERT_EQ(r.status, 0) << r.err;
  for (const char* f : {"traces.bin", "mesh_nodes.csv", "truth.vtk", "truth.csv", "config_echo.json"})
    EXPECT_TRUE(fs::exists(dir / "data" / f)) << f;
  const auto traces = forward::read_traces((dir / "data" / "traces.bin").string());
  EXPECT_EQ(traces.num_samples, 2001);
  const auto sub = mesh::circle_submesh(test::reference_domain(0.02).fem);
  EXPECT_EQ(traces.node_ids.size(), sub.mesh.num_nodes());
  const auto echo = parse_config(io::read_text((dir / "data" / "config_echo.json").string()));
  EXPECT_EQ(to_json(echo), to_json(reference("test2")));
}

TEST(Cli, NoiselessSimulationIsByteIdentical) {
  const auto dir = test::scratch_dir("app_det");
  ExperimentConfig cfg = reference("test1");
  cfg.simulation.sigma = 0.0;
  const auto cfg_path = write_config(dir, "cfg.json", cfg);
  for (const char* out : {"a", "b"})
    ASSERT_EQ(run_tool("simulate --config " + arg(cfg_path) + " --out " + arg(dir / out), dir).status, 0);
  EXPECT_EQ(io::read_text((dir / "a" / "traces.bin").string()), io::read_text((dir / "b" / "traces.bin").string()));
}

TEST(Cli, UnstableTimeStepFailsWithJsonError) {
  const auto dir = test::scratch_dir("app_unstable");
  ExperimentConfig cfg = reference("test2");
  cfg.simulation.tau = 0.05;
  const auto cfg_path = write_config(dir, "cfg.json", cfg);
  const auto r = run_tool("simulate --config " + arg(cfg_path) + " --out " + arg(dir / "data"), dir);
  EXPECT_EQ(r.status, 1);
  const json err = json::parse(r.err);
  EXPECT_EQ(err.at("error"), "UnstableConfig");
  EXPECT_TRUE(err.contains("stage"));
  EXPECT_TRUE(err.contains("detail"));
}

TEST(Cli, BadArgumentsAndConfigsFail) {
  const auto dir = test::scratch_dir("app_args");
  EXPECT_EQ(run_tool("simulate", dir).status, 1);
  EXPECT_EQ(run_tool("frobnicate --config x", dir).status, 1);
  io::write_text((dir / "typo.json").string(), R"({"simulaton": {}})");
  const auto r = run_tool("simulate --config " + arg(dir / "typo.json") + " --out " + arg(dir / "o"), dir);
  EXPECT_EQ(r.status, 1);
  EXPECT_EQ(json::parse(r.err).at("error"), "InvalidConfig");
  EXPECT_EQ(run_tool("--help", dir).status, 0);
}

TEST(Cli, EvaluateIdenticalAndOffsetFields) {
  const auto dir = test::scratch_dir("app_eval");
  const auto m = mesh::build_rect_mesh({0, 1, 0, 1}, 0.1, std::nullopt);
  const std::vector<double> ones(m.num_nodes(), 1.0);
  std::vector<double> offset(ones);
  for (double& x : offset) x += 0.1;
  io::write_field_csv((dir / "truth.csv").string(), m, ones);
  io::write_field_vtk((dir / "truth.vtk").string(), m, ones);
  io::write_field_csv((dir / "offset.csv").string(), m, offset);

  auto r = run_tool("evaluate --truth " + arg(dir / "truth.csv") + " --recon " + arg(dir / "truth.csv"), dir);
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(json::parse(r.out).at("relative_l2").get<double>(), 0.0);

  r = run_tool("evaluate --truth " + arg(dir / "truth.vtk") + " --recon " + arg(dir / "offset.csv"), dir);
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NEAR(json::parse(r.out).at("relative_l2").get<double>(), 0.1, 1e-14);
}

TEST(Cli, EvaluateMeshMismatch) {
  const auto dir = test::scratch_dir("app_mismatch");
  const auto a = mesh::build_rect_mesh({0, 1, 0, 1}, 0.1, std::nullopt);
  const auto b = mesh::build_rect_mesh({0, 1, 0, 1}, 0.05, std::nullopt);
  io::write_field_csv((dir / "a.csv").string(), a, std::vector<double>(a.num_nodes(), 1.0));
  io::write_field_csv((dir / "b.csv").string(), b, std::vector<double>(b.num_nodes(), 1.0));
  const auto r = run_tool("evaluate --truth " + arg(dir / "a.csv") + " --recon " + arg(dir / "b.csv"), dir);
  EXPECT_EQ(r.status, 1);
  EXPECT_EQ(json::parse(r.err).at("error"), "MeshMismatch");
}

TEST(App, ShortReconstructionWritesEveryInterval) {
  const auto dir = test::scratch_dir("app_recon");
  ExperimentConfig cfg = reference("test2");
  cfg.pseudo_frequency.s_min = 17.0;
  cfg.algorithm.m_inner_max = 2;
  const auto cfg_path = write_config(dir, "cfg.json", cfg);
  app::cmd_simulate(cfg_path, (dir / "data").string());
  app::cmd_reconstruct(cfg_path, (dir / "data").string(), (dir / "rec").string());
  const json metrics = json::parse(io::read_text((dir / "rec" / "metrics.json").string()));
  const auto& intervals = metrics.at("intervals");
  ASSERT_EQ(intervals.size(), 2u);
  for (int n = 1; n <= 2; ++n) {
    EXPECT_TRUE(fs::exists(dir / "rec" / ("a_s" + std::to_string(n) + ".vtk")));
    EXPECT_TRUE(fs::exists(dir / "rec" / ("a_s" + std::to_string(n) + ".csv")));
    const auto& it = intervals[static_cast<std::size_t>(n - 1)];
    EXPECT_EQ(it.at("n"), n);
    EXPECT_LE(it.at("inner_iterations").get<int>(), 2);
    EXPECT_GE(it.at("max_a").get<double>(), 1.0);
    EXPECT_TRUE(it.contains("relative_l2"));
  }
  EXPECT_EQ(intervals[0].at("s").get<double>(), 19.0);

  const std::string eval =
      app::cmd_evaluate((dir / "data" / "truth.vtk").string(), (dir / "rec" / "a_s2.vtk").string());
  EXPECT_NEAR(json::parse(eval).at("relative_l2").get<double>(), intervals[1].at("relative_l2").get<double>(), 1e-12);
}

TEST(App, ReconstructRejectsForeignData) {
  const auto dir = test::scratch_dir("app_foreign");
  ExperimentConfig cfg = reference("null");
  const auto cfg_path = write_config(dir, "cfg.json", cfg);
  app::cmd_simulate(cfg_path, (dir / "data").string());
  cfg.simulation.tau = 0.0005;
  const auto other = write_config(dir, "other.json", cfg);
  try {
    app::cmd_reconstruct(other, (dir / "data").string(), (dir / "rec").string());
    FAIL();
  } catch (const app::StageError& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
  }
  cfg = reference("null");
  cfg.geometry.h_tilde = 0.01;
  const auto finer = write_config(dir, "finer.json", cfg);
  try {
    app::cmd_reconstruct(finer, (dir / "data").string(), (dir / "rec").string());
    FAIL();
  } catch (const app::StageError& e) {
    EXPECT_EQ(e.code(), ErrorCode::MeshMismatch);
  }
}

TEST(App, ErrorJsonShape) {
  const json j = json::parse(app::error_json("forward", "UnstableConfig", "tau \"too\" large"));
  EXPECT_EQ(j.at("stage"), "forward");
  EXPECT_EQ(j.at("error"), "UnstableConfig");
  EXPECT_EQ(j.at("detail"), "tau \"too\" large");
}
