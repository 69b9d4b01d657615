#pragma once

#include <string>

#include "waverec/config.hpp"
#include "waverec/error.hpp"

// Orchestration behind the command-line tool.
namespace waverec::app {

/// Library error tagged with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, ErrorCode code, const std::string& detail)
      : Error(code, detail), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// `{"stage": ..., "error": ..., "detail": ...}` on one line.
std::string error_json(const std::string& stage, const std::string& error, const std::string& detail);

/// Writes traces.bin, mesh_nodes.csv, truth.vtk, truth.csv and config_echo.json.
void cmd_simulate(const std::string& config_path, const std::string& out_dir);

/// Writes a_s{n}.vtk, a_s{n}.csv for every interval and metrics.json.
void cmd_reconstruct(const std::string& config_path, const std::string& data_dir, const std::string& out_dir);

/// Metrics of `recon_path` against `truth_path` as JSON.
std::string cmd_evaluate(const std::string& truth_path, const std::string& recon_path);

}  // namespace waverec::app
