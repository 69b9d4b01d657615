#include <CLI11.hpp>
#include <exception>
#include <iostream>
#include <string>

#include "waverec/app.hpp"

namespace {

int fail(const std::string& stage, const std::string& error, const std::string& detail) {
  std::cerr << waverec::app::error_json(stage, error, detail) << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Coefficient reconstruction for the 2D acoustic wave equation"};
  cli.require_subcommand(1);

  std::string config, out, data, truth, recon;
  auto* simulate = cli.add_subcommand("simulate", "Generate noisy time traces for a phantom");
  simulate->add_option("--config", config, "Experiment JSON")->required();
  simulate->add_option("--out", out, "Output directory")->required();

  auto* reconstruct = cli.add_subcommand("reconstruct", "Reconstruct the coefficient from traces");
  reconstruct->add_option("--config", config, "Experiment JSON")->required();
  reconstruct->add_option("--data", data, "Directory written by simulate")->required();
  reconstruct->add_option("--out", out, "Output directory")->required();

  auto* evaluate = cli.add_subcommand("evaluate", "Compare a reconstruction with the truth");
  evaluate->add_option("--truth", truth, "Truth field (.vtk or .csv)")->required();
  evaluate->add_option("--recon", recon, "Reconstructed field (.vtk or .csv)")->required();

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("cli", "InvalidConfig", e.what());
  }

  try {
    if (*simulate) {
      waverec::app::cmd_simulate(config, out);
    } else if (*reconstruct) {
      waverec::app::cmd_reconstruct(config, data, out);
    } else if (*evaluate) {
      std::cout << waverec::app::cmd_evaluate(truth, recon) << '\n';
    }
  } catch (const waverec::app::StageError& e) {
    return fail(e.stage(), std::string(waverec::to_string(e.code())), e.what());
  } catch (const waverec::Error& e) {
    return fail("unknown", std::string(waverec::to_string(e.code())), e.what());
  } catch (const std::exception& e) {
    return fail("unknown", "IoError", e.what());
  }
  return 0;
}
