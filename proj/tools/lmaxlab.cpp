#include <iostream>

#include <CLI11.hpp>

#include "lmaxlab/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Largest-eigenvalue experiments for sample covariance matrices with long-memory populations"};
  app.set_version_flag("--version", lmaxlab::kCodeVersion);

  std::string command;
  lmaxlab::Invocation inv;
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 0;

  app.add_option("command", command, "simulate-convergence | simulate-fluctuations | toeplitz-spectrum | kernel-limit | support-scan")
      ->required()
      ->check(CLI::IsMember({"simulate-convergence", "simulate-fluctuations", "toeplitz-spectrum", "kernel-limit",
                             "support-scan"}));
  app.add_option("--config", config, "JSON config, or a summary.json to replay")->check(CLI::ExistingFile);
  app.add_option("--set", inv.overrides, "Override a config key, e.g. --set population.N=500");
  app.add_option("--workers", inv.workers, "Worker threads")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "Root seed (overrides experiment.seed)");
  app.add_option("--out", out, "Output directory");
  app.add_flag("--dump-matrices", inv.dump_matrices, "Write SPLM dumps of replicate 0");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(lmaxlab::ExitCode::config_error);
  }

  inv.command = lmaxlab::parse_command(command);
  if (!config.empty()) inv.config_path = config;
  if (*seed_opt) inv.seed = seed;
  inv.out_dir = out;
  return static_cast<int>(lmaxlab::run(inv));
}
