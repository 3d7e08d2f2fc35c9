#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>

#include "degctrl/config.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "root seed override")
      ->each([&args](const std::string&) { args.seed_set = true; });
  cmd->add_option("--threads", args.threads,
                  "worker threads (fallback: DEGEN_ACTUATOR_THREADS)");
}

degctrl::ExperimentConfig load(const CommonArgs& args) {
  degctrl::ExperimentConfig cfg = degctrl::ExperimentConfig::from_file(args.config_path);
  if (args.seed_set) cfg.solver.seed = args.seed;
  if (args.threads > 0) cfg.solver.threads = args.threads;
  return cfg;
}

void print_outputs(const degctrl::RunRecord& rec) {
  std::cout << rec.command << " -> exit " << rec.exit_code << "\n";
  for (auto it = rec.outputs.begin(); it != rec.outputs.end(); ++it)
    std::cout << "  " << it.key() << " = " << it.value().dump() << "\n";
  for (const auto& a : rec.audits)
    std::cout << "  [" << (a.pass ? "PASS" : "FAIL") << "] " << a.name
              << " (observed " << a.observed << ", bound " << a.bound << ") — "
              << a.identity << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"minimum-norm controls and actuator placement for a 1-D "
               "degenerate diffusion"};
  app.require_subcommand(1);

  CommonArgs solve_args, opt_args, game_args, verify_args;
  CLI::App* solve = app.add_subcommand("solve-control",
                                       "minimum-norm control for a fixed "
                                       "initial state and actuator density");
  add_common(solve, solve_args);
  CLI::App* opt = app.add_subcommand("optimize-actuator",
                                     "worst-case actuator placement: density "
                                     "ascent, double oracle, level set");
  add_common(opt, opt_args);
  CLI::App* game = app.add_subcommand("game-value",
                                      "double-oracle game value and gap only");
  add_common(game, game_args);
  CLI::App* verify = app.add_subcommand("verify", "run the invariant audits");
  add_common(verify, verify_args);

  CLI11_PARSE(app, argc, argv);

  try {
    degctrl::RunRecord rec;
    if (solve->parsed()) rec = degctrl::cmd_solve_control(load(solve_args), solve_args.out_dir);
    if (opt->parsed()) rec = degctrl::cmd_optimize_actuator(load(opt_args), opt_args.out_dir);
    if (game->parsed()) rec = degctrl::cmd_game_value(load(game_args), game_args.out_dir);
    if (verify->parsed()) rec = degctrl::cmd_verify(load(verify_args), verify_args.out_dir);
    print_outputs(rec);
    return rec.exit_code;
  } catch (const degctrl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
