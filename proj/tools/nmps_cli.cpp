// nmps — non-monolithic pre-training lab CLI.
//
// Subcommands:
//   run           --config <path> plus overrides; executes every (rho, seed)
//                 combination sequentially and writes one directory per run.
//   sweep         same inputs, fans runs out across --workers threads and
//                 writes a report when done.
//   report        --in <dir>; aggregates completed runs (best target rate per
//                 variant, mean +/- std curves, ranking table).
//   list-variants prints the 12 variant names plus the 2 baselines.
//
// Output directory precedence: --out flag, then run.out in the config file,
// then the NMPS_OUT environment variable, then ./out.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nmps/harness.hpp"
#include "nmps/run_config.hpp"

namespace {

struct CliOverrides {
  std::string config_path;
  std::string variant;
  std::string env;
  std::string task;
  std::string out;
  std::vector<double> rho;
  std::vector<uint64_t> seeds;
  long steps = -1;
  long finetune_steps = -1;
  int workers = -1;
};

void add_run_options(CLI::App* cmd, CliOverrides& o) {
  cmd->add_option("--config", o.config_path, "configuration file (key = value lines)");
  cmd->add_option("--variant", o.variant, "variant name, APS, or DIAYN");
  cmd->add_option("--env", o.env, "fourrooms | fourrooms5 | pointmass");
  cmd->add_option("--task", o.task, "none | reach_ne | reach_sw");
  cmd->add_option("--rho", o.rho, "target rate(s) for the controller");
  cmd->add_option("--seed", o.seeds, "seed(s)");
  cmd->add_option("--steps", o.steps, "pre-training steps");
  cmd->add_option("--finetune-steps", o.finetune_steps, "fine-tuning budget (0 disables)");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--workers", o.workers, "parallel workers (sweep)");
}

nmps::RunConfig resolve_config(const CliOverrides& o) {
  nmps::RunConfig cfg;
  if (!o.config_path.empty()) cfg = nmps::parse_config_file(o.config_path);
  if (!o.variant.empty()) cfg.variant = o.variant;
  if (!o.env.empty()) cfg.env = o.env;
  if (!o.task.empty()) cfg.task = o.task;
  if (!o.rho.empty()) cfg.rho_list = o.rho;
  if (!o.seeds.empty()) cfg.seeds = o.seeds;
  if (o.steps >= 0) cfg.steps = o.steps;
  if (o.finetune_steps >= 0) cfg.finetune_steps = o.finetune_steps;
  if (o.workers > 0) cfg.workers = o.workers;
  if (!o.out.empty()) {
    cfg.out_dir = o.out;
    cfg.out_dir_explicit = true;
  }
  if (!cfg.out_dir_explicit) {
    if (const char* env_out = std::getenv("NMPS_OUT"); env_out && *env_out)
      cfg.out_dir = env_out;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale unsupervised pre-training lab with successor features"};
  app.require_subcommand(1);

  CliOverrides run_opts;
  CLI::App* run_cmd = app.add_subcommand("run", "execute runs sequentially");
  add_run_options(run_cmd, run_opts);

  CliOverrides sweep_opts;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "execute runs in parallel, then report");
  add_run_options(sweep_cmd, sweep_opts);

  std::string report_dir;
  CLI::App* report_cmd = app.add_subcommand("report", "aggregate completed runs");
  report_cmd->add_option("--in", report_dir, "directory of runs")->required();

  CLI::App* list_cmd = app.add_subcommand("list-variants", "print variant and baseline names");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return nmps::run_command(resolve_config(run_opts));
    if (sweep_cmd->parsed()) return nmps::sweep_command(resolve_config(sweep_opts));
    if (report_cmd->parsed()) return nmps::report_command(report_dir);
    if (list_cmd->parsed()) return nmps::list_variants_command();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
