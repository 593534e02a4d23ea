#pragma once

#include <string>
#include <vector>

#include "nmps/pipeline.hpp"
#include "nmps/run_config.hpp"

namespace nmps {

// Directory-safe variant name: '^' -> '-', '*' -> '0'.
std::string sanitize_name(const std::string& name);

std::string steps_csv(const std::vector<StepLogRow>& rows);
std::string eval_csv(const std::vector<EvalPoint>& curve);

struct RunArtifacts {
  std::string dir;
  PretrainResult pretrain;
  FinetuneResult finetune;
  bool has_finetune = false;
};

// One (variant, rho, seed) run: pre-train, snapshot, optional fine-tune, and
// the config echo + CSV logs written under
//   <out>/<variant>/rho_<rho>/seed_<seed>/.
RunArtifacts execute_run(const RunConfig& cfg, double rho, uint64_t seed,
                         bool write_files = true);

// Sequential execution of every (rho, seed) combination.
int run_command(const RunConfig& cfg);

// Parallel execution across cfg.workers threads, then a report.
int sweep_command(const RunConfig& cfg);

// Aggregates completed runs under in_dir: best target rate per variant by
// final-window return, mean +/- std curves across seeds, and a ranking table.
// Written to <in_dir>/report/.
int report_command(const std::string& in_dir);

int list_variants_command();

}  // namespace nmps
