#include "nmps/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "nmps/snapshot.hpp"
#include "nmps/variant.hpp"

namespace nmps {

namespace fs = std::filesystem;

std::string sanitize_name(const std::string& name) {
  std::string out = name;
  for (char& c : out) {
    if (c == '^') c = '-';
    if (c == '*') c = '0';
  }
  return out;
}

namespace {

std::string rho_dirname(double rho) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "rho_%g", rho);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::string steps_csv(const std::vector<StepLogRow>& rows) {
  std::string out = "step,mode,reward_source,r_exploit,r_explor,promise,coverage\n";
  for (const auto& r : rows) {
    out += std::to_string(r.step);
    out += ',';
    if (r.mode == 0)
      out += "exploit";
    else if (r.mode == 1)
      out += "explor";
    out += ',';
    out += reward_source_name(r.reward_source);
    out += ',';
    out += format_double(r.r_exploit);
    out += ',';
    out += format_double(r.r_explor);
    out += ',';
    if (std::isfinite(r.promise)) out += format_double(r.promise);
    out += ',';
    out += std::to_string(r.coverage);
    out += '\n';
  }
  return out;
}

std::string eval_csv(const std::vector<EvalPoint>& curve) {
  std::string out = "step,mean_return,std_return\n";
  for (const auto& p : curve) {
    out += std::to_string(p.step);
    out += ',';
    out += format_double(p.mean_return);
    out += ',';
    out += format_double(p.std_return);
    out += '\n';
  }
  return out;
}

RunArtifacts execute_run(const RunConfig& cfg, double rho, uint64_t seed,
                         bool write_files) {
  const EnvSpec env = env_spec_of(cfg);
  const PretrainSettings settings = pretrain_settings_of(cfg, rho, seed);

  RunArtifacts artifacts;
  if (is_baseline_name(cfg.variant)) {
    artifacts.pretrain = run_baseline(baseline_kind_of(cfg.variant), env, settings);
  } else {
    artifacts.pretrain = pretrain(parse_variant(cfg.variant), env, settings);
  }

  if (cfg.finetune_steps > 0 && env.task != TaskId::None) {
    artifacts.finetune =
        finetune(artifacts.pretrain.snapshot, env, finetune_settings_of(cfg, seed));
    artifacts.has_finetune = true;
  }

  if (write_files) {
    const fs::path dir = fs::path(cfg.out_dir) / sanitize_name(cfg.variant) /
                         rho_dirname(rho) / ("seed_" + std::to_string(seed));
    fs::create_directories(dir);
    artifacts.dir = dir.string();

    RunConfig echo = cfg;
    echo.rho_list = {rho};
    echo.seeds = {seed};
    write_file(dir / "config.txt", render_config(echo));
    write_file(dir / "steps.csv", steps_csv(artifacts.pretrain.log));
    save_snapshot(artifacts.pretrain.snapshot, (dir / "snapshot.txt").string());
    if (artifacts.has_finetune)
      write_file(dir / "eval.csv", eval_csv(artifacts.finetune.curve));
  }
  return artifacts;
}

namespace {

struct RunJob {
  double rho;
  uint64_t seed;
};

std::vector<RunJob> job_list(const RunConfig& cfg) {
  std::vector<RunJob> jobs;
  for (double rho : cfg.rho_list)
    for (uint64_t seed : cfg.seeds) jobs.push_back({rho, seed});
  return jobs;
}

void validate_variant_name(const RunConfig& cfg) {
  if (!is_baseline_name(cfg.variant)) parse_variant(cfg.variant);  // throws if unknown
}

}  // namespace

int run_command(const RunConfig& cfg) {
  validate_variant_name(cfg);
  for (const RunJob& job : job_list(cfg)) {
    RunArtifacts a = execute_run(cfg, job.rho, job.seed);
    std::cout << "run " << cfg.variant << " rho=" << job.rho << " seed=" << job.seed
              << " coverage=" << a.pretrain.coverage;
    if (a.has_finetune) std::cout << " final_return=" << a.finetune.final_return;
    std::cout << " -> " << a.dir << "\n";
  }
  return 0;
}

int sweep_command(const RunConfig& cfg) {
  validate_variant_name(cfg);
  const std::vector<RunJob> jobs = job_list(cfg);
  const int workers = std::max(1, cfg.workers);
  std::atomic<size_t> next{0};
  std::mutex io_mutex;
  std::vector<std::string> errors;

  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        RunArtifacts a = execute_run(cfg, jobs[i].rho, jobs[i].seed);
        std::lock_guard<std::mutex> lock(io_mutex);
        std::cout << "run " << cfg.variant << " rho=" << jobs[i].rho
                  << " seed=" << jobs[i].seed << " coverage=" << a.pretrain.coverage
                  << " -> " << a.dir << "\n";
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(io_mutex);
        errors.push_back(e.what());
      }
    }
  };

  std::vector<std::thread> pool;
  for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  if (!errors.empty()) {
    for (const auto& e : errors) std::cerr << "error: " << e << "\n";
    return 1;
  }
  return report_command(cfg.out_dir);
}

namespace {

struct LoadedRun {
  RunConfig cfg;
  double rho = 0.0;
  uint64_t seed = 0;
  std::vector<EvalPoint> curve;
  bool has_eval = false;
  std::string dir;
};

std::vector<EvalPoint> parse_eval_csv(const std::string& text) {
  std::vector<EvalPoint> curve;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    EvalPoint p;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    if (!(row >> p.step >> p.mean_return >> p.std_return))
      throw std::runtime_error("bad eval.csv row: " + line);
    curve.push_back(p);
  }
  return curve;
}

// Mean return over the last (up to) 3 evaluation points of a curve.
double final_window_return(const std::vector<EvalPoint>& curve) {
  if (curve.empty()) return 0.0;
  const size_t n = std::min<size_t>(3, curve.size());
  double sum = 0.0;
  for (size_t i = curve.size() - n; i < curve.size(); ++i) sum += curve[i].mean_return;
  return sum / static_cast<double>(n);
}

}  // namespace

int report_command(const std::string& in_dir) {
  if (!fs::exists(in_dir))
    throw std::invalid_argument("report: directory not found: " + in_dir);

  std::vector<LoadedRun> runs;
  std::vector<std::string> skipped;
  std::vector<fs::path> config_paths;
  for (const auto& entry : fs::recursive_directory_iterator(in_dir)) {
    if (entry.is_regular_file() && entry.path().filename() == "config.txt")
      config_paths.push_back(entry.path());
  }
  std::sort(config_paths.begin(), config_paths.end());

  for (const auto& path : config_paths) {
    const fs::path dir = path.parent_path();
    if (dir.filename() == "report") continue;
    try {
      LoadedRun run;
      run.cfg = parse_config_file(path.string());
      if (run.cfg.rho_list.size() != 1 || run.cfg.seeds.size() != 1)
        throw std::runtime_error("config echo must pin one rho and one seed");
      run.rho = run.cfg.rho_list[0];
      run.seed = run.cfg.seeds[0];
      run.dir = dir.string();
      if (!fs::exists(dir / "steps.csv")) throw std::runtime_error("missing steps.csv");
      if (fs::exists(dir / "eval.csv")) {
        run.curve = parse_eval_csv(read_file(dir / "eval.csv"));
        run.has_eval = true;
      }
      runs.push_back(std::move(run));
    } catch (const std::exception& e) {
      skipped.push_back(dir.string() + ": " + e.what());
    }
  }
  if (runs.empty() && skipped.empty())
    throw std::invalid_argument("report: no completed runs under " + in_dir);

  // variant -> rho -> runs
  std::map<std::string, std::map<double, std::vector<const LoadedRun*>>> grouped;
  for (const auto& run : runs)
    grouped[run.cfg.variant][run.rho].push_back(&run);

  struct VariantSummary {
    std::string variant;
    double best_rho = 0.0;
    size_t n_seeds = 0;
    double final_mean = 0.0;
    double final_std = 0.0;
    bool ranked = false;
  };
  std::vector<VariantSummary> summaries;

  const fs::path report_dir = fs::path(in_dir) / "report";
  fs::create_directories(report_dir);

  for (const auto& [variant, by_rho] : grouped) {
    VariantSummary best;
    best.variant = variant;
    for (const auto& [rho, group] : by_rho) {
      std::vector<double> finals;
      for (const auto* run : group)
        if (run->has_eval) finals.push_back(final_window_return(run->curve));
      if (finals.empty()) continue;
      double mean = 0.0;
      for (double f : finals) mean += f;
      mean /= static_cast<double>(finals.size());
      if (!best.ranked || mean > best.final_mean) {
        double var = 0.0;
        for (double f : finals) var += (f - mean) * (f - mean);
        if (finals.size() > 1) var /= static_cast<double>(finals.size() - 1);
        best.ranked = true;
        best.best_rho = rho;
        best.n_seeds = finals.size();
        best.final_mean = mean;
        best.final_std = std::sqrt(var);
      }
    }
    summaries.push_back(best);

    if (best.ranked) {
      // Mean +/- std curve across seeds at the best rho, aligned by step.
      const auto& group = grouped[variant][best.best_rho];
      std::map<long, std::vector<double>> by_step;
      for (const auto* run : group)
        if (run->has_eval)
          for (const auto& p : run->curve) by_step[p.step].push_back(p.mean_return);
      std::string csv = "step,mean_return,std_return,n_seeds\n";
      for (const auto& [step, values] : by_step) {
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        if (values.size() > 1) var /= static_cast<double>(values.size() - 1);
        csv += std::to_string(step) + "," + format_double(mean) + "," +
               format_double(std::sqrt(var)) + "," + std::to_string(values.size()) + "\n";
      }
      write_file(report_dir / ("curve_" + sanitize_name(variant) + ".csv"), csv);
    }
  }

  std::stable_sort(summaries.begin(), summaries.end(),
                   [](const VariantSummary& a, const VariantSummary& b) {
                     if (a.ranked != b.ranked) return a.ranked > b.ranked;
                     if (a.final_mean != b.final_mean) return a.final_mean > b.final_mean;
                     return a.variant < b.variant;
                   });

  std::ostringstream summary;
  summary << "ranking (final-window mean return, best target rate per variant)\n";
  for (const auto& s : summaries) {
    if (s.ranked) {
      summary << s.variant << " rho=" << s.best_rho << " seeds=" << s.n_seeds
              << " final_return=" << format_double(s.final_mean) << " +/- "
              << format_double(s.final_std) << "\n";
    } else {
      summary << s.variant << " (no evaluation data; pre-training only)\n";
    }
  }
  if (!skipped.empty()) {
    summary << "\nskipped incomplete runs:\n";
    for (const auto& s : skipped) summary << "  " << s << "\n";
  }
  write_file(report_dir / "summary.txt", summary.str());
  std::cout << summary.str();
  return 0;
}

int list_variants_command() {
  for (const auto& v : all_variants()) std::cout << v.name << "\n";
  std::cout << "APS\nDIAYN\n";
  return 0;
}

}  // namespace nmps
