#include "nmps/run_config.hpp"

#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "nmps/snapshot.hpp"
#include "nmps/variant.hpp"

namespace nmps {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config key '" + key + "': expected true/false, got '" + v + "'");
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& v, Parse parse) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse(item));
  }
  return out;
}

struct KeyHandler {
  const char* key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::string render_double_list(const std::vector<double>& xs) {
  std::string out;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += format_double(xs[i]);
  }
  return out;
}

std::string render_seed_list(const std::vector<uint64_t>& xs) {
  std::string out;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(xs[i]);
  }
  return out;
}

#define STRING_KEY(name, field)                                         \
  KeyHandler {                                                          \
    name, [](RunConfig& c, const std::string& v) { c.field = v; },      \
        [](const RunConfig& c) { return c.field; }                      \
  }
#define LONG_KEY(name, field)                                                     \
  KeyHandler {                                                                    \
    name, [](RunConfig& c, const std::string& v) { c.field = std::stol(v); },     \
        [](const RunConfig& c) { return std::to_string(c.field); }                \
  }
#define INT_KEY(name, field)                                                      \
  KeyHandler {                                                                    \
    name, [](RunConfig& c, const std::string& v) { c.field = std::stoi(v); },     \
        [](const RunConfig& c) { return std::to_string(c.field); }                \
  }
#define SIZE_KEY(name, field)                                                     \
  KeyHandler {                                                                    \
    name, [](RunConfig& c, const std::string& v) { c.field = std::stoull(v); },   \
        [](const RunConfig& c) { return std::to_string(c.field); }                \
  }
#define DOUBLE_KEY(name, field)                                                   \
  KeyHandler {                                                                    \
    name, [](RunConfig& c, const std::string& v) { c.field = std::stod(v); },     \
        [](const RunConfig& c) { return format_double(c.field); }                 \
  }
#define BOOL_KEY(name, field)                                                            \
  KeyHandler {                                                                           \
    name, [](RunConfig& c, const std::string& v) { c.field = parse_bool(v, name); },     \
        [](const RunConfig& c) { return c.field ? std::string("true") : std::string("false"); } \
  }

const std::vector<KeyHandler>& key_table() {
  static const std::vector<KeyHandler> table = {
      STRING_KEY("run.variant", variant),
      STRING_KEY("run.env", env),
      STRING_KEY("run.task", task),
      KeyHandler{"run.rho",
                 [](RunConfig& c, const std::string& v) {
                   c.rho_list = parse_list<double>(v, [](const std::string& x) { return std::stod(x); });
                   if (c.rho_list.empty())
                     throw std::invalid_argument("config key 'run.rho': empty list");
                 },
                 [](const RunConfig& c) { return render_double_list(c.rho_list); }},
      KeyHandler{"run.seeds",
                 [](RunConfig& c, const std::string& v) {
                   c.seeds = parse_list<uint64_t>(v, [](const std::string& x) { return std::stoull(x); });
                   if (c.seeds.empty())
                     throw std::invalid_argument("config key 'run.seeds': empty list");
                 },
                 [](const RunConfig& c) { return render_seed_list(c.seeds); }},
      LONG_KEY("run.steps", steps),
      LONG_KEY("run.finetune_steps", finetune_steps),
      KeyHandler{"run.out",
                 [](RunConfig& c, const std::string& v) {
                   c.out_dir = v;
                   c.out_dir_explicit = true;
                 },
                 [](const RunConfig& c) { return c.out_dir; }},
      INT_KEY("run.workers", workers),
      INT_KEY("env.horizon", horizon),
      LONG_KEY("pretrain.snapshot_step", snapshot_step),
      INT_KEY("pretrain.train_every", train_every),
      SIZE_KEY("pretrain.warmup", warmup),
      DOUBLE_KEY("pretrain.starting_mode_fraction", starting_mode_fraction),
      INT_KEY("pretrain.explore_duration", explore_duration),
      LONG_KEY("pretrain.task_resample_steps", task_resample_steps),
      INT_KEY("pretrain.skill_resample_steps", skill_resample_steps),
      INT_KEY("pretrain.promise_k", promise_k),
      BOOL_KEY("pretrain.exploit_only", exploit_only),
      LONG_KEY("pretrain.entropy_window", entropy_window),
      DOUBLE_KEY("agent.gamma", gamma),
      DOUBLE_KEY("agent.lr_tabular", lr_tabular),
      DOUBLE_KEY("agent.lr_linear", lr_linear),
      DOUBLE_KEY("agent.lr_feature", lr_feature),
      DOUBLE_KEY("agent.lr_discriminator", lr_discriminator),
      DOUBLE_KEY("agent.tau_exploit", tau_exploit),
      DOUBLE_KEY("agent.tau_explor", tau_explor),
      KeyHandler{"agent.exploit_policy",
                 [](RunConfig& c, const std::string& v) {
                   if (v != "boltzmann" && v != "eps_greedy")
                     throw std::invalid_argument("expected boltzmann or eps_greedy");
                   c.exploit_policy = v;
                 },
                 [](const RunConfig& c) { return c.exploit_policy; }},
      DOUBLE_KEY("agent.exploit_epsilon", exploit_epsilon),
      INT_KEY("intrinsic.k", knn_k),
      INT_KEY("intrinsic.norm_exponent", knn_norm_exponent),
      BOOL_KEY("intrinsic.average_top_k", knn_average_top_k),
      BOOL_KEY("intrinsic.log1p_exploration", log1p_exploration),
      SIZE_KEY("replay.capacity", capacity),
      SIZE_KEY("replay.batch_size", batch_size),
      INT_KEY("baseline.skill_dim", baseline_skill_dim),
      DOUBLE_KEY("finetune.ridge_lambda", ridge_lambda),
      LONG_KEY("finetune.w_refresh_steps", w_refresh_steps),
      LONG_KEY("finetune.eval_interval", eval_interval),
      INT_KEY("finetune.eval_episodes", eval_episodes),
      DOUBLE_KEY("finetune.epsilon", finetune_epsilon),
  };
  return table;
}

#undef STRING_KEY
#undef LONG_KEY
#undef INT_KEY
#undef SIZE_KEY
#undef DOUBLE_KEY
#undef BOOL_KEY

}  // namespace

void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(origin + ":" + std::to_string(line_no) +
                                  ": expected 'key = value', got '" + stripped + "'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    bool matched = false;
    for (const auto& handler : key_table()) {
      if (key == handler.key) {
        try {
          handler.set(cfg, value);
        } catch (const std::exception& e) {
          throw std::invalid_argument(origin + ":" + std::to_string(line_no) +
                                      ": bad value '" + value + "' for key '" + key +
                                      "' (" + e.what() + ")");
        }
        matched = true;
        break;
      }
    }
    if (!matched)
      throw std::invalid_argument(origin + ":" + std::to_string(line_no) +
                                  ": unknown config key '" + key + "'");
  }
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config file not found: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  RunConfig cfg;
  apply_config_text(cfg, buf.str(), path);
  return cfg;
}

std::string render_config(const RunConfig& cfg) {
  std::ostringstream out;
  for (const auto& handler : key_table())
    out << handler.key << " = " << handler.get(cfg) << "\n";
  return out.str();
}

EnvSpec env_spec_of(const RunConfig& cfg) {
  EnvSpec spec;
  if (cfg.env == "fourrooms") {
    spec.kind = EnvKind::FourRooms;
    spec.layout = RoomLayout::Classic11;
  } else if (cfg.env == "fourrooms5") {
    spec.kind = EnvKind::FourRooms;
    spec.layout = RoomLayout::Open5;
  } else if (cfg.env == "pointmass") {
    spec.kind = EnvKind::PointMass2D;
  } else {
    throw std::invalid_argument("config key 'run.env': unknown environment '" + cfg.env +
                                "' (expected fourrooms, fourrooms5 or pointmass)");
  }
  spec.horizon = cfg.horizon;
  if (cfg.task == "none")
    spec.task = TaskId::None;
  else if (cfg.task == "reach_ne")
    spec.task = TaskId::ReachNE;
  else if (cfg.task == "reach_sw")
    spec.task = TaskId::ReachSW;
  else
    throw std::invalid_argument("config key 'run.task': unknown task '" + cfg.task +
                                "' (expected none, reach_ne or reach_sw)");
  return spec;
}

PretrainSettings pretrain_settings_of(const RunConfig& cfg, double rho, uint64_t seed) {
  PretrainSettings s;
  s.total_steps = cfg.steps;
  s.rho = rho;
  s.seed = seed;
  s.snapshot_step = cfg.snapshot_step;
  s.train_every = cfg.train_every;
  s.batch_size = cfg.batch_size;
  s.capacity = cfg.capacity;
  s.warmup = cfg.warmup;
  s.knn.k = cfg.knn_k;
  s.knn.norm_exponent = cfg.knn_norm_exponent;
  s.knn.average_top_k = cfg.knn_average_top_k;
  s.log1p_exploration = cfg.log1p_exploration;
  s.gamma = cfg.gamma;
  s.lr_tabular = cfg.lr_tabular;
  s.lr_linear = cfg.lr_linear;
  s.lr_feature = cfg.lr_feature;
  s.lr_discriminator = cfg.lr_discriminator;
  s.tau_exploit = cfg.tau_exploit;
  s.tau_explor = cfg.tau_explor;
  s.exploit_policy = cfg.exploit_policy == "eps_greedy" ? PolicyConfig::Kind::EpsGreedy
                                                        : PolicyConfig::Kind::Boltzmann;
  s.exploit_epsilon = cfg.exploit_epsilon;
  s.promise_k = cfg.promise_k;
  s.explore_duration = cfg.explore_duration;
  s.starting_mode_fraction = cfg.starting_mode_fraction;
  s.task_resample_steps = cfg.task_resample_steps;
  s.skill_resample_steps = cfg.skill_resample_steps;
  s.exploit_only = cfg.exploit_only;
  s.baseline_skill_dim = cfg.baseline_skill_dim;
  s.entropy_window = cfg.entropy_window;
  return s;
}

FinetuneSettings finetune_settings_of(const RunConfig& cfg, uint64_t seed) {
  FinetuneSettings s;
  s.budget_steps = cfg.finetune_steps;
  s.seed = seed;
  s.ridge_lambda = cfg.ridge_lambda;
  s.w_refresh_steps = cfg.w_refresh_steps;
  s.eval_interval = cfg.eval_interval;
  s.eval_episodes = cfg.eval_episodes;
  s.epsilon = cfg.finetune_epsilon;
  s.train_every = cfg.train_every;
  s.batch_size = cfg.batch_size;
  s.capacity = cfg.capacity;
  return s;
}

bool is_baseline_name(const std::string& name) {
  return name == "APS" || name == "DIAYN";
}

BaselineKind baseline_kind_of(const std::string& name) {
  if (name == "APS") return BaselineKind::ApsMonolithic;
  if (name == "DIAYN") return BaselineKind::DiaynStandalone;
  throw std::invalid_argument("unknown baseline '" + name + "'");
}

}  // namespace nmps
