// Python bindings for the main operations: intrinsic rewards, the feature
// encoder, task regression, the homeostasis controller, variant parsing, and
// whole pre-train / fine-tune runs returning plain dictionaries.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nmps/harness.hpp"
#include "nmps/pipeline.hpp"
#include "nmps/run_config.hpp"
#include "nmps/variant.hpp"

namespace py = pybind11;
using namespace nmps;

namespace {

std::vector<Eigen::VectorXd> rows_of(const Eigen::MatrixXd& memory) {
  std::vector<Eigen::VectorXd> rows;
  rows.reserve(static_cast<size_t>(memory.rows()));
  for (Eigen::Index i = 0; i < memory.rows(); ++i)
    rows.push_back(memory.row(i).transpose());
  return rows;
}

RunConfig config_from_kwargs(const std::string& variant, const std::string& env,
                             const std::string& task, double rho, uint64_t seed,
                             long steps, long finetune_steps) {
  RunConfig cfg;
  cfg.variant = variant;
  cfg.env = env;
  cfg.task = task;
  cfg.rho_list = {rho};
  cfg.seeds = {seed};
  cfg.steps = steps;
  cfg.finetune_steps = finetune_steps;
  return cfg;
}

py::dict variant_dict(const VariantConfig& v) {
  py::dict d;
  d["name"] = v.name;
  d["explorer_reward"] = v.explorer_reward == ExplorerKind::ApsExplor ? "apt" : "diayn";
  d["buffer_sharing"] = v.buffer_sharing == Sharing::Separate       ? "separate"
                        : v.buffer_sharing == Sharing::ExploitCommon ? "exploit_common"
                                                                     : "explor_common";
  d["explorer_feature_trainable"] = v.explorer_feature_trainable;
  d["action_source"] =
      v.action_source == ActionSource::Homeo ? "homeo" : "always_explorer";
  d["feature_dim"] = v.feature_dim;
  d["skill_dim"] = v.skill_dim;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Desk-scale unsupervised pre-training lab with successor features";

  m.def("variant_names", [] {
    std::vector<std::string> names;
    for (const auto& v : all_variants()) names.push_back(v.name);
    return names;
  });
  m.def("baseline_names", [] { return std::vector<std::string>{"APS", "DIAYN"}; });
  m.def("parse_variant", [](const std::string& name) { return variant_dict(parse_variant(name)); },
        py::arg("name"));

  m.def("visr_reward", &visr_reward, py::arg("phi"), py::arg("w"));
  m.def(
      "apt_reward",
      [](const Eigen::VectorXd& h, const Eigen::MatrixXd& memory, int k,
         int norm_exponent, bool average_top_k) {
        KnnConfig cfg;
        cfg.k = k;
        cfg.norm_exponent = norm_exponent;
        cfg.average_top_k = average_top_k;
        return apt_reward(h, rows_of(memory), cfg);
      },
      py::arg("h"), py::arg("memory"), py::arg("k") = 12, py::arg("norm_exponent") = 2,
      py::arg("average_top_k") = true);
  m.def(
      "aps_combined",
      [](const Eigen::VectorXd& phi, const Eigen::VectorXd& w, const Eigen::VectorXd& h,
         const Eigen::MatrixXd& memory, int k) {
        KnnConfig cfg;
        cfg.k = k;
        return aps_combined(phi, w, h, rows_of(memory), cfg);
      },
      py::arg("phi"), py::arg("w"), py::arg("h"), py::arg("memory"), py::arg("k") = 12);
  m.def(
      "diayn_reward",
      [](const Eigen::MatrixXd& weights, const Eigen::VectorXd& obs, int skill) {
        SkillDiscriminator disc;
        disc.weights = weights;
        return diayn_reward(disc, obs, skill);
      },
      py::arg("discriminator_weights"), py::arg("observation"), py::arg("skill"));

  m.def(
      "encode",
      [](const Eigen::MatrixXd& weights, const Eigen::VectorXd& obs, bool tanh) {
        FeatureMap map;
        map.weights = weights;
        map.nonlinearity = tanh ? Nonlinearity::Tanh : Nonlinearity::Linear;
        return encode(map, obs);
      },
      py::arg("weights"), py::arg("observation"), py::arg("tanh") = true);
  m.def(
      "sample_task",
      [](int dim, uint64_t seed) {
        Rng rng(seed, Stream::TaskSample);
        return sample_task(dim, rng).w;
      },
      py::arg("dim"), py::arg("seed"));
  m.def(
      "solve_w",
      [](const Eigen::MatrixXd& features, const Eigen::VectorXd& rewards, double lam) {
        return solve_w(features, rewards, lam).w;
      },
      py::arg("features"), py::arg("rewards"), py::arg("ridge_lambda") = 1e-6);

  m.def(
      "value_promise",
      [](const std::vector<double>& values, const std::vector<double>& rewards,
         double gamma) {
        if (values.size() != rewards.size() + 1)
          throw std::invalid_argument("need k+1 values and k rewards");
        PromiseWindow window(static_cast<int>(rewards.size()));
        window.push_value(values.front());
        for (size_t i = 0; i < rewards.size(); ++i) {
          window.push_reward(rewards[i]);
          window.push_value(values[i + 1]);
        }
        return *value_promise(window, gamma);
      },
      py::arg("values"), py::arg("rewards"), py::arg("gamma"));

  m.def(
      "homeo_trace",
      [](double rho, const std::vector<double>& signal, uint64_t seed) {
        Rng rng(seed, Stream::Controller);
        HomeoState h = make_homeo(rho);
        std::vector<double> probs;
        std::vector<bool> triggers;
        for (double x : signal) {
          const HomeoStep s = homeo_step(h, x, rng);
          h = s.state;
          probs.push_back(s.probability);
          triggers.push_back(s.trigger);
        }
        return py::make_tuple(probs, triggers);
      },
      py::arg("rho"), py::arg("signal"), py::arg("seed") = 1);

  m.def(
      "run_pretrain",
      [](const std::string& variant, const std::string& env, double rho, uint64_t seed,
         long steps, const std::string& overrides) {
        RunConfig cfg = config_from_kwargs(variant, env, "none", rho, seed, steps, 0);
        if (!overrides.empty()) apply_config_text(cfg, overrides, "<overrides>");
        const RunArtifacts a = execute_run(cfg, rho, seed, /*write_files=*/false);
        py::dict d;
        d["coverage"] = a.pretrain.coverage;
        d["exploit_entropy"] = a.pretrain.exploit_entropy;
        d["explor_entropy"] = a.pretrain.explor_entropy;
        d["snapshot"] = snapshot_to_string(a.pretrain.snapshot);
        d["steps_csv"] = steps_csv(a.pretrain.log);
        return d;
      },
      py::arg("variant"), py::arg("env") = "fourrooms", py::arg("rho") = 0.01,
      py::arg("seed") = 1, py::arg("steps") = 100000, py::arg("overrides") = "");

  m.def(
      "run_finetune",
      [](const std::string& snapshot_text, const std::string& env, const std::string& task,
         uint64_t seed, long steps, const std::string& overrides) {
        RunConfig cfg = config_from_kwargs("NMPS_X_sep^ex", env, task, 0.01, seed, 0, steps);
        if (!overrides.empty()) apply_config_text(cfg, overrides, "<overrides>");
        const Snapshot snap = snapshot_from_string(snapshot_text);
        const FinetuneResult r =
            finetune(snap, env_spec_of(cfg), finetune_settings_of(cfg, seed));
        std::vector<py::tuple> curve;
        for (const auto& p : r.curve)
          curve.push_back(py::make_tuple(p.step, p.mean_return, p.std_return));
        py::dict d;
        d["curve"] = curve;
        d["final_return"] = r.final_return;
        d["w"] = r.w.w;
        return d;
      },
      py::arg("snapshot"), py::arg("env"), py::arg("task") = "reach_ne",
      py::arg("seed") = 1, py::arg("steps") = 20000, py::arg("overrides") = "");

  m.attr("__version__") = "0.1.0";
}
