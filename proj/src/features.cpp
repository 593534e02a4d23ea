#include "nmps/features.hpp"

#include <cmath>
#include <stdexcept>

namespace nmps {

namespace {
constexpr double kNormFloor = 1e-12;
}

FeatureMap make_feature_map(int feature_dim, int obs_dim, Rng& rng,
                            bool trainable, double learning_rate,
                            Nonlinearity nonlinearity) {
  if (feature_dim < 1 || obs_dim < 1)
    throw std::invalid_argument("make_feature_map: dimensions must be positive");
  if (learning_rate <= 0.0)
    throw std::invalid_argument("make_feature_map: learning rate must be positive");
  FeatureMap map;
  map.weights = Eigen::MatrixXd(feature_dim, obs_dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(obs_dim));
  for (int i = 0; i < feature_dim; ++i)
    for (int j = 0; j < obs_dim; ++j) map.weights(i, j) = scale * rng.normal();
  map.nonlinearity = nonlinearity;
  map.trainable = trainable;
  map.learning_rate = learning_rate;
  return map;
}

Eigen::VectorXd encode(const FeatureMap& map, const Eigen::VectorXd& observation) {
  if (observation.size() != map.obs_dim())
    throw std::invalid_argument("encode: observation dimension mismatch");
  Eigen::VectorXd u = map.weights * observation;
  if (map.nonlinearity == Nonlinearity::Tanh) u = u.array().tanh().matrix();
  const double n = u.norm();
  if (n < kNormFloor) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(map.feature_dim());
    e[0] = 1.0;
    return e;
  }
  return u / n;
}

TaskVector sample_task(int feature_dim, Rng& rng) {
  if (feature_dim < 1)
    throw std::invalid_argument("sample_task: feature_dim must be positive");
  Eigen::VectorXd w(feature_dim);
  double n = 0.0;
  do {
    for (int i = 0; i < feature_dim; ++i) w[i] = rng.normal();
    n = w.norm();
  } while (n < kNormFloor);
  return TaskVector{w / n, TaskOrigin::Sampled};
}

TrainFeatureResult train_feature(const FeatureMap& map,
                                 const std::vector<FeatureBatchItem>& batch) {
  if (batch.empty())
    throw std::invalid_argument("train_feature: batch must be nonempty");
  TrainFeatureResult result;
  result.map = map;

  double alignment = 0.0;
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(map.feature_dim(), map.obs_dim());
  int used = 0;
  for (const auto& item : batch) {
    if (item.observation.size() != map.obs_dim() || item.w.size() != map.feature_dim())
      throw std::invalid_argument("train_feature: batch dimension mismatch");
    Eigen::VectorXd u = map.weights * item.observation;
    if (map.nonlinearity == Nonlinearity::Tanh) u = u.array().tanh().matrix();
    const double n = u.norm();
    if (n < kNormFloor) continue;  // degenerate encoding carries no gradient
    const Eigen::VectorXd phi = u / n;
    alignment += phi.dot(item.w);
    // d(phi^T w)/du, then through the nonlinearity.
    Eigen::VectorXd g_u = item.w / n - u * (u.dot(item.w)) / (n * n * n);
    if (map.nonlinearity == Nonlinearity::Tanh)
      g_u = g_u.cwiseProduct((1.0 - u.array().square()).matrix());
    grad.noalias() += g_u * item.observation.transpose();
    ++used;
  }
  if (used > 0) {
    alignment /= used;
    grad /= used;
  }
  result.mean_alignment = alignment;
  result.grad_norm = grad.norm();

  if (!map.trainable) {
    result.was_noop = true;  // Table-driven "not trained" setting
    return result;
  }
  if (used > 0) {
    result.map.weights += map.learning_rate * grad;
    if (!result.map.weights.allFinite())
      throw std::runtime_error("train_feature: update produced non-finite weights");
  }
  return result;
}

}  // namespace nmps
