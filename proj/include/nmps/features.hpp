#pragma once

#include <Eigen/Core>
#include <vector>

#include "nmps/rng.hpp"

namespace nmps {

enum class Nonlinearity { Tanh, Linear };

// Feature encoder phi: elementwise nonlinearity of a linear map, projected to
// the unit sphere. Updates return new values; a map snapshot is never mutated
// in place.
struct FeatureMap {
  Eigen::MatrixXd weights;  // feature_dim x obs_dim
  Nonlinearity nonlinearity = Nonlinearity::Tanh;
  bool trainable = true;
  double learning_rate = 0.01;

  int feature_dim() const { return static_cast<int>(weights.rows()); }
  int obs_dim() const { return static_cast<int>(weights.cols()); }
};

FeatureMap make_feature_map(int feature_dim, int obs_dim, Rng& rng,
                            bool trainable = true, double learning_rate = 0.01,
                            Nonlinearity nonlinearity = Nonlinearity::Tanh);

// Unit-norm encoding. A zero pre-normalization vector maps to the first basis
// vector (degenerate rule).
Eigen::VectorXd encode(const FeatureMap& map, const Eigen::VectorXd& observation);

enum class TaskOrigin { Sampled, Regressed };

struct TaskVector {
  Eigen::VectorXd w;
  TaskOrigin origin = TaskOrigin::Sampled;
};

// Uniform on the unit sphere.
TaskVector sample_task(int feature_dim, Rng& rng);

struct FeatureBatchItem {
  Eigen::VectorXd observation;
  Eigen::VectorXd w;
};

struct TrainFeatureResult {
  FeatureMap map;
  bool was_noop = false;       // trainable was false; weights untouched
  double grad_norm = 0.0;      // Frobenius norm of the applied gradient
  double mean_alignment = 0.0; // mean phi(s)^T w before the step
};

// One gradient-ascent step on the mean of phi(s)^T w over the batch.
TrainFeatureResult train_feature(const FeatureMap& map,
                                 const std::vector<FeatureBatchItem>& batch);

}  // namespace nmps
