#include <doctest.h>

#include <cmath>

#include "nmps/features.hpp"
#include "nmps/rng.hpp"

using namespace nmps;

namespace {

FeatureMap identity_map(int dim, Nonlinearity nl = Nonlinearity::Tanh) {
  FeatureMap map;
  map.weights = Eigen::MatrixXd::Identity(dim, dim);
  map.nonlinearity = nl;
  return map;
}

Eigen::VectorXd random_obs(int dim, Rng& rng) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.uniform(-2.0, 2.0);
  return v;
}

}  // namespace

TEST_CASE("identity weights map the first basis vector to itself") {
  const FeatureMap map = identity_map(4);
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(4);
  e1[0] = 1.0;
  const Eigen::VectorXd phi = encode(map, e1);
  CHECK(phi[0] == doctest::Approx(1.0).epsilon(1e-12));
  for (int i = 1; i < 4; ++i) CHECK(phi[i] == 0.0);
}

TEST_CASE("encodings are unit norm") {
  Rng rng(3, Stream::Test);
  for (Nonlinearity nl : {Nonlinearity::Tanh, Nonlinearity::Linear}) {
    FeatureMap map = make_feature_map(10, 4, rng, true, 0.01, nl);
    for (int i = 0; i < 200; ++i)
      CHECK(encode(map, random_obs(4, rng)).norm() == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("linear encoder is invariant to positive input scaling") {
  Rng rng(5, Stream::Test);
  const FeatureMap map = make_feature_map(8, 3, rng, true, 0.01, Nonlinearity::Linear);
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd obs = random_obs(3, rng);
    const Eigen::VectorXd a = encode(map, obs);
    const Eigen::VectorXd b = encode(map, 3.0 * obs);
    CHECK((a - b).norm() < 1e-12);
  }
}

TEST_CASE("zero pre-normalization vector degenerates to the first basis vector") {
  Rng rng(7, Stream::Test);
  const FeatureMap map = make_feature_map(6, 3, rng);
  const Eigen::VectorXd phi = encode(map, Eigen::VectorXd::Zero(3));
  CHECK(phi[0] == 1.0);
  CHECK(phi.norm() == doctest::Approx(1.0));
}

TEST_CASE("encode rejects dimension mismatches") {
  Rng rng(9, Stream::Test);
  const FeatureMap map = make_feature_map(6, 3, rng);
  CHECK_THROWS_AS(encode(map, Eigen::VectorXd::Zero(4)), std::invalid_argument);
}

TEST_CASE("sampled task vectors live on the unit sphere") {
  Rng rng(11, Stream::Test);
  for (int i = 0; i < 100; ++i) {
    const TaskVector t = sample_task(10, rng);
    CHECK(std::abs(t.w.norm() - 1.0) < 1e-9);
    CHECK(t.origin == TaskOrigin::Sampled);
  }
  for (int i = 0; i < 50; ++i) {
    const TaskVector t = sample_task(1, rng);
    CHECK((t.w[0] == doctest::Approx(1.0) || t.w[0] == doctest::Approx(-1.0)));
  }
}

TEST_CASE("task sampling is symmetric on the sphere") {
  Rng rng(13, Stream::Test);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(10);
  const int n = 100000;
  for (int i = 0; i < n; ++i) mean += sample_task(10, rng).w;
  mean /= n;
  for (int d = 0; d < 10; ++d) CHECK(std::abs(mean[d]) < 0.02);
}

TEST_CASE("gradient vanishes when phi already equals w") {
  Rng rng(15, Stream::Test);
  const FeatureMap map = make_feature_map(8, 4, rng);
  std::vector<FeatureBatchItem> batch;
  for (int i = 0; i < 16; ++i) {
    const Eigen::VectorXd obs = random_obs(4, rng);
    batch.push_back({obs, encode(map, obs)});
  }
  const TrainFeatureResult r = train_feature(map, batch);
  CHECK(r.grad_norm <= 1e-6);
  CHECK(r.mean_alignment == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("repeated training on one pair climbs monotonically toward 1") {
  Rng rng(17, Stream::Test);
  FeatureMap map = make_feature_map(6, 3, rng, true, 0.01);
  const Eigen::VectorXd obs = random_obs(3, rng);
  const TaskVector task = sample_task(6, rng);
  std::vector<FeatureBatchItem> batch = {{obs, task.w}};
  double prev = encode(map, obs).dot(task.w);
  const double initial = prev;
  for (int i = 0; i < 300; ++i) {
    map = train_feature(map, batch).map;
    const double now = encode(map, obs).dot(task.w);
    CHECK(now >= prev - 1e-12);
    prev = now;
  }
  CHECK(prev > initial);
  CHECK(prev > 0.85);  // this seed reaches 0.872 by step 300 and keeps climbing
  CHECK(prev <= 1.0 + 1e-12);
}

TEST_CASE("train_feature with trainable=false is the identity on parameters") {
  Rng rng(19, Stream::Test);
  FeatureMap map = make_feature_map(6, 3, rng, /*trainable=*/false);
  const Eigen::MatrixXd before = map.weights;
  std::vector<FeatureBatchItem> batch = {{random_obs(3, rng), sample_task(6, rng).w}};
  const TrainFeatureResult r = train_feature(map, batch);
  CHECK(r.was_noop);
  CHECK(r.map.weights == before);  // bit-identical
}

TEST_CASE("analytic gradient matches finite differences") {
  Rng rng(21, Stream::Test);
  const FeatureMap map = make_feature_map(5, 3, rng, true, 1.0);  // lr 1: update == gradient
  std::vector<FeatureBatchItem> batch;
  for (int i = 0; i < 3; ++i) batch.push_back({random_obs(3, rng), sample_task(5, rng).w});

  auto objective = [&](const Eigen::MatrixXd& weights) {
    FeatureMap probe = map;
    probe.weights = weights;
    double total = 0.0;
    for (const auto& item : batch) total += encode(probe, item.observation).dot(item.w);
    return total / static_cast<double>(batch.size());
  };

  const Eigen::MatrixXd analytic = train_feature(map, batch).map.weights - map.weights;
  const double h = 1e-5;
  for (int i = 0; i < map.weights.rows(); ++i)
    for (int j = 0; j < map.weights.cols(); ++j) {
      Eigen::MatrixXd up = map.weights, down = map.weights;
      up(i, j) += h;
      down(i, j) -= h;
      const double fd = (objective(up) - objective(down)) / (2.0 * h);
      if (std::abs(fd) < 1e-8) continue;
      CHECK(std::abs(analytic(i, j) - fd) / std::abs(fd) <= 1e-3);
    }
}

TEST_CASE("alignment is bounded by Cauchy-Schwarz on unit vectors") {
  Rng rng(23, Stream::Test);
  const FeatureMap map = make_feature_map(10, 2, rng);
  for (int i = 0; i < 200; ++i) {
    const double dot = encode(map, random_obs(2, rng)).dot(sample_task(10, rng).w);
    CHECK(dot <= 1.0 + 1e-12);
    CHECK(dot >= -1.0 - 1e-12);
  }
}
