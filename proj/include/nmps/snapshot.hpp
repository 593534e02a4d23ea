#pragma once

#include <string>

#include "nmps/features.hpp"
#include "nmps/sf_agent.hpp"

namespace nmps {

// Pre-training artifact kept for fine-tuning: the exploit feature map, the
// exploit successor table, and the run metadata. Serialized as versioned
// structured text with floats at 17 significant digits so that a round trip
// is bit-exact. The exploration agent is deliberately absent: it is discarded
// when pre-training ends.
struct SnapshotMeta {
  int version = 1;
  std::string variant;  // variant or baseline name
  std::string env;      // fourrooms | fourrooms5 | pointmass
  double rho = 0.0;
  uint64_t seed = 0;
  long step = 0;
};

struct Snapshot {
  SnapshotMeta meta;
  FeatureMap feature;
  SuccessorTable table;
};

std::string snapshot_to_string(const Snapshot& snap);
Snapshot snapshot_from_string(const std::string& text);

void save_snapshot(const Snapshot& snap, const std::string& path);
Snapshot load_snapshot(const std::string& path);

// Fixed shortest-exact formatting used across snapshots and CSV logs.
std::string format_double(double value);

}  // namespace nmps
