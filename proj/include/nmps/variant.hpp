#pragma once

#include <string>
#include <vector>

#include "nmps/explorer.hpp"
#include "nmps/replay.hpp"

namespace nmps {

enum class ActionSource { Homeo, AlwaysExplorer };

// One row of the four-factor variant matrix: explorer reward family, buffer
// sharing, explorer feature/skill training toggle, action source, plus the
// feature/skill dimensions the notation fixes.
struct VariantConfig {
  ExplorerKind explorer_reward = ExplorerKind::ApsExplor;
  Sharing buffer_sharing = Sharing::Separate;
  bool explorer_feature_trainable = true;
  ActionSource action_source = ActionSource::Homeo;
  int feature_dim = 10;
  int skill_dim = 0;  // Diayn rows only
  std::string name;
};

// The 12 canonical variants, in matrix order.
const std::vector<VariantConfig>& all_variants();

// Canonical notation from the four factors.
std::string render_variant(const VariantConfig& cfg);

// Strict parse of the canonical notation; throws std::invalid_argument
// listing the valid names on unknown input.
VariantConfig parse_variant(const std::string& name);

bool is_variant_name(const std::string& name);

}  // namespace nmps
