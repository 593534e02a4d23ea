#include "nmps/variant.hpp"

#include <sstream>
#include <stdexcept>

namespace nmps {

namespace {

VariantConfig make_row(ExplorerKind kind, Sharing sharing, bool trainable,
                       ActionSource source, int skill_dim) {
  VariantConfig cfg;
  cfg.explorer_reward = kind;
  cfg.buffer_sharing = sharing;
  cfg.explorer_feature_trainable = trainable;
  cfg.action_source = source;
  cfg.feature_dim = 10;
  cfg.skill_dim = skill_dim;
  cfg.name = render_variant(cfg);
  return cfg;
}

std::vector<VariantConfig> build_table() {
  std::vector<VariantConfig> rows;
  for (Sharing sharing : {Sharing::Separate, Sharing::ExploitCommon, Sharing::ExplorCommon})
    for (bool trainable : {true, false})
      rows.push_back(make_row(ExplorerKind::ApsExplor, sharing, trainable,
                              ActionSource::Homeo, 0));
  for (bool trainable : {true, false})
    rows.push_back(make_row(ExplorerKind::Diayn, Sharing::Separate, trainable,
                            ActionSource::Homeo, 16));
  for (bool trainable : {true, false})
    rows.push_back(make_row(ExplorerKind::Diayn, Sharing::Separate, trainable,
                            ActionSource::AlwaysExplorer, 16));
  for (bool trainable : {true, false})
    rows.push_back(make_row(ExplorerKind::Diayn, Sharing::Separate, trainable,
                            ActionSource::AlwaysExplorer, 10));
  return rows;
}

}  // namespace

const std::vector<VariantConfig>& all_variants() {
  static const std::vector<VariantConfig> table = build_table();
  return table;
}

std::string render_variant(const VariantConfig& cfg) {
  std::string name = "NMPS_";
  name += cfg.explorer_reward == ExplorerKind::ApsExplor ? "X" : "D";
  switch (cfg.buffer_sharing) {
    case Sharing::Separate: name += "_sep"; break;
    case Sharing::ExploitCommon: name += "_exploit"; break;
    case Sharing::ExplorCommon: name += "_explor"; break;
  }
  name += "^e";
  name += cfg.explorer_feature_trainable ? "x" : "*";
  if (cfg.action_source == ActionSource::AlwaysExplorer) name += "_D";
  if (cfg.explorer_reward == ExplorerKind::Diayn && cfg.skill_dim == 10) name += "_A10";
  return name;
}

VariantConfig parse_variant(const std::string& name) {
  for (const auto& row : all_variants())
    if (row.name == name) return row;
  std::ostringstream msg;
  msg << "unknown variant '" << name << "'; valid names:";
  for (const auto& row : all_variants()) msg << " " << row.name;
  throw std::invalid_argument(msg.str());
}

bool is_variant_name(const std::string& name) {
  for (const auto& row : all_variants())
    if (row.name == name) return true;
  return false;
}

}  // namespace nmps
