#include <doctest.h>

#include "nmps/variant.hpp"

using namespace nmps;

TEST_CASE("the variant matrix has exactly 12 rows and round-trips") {
  const auto& table = all_variants();
  REQUIRE(table.size() == 12);
  for (const auto& row : table) {
    CHECK(render_variant(row) == row.name);
    const VariantConfig parsed = parse_variant(row.name);
    CHECK(parsed.explorer_reward == row.explorer_reward);
    CHECK(parsed.buffer_sharing == row.buffer_sharing);
    CHECK(parsed.explorer_feature_trainable == row.explorer_feature_trainable);
    CHECK(parsed.action_source == row.action_source);
    CHECK(parsed.feature_dim == row.feature_dim);
    CHECK(parsed.skill_dim == row.skill_dim);
  }
}

TEST_CASE("notation maps to the documented factors") {
  const VariantConfig a = parse_variant("NMPS_X_exploit^e*");
  CHECK(a.explorer_reward == ExplorerKind::ApsExplor);
  CHECK(a.buffer_sharing == Sharing::ExploitCommon);
  CHECK_FALSE(a.explorer_feature_trainable);
  CHECK(a.action_source == ActionSource::Homeo);
  CHECK(a.feature_dim == 10);
  CHECK(a.skill_dim == 0);

  const VariantConfig b = parse_variant("NMPS_D_sep^ex_D_A10");
  CHECK(b.explorer_reward == ExplorerKind::Diayn);
  CHECK(b.buffer_sharing == Sharing::Separate);
  CHECK(b.explorer_feature_trainable);
  CHECK(b.action_source == ActionSource::AlwaysExplorer);
  CHECK(b.feature_dim == 10);
  CHECK(b.skill_dim == 10);

  const VariantConfig c = parse_variant("NMPS_D_sep^e*");
  CHECK(c.skill_dim == 16);
  CHECK(c.action_source == ActionSource::Homeo);

  const VariantConfig d = parse_variant("NMPS_X_sep^ex");
  CHECK(d.buffer_sharing == Sharing::Separate);
  CHECK(d.explorer_feature_trainable);
}

TEST_CASE("unknown names fail with the valid list") {
  CHECK_FALSE(is_variant_name("NMPS_Q_foo"));
  try {
    parse_variant("NMPS_Q_foo");
    FAIL("expected a parse error");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("NMPS_Q_foo") != std::string::npos);
    CHECK(msg.find("NMPS_X_sep^ex") != std::string::npos);  // lists valid names
    CHECK(msg.find("NMPS_D_sep^e*_D_A10") != std::string::npos);
  }
}

TEST_CASE("always-explorer rows are skill-explorer rows") {
  for (const auto& row : all_variants()) {
    if (row.action_source == ActionSource::AlwaysExplorer)
      CHECK(row.explorer_reward == ExplorerKind::Diayn);
    if (row.explorer_reward == ExplorerKind::Diayn) {
      CHECK(row.buffer_sharing == Sharing::Separate);
      CHECK(row.skill_dim >= 2);
    }
  }
}
