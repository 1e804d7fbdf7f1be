#include <catch2/catch_amalgamated.hpp>

#include "jenga/tower.hpp"

using namespace jenga;

namespace {

// Fixes a layer so that exactly one known slot bears the load.
void force_single_carrier(TowerState& t, int level, int tall_slot) {
  for (int s = 0; s < 3; ++s) {
    const int id = t.level_blocks(level)[static_cast<std::size_t>(s)];
    t.set_height_tolerance(id, s == tall_slot ? 1e-4 : -1e-4);
    t.set_residual_load(id, 0.05);
  }
}

double trace_plateau(const ForceTrace& trace) {
  // Mean of the settled tail, once the ramp is done.
  double sum = 0.0;
  int n = 0;
  for (std::size_t i = trace.force.size() / 2; i < trace.force.size(); ++i) {
    sum += trace.force[i];
    ++n;
  }
  return n > 0 ? sum / n : 0.0;
}

}  // namespace

TEST_CASE("new_tower is deterministic for a fixed seed", "[tower]") {
  const TowerConfig cfg;
  const TowerState a = new_tower(cfg, 42);
  const TowerState b = new_tower(cfg, 42);
  CHECK(a.state_hash() == b.state_hash());
  for (int id = 0; id < a.block_count(); ++id) {
    CHECK(a.block(id).height_tolerance == b.block(id).height_tolerance);
    CHECK(a.block(id).mu_top == b.block(id).mu_top);
  }
  const TowerState c = new_tower(cfg, 43);
  CHECK(a.state_hash() != c.state_hash());
}

TEST_CASE("a 16-level tower has 48 blocks", "[tower]") {
  TowerConfig cfg;
  cfg.levels = 16;
  const TowerState t = new_tower(cfg, 1);
  CHECK(t.block_count() == 48);
}

TEST_CASE("sampled tolerances stay within the configured bound", "[tower]") {
  const TowerConfig cfg;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const TowerState t = new_tower(cfg, seed);
    for (int id = 0; id < t.block_count(); ++id) {
      CHECK(std::abs(t.block(id).height_tolerance) <= cfg.tolerance_bound);
      CHECK(t.block(id).mu_top >= cfg.mu_min);
      CHECK(t.block(id).mu_top <= cfg.mu_max);
    }
  }
}

TEST_CASE("rejects invalid configs", "[tower]") {
  TowerConfig cfg;
  cfg.levels = 2;
  CHECK_THROWS_AS(new_tower(cfg, 0), InvalidConfigError);
}

TEST_CASE("topmost layer carries no load", "[tower]") {
  const TowerState t = new_tower(TowerConfig{}, 7);
  const auto loads = t.load_distribution(t.levels());
  CHECK(loads[0] == 0.0);
  CHECK(loads[1] == 0.0);
  CHECK(loads[2] == 0.0);
}

TEST_CASE("load distribution conserves the weight above", "[tower]") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const TowerState t = new_tower(TowerConfig{}, seed);
    for (int level = 1; level <= t.levels(); ++level) {
      const auto loads = t.load_distribution(level);
      const double sum = loads[0] + loads[1] + loads[2];
      CHECK(std::abs(sum - t.weight_above(level)) < 1e-9);
    }
  }
}

TEST_CASE("single tall center matches the static-equilibrium hand computation", "[tower]") {
  TowerConfig cfg;
  cfg.levels = 12;
  TowerState t = new_tower(cfg, 3);
  // Layer 2 has levels 3..12 above it: 10 levels of 3 blocks.
  force_single_carrier(t, 2, 1);
  const auto loads = t.load_distribution(2);
  const double w = 10 * 3 * cfg.mass * kGravity;  // = 5.2974 N
  CHECK(w == Catch::Approx(5.2974).margin(1e-4));
  CHECK(loads[1] == Catch::Approx(w - 2 * 0.05).margin(1e-12));
  CHECK(loads[0] == Catch::Approx(0.05).margin(1e-12));
  CHECK(loads[2] == Catch::Approx(0.05).margin(1e-12));
  CHECK(t.is_load_bearing(t.level_blocks(2)[1]));
  CHECK_FALSE(t.is_load_bearing(t.level_blocks(2)[0]));
}

TEST_CASE("unloaded blocks read below the conservative threshold", "[tower]") {
  TowerState t = new_tower(TowerConfig{}, 11);
  force_single_carrier(t, 9, 1);
  const int side = t.level_blocks(9)[0];
  const ForceTrace trace = t.reaction_force_profile(side, 0.005, 3.0, 99);
  for (double f : trace.force) CHECK(f < 0.18);
}

TEST_CASE("a loaded mid-tower block plateaus between the thresholds and 1 N", "[tower]") {
  TowerState t = new_tower(TowerConfig{}, 11);
  force_single_carrier(t, 9, 1);
  const int center = t.level_blocks(9)[1];
  t.set_friction(center, 0.33, 0.33);  // mid-range friction
  const ForceTrace trace = t.reaction_force_profile(center, 0.005, 3.0, 99);
  const double plateau = trace_plateau(trace);
  CHECK(plateau >= 0.32);
  CHECK(plateau <= 1.0);
}

TEST_CASE("zero push duration gives an empty trace", "[tower]") {
  const TowerState t = new_tower(TowerConfig{}, 2);
  const ForceTrace trace = t.reaction_force_profile(0, 0.005, 0.0, 5);
  CHECK(trace.empty());
  CHECK(trace.contact_start == -1);
}

TEST_CASE("force samples respect the sensor range and quantization", "[tower]") {
  const TowerState t = new_tower(TowerConfig{}, 21);
  const ForceTrace trace = t.reaction_force_profile(t.level_blocks(2)[1], 0.005, 2.0, 8);
  for (double f : trace.force) {
    CHECK(f >= 0.0);
    CHECK(f <= 5.0);
    const double steps = f / 0.002;
    CHECK(std::abs(steps - std::round(steps)) < 1e-9);
  }
}

TEST_CASE("extraction keeps a supported layer standing", "[tower]") {
  TowerState t = new_tower(TowerConfig{}, 4);
  t.apply_extraction(t.level_blocks(5)[0]);
  CHECK_FALSE(t.collapsed());
  CHECK(t.stability_check() == Stability::Stable);
  CHECK(t.extracted_on_level(5) == 1);
}

TEST_CASE("removing the center after both sides collapses the layer", "[tower]") {
  TowerState t = new_tower(TowerConfig{}, 4);
  t.apply_extraction(t.level_blocks(6)[0]);
  t.apply_extraction(t.level_blocks(6)[2]);
  CHECK_FALSE(t.collapsed());  // center alone still supports
  t.apply_extraction(t.level_blocks(6)[1]);
  CHECK(t.collapsed());
}

TEST_CASE("a single off-center support collapses the layer", "[tower]") {
  TowerState t = new_tower(TowerConfig{}, 4);
  t.apply_extraction(t.level_blocks(7)[1]);  // center gone, two sides hold
  CHECK_FALSE(t.collapsed());
  t.apply_extraction(t.level_blocks(7)[0]);  // only one side left
  CHECK(t.collapsed());
}

TEST_CASE("double extraction of the same block is an error", "[tower]") {
  TowerState t = new_tower(TowerConfig{}, 4);
  t.apply_extraction(t.level_blocks(5)[0]);
  CHECK_THROWS_AS(t.apply_extraction(t.level_blocks(5)[0]), AlreadyExtractedError);
}

TEST_CASE("placing three extracted blocks forms exactly one new level", "[tower]") {
  TowerState t = new_tower(TowerConfig{}, 9);
  const int before_levels = t.levels();
  const int prev_orientation = t.level_orientation(before_levels);
  const double load_before = t.weight_above(3);

  std::array<int, 3> extracted = {t.level_blocks(4)[0], t.level_blocks(6)[2], t.level_blocks(8)[0]};
  for (int id : extracted) t.apply_extraction(id);
  for (int id : extracted) t.place_extracted_on_top(id);

  CHECK(t.levels() == before_levels + 1);
  const auto& top = t.level_blocks(t.levels());
  for (int s = 0; s < 3; ++s) CHECK(top[static_cast<std::size_t>(s)] >= 0);
  CHECK(t.level_orientation(t.levels()) != prev_orientation);

  // Three blocks left their levels and came back on top: net weight above a
  // low layer is unchanged, while layers between the extraction points and
  // the top now carry more.
  CHECK(t.weight_above(3) == Catch::Approx(load_before).margin(1e-12));
  const double per_block = 0.018 * kGravity;
  CHECK(t.weight_above(10) == Catch::Approx(3 * per_block + 8 * 3 * per_block).margin(1e-9));
}

TEST_CASE("placing requires an extracted, unplaced block", "[tower]") {
  TowerState t = new_tower(TowerConfig{}, 9);
  CHECK_THROWS_AS(t.place_extracted_on_top(3), NotExtractedError);
  const int id = t.level_blocks(5)[0];
  t.apply_extraction(id);
  t.place_extracted_on_top(id);
  CHECK_THROWS_AS(t.place_extracted_on_top(id), NotExtractedError);
}

TEST_CASE("stability rule: full tower and one-missing-side patterns stand", "[tower]") {
  TowerState t = new_tower(TowerConfig{}, 14);
  CHECK(t.stability_check() == Stability::Stable);
  for (int level = 1; level < t.levels(); ++level) {
    t.set_status(t.level_blocks(level)[level % 2 == 0 ? 0 : 2], BlockStatus::Extracted);
  }
  CHECK(t.stability_check() == Stability::Stable);
}

TEST_CASE("stability rule: a level reduced to one side block collapses", "[tower]") {
  TowerState t = new_tower(TowerConfig{}, 14);
  t.set_status(t.level_blocks(10)[1], BlockStatus::Extracted);
  t.set_status(t.level_blocks(10)[2], BlockStatus::Extracted);
  CHECK(t.stability_check() == Stability::Collapsed);
}

TEST_CASE("plateau never decreases when the same pattern sits deeper", "[tower]") {
  TowerConfig cfg;
  TowerState t = new_tower(cfg, 17);
  for (int level = 1; level <= t.levels(); ++level) {
    force_single_carrier(t, level, 1);
    t.set_friction(t.level_blocks(level)[1], 0.3, 0.3);
  }
  for (int level = 1; level < t.levels(); ++level) {
    const double deep = t.plateau_force(t.level_blocks(level)[1]);
    const double shallow = t.plateau_force(t.level_blocks(level + 1)[1]);
    CHECK(deep >= shallow);
  }
}

TEST_CASE("collapse is absorbing: every operation reports CollapsedTower", "[tower]") {
  TowerState t = new_tower(TowerConfig{}, 4);
  const int id = t.level_blocks(5)[0];
  t.apply_extraction(id);
  t.mark_collapsed();
  CHECK(t.stability_check() == Stability::Collapsed);
  CHECK_THROWS_AS(t.load_distribution(3), CollapsedTowerError);
  CHECK_THROWS_AS(t.reaction_force_profile(1, 0.005, 1.0, 0), CollapsedTowerError);
  CHECK_THROWS_AS(t.apply_extraction(t.level_blocks(6)[0]), CollapsedTowerError);
  CHECK_THROWS_AS(t.place_extracted_on_top(id), CollapsedTowerError);
}

TEST_CASE("force range calibration holds across seeded towers", "[tower]") {
  int loaded_total = 0, loaded_in_range = 0;
  int unloaded_total = 0, unloaded_ok = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const TowerState t = new_tower(TowerConfig{}, seed);
    for (int level = 1; level < t.levels(); ++level) {
      const auto detail = t.load_detail(level);
      for (int s = 0; s < 3; ++s) {
        const int id = t.level_blocks(level)[static_cast<std::size_t>(s)];
        const double plateau = t.plateau_force(id);
        if (detail[static_cast<std::size_t>(s)].bearing) {
          ++loaded_total;
          if (plateau >= 0.2 && plateau <= 1.0) ++loaded_in_range;
        } else {
          ++unloaded_total;
          if (plateau < 0.18) ++unloaded_ok;
        }
      }
    }
  }
  CHECK(loaded_in_range >= loaded_total * 95 / 100);
  CHECK(unloaded_ok >= unloaded_total * 95 / 100);
}
