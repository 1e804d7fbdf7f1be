#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "jenga/errors.hpp"
#include "jenga/geometry.hpp"
#include "jenga/rng.hpp"

namespace jenga {

inline constexpr double kGravity = 9.81;

struct BlockDims {
  double length = 0.075;
  double width = 0.025;
  double height = 0.015;
};

enum class BlockStatus { Present, Tested, Extracted };

struct Block {
  int id = -1;
  int level = 0;  // 1 = bottom
  int slot = 0;   // 0..2, 1 = center
  BlockStatus status = BlockStatus::Present;
  double height_tolerance = 0.0;  // signed, m
  double mu_top = 0.3;
  double mu_bottom = 0.3;
  double residual_load = 0.05;  // N carried when not bearing
  bool placed = false;          // true once re-stacked on top after extraction
};

struct TowerConfig {
  int levels = 18;
  BlockDims dims{};
  double mass = 0.018;              // kg per block
  double mu_min = 0.2;
  double mu_max = 0.45;
  double tolerance_bound = 2e-4;    // m
  double contact_epsilon = 2e-5;    // m, blocks this close to the layer max share load
  double residual_load = 0.05;      // N
  double residual_spread = 0.2;     // relative, clipped at 2 sigma
  double load_saturation = 1.1;     // N, soft cap of the effective pressed load
  double noise_sigma = 0.005;       // N, sensor noise
  double full_scale = 5.0;          // N
  double quantum = 0.002;           // N per ADC step
  double rise_time = 0.08;          // s, force ramp constant after contact
  int sample_rate = 20;             // Hz
  int base_orientation = 0;         // 0 or 90: level-1 long-axis direction
  Vec3 position = Vec3(0.42, 0.0, 0.0);  // tower frame origin in robot base frame
};

// One 20 Hz force-sensor recording. Sample spacing is exactly 1/20 s.
struct ForceTrace {
  std::vector<double> force;
  int contact_start = -1;  // index of first sample with detectable contact, -1 if none

  static constexpr double kDt = 0.05;
  double t(std::size_t i) const { return static_cast<double>(i) * kDt; }
  bool empty() const { return force.empty(); }
  double peak() const {
    double p = 0.0;
    for (double f : force) p = std::max(p, f);
    return p;
  }
};

enum class Stability { Stable, Collapsed };

struct SlotLoad {
  double newton = 0.0;
  bool bearing = false;  // true when the slot carries real load from above
};

// Physical state of the tower: block bookkeeping, load paths, reaction
// forces, extraction side effects and the collapse rule. One game owns one
// TowerState; all mutation is sequential.
class TowerState {
 public:
  static TowerState create(const TowerConfig& cfg, std::uint64_t seed) {
    if (cfg.levels < 3) throw InvalidConfigError("tower: levels must be >= 3");
    if (cfg.dims.length <= 0 || cfg.dims.width <= 0 || cfg.dims.height <= 0) {
      throw InvalidConfigError("tower: block dimensions must be positive");
    }
    if (cfg.base_orientation != 0 && cfg.base_orientation != 90) {
      throw InvalidConfigError("tower: base_orientation must be 0 or 90");
    }
    TowerState t;
    t.cfg_ = cfg;
    t.seed_ = seed;
    Rng rng(derive_seed(seed, 0x7057));
    for (int level = 1; level <= cfg.levels; ++level) {
      std::array<int, 3> slots{};
      for (int slot = 0; slot < 3; ++slot) {
        Block b;
        b.id = static_cast<int>(t.blocks_.size());
        b.level = level;
        b.slot = slot;
        b.height_tolerance = rng.uniform(-cfg.tolerance_bound, cfg.tolerance_bound);
        b.mu_top = rng.uniform(cfg.mu_min, cfg.mu_max);
        b.mu_bottom = rng.uniform(cfg.mu_min, cfg.mu_max);
        const double spread = std::clamp(rng.normal(), -2.0, 2.0) * cfg.residual_spread;
        b.residual_load = cfg.residual_load * (1.0 + spread);
        slots[slot] = b.id;
        t.blocks_.push_back(b);
      }
      t.level_slots_.push_back(slots);
      t.extracted_count_.push_back(0);
    }
    return t;
  }

  const TowerConfig& config() const { return cfg_; }
  std::uint64_t seed() const { return seed_; }
  bool collapsed() const { return collapsed_; }
  int levels() const { return static_cast<int>(level_slots_.size()); }
  int block_count() const { return static_cast<int>(blocks_.size()); }

  const Block& block(int id) const {
    if (id < 0 || id >= block_count()) throw UnknownBlockError("no block with id " + std::to_string(id));
    return blocks_[static_cast<std::size_t>(id)];
  }

  // Block ids on a level; -1 marks a never-filled slot of a partial top level.
  const std::array<int, 3>& level_blocks(int level) const {
    check_level(level);
    return level_slots_[static_cast<std::size_t>(level - 1)];
  }

  int extracted_on_level(int level) const {
    check_level(level);
    return extracted_count_[static_cast<std::size_t>(level - 1)];
  }

  // 0: long axis along tower x, 1: along tower y. Adjacent levels alternate.
  int level_orientation(int level) const {
    check_level(level);
    return (cfg_.base_orientation / 90 + level - 1) % 2;
  }

  Vec3 block_center(int id) const {
    const Block& b = block(id);
    const double lateral = (b.slot - 1) * cfg_.dims.width;
    const double z = (b.level - 0.5) * cfg_.dims.height;
    if (level_orientation(b.level) == 0) return {0.0, lateral, z};
    return {lateral, 0.0, z};
  }

  // Pose of the block frame in the tower frame: x along the long axis,
  // y lateral, z up.
  RigidPose block_pose(int id) const {
    const Block& b = block(id);
    RigidPose p;
    p.translation = block_center(id);
    if (level_orientation(b.level) == 1) {
      p.rotation << 0, -1, 0, 1, 0, 0, 0, 0, 1;
    }
    return p;
  }

  // Frame of one end face (sign = +1 for the +x end of the block frame):
  // origin at the face center, z pointing into the block, y pointing down.
  RigidPose face_frame(int id, int sign) const {
    const RigidPose bp = block_pose(id);
    const Vec3 x_long = bp.rotation.col(0);
    const Vec3 center = bp.translation + 0.5 * cfg_.dims.length * sign * x_long;
    const Vec3 z_f = -sign * x_long;  // push direction
    const Vec3 y_f(0, 0, -1);
    const Vec3 x_f = y_f.cross(z_f);
    RigidPose f;
    f.rotation.col(0) = x_f;
    f.rotation.col(1) = y_f;
    f.rotation.col(2) = z_f;
    f.translation = center;
    return f;
  }

  // Weight of all blocks physically present above the level, in N.
  double weight_above(int level) const {
    check_level(level);
    int n = 0;
    for (const Block& b : blocks_) {
      if (b.level > level && b.status != BlockStatus::Extracted) ++n;
    }
    return n * cfg_.mass * kGravity;
  }

  // Per-slot normal load. Blocks whose effective height is within
  // contact_epsilon of the layer maximum split the weight from above evenly;
  // the other present blocks keep their small residual load. Loads always sum
  // to the weight above.
  std::array<SlotLoad, 3> load_detail(int level) const {
    require_standing();
    check_level(level);
    std::array<SlotLoad, 3> out{};
    const auto& slots = level_slots_[static_cast<std::size_t>(level - 1)];
    std::vector<int> present;
    for (int id : slots) {
      if (id >= 0 && blocks_[static_cast<std::size_t>(id)].status != BlockStatus::Extracted) {
        present.push_back(id);
      }
    }
    if (present.empty()) return out;
    const double w = weight_above(level);
    if (w <= 0.0) return out;

    double hmax = -1e9;
    for (int id : present) hmax = std::max(hmax, blocks_[static_cast<std::size_t>(id)].height_tolerance);
    std::vector<int> tall, rest;
    for (int id : present) {
      if (blocks_[static_cast<std::size_t>(id)].height_tolerance >= hmax - cfg_.contact_epsilon) {
        tall.push_back(id);
      } else {
        rest.push_back(id);
      }
    }
    double residual_sum = 0.0;
    for (int id : rest) residual_sum += blocks_[static_cast<std::size_t>(id)].residual_load;

    if (w <= residual_sum) {
      for (int id : present) {
        out[static_cast<std::size_t>(blocks_[static_cast<std::size_t>(id)].slot)] = {
            w / static_cast<double>(present.size()), false};
      }
      return out;
    }
    const double share = (w - residual_sum) / static_cast<double>(tall.size());
    for (int id : tall) {
      out[static_cast<std::size_t>(blocks_[static_cast<std::size_t>(id)].slot)] = {share, true};
    }
    for (int id : rest) {
      out[static_cast<std::size_t>(blocks_[static_cast<std::size_t>(id)].slot)] = {
          blocks_[static_cast<std::size_t>(id)].residual_load, false};
    }
    return out;
  }

  std::array<double, 3> load_distribution(int level) const {
    const auto detail = load_detail(level);
    return {detail[0].newton, detail[1].newton, detail[2].newton};
  }

  bool is_load_bearing(int id) const {
    const Block& b = block(id);
    return load_detail(b.level)[static_cast<std::size_t>(b.slot)].bearing;
  }

  // Noise-free friction plateau for pushing this block out. The effective
  // pressed load saturates: deep layers sit on many compliant contacts, so
  // the force seen by one block grows sub-linearly with the stack weight.
  double plateau_force(int id) const {
    const Block& b = block(id);
    const double share = load_detail(b.level)[static_cast<std::size_t>(b.slot)].newton;
    const double s = cfg_.load_saturation;
    const double effective = s * (1.0 - std::exp(-share / s));
    return (b.mu_top + b.mu_bottom) * effective;
  }

  // Simulated sensor reading of one continuous push over `duration` seconds.
  // Contact is at t = 0; the force ramps to the friction plateau.
  ForceTrace reaction_force_profile(int id, double push_speed, double duration,
                                    std::uint64_t seed) const {
    require_standing();
    const Block& b = block(id);
    if (b.status == BlockStatus::Extracted) {
      throw AlreadyExtractedError("block " + std::to_string(id) + " already extracted");
    }
    (void)push_speed;  // quasi-static model: plateau does not depend on speed
    ForceTrace trace;
    const int n = static_cast<int>(duration * cfg_.sample_rate);
    if (n <= 0) return trace;
    const double plateau = plateau_force(id);
    Rng rng(derive_seed(seed, 0xf02c));
    trace.force.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const double t = trace.t(static_cast<std::size_t>(i));
      double f = plateau * (1.0 - std::exp(-t / cfg_.rise_time)) + cfg_.noise_sigma * rng.normal();
      f = std::clamp(f, 0.0, cfg_.full_scale);
      f = std::round(f / cfg_.quantum) * cfg_.quantum;
      trace.force.push_back(f);
    }
    trace.contact_start = 0;
    return trace;
  }

  // Marks the block extracted and re-evaluates stability.
  void apply_extraction(int id) {
    require_standing();
    Block& b = mutable_block(id);
    if (b.status == BlockStatus::Extracted) {
      throw AlreadyExtractedError("block " + std::to_string(id) + " already extracted");
    }
    b.status = BlockStatus::Extracted;
    ++extracted_count_[static_cast<std::size_t>(b.level - 1)];
    if (evaluate_support() == Stability::Collapsed) {
      collapsed_ = true;
    }
  }

  // Re-stacks an extracted block on the top of the tower. The piece gets a
  // fresh id; the old record stays Extracted so game bookkeeping never
  // resurrects it. Returns the new block id.
  int place_extracted_on_top(int id) {
    require_standing();
    Block& src = mutable_block(id);
    if (src.status != BlockStatus::Extracted) {
      throw NotExtractedError("block " + std::to_string(id) + " is not extracted");
    }
    if (src.placed) {
      throw NotExtractedError("block " + std::to_string(id) + " was already placed");
    }
    int level = levels();
    int slot = -1;
    auto& top = level_slots_.back();
    for (int s = 0; s < 3; ++s) {
      if (top[s] < 0) {
        slot = s;
        break;
      }
    }
    if (slot < 0) {  // top level full: start a new one, rotated 90 degrees
      level_slots_.push_back({-1, -1, -1});
      extracted_count_.push_back(0);
      level = levels();
      slot = 0;
    }
    Block copy = src;
    copy.id = static_cast<int>(blocks_.size());
    copy.level = level;
    copy.slot = slot;
    copy.status = BlockStatus::Present;
    copy.placed = false;
    src.placed = true;
    level_slots_[static_cast<std::size_t>(level - 1)][static_cast<std::size_t>(slot)] = copy.id;
    blocks_.push_back(copy);
    return copy.id;
  }

  // Support rule: every layer below the top needs its center block or both
  // side blocks. Collapse is absorbing.
  Stability stability_check() const {
    if (collapsed_) return Stability::Collapsed;
    return evaluate_support();
  }

  void set_status(int id, BlockStatus status) { mutable_block(id).status = status; }

  // Scenario construction hooks (tests and benches build specific friction
  // or tolerance patterns with these).
  void set_height_tolerance(int id, double v) { mutable_block(id).height_tolerance = v; }
  void set_friction(int id, double mu_top, double mu_bottom) {
    mutable_block(id).mu_top = mu_top;
    mutable_block(id).mu_bottom = mu_bottom;
  }
  void set_residual_load(int id, double v) { mutable_block(id).residual_load = v; }

  // Game-level collapse (overload push or accumulated instability).
  void mark_collapsed() { collapsed_ = true; }

  std::uint64_t state_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](std::uint64_t v) {
      h ^= v;
      h *= 0x100000001b3ull;
    };
    auto mixd = [&](double d) {
      std::uint64_t bits;
      static_assert(sizeof(bits) == sizeof(d));
      std::memcpy(&bits, &d, sizeof(bits));
      mix(bits);
    };
    mix(static_cast<std::uint64_t>(blocks_.size()));
    for (const Block& b : blocks_) {
      mix(static_cast<std::uint64_t>(b.id));
      mix(static_cast<std::uint64_t>(b.level * 4 + b.slot));
      mix(static_cast<std::uint64_t>(b.status));
      mix(b.placed ? 1u : 0u);
      mixd(b.height_tolerance);
      mixd(b.mu_top);
      mixd(b.mu_bottom);
      mixd(b.residual_load);
    }
    for (int c : extracted_count_) mix(static_cast<std::uint64_t>(c));
    mix(collapsed_ ? 1u : 0u);
    return h;
  }

 private:
  void check_level(int level) const {
    if (level < 1 || level > levels()) {
      throw SimError("level " + std::to_string(level) + " out of range");
    }
  }

  void require_standing() const {
    if (collapsed_) throw CollapsedTowerError("tower has collapsed");
  }

  Block& mutable_block(int id) {
    if (id < 0 || id >= block_count()) throw UnknownBlockError("no block with id " + std::to_string(id));
    return blocks_[static_cast<std::size_t>(id)];
  }

  Stability evaluate_support() const {
    for (int level = 1; level < levels(); ++level) {
      const auto& slots = level_slots_[static_cast<std::size_t>(level - 1)];
      auto present = [&](int s) {
        const int id = slots[static_cast<std::size_t>(s)];
        return id >= 0 && blocks_[static_cast<std::size_t>(id)].status != BlockStatus::Extracted;
      };
      const bool ok = present(1) || (present(0) && present(2));
      if (!ok) return Stability::Collapsed;
    }
    return Stability::Stable;
  }

  TowerConfig cfg_{};
  std::uint64_t seed_ = 0;
  bool collapsed_ = false;
  std::vector<Block> blocks_;
  std::vector<std::array<int, 3>> level_slots_;
  std::vector<int> extracted_count_;
};

inline TowerState new_tower(const TowerConfig& cfg, std::uint64_t seed) {
  return TowerState::create(cfg, seed);
}

}  // namespace jenga
