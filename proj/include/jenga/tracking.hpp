#pragma once

#include <vector>

#include "jenga/geometry.hpp"
#include "jenga/perception.hpp"
#include "jenga/rng.hpp"
#include "jenga/tower.hpp"

namespace jenga {

// Tracking model around one target block. Adjacent pieces contribute extra
// feature points; the ones on the levels above and below show their long
// side to the camera and are worth more than the occluded end faces.
struct GroupModel {
  int target_id = -1;
  std::vector<int> same_level;      // end faces next to the target
  std::vector<int> adjacent_level;  // side-facing, levels +-1
  std::vector<Vec3> model_points;   // member cuboid corners, target-block frame

  bool single_block() const { return same_level.empty() && adjacent_level.empty(); }
};

inline GroupModel build_group_model(const TowerState& tower, int target_id) {
  const Block& target = tower.block(target_id);
  GroupModel g;
  g.target_id = target_id;
  auto alive = [&](int id) {
    return id >= 0 && tower.block(id).status != BlockStatus::Extracted;
  };
  for (int id : tower.level_blocks(target.level)) {
    if (id != target_id && alive(id)) g.same_level.push_back(id);
  }
  for (int level : {target.level - 1, target.level + 1}) {
    if (level < 1 || level > tower.levels()) continue;
    for (int id : tower.level_blocks(level)) {
      if (alive(id)) g.adjacent_level.push_back(id);
    }
  }
  const RigidPose into_target = inverse(tower.block_pose(target_id));
  const auto& d = tower.config().dims;
  auto add_corners = [&](int id) {
    const RigidPose rel = compose(into_target, tower.block_pose(id));
    for (int i = 0; i < 8; ++i) {
      const Vec3 p(((i & 1) ? 0.5 : -0.5) * d.length, ((i & 2) ? 0.5 : -0.5) * d.width,
                   ((i & 4) ? 0.5 : -0.5) * d.height);
      g.model_points.push_back(rel.apply(p));
    }
  };
  add_corners(target_id);
  for (int id : g.same_level) add_corners(id);
  for (int id : g.adjacent_level) add_corners(id);
  return g;
}

struct TrackingNoise {
  double gain = 74.0;                 // deg of pose noise per deg of capped motion, 1 point
  double motion_cap_deg = 0.30;       // per-frame motion that saturates the noise
  double jump_threshold_deg = 10.0;   // larger per-frame jumps break the tracker
  double err_thr_deg = 25.0;          // failure threshold on the projection error
  double translation_equiv_deg_per_m = 60.0;
  double sigma_floor_deg = 0.0;
  int front_points = 4;
  int side_points = 8;
};

enum class TrackStatus { Tracking, Lost };

struct TrackState {
  RigidPose pose;          // estimated target pose, camera frame
  double e_proj_deg = 0.0; // angular deviation of the estimate from the truth
  TrackStatus status = TrackStatus::Tracking;
  RigidPose prev_true;     // last true relative pose, for the motion model
  bool has_prev = false;
};

// Feature points currently visible for this model: extracted members stop
// contributing.
inline int visible_feature_points(const GroupModel& g, const TowerState& tower,
                                  const TrackingNoise& n) {
  int pts = n.front_points;
  for (int id : g.same_level) {
    if (tower.block(id).status != BlockStatus::Extracted) pts += n.front_points;
  }
  for (int id : g.adjacent_level) {
    if (tower.block(id).status != BlockStatus::Extracted) pts += n.side_points;
  }
  return pts;
}

// One tracker update at the control rate. The estimate is the true relative
// pose perturbed in proportion to the inter-frame motion and in inverse
// proportion to sqrt(feature points); a jump beyond the tracker's agility
// leaves the estimate stale. The noise draws do not depend on the model, so
// paired runs with different models see scaled versions of the same
// perturbation.
inline TrackState track_step(const TrackState& state, const GroupModel& group,
                             const RigidPose& camera_in_tower, const RigidPose& target_in_tower,
                             const TowerState& tower, const TrackingNoise& noise, Rng& rng) {
  const RigidPose true_rel = compose(inverse(camera_in_tower), target_in_tower);
  TrackState out;
  out.prev_true = true_rel;
  out.has_prev = true;

  double motion_rot_deg = 0.0;
  double motion_deg = 0.0;
  if (state.has_prev) {
    motion_rot_deg = rotation_geodesic_deg(state.prev_true.rotation, true_rel.rotation);
    motion_deg = motion_rot_deg + noise.translation_equiv_deg_per_m *
                                      (true_rel.translation - state.prev_true.translation).norm();
  }

  if (motion_rot_deg > noise.jump_threshold_deg) {
    out.pose = state.pose;  // could not follow; estimate goes stale
    out.e_proj_deg = rotation_geodesic_deg(state.pose.rotation, true_rel.rotation);
    out.status = out.e_proj_deg > noise.err_thr_deg ? TrackStatus::Lost : TrackStatus::Tracking;
    return out;
  }

  const int pts = visible_feature_points(group, tower, noise);
  const double sigma_deg =
      (noise.gain * std::min(motion_deg, noise.motion_cap_deg) + noise.sigma_floor_deg) /
      std::sqrt(static_cast<double>(pts));

  const double g_rot = rng.normal();
  const Vec3 axis = rng.unit_vector();
  const Vec3 g_t(rng.normal(), rng.normal(), rng.normal());

  const double err_rad = deg_to_rad(sigma_deg) * g_rot;
  AxisAngle aa;
  aa.theta_u = axis * err_rad;
  out.pose.rotation = axis_angle_to_rotation(aa) * true_rel.rotation;
  out.pose.translation =
      true_rel.translation + std::abs(err_rad) * true_rel.translation.norm() * g_t;
  out.e_proj_deg = rad_to_deg(std::abs(err_rad));
  out.status = out.e_proj_deg > noise.err_thr_deg ? TrackStatus::Lost : TrackStatus::Tracking;
  return out;
}

// Fresh acquisition from segmentation masks: target's front-face corners into
// the planar pose solver. The face is the block end face (width x height).
inline TrackState tracker_reinitialize(const GroupModel& group,
                                       const std::vector<InstanceMask>& masks,
                                       const CameraIntrinsics& k, const BlockDims& dims) {
  const InstanceMask* target = nullptr;
  for (const auto& m : masks) {
    if (m.block_id == group.target_id) {
      target = &m;
      break;
    }
  }
  if (target == nullptr) {
    throw TargetNotVisibleError("target block " + std::to_string(group.target_id) +
                                " has no mask");
  }
  const auto corners = front_face_corners(*target);
  TrackState state;
  state.pose = planar_pnp(corners, dims.width, dims.height, k);
  state.e_proj_deg = 0.0;
  state.status = TrackStatus::Tracking;
  return state;
}

}  // namespace jenga
