#pragma once

#include <vector>

#include "jenga/geometry.hpp"
#include "jenga/kinematics.hpp"
#include "jenga/rng.hpp"
#include "jenga/tower.hpp"
#include "jenga/tracking.hpp"

namespace jenga {

// Hybrid visual features: image coordinates of the target point, log of the
// depth ratio, and the axis-angle rotation between the current and desired
// camera orientation.
struct FeatureVector {
  double x = 0.0;
  double y = 0.0;
  double log_depth_ratio = 0.0;
  AxisAngle theta_u;

  Vec6 as_vector() const {
    Vec6 v;
    v << x, y, log_depth_ratio, theta_u.theta_u.x(), theta_u.theta_u.y(), theta_u.theta_u.z();
    return v;
  }
};

struct ServoError {
  Vec6 e_s = Vec6::Zero();
  double norm() const { return e_s.norm(); }
};

struct ServoConfig {
  double lambda = 0.5;          // control gain, 1/s
  double tolerance = 2e-5;      // convergence bound on |e_s|
  double loop_rate = 9.0;       // Hz
  double max_duration = 90.0;   // s
  double damping = 1e-6;        // damped pseudo-inverse of the arm Jacobian
  double singularity_threshold = 1e6;  // Jacobian condition number
  double z_star = 0.28;         // desired target-point depth (m)
  double mount_sigma = 0.0005;  // per-axis camera mount error spread (m)
  double max_misalignment = 0.007;  // fingertip-to-block-center budget (m)
  double slip_probability = 1.0;    // slip chance once the budget is exceeded

  double dt() const { return 1.0 / loop_rate; }
};

// Features of the current relative pose (camera -> target face). The desired
// relative orientation is the identity by construction of the face frame, so
// theta_u measures the rotation still to go.
inline FeatureVector features_from_pose(const RigidPose& rel_pose, double z_star) {
  const Vec3 p = rel_pose.translation;
  if (p.z() <= 0.0) {
    throw NonPositiveDepthError("features_from_pose: target at or behind the camera");
  }
  FeatureVector s;
  s.x = p.x() / p.z();
  s.y = p.y() / p.z();
  s.log_depth_ratio = std::log(p.z() / z_star);
  s.theta_u = rotation_to_axis_angle(rel_pose.rotation.transpose());
  return s;
}

// Features at the goal: fingertip on the face center puts the face center at
// (-ex, -ey, z_star) in the camera frame, where (ex, ey) is the lateral
// camera offset in the end-effector frame.
inline FeatureVector desired_features(const ServoConfig& cfg, const RigidPose& extrinsics) {
  FeatureVector s;
  s.x = -extrinsics.translation.x() / cfg.z_star;
  s.y = -extrinsics.translation.y() / cfg.z_star;
  return s;
}

// Interaction matrix of the feature vector at (s, Z): maps the camera body
// twist (linear; angular) to d/dt of (x, y, log Z/Z*, theta_u).
//
//       [ -1/Z   0    x/Z |  xy    -(1+xx)   y  ]
//  L =  [  0   -1/Z   y/Z |  1+yy   -xy     -x  ]
//       [  0     0   -1/Z |  -y      x       0  ]
//       [  0     0     0  |        L_w           ]
//
// with L_w the inverse right Jacobian of SO(3) at theta_u, which satisfies
// L_w * theta_u = theta_u and equals I at the goal.
inline Mat6 interaction_matrix(const FeatureVector& s, double z) {
  if (z <= 0.0) throw NonPositiveDepthError("interaction_matrix: non-positive depth");
  const double th = s.theta_u.angle();
  if (th > kPi - 1e-9) {
    throw SingularFeaturesError("interaction_matrix: rotation error at pi");
  }
  Mat6 l = Mat6::Zero();
  const double x = s.x, y = s.y;
  l.row(0) << -1.0 / z, 0, x / z, x * y, -(1 + x * x), y;
  l.row(1) << 0, -1.0 / z, y / z, 1 + y * y, -x * y, -x;
  l.row(2) << 0, 0, -1.0 / z, -y, x, 0;

  Mat3 lw = Mat3::Identity();
  if (th > 1e-12) {
    const Mat3 k = skew(s.theta_u.theta_u);
    const double f = 1.0 / (th * th) - (1.0 + std::cos(th)) / (2.0 * th * std::sin(th));
    lw += 0.5 * k + f * k * k;
  }
  l.bottomRightCorner<3, 3>() = lw;
  return l;
}

// v = -lambda * pinv(L) * e_s, the camera velocity command.
inline Vec6 control_law(const Mat6& l, const Vec6& e_s, double lambda) {
  Eigen::CompleteOrthogonalDecomposition<Mat6> cod(l);
  return -lambda * (cod.pseudoInverse() * e_s);
}

struct ServoStepResult {
  JointState q;
  ServoError error;
  Vec6 joint_velocity = Vec6::Zero();
  bool singularity = false;
  double jacobian_condition = 0.0;
};

// One control cycle: visual error -> camera twist -> end-effector twist ->
// clamped joint velocities -> Euler step.
inline ServoStepResult servo_step(const JointState& arm, const KinematicChain& chain,
                                  const RigidPose& extrinsics, const TrackState& track,
                                  const ServoConfig& cfg) {
  if (track.status == TrackStatus::Lost) {
    throw TrackingLostError("servo_step: tracker is lost");
  }
  const FeatureVector s = features_from_pose(track.pose, cfg.z_star);
  const FeatureVector star = desired_features(cfg, extrinsics);

  ServoStepResult out;
  out.error.e_s = s.as_vector() - star.as_vector();

  const Mat6 l = interaction_matrix(s, track.pose.translation.z());
  const Vec6 v_cam = control_law(l, out.error.e_s, cfg.lambda);

  // Camera twist to end-effector twist, then into base coordinates for the
  // geometric Jacobian.
  const Vec6 v_ee = twist_transform(extrinsics) * v_cam;
  const RigidPose ee = forward_kinematics(chain, arm);
  Mat6 spin = Mat6::Zero();
  spin.topLeftCorner<3, 3>() = ee.rotation;
  spin.bottomRightCorner<3, 3>() = ee.rotation;
  const Vec6 v_base = spin * v_ee;

  const Mat6 jac = geometric_jacobian(chain, arm);
  out.jacobian_condition = condition_number(jac);
  out.singularity = out.jacobian_condition > cfg.singularity_threshold;

  Vec6 qdot = damped_pinv(jac, cfg.damping) * v_base;
  for (int i = 0; i < 6; ++i) {
    qdot[i] = std::clamp(qdot[i], -chain.limits[static_cast<std::size_t>(i)].vel,
                         chain.limits[static_cast<std::size_t>(i)].vel);
  }
  out.joint_velocity = qdot;
  JointState next;
  next.q = arm.q + qdot * cfg.dt();
  out.q = chain.clamp_to_limits(next);
  return out;
}

enum class ServoOutcome { Converged, TrackingLost, Singularity, Timeout };

inline const char* to_string(ServoOutcome o) {
  switch (o) {
    case ServoOutcome::Converged: return "converged";
    case ServoOutcome::TrackingLost: return "tracking_lost";
    case ServoOutcome::Singularity: return "singularity";
    case ServoOutcome::Timeout: return "timeout";
  }
  return "?";
}

struct TrajectoryPoint {
  double t = 0.0;
  Vec6 q = Vec6::Zero();
  double err_norm = 0.0;
};

struct ServoResult {
  ServoOutcome outcome = ServoOutcome::Timeout;
  double time_s = 0.0;
  int steps = 0;
  double err_x = 0.0;  // contact offset along the face width (m)
  double err_y = 0.0;  // contact offset along the face height (m)
  double offset_norm = 0.0;
  JointState final_q;
  std::vector<TrajectoryPoint> trajectory;

  bool converged() const { return outcome == ServoOutcome::Converged; }
};

// Everything the approach loop needs to know about the cell.
struct ServoSetup {
  KinematicChain chain = KinematicChain::default_arm();
  RigidPose extrinsics;          // camera in end-effector frame
  double fingertip_forward = 0.25;  // fingertip along EE z (m)
  RigidPose tower_in_base;
  ServoConfig servo;
  TrackingNoise tracking;
};

// Optional event injection (used to reproduce the failure modes of a full
// game attempt: tracking-loss bursts and workspace-edge singularities).
struct ServoInjections {
  int burst_start_step = -1;
  int burst_steps = 0;
  double burst_gain_factor = 50.0;
  int singularity_step = -1;
};

// Closed-loop approach of one block face at the control rate: track, step,
// repeat until the visual error is inside tolerance. On convergence the
// result carries the fingertip-to-face-center offset; otherwise the reason.
inline ServoResult run_servo(const JointState& start, int target_block, int face_sign,
                             const TowerState& tower, const ServoSetup& setup, Rng& rng,
                             const ServoInjections* inject = nullptr,
                             bool record_trajectory = false) {
  ServoResult result;
  const RigidPose face_in_tower = tower.face_frame(target_block, face_sign);
  const RigidPose face_in_base = compose(setup.tower_in_base, face_in_tower);

  // The real mount differs from the calibrated extrinsics by a small lateral
  // offset; the features close the loop on the real camera, the controller
  // maps twists with the nominal one.
  RigidPose true_extrinsics = setup.extrinsics;
  true_extrinsics.translation.x() += setup.servo.mount_sigma * rng.normal();
  true_extrinsics.translation.y() += setup.servo.mount_sigma * rng.normal();

  const GroupModel group = build_group_model(tower, target_block);
  TrackState track;
  JointState q = start;
  const double dt = setup.servo.dt();
  const int max_steps = static_cast<int>(setup.servo.max_duration * setup.servo.loop_rate);

  for (int step = 0; step < max_steps; ++step) {
    const RigidPose ee = forward_kinematics(setup.chain, q);
    const RigidPose cam_in_base = compose(ee, true_extrinsics);
    const RigidPose cam_in_tower = compose(inverse(setup.tower_in_base), cam_in_base);

    TrackingNoise noise = setup.tracking;
    if (inject != nullptr && inject->burst_start_step >= 0 && step >= inject->burst_start_step &&
        step < inject->burst_start_step + inject->burst_steps) {
      noise.gain *= inject->burst_gain_factor;
      noise.sigma_floor_deg += 30.0;
    }
    track = track_step(track, group, cam_in_tower, face_in_tower, tower, noise, rng);
    if (track.status == TrackStatus::Lost) {
      result.outcome = ServoOutcome::TrackingLost;
      result.time_s = step * dt;
      result.steps = step;
      result.final_q = q;
      return result;
    }

    ServoStepResult sr = servo_step(q, setup.chain, setup.extrinsics, track, setup.servo);
    if (sr.singularity || (inject != nullptr && inject->singularity_step == step)) {
      result.outcome = ServoOutcome::Singularity;
      result.time_s = step * dt;
      result.steps = step;
      result.final_q = q;
      return result;
    }
    if (record_trajectory) {
      result.trajectory.push_back({step * dt, q.q, sr.error.norm()});
    }
    if (sr.error.norm() < setup.servo.tolerance) {
      result.outcome = ServoOutcome::Converged;
      result.time_s = step * dt;
      result.steps = step;
      result.final_q = q;
      // Contact point: fingertip ray along EE z intersected with the face.
      const Vec3 tip = ee.apply(Vec3(0, 0, setup.fingertip_forward));
      const Vec3 dir = ee.rotation.col(2);
      const Vec3 n = face_in_base.rotation.col(2);
      const double denom = dir.dot(n);
      if (std::abs(denom) > 1e-9) {
        const double along = (face_in_base.translation - tip).dot(n) / denom;
        const Vec3 contact = tip + along * dir;
        const Vec3 offset = contact - face_in_base.translation;
        result.err_x = offset.dot(face_in_base.rotation.col(0));
        result.err_y = offset.dot(face_in_base.rotation.col(1));
        result.offset_norm = std::hypot(result.err_x, result.err_y);
      }
      return result;
    }
    q = sr.q;
  }
  result.outcome = ServoOutcome::Timeout;
  result.time_s = max_steps * dt;
  result.steps = max_steps;
  result.final_q = q;
  return result;
}

}  // namespace jenga
