#pragma once

#include <array>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "jenga/errors.hpp"
#include "jenga/geometry.hpp"

namespace jenga {

// One Denavit-Hartenberg row (standard/distal convention):
//   T_i = RotZ(q_i + theta_offset) * TransZ(d) * TransX(a) * RotX(alpha)
struct DhRow {
  double a = 0.0;             // link length (m)
  double alpha = 0.0;         // link twist (rad)
  double d = 0.0;             // link offset (m)
  double theta_offset = 0.0;  // joint variable offset (rad)
};

struct JointLimit {
  double min = -kPi;
  double max = kPi;
  double vel = 1.0;  // rad/s, > 0
};

struct JointState {
  Vec6 q = Vec6::Zero();
};

// Six-revolute serial arm. The default chain is a desk-scale anthropomorphic
// arm with a spherical wrist; the harness normally loads it from config.
struct KinematicChain {
  std::array<DhRow, 6> dh{};
  std::array<JointLimit, 6> limits{};

  static KinematicChain default_arm() {
    KinematicChain c;
    c.dh[0] = {0.0, kPi / 2.0, 0.135, 0.0};
    c.dh[1] = {0.26, 0.0, 0.0, 0.0};
    c.dh[2] = {0.0, kPi / 2.0, 0.0, 0.0};
    c.dh[3] = {0.0, -kPi / 2.0, 0.26, 0.0};
    c.dh[4] = {0.0, kPi / 2.0, 0.0, 0.0};
    c.dh[5] = {0.0, 0.0, 0.13, 0.0};
    c.limits[0] = {-3.0, 3.0, 1.0};
    c.limits[1] = {-1.95, 1.95, 1.0};
    c.limits[2] = {-1.95, 1.95, 1.0};
    c.limits[3] = {-3.0, 3.0, 1.5};
    c.limits[4] = {-1.95, 1.95, 1.5};
    c.limits[5] = {-3.0, 3.0, 1.5};
    return c;
  }

  void check_limits(const JointState& s) const {
    for (int i = 0; i < 6; ++i) {
      if (s.q[i] < limits[i].min || s.q[i] > limits[i].max) {
        throw JointLimitError("joint " + std::to_string(i + 1) + " out of limits: q=" +
                              std::to_string(s.q[i]));
      }
    }
  }

  JointState clamp_to_limits(const JointState& s) const {
    JointState out = s;
    for (int i = 0; i < 6; ++i) {
      out.q[i] = std::clamp(out.q[i], limits[i].min, limits[i].max);
    }
    return out;
  }
};

inline RigidPose dh_transform(const DhRow& row, double q) {
  const double ct = std::cos(q + row.theta_offset);
  const double st = std::sin(q + row.theta_offset);
  const double ca = std::cos(row.alpha);
  const double sa = std::sin(row.alpha);
  RigidPose t;
  t.rotation << ct, -st * ca, st * sa,  //
      st, ct * ca, -ct * sa,            //
      0.0, sa, ca;
  t.translation = Vec3(row.a * ct, row.a * st, row.d);
  return t;
}

// Frames of the base plus each joint, base frame first (7 entries).
inline std::array<RigidPose, 7> link_frames(const KinematicChain& chain, const JointState& s) {
  std::array<RigidPose, 7> frames;
  frames[0] = RigidPose::identity();
  for (int i = 0; i < 6; ++i) {
    frames[i + 1] = compose(frames[i], dh_transform(chain.dh[i], s.q[i]));
  }
  return frames;
}

// End-effector pose in the base frame. Enforces joint limits.
inline RigidPose forward_kinematics(const KinematicChain& chain, const JointState& s) {
  chain.check_limits(s);
  return link_frames(chain, s)[6];
}

// Geometric Jacobian: maps joint rates to the end-effector velocity
// (linear m/s; angular rad/s), both expressed in the base frame.
inline Mat6 geometric_jacobian(const KinematicChain& chain, const JointState& s) {
  const auto frames = link_frames(chain, s);
  const Vec3 p_end = frames[6].translation;
  Mat6 jac;
  for (int i = 0; i < 6; ++i) {
    const Vec3 z = frames[i].rotation.col(2);
    const Vec3 p = frames[i].translation;
    jac.block<3, 1>(0, i) = z.cross(p_end - p);
    jac.block<3, 1>(3, i) = z;
  }
  return jac;
}

inline double condition_number(const Mat6& m) {
  Eigen::JacobiSVD<Mat6> svd(m);
  const auto& sv = svd.singularValues();
  const double smin = sv[5];
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return sv[0] / smin;
}

// Damped least-squares pseudo-inverse, J^T (J J^T + damping^2 I)^-1.
inline Mat6 damped_pinv(const Mat6& j, double damping) {
  const Mat6 jjt = j * j.transpose() + damping * damping * Mat6::Identity();
  return j.transpose() * jjt.ldlt().solve(Mat6::Identity());
}

}  // namespace jenga
