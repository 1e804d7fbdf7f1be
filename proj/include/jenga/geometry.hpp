#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "jenga/errors.hpp"

namespace jenga {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

inline constexpr double kPi = std::numbers::pi;

inline double deg_to_rad(double d) { return d * kPi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / kPi; }

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),  //
      v.z(), 0.0, -v.x(),   //
      -v.y(), v.x(), 0.0;
  return m;
}

// Rigid transform: p_out = rotation * p_in + translation. Units are meters
// for translation; the rotation is a proper orthonormal 3x3 matrix.
struct RigidPose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidPose identity() { return {}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  bool is_valid(double tol = 1e-9) const {
    const Mat3 err = rotation.transpose() * rotation - Mat3::Identity();
    return err.cwiseAbs().maxCoeff() <= tol &&
           std::abs(rotation.determinant() - 1.0) <= tol;
  }
};

inline RigidPose compose(const RigidPose& a, const RigidPose& b) {
  return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

inline RigidPose inverse(const RigidPose& a) {
  RigidPose out;
  out.rotation = a.rotation.transpose();
  out.translation = -(out.rotation * a.translation);
  return out;
}

// Rotation encoded as axis * angle with angle in [0, pi].
struct AxisAngle {
  Vec3 theta_u = Vec3::Zero();

  double angle() const { return theta_u.norm(); }
  Vec3 axis() const {
    const double th = angle();
    return th > 0.0 ? Vec3(theta_u / th) : Vec3(0, 0, 1);
  }
};

// Rodrigues formula.
inline Mat3 axis_angle_to_rotation(const AxisAngle& aa) {
  const double th = aa.angle();
  if (th < 1e-12) {
    return Mat3::Identity() + skew(aa.theta_u);
  }
  const Vec3 u = aa.theta_u / th;
  const Mat3 k = skew(u);
  return Mat3::Identity() + std::sin(th) * k + (1.0 - std::cos(th)) * k * k;
}

// Inverse of Rodrigues. At theta == pi the axis sign is ambiguous; the
// convention here is that the first nonzero axis component is positive.
inline AxisAngle rotation_to_axis_angle(const Mat3& r) {
  const double c = std::clamp((r.trace() - 1.0) * 0.5, -1.0, 1.0);
  const Vec3 v(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));  // 2 u sin(theta)
  const double s = 0.5 * v.norm();
  const double th = std::atan2(s, c);
  AxisAngle out;
  if (th < 1e-7) {
    out.theta_u = 0.5 * v;
    return out;
  }
  if (th < 2.8) {
    out.theta_u = (th / (2.0 * s)) * v;
    return out;
  }
  // Large angles: the antisymmetric part is ill-conditioned, so take axis
  // magnitudes from the symmetric part, (R + R^T)/2 = c I + (1-c) u u^T.
  int k = 0;
  for (int i = 1; i < 3; ++i) {
    if (r(i, i) > r(k, k)) k = i;
  }
  Vec3 u;
  u[k] = std::sqrt(std::max(0.0, (r(k, k) - c) / (1.0 - c)));
  for (int i = 0; i < 3; ++i) {
    if (i != k) u[i] = 0.5 * (r(k, i) + r(i, k)) / (u[k] * (1.0 - c));
  }
  u.normalize();
  if (s > 1e-7) {
    // Away from pi the overall sign follows the antisymmetric part.
    if (u.dot(v) < 0.0) u = -u;
  } else {
    for (int i = 0; i < 3; ++i) {
      if (std::abs(u[i]) > 1e-9) {
        if (u[i] < 0.0) u = -u;
        break;
      }
    }
  }
  out.theta_u = th * u;
  return out;
}

// Geodesic distance between two rotations, in degrees.
inline double rotation_geodesic_deg(const Mat3& a, const Mat3& b) {
  const double c = std::clamp(((a.transpose() * b).trace() - 1.0) * 0.5, -1.0, 1.0);
  return rad_to_deg(std::acos(c));
}

// Pinhole camera.
struct CameraIntrinsics {
  double fx = 615.0;
  double fy = 615.0;
  double cx = 320.0;
  double cy = 240.0;
  int width = 640;
  int height = 480;
};

inline Vec2 project(const CameraIntrinsics& k, const Vec3& p_cam) {
  if (p_cam.z() <= 0.0) {
    throw NonPositiveDepthError("project: point at or behind the camera plane");
  }
  return {k.fx * p_cam.x() / p_cam.z() + k.cx, k.fy * p_cam.y() / p_cam.z() + k.cy};
}

// Twist convention throughout: (linear; angular), expressed in the body frame
// named by the context.

// Adjoint of a rigid transform: maps a twist expressed in frame B to the same
// twist expressed in frame A, given x = pose of B in A.
inline Mat6 twist_transform(const RigidPose& x) {
  Mat6 ad = Mat6::Zero();
  ad.topLeftCorner<3, 3>() = x.rotation;
  ad.topRightCorner<3, 3>() = skew(x.translation) * x.rotation;
  ad.bottomRightCorner<3, 3>() = x.rotation;
  return ad;
}

// Exponential map of a body twist integrated over unit time.
inline RigidPose se3_exp(const Vec6& twist) {
  const Vec3 v = twist.head<3>();
  const Vec3 w = twist.tail<3>();
  const double th = w.norm();
  RigidPose out;
  AxisAngle aa;
  aa.theta_u = w;
  out.rotation = axis_angle_to_rotation(aa);
  if (th < 1e-9) {
    out.translation = v + 0.5 * w.cross(v);
    return out;
  }
  const Mat3 k = skew(w / th);
  const Mat3 big_v = Mat3::Identity() + ((1.0 - std::cos(th)) / th) * k +
                     ((th - std::sin(th)) / th) * k * k;
  out.translation = big_v * v;
  return out;
}

}  // namespace jenga
