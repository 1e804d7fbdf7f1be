#include <catch2/catch_amalgamated.hpp>

#include "jenga/kinematics.hpp"
#include "jenga/rng.hpp"

using namespace jenga;

namespace {

// Independent oracle: the textbook 4x4 DH matrix, chained with plain
// Eigen matrix products.
Eigen::Matrix4d dh_matrix(double a, double alpha, double d, double theta) {
  const double ct = std::cos(theta), st = std::sin(theta);
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  Eigen::Matrix4d m;
  m << ct, -st * ca, st * sa, a * ct,  //
      st, ct * ca, -ct * sa, a * st,   //
      0, sa, ca, d,                    //
      0, 0, 0, 1;
  return m;
}

Eigen::Matrix4d fk_oracle(const KinematicChain& chain, const JointState& s) {
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  for (int i = 0; i < 6; ++i) {
    const auto& row = chain.dh[i];
    t = t * dh_matrix(row.a, row.alpha, row.d, s.q[i] + row.theta_offset);
  }
  return t;
}

JointState random_state(const KinematicChain& chain, Rng& rng, double margin = 0.1) {
  JointState s;
  for (int i = 0; i < 6; ++i) {
    s.q[i] = rng.uniform(chain.limits[i].min + margin, chain.limits[i].max - margin);
  }
  return s;
}

}  // namespace

TEST_CASE("forward kinematics matches chained DH-matrix oracle", "[kinematics]") {
  const auto chain = KinematicChain::default_arm();

  const JointState zero;
  const RigidPose got0 = forward_kinematics(chain, zero);
  const Eigen::Matrix4d want0 = fk_oracle(chain, zero);
  CHECK((got0.rotation - want0.topLeftCorner<3, 3>()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((got0.translation - want0.topRightCorner<3, 1>()).norm() < 1e-12);

  Rng rng(100);
  for (int i = 0; i < 50; ++i) {
    const JointState s = random_state(chain, rng);
    const RigidPose got = forward_kinematics(chain, s);
    const Eigen::Matrix4d want = fk_oracle(chain, s);
    CHECK((got.rotation - want.topLeftCorner<3, 3>()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((got.translation - want.topRightCorner<3, 1>()).norm() < 1e-10);
  }
}

TEST_CASE("joint 1 rotates the end-effector about base z", "[kinematics]") {
  const auto chain = KinematicChain::default_arm();
  Rng rng(8);
  JointState s = random_state(chain, rng);
  const RigidPose before = forward_kinematics(chain, s);

  const double delta = 0.37;
  JointState s2 = s;
  s2.q[0] += delta;
  if (s2.q[0] > chain.limits[0].max) s2.q[0] -= 2 * delta;
  const RigidPose after = forward_kinematics(chain, s2);
  const double applied = s2.q[0] - s.q[0];

  Mat3 rz;
  rz << std::cos(applied), -std::sin(applied), 0, std::sin(applied), std::cos(applied), 0, 0, 0, 1;
  CHECK((after.rotation - rz * before.rotation).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((after.translation - rz * before.translation).norm() < 1e-10);
}

TEST_CASE("forward kinematics rejects joint limit violations", "[kinematics]") {
  const auto chain = KinematicChain::default_arm();
  JointState s;
  s.q[1] = chain.limits[1].max + 1e-6;
  CHECK_THROWS_AS(forward_kinematics(chain, s), JointLimitError);
}

TEST_CASE("jacobian columns equal finite differences of forward kinematics", "[kinematics]") {
  const auto chain = KinematicChain::default_arm();
  Rng rng(200);
  const double h = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    const JointState s = random_state(chain, rng);
    const Mat6 jac = geometric_jacobian(chain, s);
    for (int i = 0; i < 6; ++i) {
      JointState sp = s, sm = s;
      sp.q[i] += h;
      sm.q[i] -= h;
      const RigidPose fp = forward_kinematics(chain, sp);
      const RigidPose fm = forward_kinematics(chain, sm);
      const Vec3 dlin = (fp.translation - fm.translation) / (2.0 * h);
      // Angular rate from the rotation difference: vee(dR R^T).
      const Mat3 dr = (fp.rotation - fm.rotation) / (2.0 * h);
      const Mat3 w = dr * forward_kinematics(chain, s).rotation.transpose();
      const Vec3 dang(w(2, 1), w(0, 2), w(1, 0));
      CHECK((jac.block<3, 1>(0, i) - dlin).cwiseAbs().maxCoeff() < 1e-5);
      CHECK((jac.block<3, 1>(3, i) - dang).cwiseAbs().maxCoeff() < 1e-5);
    }
  }
}

TEST_CASE("stretched arm is near-singular", "[kinematics]") {
  const auto chain = KinematicChain::default_arm();
  // Elbow straight and wrist aligned: rank loss.
  JointState s;
  s.q[1] = 0.3;
  const Mat6 jac = geometric_jacobian(chain, s);
  CHECK(condition_number(jac) > 1e6);
}

TEST_CASE("zero joint velocity maps to zero twist", "[kinematics]") {
  const auto chain = KinematicChain::default_arm();
  Rng rng(5);
  const JointState s = random_state(chain, rng);
  const Vec6 twist = geometric_jacobian(chain, s) * Vec6::Zero();
  CHECK(twist.norm() == 0.0);
}

TEST_CASE("damped pseudo-inverse solves well-conditioned systems", "[kinematics]") {
  const auto chain = KinematicChain::default_arm();
  Rng rng(31);
  for (int i = 0; i < 20; ++i) {
    const JointState s = random_state(chain, rng);
    const Mat6 jac = geometric_jacobian(chain, s);
    if (condition_number(jac) > 1e4) continue;
    Vec6 qdot;
    for (int k = 0; k < 6; ++k) qdot[k] = 0.2 * rng.normal();
    const Vec6 twist = jac * qdot;
    const Vec6 back = damped_pinv(jac, 1e-6) * twist;
    CHECK((back - qdot).norm() < 1e-6);
  }
}
