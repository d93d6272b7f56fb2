#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "duality_lab/duality.hpp"
#include "duality_lab/errors.hpp"
#include "duality_lab/meanfield.hpp"
#include "oracle.hpp"

using namespace duality_lab;
using namespace duality_lab::meanfield;

namespace {

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec3 r(g(rng), g(rng), g(rng));
  return r / r.norm();
}

}  // namespace

TEST_CASE("h_eff: hand examples") {
  const QubitDensity x = QubitDensity::from_bloch(Vec3(0.3, -0.4, 0.5));
  const PauliVector h0(0.1, 0.2, 0.3);
  CHECK((h_eff(x, h0, PauliVector()).matrix - Eigen::MatrixXcd(h0.as_matrix())).norm() < 1e-15);
  CHECK((h_eff(QubitDensity::from_bloch(Vec3::Zero()), h0, PauliVector(1, 2, 3)).matrix -
         Eigen::MatrixXcd(h0.as_matrix()))
            .norm() < 1e-15);
  const QubitDensity plus = QubitDensity::from_bloch(Vec3(1, 0, 0));
  CHECK((h_eff(plus, PauliVector(), PauliVector(0.7, 0, 0)).matrix - Eigen::MatrixXcd(0.7 * pauli(0))).norm() <
        1e-15);
}

TEST_CASE("mf_rhs: hand examples and Bloch form agree with the commutator form") {
  const QubitDensity plus = QubitDensity::from_bloch(Vec3(1, 0, 0));
  CHECK(mf_rhs(plus, PauliVector(), PauliVector(0, 0, 0.9)).norm() < 1e-15);
  CHECK(mf_rhs(QubitDensity(), PauliVector(), PauliVector(0, 0, 0.9)).norm() < 1e-15);
  const Vec3 r(0.6, 0.0, 0.8);
  CHECK((mf_rhs_bloch(r, PauliVector(0, 0, 1), PauliVector()) - 2.0 * Vec3(0, 0, 1).cross(r)).norm() < 1e-15);

  std::mt19937_64 rng(53);
  for (int rep = 0; rep < 100; ++rep) {
    const Vec3 b = random_unit(rng) * std::uniform_real_distribution<double>(0, 1)(rng);
    const Vec3 h = oracle::random_vec(rng), v = oracle::random_vec(rng, 2.0);
    const PauliVector h0(h[0], h[1], h[2]), vv(v[0], v[1], v[2]);
    const Mat2 d = mf_rhs(QubitDensity::from_bloch(b), h0, vv);
    Vec3 from_commutator;
    for (int mu = 0; mu < 3; ++mu) from_commutator[mu] = (d * pauli(mu)).trace().real();
    CHECK((from_commutator - mf_rhs_bloch(b, h0, vv)).norm() < 1e-13);
    CHECK(std::abs(d.trace()) < 1e-15);
  }
}

TEST_CASE("mf_rhs matches a central difference of mf_integrate to O(dt^2)") {
  std::mt19937_64 rng(59);
  const double delta = 1e-3;
  for (int rep = 0; rep < 100; ++rep) {
    const Vec3 r0 = random_unit(rng);
    const Vec3 h = oracle::random_vec(rng), v = oracle::random_vec(rng, 2.0);
    const PauliVector h0(h[0], h[1], h[2]), vv(v[0], v[1], v[2]);
    const auto s = Schedule::constant(h0, vv, 1.0);
    const auto traj = mf_integrate_bloch(r0, s, {0.0, delta, 2 * delta}, 1e-4);
    const Vec3 fd = (traj.bloch[2] - traj.bloch[0]) / (2 * delta);
    CHECK((fd - mf_rhs_bloch(traj.bloch[1], h0, vv)).norm() < 50.0 * delta * delta);
  }
}

TEST_CASE("linear limit: v = 0 is a rigid rotation") {
  std::mt19937_64 rng(61);
  for (int rep = 0; rep < 10; ++rep) {
    const Spinor phi = oracle::random_spinor(rng);
    const Vec3 h = oracle::random_vec(rng);
    const PauliVector h0(h[0], h[1], h[2]);
    const auto s = Schedule::constant(h0, PauliVector(), 10.0);
    const auto grid = uniform_grid(10.0, 0.5);
    const auto traj = mf_integrate(phi, s, grid, default_time_step(s.bounds()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Mat2 u = oracle::expm_hermitian(h0.as_matrix(), grid[i]);
      const Spinor p = u * phi;
      CHECK(trace_distance(traj.state(i), QubitDensity::pure(p[0], p[1])) < 1e-8);
    }
  }
}

TEST_CASE("purity and trace are conserved over t in [0, 10]") {
  std::mt19937_64 rng(67);
  for (int rep = 0; rep < 20; ++rep) {
    const Spinor phi = oracle::random_spinor(rng);
    const Vec3 h = oracle::random_vec(rng), v = oracle::random_vec(rng, 2.0);
    const auto s = Schedule::constant(PauliVector(h[0], h[1], h[2]), PauliVector(v[0], v[1], v[2]), 10.0);
    const auto traj = mf_integrate(phi, s, uniform_grid(10.0, 0.25), default_time_step(s.bounds()));
    double worst = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const Mat2 m = traj.state(i).matrix();
      worst = std::max(worst, std::abs((m * m).trace().real() - 1.0));
      worst = std::max(worst, std::abs(m.trace() - 1.0));
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("torsion about x: x is conserved and the transverse part rotates at 2 V1 x0") {
  const double v1 = 1.3;
  const auto s = Schedule::constant(PauliVector(), PauliVector(v1, 0, 0), 30.0);
  const auto grid = uniform_grid(30.0, 0.01);
  for (double x0 : {-0.8, -0.5, 0.25, 0.5, 0.9}) {
    const Vec3 r0(x0, 0.0, std::sqrt(1 - x0 * x0));
    const auto traj = mf_integrate_bloch(r0, s, grid, 1e-3);
    double drift = 0.0;
    for (const auto& r : traj.bloch) drift = std::max(drift, std::abs(r[0] - x0));
    CHECK(drift < 1e-10);
    const double omega = torsion_frequency(traj, 0, 2 * v1 * x0);
    CHECK(omega == doctest::Approx(2 * v1 * x0).epsilon(1e-3));
  }
  // sign flip
  const auto a = mf_integrate_bloch(torsion_probe_state(0.5, 0), s, grid, 1e-3);
  const auto b = mf_integrate_bloch(torsion_probe_state(-0.5, 0), s, grid, 1e-3);
  CHECK(torsion_frequency(a, 0) == doctest::Approx(-torsion_frequency(b, 0)).epsilon(1e-9));
}

TEST_CASE("torsion frequency: linear precession and undefined cases") {
  const auto s = Schedule::constant(PauliVector(0, 0, 1), PauliVector(), 10.0);
  const auto traj = mf_integrate_bloch(Vec3(1, 0, 0), s, uniform_grid(10.0, 0.01), 1e-3);
  CHECK(torsion_frequency(traj, 2) == doctest::Approx(2.0).epsilon(1e-6));

  // a pole has no transverse part
  const auto pole = mf_integrate_bloch(Vec3(0, 0, 1), s, uniform_grid(1.0, 0.01), 1e-3);
  CHECK_THROWS_AS(torsion_frequency(pole, 2), NumericalFailure);
  // the probe keeps a small transverse amplitude at |x0| = 1
  const Vec3 probe = torsion_probe_state(1.0, 0);
  CHECK(probe.norm() == doctest::Approx(1.0));
  CHECK(std::hypot(probe[1], probe[2]) >= 1e-5 * (1 - 1e-12));
}

TEST_CASE("equatorial states are fixed under pure z-torsion") {
  const auto s = Schedule::constant(PauliVector(), PauliVector(0, 0, 1.7), 5.0);
  const Vec3 r0(std::cos(0.4), std::sin(0.4), 0);
  const auto traj = mf_integrate_bloch(r0, s, uniform_grid(5.0, 0.5), 1e-3);
  for (const auto& r : traj.bloch) CHECK((r - r0).norm() < 1e-13);
}

TEST_CASE("twisting about two perpendicular axes is not a twist about the intermediate axis") {
  const double v = 1.0;
  const Vec3 r0 = Vec3(0.3, -0.5, 0.8).normalized();
  const auto grid = uniform_grid(1.0, 0.1);
  const auto both = mf_integrate_bloch(r0, Schedule::constant(PauliVector(), PauliVector(v, v, 0), 1.0), grid, 1e-4);

  // single-axis torsion about n = (1,1,0)/sqrt(2): rotate n onto x, twist about x, rotate back
  const Vec3 n = Vec3(1, 1, 0).normalized();
  Eigen::Matrix3d rot;  // rows: new x, y, z axes
  rot.row(0) = n.transpose();
  rot.row(1) = Vec3(-1, 1, 0).normalized().transpose();
  rot.row(2) = Vec3(0, 0, 1).transpose();
  const auto single =
      mf_integrate_bloch(rot * r0, Schedule::constant(PauliVector(), PauliVector(v, 0, 0), 1.0), grid, 1e-4);
  const Vec3 single_end = rot.transpose() * single.bloch.back();
  const double d = trace_distance(QubitDensity::from_bloch(both.bloch.back()), QubitDensity::from_bloch(single_end));
  MESSAGE("two-axis vs single-axis distance at t=1: " << d);
  CHECK(d > 1e-3);
}
