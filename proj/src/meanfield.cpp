#include "duality_lab/meanfield.hpp"

#include <cmath>
#include <numbers>

#include "duality_lab/errors.hpp"

namespace duality_lab::meanfield {

namespace {

constexpr Complex kI{0.0, 1.0};

Vec3 effective_field(const Vec3& r, const PauliVector& h0, const PauliVector& v) {
  return h0.vec() + v.vec().cwiseProduct(r);
}

Vec3 bloch_of(const Spinor& phi) {
  require_normalized(phi);
  return QubitDensity::pure(phi[0], phi[1]).bloch();
}

}  // namespace

SmallOperator h_eff(const QubitDensity& x, const PauliVector& h0, const PauliVector& v) {
  const Vec3 b = effective_field(x.bloch(), h0, v);
  return SmallOperator(Eigen::MatrixXcd(b[0] * pauli(0) + b[1] * pauli(1) + b[2] * pauli(2)), {0});
}

Mat2 mf_rhs(const QubitDensity& x, const PauliVector& h0, const PauliVector& v) {
  const Mat2 h = h_eff(x, h0, v).matrix;
  return -kI * (h * x.matrix() - x.matrix() * h);
}

Vec3 mf_rhs_bloch(const Vec3& r, const PauliVector& h0, const PauliVector& v) {
  return 2.0 * effective_field(r, h0, v).cross(r);
}

MeanFieldTrajectory mf_integrate(const Spinor& phi, const Schedule& s, const std::vector<double>& t_grid, double dt) {
  return mf_integrate_bloch(bloch_of(phi), s, t_grid, dt);
}

MeanFieldTrajectory mf_integrate_bloch(const Vec3& r0, const Schedule& s, const std::vector<double>& t_grid,
                                       double dt) {
  if (!(dt > 0.0)) throw InvalidInput("mf_integrate: dt must be positive");
  if (std::abs(r0.norm() - 1.0) > 1e-9) throw InvalidInput("mf_integrate: initial state must be pure");
  MeanFieldTrajectory traj;
  traj.times.reserve(t_grid.size());
  traj.bloch.reserve(t_grid.size());
  Vec3 r = r0;
  double t = 0.0;
  for (double target : t_grid) {
    if (target < t) throw InvalidInput("mf_integrate: time grid must be non-decreasing and start at t >= 0");
    if (target > s.horizon()) throw OutOfRange("mf_integrate: grid extends past the schedule horizon");
    for_each_step(s, t, target, dt, [&](const Substep& sub) {
      const PauliVector& h0 = sub.h0;
      const PauliVector& v = sub.v;
      const double h = sub.h;
      const Vec3 k1 = mf_rhs_bloch(r, h0, v);
      const Vec3 k2 = mf_rhs_bloch(r + 0.5 * h * k1, h0, v);
      const Vec3 k3 = mf_rhs_bloch(r + 0.5 * h * k2, h0, v);
      const Vec3 k4 = mf_rhs_bloch(r + h * k3, h0, v);
      r += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      const double len = r.norm();
      if (!std::isfinite(len) || len == 0.0) throw NumericalFailure("mf_integrate: Bloch vector diverged");
      r /= len;
    });
    t = target;
    traj.times.push_back(target);
    traj.bloch.push_back(r);
  }
  return traj;
}

double torsion_frequency(const MeanFieldTrajectory& traj, int axis, std::optional<double> expected_omega) {
  if (axis < 0 || axis > 2) throw InvalidInput("torsion_frequency: axis must be 0, 1 or 2");
  if (traj.size() < 3) throw InvalidInput("torsion_frequency: need at least three samples");
  const int u = (axis + 1) % 3;
  const int w = (axis + 2) % 3;

  double t_end = traj.times.back();
  if (expected_omega && *expected_omega != 0.0) {
    t_end = std::min(t_end, traj.times.front() + 4.0 * 2.0 * std::numbers::pi / std::abs(*expected_omega));
  }

  std::vector<double> ts, phases;
  double previous = 0.0;
  double offset = 0.0;
  for (std::size_t i = 0; i < traj.size() && traj.times[i] <= t_end; ++i) {
    const Vec3& r = traj.bloch[i];
    if (std::hypot(r[u], r[w]) < 1e-6) {
      throw NumericalFailure("torsion_frequency: transverse amplitude below 1e-6, frequency undefined");
    }
    const double raw = std::atan2(r[w], r[u]);
    if (!phases.empty()) {
      double jump = raw - previous;
      if (jump > std::numbers::pi) offset -= 2.0 * std::numbers::pi;
      else if (jump < -std::numbers::pi) offset += 2.0 * std::numbers::pi;
    }
    previous = raw;
    ts.push_back(traj.times[i]);
    phases.push_back(raw + offset);
  }
  if (ts.size() < 3) throw InvalidInput("torsion_frequency: fit window holds fewer than three samples");

  const auto count = static_cast<double>(ts.size());
  double mt = 0.0, mp = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    mp += phases[i];
  }
  mt /= count;
  mp /= count;
  double stt = 0.0, stp = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - mt) * (ts[i] - mt);
    stp += (ts[i] - mt) * (phases[i] - mp);
  }
  return stp / stt;
}

Vec3 torsion_probe_state(double x0, int axis, double min_transverse) {
  if (axis < 0 || axis > 2) throw InvalidInput("torsion_probe_state: axis must be 0, 1 or 2");
  if (!(std::abs(x0) <= 1.0)) throw InvalidInput("torsion_probe_state: |x0| must not exceed 1");
  double transverse = std::sqrt(std::max(0.0, 1.0 - x0 * x0));
  double axial = x0;
  if (transverse < min_transverse) {
    transverse = min_transverse;
    axial = std::copysign(std::sqrt(1.0 - min_transverse * min_transverse), x0);
  }
  Vec3 r = Vec3::Zero();
  r[axis] = axial;
  r[(axis + 2) % 3] = transverse;
  return r;
}

}  // namespace duality_lab::meanfield
