#pragma once

// Nonlinear single-qubit evolution dX/dt = -i [H_eff(X), X] with
// H_eff(X) = H0 + sum_mu V_mu tr(X sigma^mu) sigma^mu.
//
// In Bloch coordinates this is r' = 2 (h0 + v o r) x r, with o the
// elementwise product. Integration is done on r, so trace and Hermiticity
// are structural.

#include <optional>
#include <vector>

#include "duality_lab/full_engine.hpp"
#include "duality_lab/pauli.hpp"
#include "duality_lab/schedule.hpp"

namespace duality_lab::meanfield {

struct MeanFieldTrajectory {
  std::vector<double> times;
  std::vector<Vec3> bloch;

  QubitDensity state(std::size_t i) const { return QubitDensity::from_bloch(bloch[i]); }
  std::size_t size() const { return times.size(); }
};

SmallOperator h_eff(const QubitDensity& x, const PauliVector& h0, const PauliVector& v);

// -i [H_eff(X), X]
Mat2 mf_rhs(const QubitDensity& x, const PauliVector& h0, const PauliVector& v);
Vec3 mf_rhs_bloch(const Vec3& r, const PauliVector& h0, const PauliVector& v);

// RK4 on the Bloch vector with renormalization to |r| = 1 after each step.
// t_grid must be non-decreasing, start at or after 0 and end within the
// schedule horizon.
MeanFieldTrajectory mf_integrate(const Spinor& phi, const Schedule& s, const std::vector<double>& t_grid,
                                 double dt);
MeanFieldTrajectory mf_integrate_bloch(const Vec3& r0, const Schedule& s, const std::vector<double>& t_grid,
                                       double dt);

// Angular velocity of the components transverse to `axis` (0, 1, 2), from a
// least-squares fit of the unwrapped phase. Positive means counterclockwise
// about +axis. If expected_omega is given, only the first four periods are
// used. Throws NumericalFailure if the transverse amplitude drops below 1e-6.
double torsion_frequency(const MeanFieldTrajectory& traj, int axis,
                         std::optional<double> expected_omega = std::nullopt);

// Pure state with projection x0 on `axis` and the rest of its Bloch vector
// along the cyclically preceding axis (z for the x axis). For |x0| close to 1 the transverse part
// is held at `min_transverse` so the phase stays measurable.
Vec3 torsion_probe_state(double x0, int axis, double min_transverse = 1e-5);

}  // namespace duality_lab::meanfield
