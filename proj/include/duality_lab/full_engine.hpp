#pragma once

// Brute-force 2^n state-vector simulator for the central spin Hamiltonian
//
//   H = sum_i h0.sigma_i + 1/(n-1) sum_{i>0} sum_mu v_mu sigma^mu_0 sigma^mu_i.
//
// Qubit 0 (central) is the most significant bit of the amplitude index.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "duality_lab/pauli.hpp"
#include "duality_lab/rk4.hpp"
#include "duality_lab/schedule.hpp"

namespace duality_lab {

using Spinor = Eigen::Vector2cd;

// Throws InvalidInput unless |phi0|^2 + |phi1|^2 = 1 within tol.
void require_normalized(const Spinor& phi, double tol = 1e-12);

namespace full {

inline constexpr int kDefaultMaxQubits = 14;

struct FullState {
  int n = 0;
  std::vector<Complex> amplitudes;
  double time = 0.0;
};

// Bytes the propagator needs for n qubits (state plus RK4 workspace).
std::uint64_t memory_estimate(int n);

FullState product_init(const Spinor& phi, int n, int max_qubits = kDefaultMaxQubits);

void apply_h(std::span<const Complex> psi, int n, const PauliVector& h0, const PauliVector& v,
             std::span<Complex> out);
std::vector<Complex> apply_h(const FullState& psi, const PauliVector& h0, const PauliVector& v);

// Fixed-step RK4 from psi.time to t_target; steps never straddle a schedule
// breakpoint and the state is renormalized after every step.
FullState propagate(FullState psi, const Schedule& s, double t_target, double dt,
                    PropagationStats* stats = nullptr);

QubitDensity reduced_central(const FullState& psi);
// Density of qubits (0, 1); for n = 2 this is the full density.
Mat4 reduced_pair(const FullState& psi);

// <psi| prod ops |psi>. Supports must be pairwise disjoint.
Complex expectation_complex(const FullState& psi, std::span<const SmallOperator> ops);
double expectation(const FullState& psi, std::span<const SmallOperator> ops);

// op acting on its support, identity elsewhere.
std::vector<Complex> apply_local(const SmallOperator& op, std::span<const Complex> psi, int n);

// Dense 2^n x 2^n Hamiltonian assembled column by column from apply_h.
Eigen::MatrixXcd dense_hamiltonian(int n, const PauliVector& h0, const PauliVector& v);

// U_t as a product of exact segment exponentials (Hermitian eigendecomposition).
Eigen::MatrixXcd dense_propagator(int n, const Schedule& s, double t0, double t1);

}  // namespace full
}  // namespace duality_lab
