#pragma once

// Exact evolution in the replica-symmetric sector.
//
// The initial state phi^(x)n and the Hamiltonian are invariant under
// permutations of the n-1 replicas, so the dynamics stays in
// span{|a> (x) |N, k>} with N = n-1 replicas, a the central qubit and |N, k>
// the normalized Dicke state with k replicas in |1>. On that space
//
//   H = h0.sigma_0 + 2 h0.J + (2/N) sum_mu v_mu sigma^mu_0 J^mu,
//
// with J^z |N, k> = (N/2 - k) |N, k>. Amplitudes are stored a-major:
// index a * (N + 1) + k.
//
// The collective term 2 h0.J has norm ~ n and makes plain RK4 stiff at large
// n, so propagation works in the frame co-rotating with the free part
// h0.sum_i sigma_i: the lab state is frame^(x)n applied to the stored
// amplitudes, and only the O(1) coupling is integrated numerically.

#include <span>
#include <vector>

#include "duality_lab/full_engine.hpp"
#include "duality_lab/pauli.hpp"
#include "duality_lab/rk4.hpp"
#include "duality_lab/schedule.hpp"

namespace duality_lab::symmetric {

// Collective spin j = N/2 of N replicas in the Dicke basis (k = 0..N).
class CollectiveSpin {
 public:
  explicit CollectiveSpin(int n_replicas);

  int replicas() const { return n_rep_; }
  int size() const { return n_rep_ + 1; }

  // out = J^mu in, for mu in {0,1,2}.
  void apply(int mu, std::span<const Complex> in, std::span<Complex> out) const;
  Eigen::MatrixXcd dense(int mu) const;

 private:
  int n_rep_;
  std::vector<double> lower_;  // <k+1| J^- |k> = sqrt((k+1)(N-k)) = <k| J^+ |k+1>
};

struct SectorState {
  int n = 0;
  std::vector<Complex> amplitudes;  // size 2n, in the rotating frame
  double time = 0.0;
  Mat2 frame = Mat2::Identity();  // lab state = frame^(x)n |amplitudes>

  Complex& at(int a, int k) { return amplitudes[static_cast<std::size_t>(a * n + k)]; }
  Complex at(int a, int k) const { return amplitudes[static_cast<std::size_t>(a * n + k)]; }
};

SectorState coherent_init(const Spinor& phi, int n);

void sector_apply_h(std::span<const Complex> psi, const CollectiveSpin& spin, const PauliVector& h0,
                    const PauliVector& v, std::span<Complex> out);
// Lab-frame H applied to the stored amplitudes; requires frame == identity.
std::vector<Complex> sector_apply_h(const SectorState& psi, const PauliVector& h0, const PauliVector& v);

// <H> in the lab frame for any stored frame.
double sector_energy(const SectorState& psi, const PauliVector& h0, const PauliVector& v);

// R_{mu alpha} = tr(u^dag sigma^mu u sigma^alpha) / 2, i.e. u^dag sigma^mu u = sum_alpha R sigma^alpha.
Eigen::Matrix3d rotation_of(const Mat2& u);

SectorState sector_propagate(SectorState psi, const Schedule& s, double t_target, double dt,
                             PropagationStats* stats = nullptr);

QubitDensity sector_reduced_central(const SectorState& psi);
// Density of (central, one replica). Requires n >= 3.
Mat4 sector_reduced_pair(const SectorState& psi);

// Map into the 2^n space (n <= full-engine cap) and back. project() also
// reports the squared norm left outside the sector.
full::FullState embed(const SectorState& psi);
SectorState project(const full::FullState& psi, double* norm_outside = nullptr);

}  // namespace duality_lab::symmetric
