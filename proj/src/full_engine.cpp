#include "duality_lab/full_engine.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "duality_lab/errors.hpp"

namespace duality_lab {

void require_normalized(const Spinor& phi, double tol) {
  if (!phi.allFinite()) throw InvalidInput("phi: non-finite amplitude");
  const double norm2 = phi.squaredNorm();
  if (std::abs(norm2 - 1.0) > tol) {
    throw InvalidInput("phi: |phi0|^2 + |phi1|^2 = " + std::to_string(norm2) + ", expected 1");
  }
}

namespace full {

namespace {

constexpr Complex kI{0.0, 1.0};

std::size_t dimension(int n) { return std::size_t{1} << n; }

void check_state(const FullState& psi) {
  if (psi.n < 2 || psi.amplitudes.size() != dimension(psi.n)) {
    throw InvalidInput("FullState: amplitude count does not match 2^n");
  }
}

}  // namespace

std::uint64_t memory_estimate(int n) {
  // state + k1..k4 + stage buffer + apply_h output
  return (std::uint64_t{1} << n) * sizeof(Complex) * 7;
}

FullState product_init(const Spinor& phi, int n, int max_qubits) {
  require_normalized(phi);
  if (n < 2) throw InvalidInput("product_init: n must be at least 2");
  if (n > max_qubits) {
    throw InvalidInput("product_init: n = " + std::to_string(n) + " exceeds the full-engine cap of " +
                       std::to_string(max_qubits) + " qubits (needs ~" +
                       std::to_string(memory_estimate(n) >> 20) + " MiB)");
  }
  FullState psi;
  psi.n = n;
  psi.amplitudes.resize(dimension(n));
  for (std::size_t idx = 0; idx < psi.amplitudes.size(); ++idx) {
    Complex amp{1.0, 0.0};
    for (int q = 0; q < n; ++q) amp *= phi[(idx >> (n - 1 - q)) & 1u];
    psi.amplitudes[idx] = amp;
  }
  return psi;
}

void apply_h(std::span<const Complex> psi, int n, const PauliVector& h0, const PauliVector& v,
             std::span<Complex> out) {
  const std::size_t dim = dimension(n);
  if (psi.size() != dim || out.size() != dim) throw InvalidInput("apply_h: buffer size mismatch");
  const double c = 1.0 / static_cast<double>(n - 1);
  // <0|h.sigma|1> when the flipped bit of i is 0, <1|h.sigma|0> otherwise
  const Complex flip_from0{h0[0], -h0[1]};
  const Complex flip_from1{h0[0], h0[1]};
  const double pair_same = c * (v[0] - v[1]);  // xx + yy when the two bits agree
  const double pair_diff = c * (v[0] + v[1]);
  const std::size_t top = std::size_t{1} << (n - 1);

  for (std::size_t i = 0; i < dim; ++i) {
    const int ones = std::popcount(i);
    const bool b0 = (i & top) != 0;
    const int rest_ones = ones - (b0 ? 1 : 0);
    const int agree = b0 ? rest_ones : (n - 1 - rest_ones);
    const double diag = h0[2] * static_cast<double>(n - 2 * ones) +
                        c * v[2] * static_cast<double>(2 * agree - (n - 1));
    Complex acc = diag * psi[i];
    for (int q = 0; q < n; ++q) {
      const std::size_t m = std::size_t{1} << (n - 1 - q);
      acc += ((i & m) ? flip_from1 : flip_from0) * psi[i ^ m];
      if (q > 0) {
        const bool same = ((i & m) != 0) == b0;
        acc += (same ? pair_same : pair_diff) * psi[i ^ m ^ top];
      }
    }
    out[i] = acc;
  }
}

std::vector<Complex> apply_h(const FullState& psi, const PauliVector& h0, const PauliVector& v) {
  check_state(psi);
  std::vector<Complex> out(psi.amplitudes.size());
  apply_h(psi.amplitudes, psi.n, h0, v, out);
  return out;
}

FullState propagate(FullState psi, const Schedule& s, double t_target, double dt, PropagationStats* stats) {
  check_state(psi);
  if (!(dt > 0.0)) throw InvalidInput("propagate: dt must be positive");
  if (t_target < psi.time) throw InvalidInput("propagate: cannot evolve backwards in time");
  if (t_target > s.horizon()) throw OutOfRange("propagate: target time beyond schedule horizon");
  if (t_target == psi.time) return psi;

  SchrodingerRk4 rk(psi.amplitudes.size());
  const int n = psi.n;
  for_each_step(s, psi.time, t_target, dt, [&](const Substep& sub) {
    rk.step(
        psi.amplitudes, sub.t, sub.h,
        [&](double, const std::vector<Complex>& in, std::vector<Complex>& out) { apply_h(in, n, sub.h0, sub.v, out); },
        stats);
  });
  psi.time = t_target;
  return psi;
}

QubitDensity reduced_central(const FullState& psi) {
  check_state(psi);
  const std::size_t half = psi.amplitudes.size() / 2;
  Mat2 rho = Mat2::Zero();
  for (std::size_t r = 0; r < half; ++r) {
    const Complex a0 = psi.amplitudes[r];
    const Complex a1 = psi.amplitudes[half + r];
    rho(0, 0) += std::norm(a0);
    rho(1, 1) += std::norm(a1);
    rho(0, 1) += a0 * std::conj(a1);
  }
  rho(1, 0) = std::conj(rho(0, 1));
  return QubitDensity::from_matrix(rho);
}

Mat4 reduced_pair(const FullState& psi) {
  check_state(psi);
  const std::size_t quarter = psi.amplitudes.size() / 4;
  Mat4 rho = Mat4::Zero();
  for (std::size_t r = 0; r < quarter; ++r) {
    for (int a = 0; a < 4; ++a) {
      const Complex pa = psi.amplitudes[a * quarter + r];
      for (int b = 0; b < 4; ++b) rho(a, b) += pa * std::conj(psi.amplitudes[b * quarter + r]);
    }
  }
  return rho;
}

std::vector<Complex> apply_local(const SmallOperator& op, std::span<const Complex> psi, int n) {
  const std::size_t dim = dimension(n);
  if (psi.size() != dim) throw InvalidInput("apply_local: state size mismatch");
  const auto k = static_cast<int>(op.support.size());
  std::vector<std::size_t> masks;
  masks.reserve(op.support.size());
  for (int q : op.support) {
    if (q < 0 || q >= n) throw InvalidInput("apply_local: support index out of range");
    masks.push_back(std::size_t{1} << (n - 1 - q));
  }
  std::size_t support_mask = 0;
  for (auto m : masks) support_mask |= m;

  const auto local_dim = std::size_t{1} << k;
  std::vector<std::size_t> offsets(local_dim);
  for (std::size_t l = 0; l < local_dim; ++l) {
    std::size_t off = 0;
    for (int j = 0; j < k; ++j) {
      if ((l >> (k - 1 - j)) & 1u) off |= masks[static_cast<std::size_t>(j)];
    }
    offsets[l] = off;
  }

  std::vector<Complex> out(dim, Complex{0.0, 0.0});
  for (std::size_t base = 0; base < dim; ++base) {
    if (base & support_mask) continue;
    for (std::size_t row = 0; row < local_dim; ++row) {
      Complex acc{0.0, 0.0};
      for (std::size_t col = 0; col < local_dim; ++col) {
        acc += op.matrix(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) *
               psi[base | offsets[col]];
      }
      out[base | offsets[row]] = acc;
    }
  }
  return out;
}

Complex expectation_complex(const FullState& psi, std::span<const SmallOperator> ops) {
  check_state(psi);
  std::uint64_t used = 0;
  for (const auto& op : ops) {
    for (int q : op.support) {
      if (q < 0 || q >= psi.n) throw InvalidInput("expectation: support index out of range");
      const std::uint64_t bit = std::uint64_t{1} << q;
      if (used & bit) throw InvalidInput("expectation: operator supports overlap");
      used |= bit;
    }
  }
  std::vector<Complex> phi = psi.amplitudes;
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) phi = apply_local(*it, phi, psi.n);
  Complex acc{0.0, 0.0};
  for (std::size_t i = 0; i < phi.size(); ++i) acc += std::conj(psi.amplitudes[i]) * phi[i];
  return acc;
}

double expectation(const FullState& psi, std::span<const SmallOperator> ops) {
  return expectation_complex(psi, ops).real();
}

Eigen::MatrixXcd dense_hamiltonian(int n, const PauliVector& h0, const PauliVector& v) {
  const std::size_t dim = dimension(n);
  Eigen::MatrixXcd h(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  std::vector<Complex> e(dim, Complex{0.0, 0.0});
  std::vector<Complex> col(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    e[j] = 1.0;
    apply_h(e, n, h0, v, col);
    e[j] = 0.0;
    for (std::size_t i = 0; i < dim; ++i) h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
  }
  return h;
}

Eigen::MatrixXcd dense_propagator(int n, const Schedule& s, double t0, double t1) {
  if (t1 < t0) throw InvalidInput("dense_propagator: t1 < t0");
  const auto dim = static_cast<Eigen::Index>(dimension(n));
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
  if (t1 == t0) return u;
  std::size_t idx = s.segment_index(t0);
  double a = t0;
  while (a < t1) {
    const double b = std::min(s.segment_end(idx), t1);
    if (b > a) {
      const Segment& seg = s.segments()[idx];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense_hamiltonian(n, seg.h0, seg.v));
      Eigen::VectorXcd phases(dim);
      for (Eigen::Index k = 0; k < dim; ++k) phases[k] = std::exp(-kI * es.eigenvalues()[k] * (b - a));
      u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint() * u;
    }
    a = b;
    if (idx + 1 < s.segments().size()) ++idx;
    else break;
  }
  return u;
}

}  // namespace full
}  // namespace duality_lab
