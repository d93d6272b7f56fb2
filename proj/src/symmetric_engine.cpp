#include "duality_lab/symmetric_engine.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <string>

#include "duality_lab/errors.hpp"

namespace duality_lab::symmetric {

namespace {

constexpr Complex kI{0.0, 1.0};

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

void check_state(const SectorState& psi) {
  if (psi.n < 2 || psi.amplitudes.size() != static_cast<std::size_t>(2 * psi.n)) {
    throw InvalidInput("SectorState: amplitude count does not match 2n");
  }
}

// k * log|z|, with the convention 0 * log 0 = 0.
double scaled_log_abs(int k, Complex z) {
  if (k == 0) return 0.0;
  return static_cast<double>(k) * std::log(std::abs(z));
}

}  // namespace

CollectiveSpin::CollectiveSpin(int n_replicas) : n_rep_(n_replicas), lower_(static_cast<std::size_t>(n_replicas)) {
  if (n_replicas < 1) throw InvalidInput("CollectiveSpin: need at least one replica");
  for (int k = 0; k < n_replicas; ++k) {
    lower_[static_cast<std::size_t>(k)] = std::sqrt(static_cast<double>(k + 1) * static_cast<double>(n_replicas - k));
  }
}

void CollectiveSpin::apply(int mu, std::span<const Complex> in, std::span<Complex> out) const {
  const int size = n_rep_ + 1;
  if (in.size() != static_cast<std::size_t>(size) || out.size() != in.size()) {
    throw InvalidInput("CollectiveSpin::apply: buffer size mismatch");
  }
  const double half = 0.5 * static_cast<double>(n_rep_);
  if (mu == 2) {
    for (int k = 0; k < size; ++k) out[k] = (half - k) * in[k];
    return;
  }
  // (J+ in)_k = lower[k] in[k+1],  (J- in)_k = lower[k-1] in[k-1]
  for (int k = 0; k < size; ++k) {
    const Complex up = k + 1 < size ? lower_[static_cast<std::size_t>(k)] * in[k + 1] : Complex{};
    const Complex down = k > 0 ? lower_[static_cast<std::size_t>(k - 1)] * in[k - 1] : Complex{};
    out[k] = mu == 0 ? 0.5 * (up + down) : -0.5 * kI * (up - down);
  }
}

Eigen::MatrixXcd CollectiveSpin::dense(int mu) const {
  const int size = n_rep_ + 1;
  Eigen::MatrixXcd m(size, size);
  std::vector<Complex> e(static_cast<std::size_t>(size)), col(static_cast<std::size_t>(size));
  for (int j = 0; j < size; ++j) {
    std::fill(e.begin(), e.end(), Complex{});
    e[static_cast<std::size_t>(j)] = 1.0;
    apply(mu, e, col);
    for (int i = 0; i < size; ++i) m(i, j) = col[static_cast<std::size_t>(i)];
  }
  return m;
}

SectorState coherent_init(const Spinor& phi, int n) {
  require_normalized(phi);
  if (n < 2) throw InvalidInput("coherent_init: n must be at least 2");
  const int reps = n - 1;
  SectorState psi;
  psi.n = n;
  psi.amplitudes.assign(static_cast<std::size_t>(2 * n), Complex{});
  const double arg0 = std::arg(phi[0]);
  const double arg1 = std::arg(phi[1]);
  for (int k = 0; k <= reps; ++k) {
    const int zeros = reps - k;
    if ((zeros > 0 && phi[0] == 0.0) || (k > 0 && phi[1] == 0.0)) continue;
    const double log_mag = 0.5 * log_binomial(reps, k) + scaled_log_abs(zeros, phi[0]) + scaled_log_abs(k, phi[1]);
    const double phase = zeros * arg0 + k * arg1;
    const Complex replica_amp = std::polar(std::exp(log_mag), phase);
    psi.at(0, k) = phi[0] * replica_amp;
    psi.at(1, k) = phi[1] * replica_amp;
  }
  // lgamma loses a few ulps per unit of magnitude; at n ~ 10^3 that shows up in the norm
  double norm2 = 0.0;
  for (const auto& a : psi.amplitudes) norm2 += std::norm(a);
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& a : psi.amplitudes) a *= inv;
  return psi;
}

namespace {

// H = cf.sigma_0 + 2 jf.J + (2/N) sum_{alpha beta} coupling(alpha, beta) sigma^alpha_0 J^beta
void apply_generic(std::span<const Complex> psi, const CollectiveSpin& spin, const Vec3& cf, const Vec3& jf,
                   const Eigen::Matrix3d& coupling, std::span<Complex> out) {
  const auto size = static_cast<std::size_t>(spin.size());
  if (psi.size() != 2 * size || out.size() != psi.size()) throw InvalidInput("sector_apply_h: buffer size mismatch");
  const double c = 2.0 / static_cast<double>(spin.replicas());

  thread_local std::vector<Complex> j;
  j.resize(6 * size);
  auto block = [&](int mu, int a) { return std::span<Complex>(j.data() + (2 * mu + a) * size, size); };
  for (int mu = 0; mu < 3; ++mu) {
    for (int a = 0; a < 2; ++a) spin.apply(mu, psi.subspan(a * size, size), block(mu, a));
  }
  const Complex c01{cf[0], -cf[1]};  // <0|cf.sigma|1>
  const Complex c10{cf[0], cf[1]};
  for (std::size_t k = 0; k < size; ++k) {
    const Complex p0 = psi[k], p1 = psi[size + k];
    std::array<Complex, 3> j0{block(0, 0)[k], block(1, 0)[k], block(2, 0)[k]};
    std::array<Complex, 3> j1{block(0, 1)[k], block(1, 1)[k], block(2, 1)[k]};
    const Complex collective0 = 2.0 * (jf[0] * j0[0] + jf[1] * j0[1] + jf[2] * j0[2]);
    const Complex collective1 = 2.0 * (jf[0] * j1[0] + jf[1] * j1[1] + jf[2] * j1[2]);
    // g[alpha][a] = sum_beta C(alpha, beta) J^beta psi_a
    std::array<std::array<Complex, 2>, 3> g{};
    for (int al = 0; al < 3; ++al) {
      for (int be = 0; be < 3; ++be) {
        g[al][0] += coupling(al, be) * j0[be];
        g[al][1] += coupling(al, be) * j1[be];
      }
    }
    const Complex pair0 = g[0][1] - kI * g[1][1] + g[2][0];
    const Complex pair1 = g[0][0] + kI * g[1][0] - g[2][1];
    out[k] = cf[2] * p0 + c01 * p1 + collective0 + c * pair0;
    out[size + k] = c10 * p0 - cf[2] * p1 + collective1 + c * pair1;
  }
}

Mat2 free_rotation(const PauliVector& h0, double tau) {
  // exp(-i tau h0.sigma)
  const double norm = h0.norm();
  if (norm == 0.0 || tau == 0.0) return Mat2::Identity();
  const double angle = norm * tau;
  return std::cos(angle) * Mat2::Identity() - kI * std::sin(angle) * (h0.as_matrix() / norm);
}

void check_identity_frame(const SectorState& psi, const char* what) {
  if (!(psi.frame - Mat2::Identity()).isZero(0.0)) {
    throw Unsupported(std::string(what) + ": state carries a rotating frame");
  }
}

}  // namespace

void sector_apply_h(std::span<const Complex> psi, const CollectiveSpin& spin, const PauliVector& h0,
                    const PauliVector& v, std::span<Complex> out) {
  apply_generic(psi, spin, h0.vec(), h0.vec(), v.vec().asDiagonal(), out);
}

std::vector<Complex> sector_apply_h(const SectorState& psi, const PauliVector& h0, const PauliVector& v) {
  check_state(psi);
  check_identity_frame(psi, "sector_apply_h");
  CollectiveSpin spin(psi.n - 1);
  std::vector<Complex> out(psi.amplitudes.size());
  sector_apply_h(psi.amplitudes, spin, h0, v, out);
  return out;
}

Eigen::Matrix3d rotation_of(const Mat2& u) {
  Eigen::Matrix3d r;
  for (int mu = 0; mu < 3; ++mu) {
    const Mat2 rotated = u.adjoint() * pauli(mu) * u;
    for (int al = 0; al < 3; ++al) r(mu, al) = 0.5 * (rotated * pauli(al)).trace().real();
  }
  return r;
}

double sector_energy(const SectorState& psi, const PauliVector& h0, const PauliVector& v) {
  check_state(psi);
  CollectiveSpin spin(psi.n - 1);
  const Eigen::Matrix3d r = rotation_of(psi.frame);
  const Vec3 field = r.transpose() * h0.vec();
  const Eigen::Matrix3d coupling = r.transpose() * v.vec().asDiagonal() * r;
  std::vector<Complex> out(psi.amplitudes.size());
  apply_generic(psi.amplitudes, spin, field, field, coupling, out);
  Complex acc{};
  for (std::size_t i = 0; i < out.size(); ++i) acc += std::conj(psi.amplitudes[i]) * out[i];
  return acc.real();
}

SectorState sector_propagate(SectorState psi, const Schedule& s, double t_target, double dt,
                             PropagationStats* stats) {
  check_state(psi);
  if (!(dt > 0.0)) throw InvalidInput("sector_propagate: dt must be positive");
  if (t_target < psi.time) throw InvalidInput("sector_propagate: cannot evolve backwards in time");
  if (t_target > s.horizon()) throw OutOfRange("sector_propagate: target time beyond schedule horizon");
  if (t_target == psi.time) return psi;

  CollectiveSpin spin(psi.n - 1);
  SchrodingerRk4 rk(psi.amplitudes.size());
  const Vec3 zero = Vec3::Zero();
  double anchor_time = psi.time;
  Mat2 anchor_frame = psi.frame;
  Mat2 frame = psi.frame;
  for_each_step(s, psi.time, t_target, dt, [&](const Substep& sub) {
    if (sub.piece_start != anchor_time) {
      anchor_time = sub.piece_start;
      anchor_frame = frame;
    }
    // u(tau) = exp(-i h0.sigma (tau - anchor)) u_anchor
    rk.step(
        psi.amplitudes, sub.t, sub.h,
        [&](double tau, const std::vector<Complex>& in, std::vector<Complex>& out) {
          const Eigen::Matrix3d r = rotation_of(free_rotation(sub.h0, tau - anchor_time) * anchor_frame);
          const Eigen::Matrix3d coupling = r.transpose() * sub.v.vec().asDiagonal() * r;
          apply_generic(in, spin, zero, zero, coupling, out);
        },
        stats);
    frame = free_rotation(sub.h0, sub.t + sub.h - anchor_time) * anchor_frame;
  });
  psi.frame = frame;
  psi.time = t_target;
  return psi;
}

QubitDensity sector_reduced_central(const SectorState& psi) {
  check_state(psi);
  Mat2 rho = Mat2::Zero();
  for (int k = 0; k < psi.n; ++k) {
    const Complex a0 = psi.at(0, k), a1 = psi.at(1, k);
    rho(0, 0) += std::norm(a0);
    rho(1, 1) += std::norm(a1);
    rho(0, 1) += a0 * std::conj(a1);
  }
  rho(1, 0) = std::conj(rho(0, 1));
  return QubitDensity::from_matrix(psi.frame * rho * psi.frame.adjoint());
}

Mat4 sector_reduced_pair(const SectorState& psi) {
  check_state(psi);
  if (psi.n < 3) throw InvalidInput("sector_reduced_pair: n = 2 has no remaining replicas; use the full density");
  const int reps = psi.n - 1;
  const double inv = 1.0 / static_cast<double>(reps);
  // |N,k> = sqrt((N-k)/N) |0>|N-1,k> + sqrt(k/N) |1>|N-1,k-1>
  Mat4 rho = Mat4::Zero();
  std::array<Complex, 4> c{};
  for (int kr = 0; kr < reps; ++kr) {
    const double w0 = std::sqrt(static_cast<double>(reps - kr) * inv);
    const double w1 = std::sqrt(static_cast<double>(kr + 1) * inv);
    for (int a = 0; a < 2; ++a) {
      c[static_cast<std::size_t>(2 * a)] = w0 * psi.at(a, kr);
      c[static_cast<std::size_t>(2 * a + 1)] = w1 * psi.at(a, kr + 1);
    }
    for (int r = 0; r < 4; ++r)
      for (int q = 0; q < 4; ++q) rho(r, q) += c[static_cast<std::size_t>(r)] * std::conj(c[static_cast<std::size_t>(q)]);
  }
  const Mat4 uu = kron(psi.frame, psi.frame);
  return uu * rho * uu.adjoint();
}

full::FullState embed(const SectorState& psi) {
  check_state(psi);
  const int reps = psi.n - 1;
  if (psi.n > full::kDefaultMaxQubits) throw InvalidInput("embed: n exceeds the full-engine cap");
  full::FullState out;
  out.n = psi.n;
  out.time = psi.time;
  const std::size_t rest = std::size_t{1} << reps;
  out.amplitudes.assign(2 * rest, Complex{});
  for (std::size_t bits = 0; bits < rest; ++bits) {
    const int k = std::popcount(bits);
    const double scale = std::exp(-0.5 * log_binomial(reps, k));
    out.amplitudes[bits] = scale * psi.at(0, k);
    out.amplitudes[rest + bits] = scale * psi.at(1, k);
  }
  if (!(psi.frame - Mat2::Identity()).isZero(0.0)) {
    for (int q = 0; q < psi.n; ++q) {
      out.amplitudes = full::apply_local(SmallOperator{psi.frame, {q}}, out.amplitudes, psi.n);
    }
  }
  return out;
}

SectorState project(const full::FullState& psi, double* norm_outside) {
  if (psi.n < 2 || psi.amplitudes.size() != (std::size_t{1} << psi.n)) {
    throw InvalidInput("project: malformed full state");
  }
  const int reps = psi.n - 1;
  SectorState out;
  out.n = psi.n;
  out.time = psi.time;
  out.amplitudes.assign(static_cast<std::size_t>(2 * psi.n), Complex{});
  const std::size_t rest = std::size_t{1} << reps;
  for (std::size_t bits = 0; bits < rest; ++bits) {
    const int k = std::popcount(bits);
    const double scale = std::exp(-0.5 * log_binomial(reps, k));
    out.at(0, k) += scale * psi.amplitudes[bits];
    out.at(1, k) += scale * psi.amplitudes[rest + bits];
  }
  if (norm_outside) {
    double inside = 0.0;
    for (const auto& a : out.amplitudes) inside += std::norm(a);
    double total = 0.0;
    for (const auto& a : psi.amplitudes) total += std::norm(a);
    *norm_outside = total - inside;
  }
  return out;
}

}  // namespace duality_lab::symmetric
