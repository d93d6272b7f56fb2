#include "duality_lab/pauli.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "duality_lab/errors.hpp"

namespace duality_lab {

namespace {

constexpr Complex kI{0.0, 1.0};

bool all_finite(const Eigen::MatrixXcd& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (!std::isfinite(m.data()[i].real()) || !std::isfinite(m.data()[i].imag())) return false;
  }
  return true;
}

// Hestenes one-sided Jacobi: rotate column pairs until mutually orthogonal;
// the column norms are then the singular values.
double jacobi_singular_value_sum(Eigen::MatrixXcd a) {
  const Eigen::Index d = a.cols();
  constexpr int kMaxSweeps = 60;
  constexpr double kEps = 1e-15;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (Eigen::Index p = 0; p < d - 1; ++p) {
      for (Eigen::Index q = p + 1; q < d; ++q) {
        const double alpha = a.col(p).squaredNorm();
        const double beta = a.col(q).squaredNorm();
        const Complex gamma = a.col(p).dot(a.col(q));  // a_p^H a_q
        const double g = std::abs(gamma);
        if (g <= kEps * std::sqrt(alpha * beta) || g == 0.0) continue;
        rotated = true;
        const Complex phase = gamma / g;
        const double zeta = (beta - alpha) / (2.0 * g);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        const Eigen::VectorXcd ap = a.col(p);
        const Eigen::VectorXcd bq = a.col(q) / phase;
        a.col(p) = c * ap - s * bq;
        a.col(q) = (s * ap + c * bq) * phase;
      }
    }
    if (!rotated) break;
  }
  double sum = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) sum += a.col(j).norm();
  return sum;
}

void require_finite(const Mat2& m, const char* what) {
  if (!all_finite(m)) throw InvalidInput(std::string(what) + ": non-finite entries");
}

}  // namespace

PauliVector::PauliVector(double x, double y, double z) : c_{x, y, z} {
  for (double v : c_) {
    if (!std::isfinite(v)) throw InvalidInput("PauliVector: non-finite component");
  }
}

double PauliVector::norm() const { return std::sqrt(c_[0] * c_[0] + c_[1] * c_[1] + c_[2] * c_[2]); }

double PauliVector::max_abs() const {
  return std::max({std::abs(c_[0]), std::abs(c_[1]), std::abs(c_[2])});
}

Mat2 PauliVector::as_matrix() const {
  return c_[0] * pauli(0) + c_[1] * pauli(1) + c_[2] * pauli(2);
}

const Mat2& pauli(int mu) {
  static const std::array<Mat2, 3> sigma = [] {
    std::array<Mat2, 3> s;
    s[0] << 0, 1, 1, 0;
    s[1] << 0, -kI, kI, 0;
    s[2] << 1, 0, 0, -1;
    return s;
  }();
  if (mu < 0 || mu > 2) throw OutOfRange("pauli: index must be 0, 1 or 2");
  return sigma[static_cast<std::size_t>(mu)];
}

Mat2 identity2() { return Mat2::Identity(); }

QubitDensity::QubitDensity() {
  m_ << 1, 0, 0, 0;
}

QubitDensity QubitDensity::from_matrix(const Mat2& m) {
  require_finite(m, "QubitDensity");
  if (!is_hermitian(m, kHermitianTol)) throw InvalidInput("QubitDensity: matrix is not Hermitian");
  const Complex tr = m.trace();
  if (std::abs(tr - 1.0) > kTraceTol) throw InvalidInput("QubitDensity: trace differs from 1");

  // Spectrum of a 2x2 Hermitian matrix: mean +- radius.
  Mat2 h = 0.5 * (m + m.adjoint());
  const double mean = 0.5 * (h(0, 0).real() + h(1, 1).real());
  const double half_diff = 0.5 * (h(0, 0).real() - h(1, 1).real());
  const double radius = std::sqrt(half_diff * half_diff + std::norm(h(0, 1)));
  const double lowest = mean - radius;
  if (lowest < -kNegativityTol) throw InvalidInput("QubitDensity: negative eigenvalue");
  if (lowest < 0.0) {
    // Pull the Bloch vector back onto the sphere; the spectrum becomes {0, 1}.
    Vec3 r(2.0 * h(0, 1).real(), -2.0 * h(0, 1).imag(), 2.0 * half_diff);
    r /= 2.0 * radius;
    return density_from_bloch(r);
  }
  return QubitDensity(h);
}

QubitDensity QubitDensity::from_bloch(const Vec3& r) {
  if (!r.allFinite()) throw InvalidInput("QubitDensity: non-finite Bloch vector");
  double len = r.norm();
  if (len > 1.0 + kBlochTol) throw InvalidInput("QubitDensity: Bloch vector longer than 1");
  Vec3 s = len > 1.0 ? Vec3(r / len) : r;
  Mat2 m = 0.5 * (identity2() + s[0] * pauli(0) + s[1] * pauli(1) + s[2] * pauli(2));
  return QubitDensity(m);
}

QubitDensity QubitDensity::pure(Complex amp0, Complex amp1) {
  const double norm2 = std::norm(amp0) + std::norm(amp1);
  if (std::abs(norm2 - 1.0) > 1e-12) throw InvalidInput("QubitDensity::pure: state is not normalized");
  Eigen::Vector2cd psi(amp0, amp1);
  return QubitDensity(psi * psi.adjoint());
}

Vec3 QubitDensity::bloch() const {
  return {2.0 * m_(1, 0).real(), 2.0 * m_(1, 0).imag(), (m_(0, 0) - m_(1, 1)).real()};
}

double QubitDensity::purity() const { return (m_ * m_).trace().real(); }

SmallOperator::SmallOperator(Eigen::MatrixXcd m, std::vector<int> s)
    : matrix(std::move(m)), support(std::move(s)) {
  const Eigen::Index dim = Eigen::Index{1} << support.size();
  if (matrix.rows() != dim || matrix.cols() != dim) {
    throw InvalidInput("SmallOperator: dimension does not match support size");
  }
}

double trace_norm(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) throw InvalidInput("trace_norm: matrix must be square");
  if (!all_finite(m)) throw InvalidInput("trace_norm: non-finite entries");
  if (m.rows() == 0) return 0.0;
  if (m.rows() == 1) return std::abs(m(0, 0));
  if (m.rows() == 2) {
    // s1^2 + s2^2 = ||m||_F^2 and s1 s2 = |det m|.
    const double fro2 = m.squaredNorm();
    const double det = std::abs(m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0));
    return std::sqrt(std::max(0.0, fro2 + 2.0 * det));
  }
  return jacobi_singular_value_sum(m);
}

double trace_norm(const SmallOperator& op) { return trace_norm(op.matrix); }

double trace_distance(const QubitDensity& a, const QubitDensity& b) {
  return trace_norm(Eigen::MatrixXcd(a.matrix() - b.matrix()));
}

Vec3 bloch_from_density(const QubitDensity& rho) { return rho.bloch(); }

QubitDensity density_from_bloch(const Vec3& r) { return QubitDensity::from_bloch(r); }

QubitDensity bloch_roundtrip(const QubitDensity& rho) {
  return density_from_bloch(bloch_from_density(rho));
}

SmallOperator pair_interaction(const PauliVector& v) {
  Mat4 m = Mat4::Zero();
  for (int mu = 0; mu < 3; ++mu) m += v[mu] * kron(pauli(mu), pauli(mu));
  return SmallOperator(m, {0, 1});
}

double pair_interaction_trace_norm(const PauliVector& v) {
  const double a = v[0], b = v[1], c = v[2];
  return std::abs(a - b + c) + std::abs(-a + b + c) + std::abs(a + b - c) + std::abs(a + b + c);
}

double pair_interaction_frobenius_bound(const PauliVector& v) { return 4.0 * v.norm(); }

Mat4 kron(const Mat2& a, const Mat2& b) {
  Mat4 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

Mat4 swap_gate() {
  Mat4 s = Mat4::Zero();
  s(0, 0) = 1;
  s(1, 2) = 1;
  s(2, 1) = 1;
  s(3, 3) = 1;
  return s;
}

Mat2 partial_trace_second(const Mat4& m) {
  Mat2 out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) out(a, b) = m(2 * a, 2 * b) + m(2 * a + 1, 2 * b + 1);
  return out;
}

Mat2 partial_trace_first(const Mat4& m) {
  Mat2 out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) out(a, b) = m(a, b) + m(2 + a, 2 + b);
  return out;
}

bool is_hermitian(const Eigen::MatrixXcd& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace duality_lab
