#pragma once

// Small-operator algebra for one and two qubits.
//
// Conventions used across the library:
//   * basis |0>, |1> with sigma^z |0> = +|0>;
//   * Bloch vector r_mu = tr(rho sigma^mu);
//   * qubit 0 is the central qubit; in multi-qubit kets it is the most
//     significant bit;
//   * trace_distance(a, b) = ||a - b||_1 with NO 1/2 prefactor, so values
//     live in [0, 2].

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace duality_lab {

using Complex = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using Vec3 = Eigen::Vector3d;

// Real coefficients over (sigma^x, sigma^y, sigma^z).
class PauliVector {
 public:
  PauliVector() = default;
  PauliVector(double x, double y, double z);
  explicit PauliVector(const std::array<double, 3>& c) : PauliVector(c[0], c[1], c[2]) {}

  double operator[](int mu) const { return c_[static_cast<std::size_t>(mu)]; }
  const std::array<double, 3>& components() const { return c_; }
  Vec3 vec() const { return {c_[0], c_[1], c_[2]}; }

  double norm() const;
  double max_abs() const;
  bool is_zero() const { return c_[0] == 0.0 && c_[1] == 0.0 && c_[2] == 0.0; }

  // sum_mu c_mu sigma^mu
  Mat2 as_matrix() const;

  friend bool operator==(const PauliVector&, const PauliVector&) = default;

 private:
  std::array<double, 3> c_{0.0, 0.0, 0.0};
};

const Mat2& pauli(int mu);  // mu in {0,1,2} -> sigma^x, sigma^y, sigma^z
Mat2 identity2();

// A validated 2x2 density matrix. Construction floors eigenvalues in
// [-1e-10, 0) to zero; anything more negative is rejected.
class QubitDensity {
 public:
  static constexpr double kHermitianTol = 1e-12;
  static constexpr double kTraceTol = 1e-12;
  static constexpr double kNegativityTol = 1e-10;
  static constexpr double kBlochTol = 1e-10;

  QubitDensity();  // |0><0|
  static QubitDensity from_matrix(const Mat2& m);
  static QubitDensity from_bloch(const Vec3& r);
  static QubitDensity pure(Complex amp0, Complex amp1);

  const Mat2& matrix() const { return m_; }
  Vec3 bloch() const;
  double purity() const;

 private:
  explicit QubitDensity(const Mat2& m) : m_(m) {}
  Mat2 m_;
};

// Operator on an explicit list of qubits (0 = central). Dimension 2^|support|.
struct SmallOperator {
  Eigen::MatrixXcd matrix;
  std::vector<int> support;

  SmallOperator() = default;
  SmallOperator(Eigen::MatrixXcd m, std::vector<int> s);
};

// Sum of singular values. Closed form for 2x2, one-sided Jacobi for larger.
double trace_norm(const Eigen::MatrixXcd& m);
double trace_norm(const SmallOperator& op);

double trace_distance(const QubitDensity& a, const QubitDensity& b);

Vec3 bloch_from_density(const QubitDensity& rho);
QubitDensity density_from_bloch(const Vec3& r);
QubitDensity bloch_roundtrip(const QubitDensity& rho);

// sum_mu v_mu sigma^mu (x) sigma^mu on qubits (0, 1).
SmallOperator pair_interaction(const PauliVector& v);

// ||sum_mu v_mu sigma^mu (x) sigma^mu||_1 from its Bell-basis spectrum
// {v1-v2+v3, -v1+v2+v3, v1+v2-v3, -v1-v2-v3}.
double pair_interaction_trace_norm(const PauliVector& v);

// The Frobenius estimate 4 |v|. An upper bound on the trace norm, attained
// only by single-axis couplings.
double pair_interaction_frobenius_bound(const PauliVector& v);

Mat4 kron(const Mat2& a, const Mat2& b);
Mat4 swap_gate();

// tr over the second factor of a 4x4 operator on (qubit 0, qubit 1).
Mat2 partial_trace_second(const Mat4& m);
Mat2 partial_trace_first(const Mat4& m);

bool is_hermitian(const Eigen::MatrixXcd& m, double tol);

}  // namespace duality_lab
