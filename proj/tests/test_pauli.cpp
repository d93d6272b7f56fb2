#include <cmath>
#include <random>

#include "doctest.h"
#include "duality_lab/errors.hpp"
#include "duality_lab/pauli.hpp"
#include "oracle.hpp"

using namespace duality_lab;

namespace {

Eigen::MatrixXcd random_hermitian4(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m + m.adjoint();
}

QubitDensity random_density(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec3 r;
  do {
    r = Vec3(u(rng), u(rng), u(rng));
  } while (r.norm() > 1.0);
  return QubitDensity::from_bloch(r);
}

}  // namespace

TEST_CASE("trace_norm: hand examples") {
  CHECK(trace_norm(Eigen::MatrixXcd(pauli(0))) == doctest::Approx(2.0));
  CHECK(trace_norm(Eigen::MatrixXcd::Zero(4, 4)) == 0.0);
  CHECK(trace_norm(Eigen::MatrixXcd::Zero(2, 2)) == 0.0);
  // single-axis coupling: the Frobenius estimate is exact
  CHECK(trace_norm(pair_interaction(PauliVector(0, 0, 1))) == doctest::Approx(4.0));
}

TEST_CASE("trace_norm of the isotropic coupling is 6, below the 4 sqrt(3) estimate") {
  // sigma.sigma has Bell spectrum {1, 1, 1, -3}
  const SmallOperator v = pair_interaction(PauliVector(1, 1, 1));
  CHECK(trace_norm(v) == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(oracle::svd_trace_norm(v.matrix) == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(pair_interaction_frobenius_bound(PauliVector(1, 1, 1)) == doctest::Approx(4.0 * std::sqrt(3.0)));
}

TEST_CASE("trace_norm matches an SVD oracle on random general matrices") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int dim : {2, 3, 4, 8, 16}) {
    for (int rep = 0; rep < 20; ++rep) {
      Eigen::MatrixXcd m(dim, dim);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m(i, j) = Complex(g(rng), g(rng));
      CHECK(trace_norm(m) == doctest::Approx(oracle::svd_trace_norm(m)).epsilon(1e-11));
    }
  }
}

TEST_CASE("trace_norm is a norm on random Hermitian 4x4 samples") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int rep = 0; rep < 100; ++rep) {
    const auto a = random_hermitian4(rng);
    const auto b = random_hermitian4(rng);
    const double c = u(rng);
    CHECK(trace_norm(a + b) <= trace_norm(a) + trace_norm(b) + 1e-12);
    CHECK(trace_norm(c * a) == doctest::Approx(std::abs(c) * trace_norm(a)).epsilon(1e-12));
  }
}

TEST_CASE("pair interaction: structure, SWAP symmetry and trace norm") {
  CHECK(pair_interaction(PauliVector(0, 0, 0)).matrix.isZero(0.0));
  Mat4 zz = Mat4::Zero();
  zz.diagonal() << 1, -1, -1, 1;
  CHECK((pair_interaction(PauliVector(0, 0, 1)).matrix - zz).norm() == 0.0);
  CHECK(pair_interaction(PauliVector(1, 2, 3)).support == std::vector<int>{0, 1});

  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 100; ++rep) {
    const Vec3 c = oracle::random_vec(rng, 2.0);
    const PauliVector v(c[0], c[1], c[2]);
    const Mat4 m = pair_interaction(v).matrix;
    const Mat4 sw = swap_gate();
    CHECK((m * sw - sw * m).norm() < 1e-14);
    // reference: sum_mu v_mu sigma^mu (x) sigma^mu from explicit Kronecker products
    Eigen::MatrixXcd ref = Eigen::MatrixXcd::Zero(4, 4);
    for (int mu = 0; mu < 3; ++mu) ref += c[mu] * oracle::kron(oracle::sigma(mu), oracle::sigma(mu));
    CHECK((Eigen::MatrixXcd(m) - ref).norm() < 1e-14);
    const double tn = oracle::svd_trace_norm(ref);
    CHECK(pair_interaction_trace_norm(v) == doctest::Approx(tn).epsilon(1e-10));
    CHECK(trace_norm(pair_interaction(v)) == doctest::Approx(tn).epsilon(1e-10));
    CHECK(tn <= pair_interaction_frobenius_bound(v) * (1 + 1e-12));
    CHECK(tn >= 4.0 * v.max_abs() * (1 - 1e-12));
  }
  // single-axis couplings attain the Frobenius value
  for (int mu = 0; mu < 3; ++mu) {
    std::array<double, 3> c{0, 0, 0};
    c[static_cast<std::size_t>(mu)] = -2.5;
    CHECK(pair_interaction_trace_norm(PauliVector(c)) == doctest::Approx(10.0));
  }
}

TEST_CASE("trace_distance: hand examples and metric axioms") {
  const QubitDensity zero = QubitDensity::pure(1.0, 0.0);
  const QubitDensity one = QubitDensity::pure(0.0, 1.0);
  const double s = 1.0 / std::sqrt(2.0);
  const QubitDensity plus = QubitDensity::pure(s, s);
  CHECK(trace_distance(zero, zero) == 0.0);
  CHECK(trace_distance(zero, one) == doctest::Approx(2.0));
  CHECK(trace_distance(zero, plus) == doctest::Approx(std::sqrt(2.0)));

  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 200; ++rep) {
    const auto a = random_density(rng), b = random_density(rng), c = random_density(rng);
    const double ab = trace_distance(a, b);
    CHECK(ab >= 0.0);
    CHECK(ab == doctest::Approx(trace_distance(b, a)).epsilon(1e-14));
    CHECK(trace_distance(a, c) <= ab + trace_distance(b, c) + 1e-12);
    CHECK(trace_distance(a, a) < 1e-15);
    // twice the half-normalized distance, which for qubits is |r_a - r_b| / 2
    CHECK(ab == doctest::Approx((a.bloch() - b.bloch()).norm()).epsilon(1e-12));
  }
}

TEST_CASE("Bloch round trip") {
  CHECK((QubitDensity::pure(1.0, 0.0).bloch() - Vec3(0, 0, 1)).norm() < 1e-15);
  CHECK(QubitDensity::from_matrix(0.5 * Mat2::Identity()).bloch().norm() < 1e-15);
  const double s = 1.0 / std::sqrt(2.0);
  CHECK((QubitDensity::pure(s, s).bloch() - Vec3(1, 0, 0)).norm() < 1e-15);
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 50; ++rep) {
    const auto a = random_density(rng);
    CHECK((bloch_roundtrip(a).matrix() - a.matrix()).norm() < 1e-14);
    CHECK((density_from_bloch(bloch_from_density(a)).matrix() - a.matrix()).norm() < 1e-14);
  }
}

TEST_CASE("QubitDensity validation") {
  Mat2 bad_trace = Mat2::Identity();
  CHECK_THROWS_AS(QubitDensity::from_matrix(bad_trace), InvalidInput);
  Mat2 non_herm;
  non_herm << 0.5, 0.1, 0.2, 0.5;
  CHECK_THROWS_AS(QubitDensity::from_matrix(non_herm), InvalidInput);
  Mat2 negative;
  negative << 1.2, 0, 0, -0.2;
  CHECK_THROWS_AS(QubitDensity::from_matrix(negative), InvalidInput);
  CHECK_THROWS_AS(QubitDensity::from_bloch(Vec3(1, 1, 0)), InvalidInput);
  // tiny negativity from rounding is floored
  Mat2 almost;
  almost << 1.0 + 1e-13, 0, 0, -1e-13;
  CHECK_NOTHROW(QubitDensity::from_matrix(almost));
  CHECK_THROWS_AS(PauliVector(std::nan(""), 0, 0), InvalidInput);
}

TEST_CASE("partial traces and kron") {
  std::mt19937_64 rng(19);
  const auto a = random_density(rng), b = random_density(rng);
  const Mat4 ab = kron(a.matrix(), b.matrix());
  CHECK((partial_trace_second(ab) - a.matrix()).norm() < 1e-15);
  CHECK((partial_trace_first(ab) - b.matrix()).norm() < 1e-15);
  CHECK((Eigen::MatrixXcd(ab) - oracle::kron(a.matrix(), b.matrix())).norm() < 1e-15);
}
