#include <cmath>
#include <random>

#include "doctest.h"
#include "duality_lab/duality.hpp"
#include "duality_lab/errors.hpp"
#include "oracle.hpp"

using namespace duality_lab;

namespace {

const Spinor kCanonicalPhi = spinor_from_bloch(Vec3(0.6, 0, 0.8));

Schedule canonical(double horizon = 1.0) { return Schedule::constant(PauliVector(0, 0, 1), PauliVector(1, 0, 0), horizon); }

}  // namespace

TEST_CASE("uniform grid and spinor helpers") {
  const auto g = uniform_grid(1.0, 0.3);
  REQUIRE(g.size() == 5);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 1.0);
  CHECK(uniform_grid(1.0, 0.25).size() == 5);
  CHECK(uniform_grid(0.0, 0.1) == std::vector<double>{0.0});
  const Vec3 r = Vec3(0.6, 0, 0.8);
  CHECK((QubitDensity::pure(kCanonicalPhi[0], kCanonicalPhi[1]).bloch() - r).norm() < 1e-15);
  CHECK_THROWS_AS(spinor_from_bloch(Vec3(1, 1, 0)), InvalidInput);
}

TEST_CASE("engine selection") {
  CHECK(resolve_engine(Engine::automatic, 12) == Engine::full);
  CHECK(resolve_engine(Engine::automatic, 13) == Engine::symmetric);
  CHECK(resolve_engine(Engine::full, 100) == Engine::full);
  CHECK(parse_engine("auto") == Engine::automatic);
  CHECK(engine_name(Engine::symmetric) == "symmetric");
  CHECK_THROWS_AS(parse_engine("dense"), InvalidInput);
  ExactEvolver sym(kCanonicalPhi, 2, Engine::symmetric);
  CHECK_THROWS_AS(sym.pair(), InvalidInput);
  CHECK_THROWS(sym.full_state());
}

TEST_CASE("es_bound: formula examples and monotonicity") {
  const auto b = canonical().bounds();
  CHECK(es_bound(0.0, 10, b) == 0.0);
  CHECK(es_bound(0.1, 101, b) == doctest::Approx(1.5 * std::expm1(3.2) / 100).epsilon(1e-12));
  CHECK(es_bound(0.1, 101, b) == doctest::Approx(0.3529).epsilon(1e-3));
  const auto b0 = Schedule::constant(PauliVector(0, 0, 1), PauliVector(), 1.0).bounds();
  CHECK(es_bound(0.7, 5, b0) == 0.0);
  for (double t = 0.05; t < 2; t += 0.05) {
    CHECK(es_bound(t + 0.05, 20, b) > es_bound(t, 20, b));
    CHECK(es_bound(t, 21, b) < es_bound(t, 20, b));
  }
  CHECK(lieb_robinson_bound(0.2, 4, Schedule::constant(PauliVector(), PauliVector(0, 0, 1), 1.0).bounds()) ==
        doctest::Approx(std::expm1(3.2) / 3));
  CHECK(covariance_bound(0.1, 6, b) == doctest::Approx(std::expm1(3.2) / 5));
}

TEST_CASE("run_duality: trivial limits") {
  const auto free = Schedule::constant(PauliVector(0.3, 0.2, 1), PauliVector(), 1.0);
  const auto run = run_duality(kCanonicalPhi, free, 7, uniform_grid(1.0, 0.1));
  for (double d : run.distances) CHECK(d < 1e-8);
  CHECK_FALSE(run.violated);

  const auto stationary = Schedule::constant(PauliVector(), PauliVector(0, 0, 0.8), 1.0);
  const auto still = run_duality(Spinor(1, 0), stationary, 30, uniform_grid(1.0, 0.25));
  for (double d : still.distances) CHECK(d < 1e-12);
}

TEST_CASE("run_duality: canonical scenario, full and sector engines agree and respect the bound") {
  const auto grid = uniform_grid(1.0, 0.1);
  DualityOptions full_opts;
  full_opts.engine = Engine::full;
  DualityOptions sym_opts;
  sym_opts.engine = Engine::symmetric;
  const auto a = run_duality(kCanonicalPhi, canonical(), 10, grid, full_opts);
  const auto b = run_duality(kCanonicalPhi, canonical(), 10, grid, sym_opts);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(a.distances[i] - b.distances[i]) < 1e-8);
    CHECK(a.distances[i] <= a.bound_values[i] + a.violation_tolerance);
  }
  CHECK(a.engine == Engine::full);
  CHECK(b.engine == Engine::symmetric);

  const auto big = run_duality(kCanonicalPhi, canonical(), 64, grid, sym_opts);
  CHECK_FALSE(big.violated);
  CHECK(big.min_margin > -big.violation_tolerance);  // the t = 0 row has bound 0
  CHECK(big.integrator_error < 1e-9);
}

TEST_CASE("fit_loglog on synthetic data") {
  const std::vector<int> ns{8, 16, 32, 64, 128};
  std::vector<double> ds;
  for (int n : ns) ds.push_back(0.37 / (n - 1));
  const auto fit = fit_loglog(ns, ds);
  CHECK(std::abs(fit.slope + 1.0) < 1e-12);
  CHECK(std::exp(fit.intercept) == doctest::Approx(0.37).epsilon(1e-12));
  CHECK_THROWS_AS(fit_loglog({8, 16}, {0.1, 0.05}), NumericalFailure);
}

TEST_CASE("scaling_fit: validation and the fit-undefined case") {
  const auto free = Schedule::constant(PauliVector(0, 0, 1), PauliVector(), 1.0);
  CHECK_THROWS_AS(scaling_fit(kCanonicalPhi, free, {8, 16, 32}, 1.0), NumericalFailure);
  CHECK_THROWS_AS(scaling_fit(kCanonicalPhi, canonical(), {8, 16}, 1.0), InvalidInput);
  CHECK_THROWS_AS(scaling_fit(kCanonicalPhi, canonical(), {4, 16, 32}, 1.0), InvalidInput);
  CHECK_THROWS_AS(scaling_fit(kCanonicalPhi, canonical(), {16, 8, 32}, 1.0), InvalidInput);
}

TEST_CASE("scaling_fit: pure torsion converges at the mean-field rate") {
  // h0 = 0: replicas see no free field, so the central marginal tracks the mean field
  const auto torsion = Schedule::constant(PauliVector(), PauliVector(1, 0, 0), 1.0);
  DualityOptions opts;
  opts.engine = Engine::symmetric;
  const auto rep = scaling_fit(kCanonicalPhi, torsion, {16, 32, 64, 128, 256}, 1.0, opts);
  MESSAGE("pure x-torsion slope: " << rep.fitted_slope);
  CHECK(rep.fitted_slope < -0.8);
  CHECK(rep.fitted_slope > -1.2);
}

TEST_CASE("random_hermitian is Hermitian and reproducible") {
  std::mt19937_64 a(5), b(5);
  const auto x = random_hermitian(4, a);
  const auto y = random_hermitian(4, b);
  CHECK(x == y);
  CHECK(is_hermitian(x, 0.0));
}

TEST_CASE("lr_check") {
  const auto zz = Schedule::constant(PauliVector(), PauliVector(0, 0, 1), 1.0);
  const auto r0 = lr_check(zz, 4, 1, 0.0, 50, 1);
  CHECK(r0.max_ratio == 0.0);

  const auto free = Schedule::constant(PauliVector(0.3, 0.5, 1), PauliVector(), 1.0);
  CHECK(lr_check(free, 5, 2, 0.7, 50, 2).max_ratio < 1e-12);

  const auto r = lr_check(zz, 4, 1, 0.2, 200, 3);
  MESSAGE("n=4 k=1 zz t=0.2 max ratio " << r.max_ratio << " bound " << r.bound);
  CHECK(r.bound == doctest::Approx(std::expm1(3.2) / 3));
  CHECK(r.max_ratio <= r.bound);
  CHECK(r.max_ratio > 0.0);
  CHECK(r.violations == 0);
  CHECK(lr_check(zz, 4, 1, 0.2, 200, 3).max_ratio == r.max_ratio);

  const auto series = lr_check(canonical(), 5, 2, std::vector<double>{0.1, 0.2, 0.5}, 40, 4);
  REQUIRE(series.size() == 3);
  for (const auto& x : series) CHECK(x.violations == 0);

  CHECK_THROWS_AS(lr_check(zz, 5, 3, 0.1, 10, 1), Unsupported);
  CHECK_THROWS_AS(lr_check(zz, 2, 2, 0.1, 10, 1), InvalidInput);
  CHECK_THROWS_AS(lr_check(zz, 20, 1, 0.1, 10, 1), InvalidInput);
}

TEST_CASE("covariance_check") {
  const auto c0 = covariance_check(kCanonicalPhi, canonical(), 5, 0.0, 100, 1);
  CHECK(c0.max_abs_covariance < 1e-14);
  const auto free = Schedule::constant(PauliVector(0.3, 0.5, 1), PauliVector(), 1.0);
  CHECK(covariance_check(kCanonicalPhi, free, 5, 0.8, 100, 2).max_abs_covariance < 1e-12);
  const auto c = covariance_check(kCanonicalPhi, canonical(), 6, 0.3, 500, 3);
  CHECK(c.violations == 0);
  CHECK(c.max_violation_margin >= 0.0);
}

TEST_CASE("bbgky_residual") {
  const auto free = Schedule::constant(PauliVector(0, 0, 1), PauliVector(), 1.0);
  CHECK(bbgky_residual(kCanonicalPhi, free, 6, 0.5, 1e-3, Engine::full) < 1e-6);

  const auto generic = Schedule::constant(PauliVector(0.3, 0, 0.5), PauliVector(0.5, 0.2, 0.3), 1.0);
  const double r1 = bbgky_residual(kCanonicalPhi, generic, 8, 0.5, 1e-3, Engine::full);
  const double r2 = bbgky_residual(kCanonicalPhi, generic, 8, 0.5, 5e-4, Engine::full);
  CHECK(r1 < 1e-5);
  CHECK(r1 / r2 >= 3.5);
  // both engines see the same identity
  const double s1 = bbgky_residual(kCanonicalPhi, generic, 8, 0.5, 1e-3, Engine::symmetric);
  CHECK(std::abs(s1 - r1) < 1e-9);
  CHECK_THROWS_AS(bbgky_residual(kCanonicalPhi, generic, 8, 0.0005, 1e-3, Engine::full), OutOfRange);
}

TEST_CASE("expansive_demo") {
  const auto grid = uniform_grid(5.0, 0.1);
  const Spinor a = spinor_from_bloch(Vec3(std::sqrt(1 - 0.16), 0, 0.4));
  const Spinor b = spinor_from_bloch(Vec3(std::sqrt(1 - 0.04), 0, 0.2));

  const auto linear = expansive_demo(a, b, Schedule::constant(PauliVector(0.2, 0.4, 1), PauliVector(), 5.0), grid);
  for (double r : linear.ratios) CHECK(r == doctest::Approx(1.0).epsilon(1e-9));

  // same x-projection, rotated about x: rigid co-rotation under x-torsion
  const double x = 0.5, tr = std::sqrt(1 - x * x);
  const Spinor c = spinor_from_bloch(Vec3(x, 0, tr));
  const Spinor d = spinor_from_bloch(Vec3(x, tr * std::sin(0.05), tr * std::cos(0.05)));
  const auto rigid = expansive_demo(c, d, Schedule::constant(PauliVector(), PauliVector(1, 0, 0), 5.0), grid);
  for (double r : rigid.ratios) CHECK(r == doctest::Approx(1.0).epsilon(1e-8));

  const auto twist = expansive_demo(a, b, Schedule::constant(PauliVector(), PauliVector(0, 0, 1), 5.0), grid);
  CHECK(twist.max_ratio > 1.05);
  CHECK_THROWS_AS(expansive_demo(a, a, canonical(5.0), grid), InvalidInput);
}
