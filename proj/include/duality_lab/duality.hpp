#pragma once

// Comparison of the linear n-qubit picture with the nonlinear single qubit.
//
// All distances use ||a - b||_1 without a 1/2 prefactor, matching
//   ||X(t) - rho_c(t)||_1 <= (6 v_star / v_m) (exp(8 v_m t) - 1) / (n - 1).

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "duality_lab/full_engine.hpp"
#include "duality_lab/meanfield.hpp"
#include "duality_lab/schedule.hpp"
#include "duality_lab/symmetric_engine.hpp"

namespace duality_lab {

enum class Engine { full, symmetric, automatic };

inline constexpr int kAutoFullMaxQubits = 12;

Engine resolve_engine(Engine requested, int n);
std::string engine_name(Engine e);
Engine parse_engine(const std::string& name);

// Exact evolution of phi^(x)n with either simulator behind one interface.
class ExactEvolver {
 public:
  ExactEvolver(const Spinor& phi, int n, Engine engine, int max_full_qubits = full::kDefaultMaxQubits);

  void advance(const Schedule& s, double t_target, double dt);
  double time() const;
  int n() const { return n_; }
  Engine engine() const { return engine_; }

  QubitDensity central() const;
  Mat4 pair() const;  // (central, first replica); n >= 3, or n = 2 on the full engine
  const full::FullState& full_state() const;

 private:
  int n_;
  Engine engine_;
  std::variant<full::FullState, symmetric::SectorState> state_;
};

double es_bound(double t, int n, const ScheduleBounds& b);
double lieb_robinson_bound(double t, int n, const ScheduleBounds& b);
double covariance_bound(double t, int n, const ScheduleBounds& b);

struct DualityOptions {
  Engine engine = Engine::automatic;
  std::optional<double> dt;  // default: default_time_step(bounds)
  bool estimate_error = true;
  int max_full_qubits = full::kDefaultMaxQubits;
};

struct DualityRun {
  Spinor phi;
  int n = 0;
  Engine engine = Engine::symmetric;
  double dt = 0.0;
  ScheduleBounds bounds;
  std::vector<double> times;
  meanfield::MeanFieldTrajectory mf;
  std::vector<QubitDensity> exact;
  std::vector<double> distances;
  std::vector<double> bound_values;
  double integrator_error = 0.0;     // Richardson estimate on the distance series
  double violation_tolerance = 0.0;  // 10 x integrator_error
  bool violated = false;
  double max_distance = 0.0;
  double min_margin = 0.0;  // min_i (bound - distance)
};

DualityRun run_duality(const Spinor& phi, const Schedule& s, int n, const std::vector<double>& t_grid,
                       const DualityOptions& opts = {});

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Least squares of log(distance) against log(n - 1).
LogLogFit fit_loglog(const std::vector<int>& n_values, const std::vector<double>& distances);

struct ScalingReport {
  double t_fixed = 0.0;
  std::vector<int> n_values;
  std::vector<double> distances;
  std::vector<double> tolerances;
  std::vector<bool> included;
  std::vector<std::string> warnings;
  double fitted_slope = 0.0;
  double fitted_intercept = 0.0;
};

// Throws NumericalFailure when fewer than three points survive the
// 10 x integrator-error floor.
ScalingReport scaling_fit(const Spinor& phi, const Schedule& s, const std::vector<int>& n_list, double t_fixed,
                          const DualityOptions& opts = {});

// Hermitian G + G^dagger with G having independent standard complex normal
// entries.
Eigen::MatrixXcd random_hermitian(int dim, std::mt19937_64& rng);

struct LrResult {
  int n = 0;
  int k = 0;
  double t = 0.0;
  int samples = 0;
  double max_ratio = 0.0;
  double bound = 0.0;
  int violations = 0;
};

// Sampled lower estimate of
//   sup ||[U_t^dag A U_t, B]||_1 / (||A||_1 ||B||_1)
// over A on qubits {0..k-1} and B on qubit k, with all norms taken on the
// full 2^n space. k must be 1 or 2.
LrResult lr_check(const Schedule& s, int n, int k, double t, int samples, std::uint64_t seed);
std::vector<LrResult> lr_check(const Schedule& s, int n, int k, const std::vector<double>& times, int samples,
                               std::uint64_t seed);

struct CovarianceResult {
  int n = 0;
  double t = 0.0;
  int samples = 0;
  double max_abs_covariance = 0.0;
  double max_violation_margin = 0.0;  // worst (smallest) bound - |covariance|
  int violations = 0;
};

// |<K1 K2> - <K1><K2>| <= ||K1||_1 ||K2||_1 (exp(8 v_m t) - 1)/(n - 1) for
// random single-qubit observables K1 on the central qubit and K2 on replica 1.
CovarianceResult covariance_check(const Spinor& phi, const Schedule& s, int n, double t, int samples,
                                  std::uint64_t seed, std::optional<double> dt = std::nullopt);

// || d rho_c/dt (central difference) + i[H0, rho_c] + i tr_2 [V_12, rho_12] ||_1 at time t.
double bbgky_residual(const Spinor& phi, const Schedule& s, int n, double t, double delta, Engine engine,
                      std::optional<double> dt = std::nullopt);

struct ExpansiveSeries {
  std::vector<double> times;
  std::vector<double> distances;
  std::vector<double> ratios;  // distance(t) / distance(0)
  double max_ratio = 0.0;
};

ExpansiveSeries expansive_demo(const Spinor& phi_a, const Spinor& phi_b, const Schedule& s,
                               const std::vector<double>& t_grid, std::optional<double> dt = std::nullopt);

// Uniform grid 0, step, 2 step, ..., t_final (the last point is t_final).
std::vector<double> uniform_grid(double t_final, double step);

Spinor spinor_from_bloch(const Vec3& r);

}  // namespace duality_lab
