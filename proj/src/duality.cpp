#include "duality_lab/duality.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "duality_lab/errors.hpp"
#include "duality_lab/parallel.hpp"

namespace duality_lab {

namespace {

constexpr Complex kI{0.0, 1.0};

// Round-off level below which distance differences are not resolvable.
constexpr double kRoundoffFloor = 1e-12;

double growth(double rate, double t) { return std::expm1(rate * t); }

}  // namespace

Engine resolve_engine(Engine requested, int n) {
  if (requested != Engine::automatic) return requested;
  return n <= kAutoFullMaxQubits ? Engine::full : Engine::symmetric;
}

std::string engine_name(Engine e) {
  switch (e) {
    case Engine::full:
      return "full";
    case Engine::symmetric:
      return "symmetric";
    case Engine::automatic:
      return "auto";
  }
  return "auto";
}

Engine parse_engine(const std::string& name) {
  if (name == "full") return Engine::full;
  if (name == "symmetric") return Engine::symmetric;
  if (name == "auto") return Engine::automatic;
  throw InvalidInput("engine must be one of full, symmetric, auto (got '" + name + "')");
}

ExactEvolver::ExactEvolver(const Spinor& phi, int n, Engine engine, int max_full_qubits)
    : n_(n), engine_(resolve_engine(engine, n)) {
  if (engine_ == Engine::full) {
    state_ = full::product_init(phi, n, max_full_qubits);
  } else {
    state_ = symmetric::coherent_init(phi, n);
  }
}

void ExactEvolver::advance(const Schedule& s, double t_target, double dt) {
  if (auto* f = std::get_if<full::FullState>(&state_)) {
    *f = full::propagate(std::move(*f), s, t_target, dt);
  } else {
    auto& sec = std::get<symmetric::SectorState>(state_);
    sec = symmetric::sector_propagate(std::move(sec), s, t_target, dt);
  }
}

double ExactEvolver::time() const {
  return std::visit([](const auto& st) { return st.time; }, state_);
}

QubitDensity ExactEvolver::central() const {
  if (const auto* f = std::get_if<full::FullState>(&state_)) return full::reduced_central(*f);
  return symmetric::sector_reduced_central(std::get<symmetric::SectorState>(state_));
}

Mat4 ExactEvolver::pair() const {
  if (const auto* f = std::get_if<full::FullState>(&state_)) return full::reduced_pair(*f);
  return symmetric::sector_reduced_pair(std::get<symmetric::SectorState>(state_));
}

const full::FullState& ExactEvolver::full_state() const {
  if (const auto* f = std::get_if<full::FullState>(&state_)) return *f;
  throw Unsupported("ExactEvolver: full state requested from the symmetric engine");
}

double es_bound(double t, int n, const ScheduleBounds& b) {
  if (t < 0.0) throw InvalidInput("es_bound: t must be non-negative");
  if (n < 2) throw InvalidInput("es_bound: n must be at least 2");
  if (b.v_m == 0.0) return 0.0;
  return (6.0 * b.v_star / b.v_m) * growth(8.0 * b.v_m, t) / static_cast<double>(n - 1);
}

double lieb_robinson_bound(double t, int n, const ScheduleBounds& b) {
  return growth(4.0 * b.v_m, t) / static_cast<double>(n - 1);
}

double covariance_bound(double t, int n, const ScheduleBounds& b) {
  return growth(8.0 * b.v_m, t) / static_cast<double>(n - 1);
}

std::vector<double> uniform_grid(double t_final, double step) {
  if (!(t_final >= 0.0) || !(step > 0.0)) throw InvalidInput("uniform_grid: need t_final >= 0 and step > 0");
  const auto count = static_cast<long>(std::floor(t_final / step + 1e-9));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(count) + 2);
  for (long i = 0; i <= count; ++i) grid.push_back(static_cast<double>(i) * step);
  if (t_final - grid.back() > 1e-9 * std::max(1.0, t_final)) grid.push_back(t_final);
  else grid.back() = t_final;
  return grid;
}

Spinor spinor_from_bloch(const Vec3& r) {
  const double len = r.norm();
  if (std::abs(len - 1.0) > 1e-9) throw InvalidInput("spinor_from_bloch: Bloch vector must have unit length");
  const double theta = std::acos(std::clamp(r[2] / len, -1.0, 1.0));
  const double azimuth = std::atan2(r[1], r[0]);
  return Spinor(Complex{std::cos(0.5 * theta), 0.0}, std::polar(std::sin(0.5 * theta), azimuth));
}

namespace {

struct DistanceSeries {
  meanfield::MeanFieldTrajectory mf;
  std::vector<QubitDensity> exact;
  std::vector<double> distances;
};

DistanceSeries distance_series(const Spinor& phi, const Schedule& s, int n, const std::vector<double>& grid,
                               double dt, Engine engine, int max_full_qubits) {
  DistanceSeries out;
  out.mf = meanfield::mf_integrate(phi, s, grid, dt);
  ExactEvolver exact(phi, n, engine, max_full_qubits);
  out.exact.reserve(grid.size());
  out.distances.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    exact.advance(s, grid[i], dt);
    out.exact.push_back(exact.central());
    out.distances.push_back(trace_distance(out.mf.state(i), out.exact.back()));
  }
  return out;
}

}  // namespace

DualityRun run_duality(const Spinor& phi, const Schedule& s, int n, const std::vector<double>& t_grid,
                       const DualityOptions& opts) {
  require_normalized(phi);
  if (t_grid.empty()) throw InvalidInput("run_duality: empty time grid");
  DualityRun run;
  run.phi = phi;
  run.n = n;
  run.engine = resolve_engine(opts.engine, n);
  run.bounds = s.bounds();
  run.dt = opts.dt.value_or(default_time_step(run.bounds));
  run.times = t_grid;

  DistanceSeries fine = distance_series(phi, s, n, t_grid, run.dt, run.engine, opts.max_full_qubits);
  double richardson = 0.0;
  if (opts.estimate_error) {
    // RK4: e(dt) ~ (d(2dt) - d(dt)) / 15
    DistanceSeries coarse = distance_series(phi, s, n, t_grid, 2.0 * run.dt, run.engine, opts.max_full_qubits);
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      richardson = std::max(richardson, std::abs(coarse.distances[i] - fine.distances[i]) / 15.0);
    }
  }
  run.integrator_error = std::max(richardson, kRoundoffFloor);
  run.violation_tolerance = 10.0 * run.integrator_error;

  run.mf = std::move(fine.mf);
  run.exact = std::move(fine.exact);
  run.distances = std::move(fine.distances);
  run.bound_values.reserve(t_grid.size());
  run.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double bound = es_bound(t_grid[i], n, run.bounds);
    run.bound_values.push_back(bound);
    run.max_distance = std::max(run.max_distance, run.distances[i]);
    run.min_margin = std::min(run.min_margin, bound - run.distances[i]);
    if (run.distances[i] > bound + run.violation_tolerance) run.violated = true;
  }
  return run;
}

LogLogFit fit_loglog(const std::vector<int>& n_values, const std::vector<double>& distances) {
  if (n_values.size() != distances.size()) throw InvalidInput("fit_loglog: size mismatch");
  if (n_values.size() < 3) throw NumericalFailure("fit_loglog: fewer than three points, fit undefined");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    if (n_values[i] < 2 || !(distances[i] > 0.0)) throw InvalidInput("fit_loglog: need n >= 2 and distance > 0");
    xs.push_back(std::log(static_cast<double>(n_values[i] - 1)));
    ys.push_back(std::log(distances[i]));
  }
  const auto count = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw NumericalFailure("fit_loglog: all n values coincide");
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

ScalingReport scaling_fit(const Spinor& phi, const Schedule& s, const std::vector<int>& n_list, double t_fixed,
                          const DualityOptions& opts) {
  if (n_list.size() < 3) throw InvalidInput("scaling_fit: need at least three values of n");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 8) throw InvalidInput("scaling_fit: every n must be at least 8");
    if (i > 0 && n_list[i] <= n_list[i - 1]) throw InvalidInput("scaling_fit: n values must be strictly increasing");
  }
  ScalingReport report;
  report.t_fixed = t_fixed;
  report.n_values = n_list;
  report.distances.assign(n_list.size(), 0.0);
  report.tolerances.assign(n_list.size(), 0.0);
  report.included.assign(n_list.size(), false);

  const std::vector<double> grid{0.0, t_fixed};
  parallel_for(n_list.size(), [&](std::size_t i) {
    DualityRun run = run_duality(phi, s, n_list[i], grid, opts);
    report.distances[i] = run.distances.back();
    report.tolerances[i] = run.integrator_error;
  });

  std::vector<int> ns;
  std::vector<double> ds;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (report.distances[i] < 10.0 * report.tolerances[i]) {
      report.warnings.push_back(fmt::format("n = {}: distance {:.3e} below 10 x integrator tolerance {:.3e}; excluded",
                                            n_list[i], report.distances[i], report.tolerances[i]));
      continue;
    }
    report.included[i] = true;
    ns.push_back(n_list[i]);
    ds.push_back(report.distances[i]);
  }
  if (ns.size() < 3) {
    throw NumericalFailure(fmt::format("scaling_fit: only {} point(s) above the integrator floor, fit undefined", ns.size()));
  }
  const LogLogFit fit = fit_loglog(ns, ds);
  report.fitted_slope = fit.slope;
  report.fitted_intercept = fit.intercept;
  return report;
}

Eigen::MatrixXcd random_hermitian(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  Eigen::MatrixXcd g(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = Complex{re, im};
    }
  return g + g.adjoint();
}

namespace {

// Rows/columns of the 2^n operator grouped by the top k qubits; a acts on
// that block index.
Eigen::MatrixXcd left_block_multiply(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& y) {
  const Eigen::Index blocks = a.rows();
  const Eigen::Index bs = y.rows() / blocks;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(y.rows(), y.cols());
  for (Eigen::Index r = 0; r < blocks; ++r)
    for (Eigen::Index c = 0; c < blocks; ++c) {
      if (a(r, c) != 0.0) out.middleRows(r * bs, bs) += a(r, c) * y.middleRows(c * bs, bs);
    }
  return out;
}

Eigen::MatrixXcd right_block_multiply(const Eigen::MatrixXcd& y, const Eigen::MatrixXcd& a) {
  const Eigen::Index blocks = a.rows();
  const Eigen::Index bs = y.cols() / blocks;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(y.rows(), y.cols());
  for (Eigen::Index c = 0; c < blocks; ++c)
    for (Eigen::Index r = 0; r < blocks; ++r) {
      if (a(r, c) != 0.0) out.middleCols(c * bs, bs) += a(r, c) * y.middleCols(r * bs, bs);
    }
  return out;
}

// sigma^mu on qubit q of n, as a dense 2^n matrix.
Eigen::MatrixXcd single_qubit_dense(int n, int q, const Mat2& m) {
  const auto dim = Eigen::Index{1} << n;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  const auto mask = Eigen::Index{1} << (n - 1 - q);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const int bi = (i & mask) ? 1 : 0;
    for (int bj = 0; bj < 2; ++bj) {
      const Eigen::Index j = bj ? (i | mask) : (i & ~mask);
      out(i, j) = m(bi, bj);
    }
  }
  return out;
}

double hermitian_trace_norm(const Eigen::MatrixXcd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalFailure("trace norm: eigensolver did not converge");
  return es.eigenvalues().cwiseAbs().sum();
}

}  // namespace

std::vector<LrResult> lr_check(const Schedule& s, int n, int k, const std::vector<double>& times, int samples,
                               std::uint64_t seed) {
  if (k < 1 || k > 2) throw Unsupported("lr_check: only k = 1 or k = 2 is supported");
  if (k > n - 1) throw InvalidInput("lr_check: need 1 <= k <= n - 1");
  if (n > full::kDefaultMaxQubits) throw InvalidInput("lr_check: n exceeds the full-engine cap");
  if (samples < 1) throw InvalidInput("lr_check: need at least one sample");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (times[i] < times[i - 1]) throw InvalidInput("lr_check: times must be non-decreasing");
  }
  const ScheduleBounds b = s.bounds();
  const double scale_a = std::ldexp(1.0, n - k);  // ||a (x) I||_1 = 2^{n-k} ||a||_1
  const double scale_b = std::ldexp(1.0, n - 1);

  std::vector<Eigen::MatrixXcd> sigma_k;
  for (int mu = 0; mu < 3; ++mu) sigma_k.push_back(single_qubit_dense(n, k, pauli(mu)));

  std::vector<LrResult> results;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(Eigen::Index{1} << n, Eigen::Index{1} << n);
  double t_prev = 0.0;
  for (double t : times) {
    u = full::dense_propagator(n, s, t_prev, t) * u;
    t_prev = t;
    // ||[U^dag A U, B]||_1 = ||[A, U B U^dag]||_1
    std::array<Eigen::MatrixXcd, 3> w;
    for (int mu = 0; mu < 3; ++mu) w[static_cast<std::size_t>(mu)] = u * sigma_k[static_cast<std::size_t>(mu)] * u.adjoint();

    LrResult res;
    res.n = n;
    res.k = k;
    res.t = t;
    res.samples = samples;
    res.bound = lieb_robinson_bound(t, n, b);
    std::mt19937_64 rng(seed);
    for (int sample = 0; sample < samples; ++sample) {
      const Eigen::MatrixXcd a = random_hermitian(1 << k, rng);
      const Eigen::MatrixXcd bb = random_hermitian(2, rng);
      Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(u.rows(), u.cols());
      for (int mu = 0; mu < 3; ++mu) {
        const double coeff = 0.5 * (bb * pauli(mu)).trace().real();
        y += coeff * w[static_cast<std::size_t>(mu)];
      }
      const Eigen::MatrixXcd comm = kI * (left_block_multiply(a, y) - right_block_multiply(y, a));
      const double numerator = hermitian_trace_norm(0.5 * (comm + comm.adjoint()));
      const double denom = scale_a * trace_norm(a) * scale_b * trace_norm(bb);
      const double ratio = numerator / denom;
      res.max_ratio = std::max(res.max_ratio, ratio);
      if (ratio > res.bound) ++res.violations;
    }
    results.push_back(res);
  }
  return results;
}

LrResult lr_check(const Schedule& s, int n, int k, double t, int samples, std::uint64_t seed) {
  return lr_check(s, n, k, std::vector<double>{t}, samples, seed).front();
}

CovarianceResult covariance_check(const Spinor& phi, const Schedule& s, int n, double t, int samples,
                                  std::uint64_t seed, std::optional<double> dt) {
  if (samples < 1) throw InvalidInput("covariance_check: need at least one sample");
  const ScheduleBounds b = s.bounds();
  ExactEvolver exact(phi, n, Engine::full);
  exact.advance(s, t, dt.value_or(default_time_step(b)));
  const full::FullState& psi = exact.full_state();

  CovarianceResult res;
  res.n = n;
  res.t = t;
  res.samples = samples;
  res.max_violation_margin = std::numeric_limits<double>::infinity();
  const double envelope = covariance_bound(t, n, b);
  std::mt19937_64 rng(seed);
  for (int sample = 0; sample < samples; ++sample) {
    const SmallOperator k1(random_hermitian(2, rng), {0});
    const SmallOperator k2(random_hermitian(2, rng), {1});
    const std::array<SmallOperator, 2> both{k1, k2};
    const double joint = full::expectation(psi, both);
    const double e1 = full::expectation(psi, std::span<const SmallOperator>(&k1, 1));
    const double e2 = full::expectation(psi, std::span<const SmallOperator>(&k2, 1));
    const double cov = std::abs(joint - e1 * e2);
    const double margin = trace_norm(k1) * trace_norm(k2) * envelope - cov;
    res.max_abs_covariance = std::max(res.max_abs_covariance, cov);
    res.max_violation_margin = std::min(res.max_violation_margin, margin);
    if (margin < 0.0) ++res.violations;
  }
  return res;
}

double bbgky_residual(const Spinor& phi, const Schedule& s, int n, double t, double delta, Engine engine,
                      std::optional<double> dt) {
  if (!(delta > 0.0)) throw InvalidInput("bbgky_residual: delta must be positive");
  if (t - delta < 0.0 || t + delta > s.horizon()) {
    throw OutOfRange("bbgky_residual: t +- delta must lie inside [0, horizon]");
  }
  const double step = dt.value_or(default_time_step(s.bounds()));
  ExactEvolver exact(phi, n, engine);
  exact.advance(s, t - delta, step);
  const Mat2 before = exact.central().matrix();
  exact.advance(s, t, step);
  const Mat2 rho_c = exact.central().matrix();
  const Mat4 rho_12 = exact.pair();
  exact.advance(s, t + delta, step);
  const Mat2 after = exact.central().matrix();

  const auto [h0, v] = s.sample(t);
  const Mat2 h = h0.as_matrix();
  const Mat4 pair = pair_interaction(v).matrix;
  const Mat2 rhs = -kI * (h * rho_c - rho_c * h) - kI * partial_trace_second(pair * rho_12 - rho_12 * pair);
  const Mat2 derivative = (after - before) / (2.0 * delta);
  return trace_norm(Eigen::MatrixXcd(derivative - rhs));
}

ExpansiveSeries expansive_demo(const Spinor& phi_a, const Spinor& phi_b, const Schedule& s,
                               const std::vector<double>& t_grid, std::optional<double> dt) {
  require_normalized(phi_a);
  require_normalized(phi_b);
  const double step = dt.value_or(default_time_step(s.bounds()));
  const auto a = meanfield::mf_integrate(phi_a, s, t_grid, step);
  const auto b = meanfield::mf_integrate(phi_b, s, t_grid, step);
  const double d0 = trace_distance(QubitDensity::pure(phi_a[0], phi_a[1]), QubitDensity::pure(phi_b[0], phi_b[1]));
  if (d0 < 1e-8) throw InvalidInput("expansive_demo: initial states coincide (distance < 1e-8)");
  ExpansiveSeries out;
  out.times = t_grid;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double d = trace_distance(a.state(i), b.state(i));
    out.distances.push_back(d);
    out.ratios.push_back(d / d0);
    out.max_ratio = std::max(out.max_ratio, d / d0);
  }
  return out;
}

}  // namespace duality_lab
