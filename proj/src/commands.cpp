#include "duality_lab/commands.hpp"

#include <fmt/format.h>

#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <variant>

#include "duality_lab/errors.hpp"
#include "duality_lab/meanfield.hpp"
#include "duality_lab/parallel.hpp"
#include "json.hpp"

#if defined(__unix__) || defined(__APPLE__)
#include <unistd.h>
#endif

namespace duality_lab::cli {

namespace {

using Json = nlohmann::ordered_json;

// RFC 4180: CRLF line ends, fields quoted only when needed.
class Csv {
 public:
  using Field = std::variant<double, long long, std::string>;

  explicit Csv(std::initializer_list<std::string> header) {
    std::vector<Field> fields(header.begin(), header.end());
    row(fields);
  }

  void row(const std::vector<Field>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ += ',';
      std::visit([this](const auto& v) { append(v); }, fields[i]);
    }
    out_ += "\r\n";
  }

  const std::string& str() const { return out_; }

 private:
  void append(double v) { out_ += fmt::format("{:.17g}", v); }
  void append(long long v) { out_ += fmt::format("{}", v); }
  void append(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) {
      out_ += s;
      return;
    }
    out_ += '"';
    for (char c : s) {
      if (c == '"') out_ += '"';
      out_ += c;
    }
    out_ += '"';
  }

  std::string out_;
};

long long as_int(int v) { return static_cast<long long>(v); }

Json bounds_json(const ScheduleBounds& b) { return Json{{"v_m", b.v_m}, {"v_star", b.v_star}, {"h0_m", b.h0_m}}; }

int single_size(const Scenario& s, const char* command) {
  const auto sizes = s.sizes();
  if (sizes.size() != 1) throw InvalidInput(fmt::format("{}: needs a single 'n', not 'n_list'", command));
  return sizes.front();
}

DualityOptions options_for(const Scenario& s) {
  DualityOptions o;
  o.engine = s.engine;
  o.dt = s.dt;
  o.max_full_qubits = s.max_full_qubits;
  return o;
}

struct Partial {
  std::string csv;
  Json summary;
  bool violated = false;
};

Partial cmd_duality(const Scenario& s) {
  const int n = single_size(s, "duality");
  const DualityRun run = run_duality(s.spinor(), s.schedule(), n, s.grid(), options_for(s));
  Csv csv({"t", "mf_x", "mf_y", "mf_z", "ex_x", "ex_y", "ex_z", "trace_distance", "es_bound"});
  for (std::size_t i = 0; i < run.times.size(); ++i) {
    const Vec3& m = run.mf.bloch[i];
    const Vec3 e = run.exact[i].bloch();
    csv.row({run.times[i], m[0], m[1], m[2], e[0], e[1], e[2], run.distances[i], run.bound_values[i]});
  }
  Partial p;
  p.csv = csv.str();
  p.violated = run.violated;
  p.summary = Json{{"n", n},
                   {"engine", engine_name(run.engine)},
                   {"dt", run.dt},
                   {"bounds", bounds_json(run.bounds)},
                   {"max_distance", run.max_distance},
                   {"min_margin", run.min_margin},
                   {"final_margin", run.bound_values.back() - run.distances.back()},
                   {"integrator_error", run.integrator_error},
                   {"violation_tolerance", run.violation_tolerance},
                   {"violated", run.violated}};
  return p;
}

Partial cmd_scaling(const Scenario& s) {
  const ScalingReport rep = scaling_fit(s.spinor(), s.schedule(), s.sizes(), s.t_final, options_for(s));
  const ScheduleBounds b = s.schedule().bounds();
  Csv csv({"n", "distance", "integrator_error", "included", "es_bound"});
  for (std::size_t i = 0; i < rep.n_values.size(); ++i) {
    csv.row({as_int(rep.n_values[i]), rep.distances[i], rep.tolerances[i], as_int(rep.included[i] ? 1 : 0),
             es_bound(rep.t_fixed, rep.n_values[i], b)});
  }
  Partial p;
  p.csv = csv.str();
  p.summary = Json{{"t", rep.t_fixed},
                   {"slope", rep.fitted_slope},
                   {"intercept", rep.fitted_intercept},
                   {"slope_in_range", rep.fitted_slope >= -1.2 && rep.fitted_slope <= -0.8},
                   {"warnings", rep.warnings}};
  return p;
}

Partial cmd_lr(const Scenario& s) {
  const Schedule sched = s.schedule();
  const auto sizes = s.sizes();
  const auto times = s.check_times();
  struct Task {
    int n;
    int k;
  };
  std::vector<Task> tasks;
  for (int n : sizes)
    for (int k : s.k_list) tasks.push_back({n, k});
  std::vector<std::vector<LrResult>> results(tasks.size());
  parallel_for(tasks.size(), [&](std::size_t i) {
    const auto [n, k] = tasks[i];
    results[i] = lr_check(sched, n, k, times, s.samples,
                          derive_seed(s.seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(k)));
  });
  Csv csv({"n", "k", "t", "samples", "max_ratio", "bound", "violations"});
  long long violations = 0;
  long long total = 0;
  double worst = 0.0;  // max over rows of max_ratio / bound
  for (const auto& rows : results) {
    for (const auto& r : rows) {
      csv.row({as_int(r.n), as_int(r.k), r.t, as_int(r.samples), r.max_ratio, r.bound, as_int(r.violations)});
      violations += r.violations;
      total += r.samples;
      if (r.bound > 0.0) worst = std::max(worst, r.max_ratio / r.bound);
    }
  }
  Partial p;
  p.csv = csv.str();
  p.violated = violations > 0;
  p.summary = Json{{"total_samples", total},
                   {"violations", violations},
                   {"max_ratio_over_bound", worst},
                   {"bounds", bounds_json(sched.bounds())}};
  return p;
}

Partial cmd_covariance(const Scenario& s) {
  const Schedule sched = s.schedule();
  const auto times = s.check_times();
  struct Task {
    int n;
    std::size_t ti;
  };
  std::vector<Task> tasks;
  for (int n : s.sizes())
    for (std::size_t ti = 0; ti < times.size(); ++ti) tasks.push_back({n, ti});
  std::vector<CovarianceResult> results(tasks.size());
  parallel_for(tasks.size(), [&](std::size_t i) {
    const auto [n, ti] = tasks[i];
    results[i] = covariance_check(s.spinor(), sched, n, times[ti], s.samples,
                                  derive_seed(s.seed, static_cast<std::uint64_t>(n), ti), s.dt);
  });
  Csv csv({"n", "t", "samples", "max_abs_covariance", "bound_scale", "min_margin", "violations"});
  long long violations = 0;
  long long total = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  for (const auto& r : results) {
    csv.row({as_int(r.n), r.t, as_int(r.samples), r.max_abs_covariance, covariance_bound(r.t, r.n, sched.bounds()),
             r.max_violation_margin, as_int(r.violations)});
    violations += r.violations;
    total += r.samples;
    min_margin = std::min(min_margin, r.max_violation_margin);
  }
  Partial p;
  p.csv = csv.str();
  p.violated = violations > 0;
  p.summary = Json{{"total_samples", total}, {"violations", violations}, {"min_margin", min_margin}};
  return p;
}

Partial cmd_torsion(const Scenario& s) {
  const Schedule sched = s.schedule();
  const int axis = s.axis - 1;
  const double coupling = s.segments.front().v[axis];
  std::vector<std::string> warnings;
  if (s.segments.size() > 1) warnings.emplace_back("several segments; expected frequency uses the first one");
  if (s.segments.front().h0.norm() != 0.0) warnings.emplace_back("h0 is nonzero; expected frequency ignores it");
  const double step = s.dt.value_or(default_time_step(sched.bounds()));
  const auto grid = s.grid();

  std::vector<double> omegas(s.x0_list.size());
  parallel_for(s.x0_list.size(), [&](std::size_t i) {
    const double x0 = s.x0_list[i];
    const double expected = 2.0 * coupling * x0;
    const auto traj = meanfield::mf_integrate_bloch(meanfield::torsion_probe_state(x0, axis), sched, grid, step);
    omegas[i] = meanfield::torsion_frequency(traj, axis, expected);
  });

  Csv csv({"x0", "omega", "expected_omega", "abs_error", "rel_error"});
  double max_rel = 0.0;
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    const double expected = 2.0 * coupling * s.x0_list[i];
    const double abs_err = std::abs(omegas[i] - expected);
    const double rel = expected != 0.0 ? abs_err / std::abs(expected) : abs_err;
    if (expected != 0.0) max_rel = std::max(max_rel, rel);
    csv.row({s.x0_list[i], omegas[i], expected, abs_err, rel});
  }
  Partial p;
  p.csv = csv.str();
  p.summary = Json{{"axis", s.axis}, {"coupling", coupling}, {"max_rel_error", max_rel}, {"warnings", warnings}};
  return p;
}

Partial cmd_expansive(const Scenario& s) {
  const auto phi_b = s.spinor_b();
  if (!phi_b) throw InvalidInput("expansive: scenario needs 'phi_b'");
  const ExpansiveSeries series = expansive_demo(s.spinor(), *phi_b, s.schedule(), s.grid(), s.dt);
  Csv csv({"t", "distance", "ratio"});
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    csv.row({series.times[i], series.distances[i], series.ratios[i]});
  }
  Partial p;
  p.csv = csv.str();
  p.summary = Json{{"initial_distance", series.distances.front()},
                   {"max_ratio", series.max_ratio},
                   {"grows", series.max_ratio > 1.0}};
  return p;
}

const std::map<std::string, std::function<Partial(const Scenario&)>>& table() {
  static const std::map<std::string, std::function<Partial(const Scenario&)>> t = {
      {"duality", cmd_duality}, {"scaling", cmd_scaling}, {"lr", cmd_lr},
      {"covariance", cmd_covariance}, {"torsion", cmd_torsion}, {"expansive", cmd_expansive}};
  return t;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"duality", "scaling", "lr", "covariance", "torsion", "expansive"};
  return names;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  // splitmix64 finalizer over the folded key
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(base);
  for (std::uint64_t part : {a, b, c}) h = mix(h ^ part);
  return h;
}

CommandOutput execute(const std::string& command, const Scenario& s) {
  const auto it = table().find(command);
  if (it == table().end()) throw InvalidInput(fmt::format("unknown command '{}'", command));
  const auto start = std::chrono::steady_clock::now();
  Partial p = it->second(s);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Json doc;
  doc["command"] = command;
  doc["seed"] = s.seed;
  doc["violated"] = p.violated;
  doc["wall_time_s"] = wall;
  doc["summary"] = std::move(p.summary);
  doc["config"] = Json::parse(scenario_to_json(s));

  CommandOutput out;
  out.csv = std::move(p.csv);
  out.summary_json = doc.dump(2) + "\n";
  out.violated = p.violated;
  return out;
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
#if defined(__unix__) || defined(__APPLE__)
  const long pid = static_cast<long>(::getpid());
#else
  const long pid = 0;
#endif
  std::filesystem::path tmp = path;
  tmp += fmt::format(".tmp{}", pid);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", tmp.string()));
    out << content;
    out.flush();
    if (!out) throw std::runtime_error(fmt::format("write to {} failed", tmp.string()));
  }
  std::filesystem::rename(tmp, path);
}

ExitCode run(const Invocation& inv, std::ostream& err) {
  Scenario scenario;
  try {
    scenario = load_scenario(inv.config);
    if (inv.seed) scenario.seed = *inv.seed;
    if (inv.engine) scenario.engine = *inv.engine;
    // re-validate after the overrides (engine caps etc.)
    scenario = parse_scenario(scenario_to_json(scenario), inv.config.string() + " (with command-line overrides)");
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return ExitCode::config_error;
  }

  CommandOutput out;
  try {
    out = execute(inv.command, scenario);
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return ExitCode::numerical_failure;
  } catch (const InvalidInput& e) {
    err << "config error: " << e.what() << '\n';
    return ExitCode::config_error;
  } catch (const OutOfRange& e) {
    err << "config error: " << e.what() << '\n';
    return ExitCode::config_error;
  } catch (const Unsupported& e) {
    err << "config error: " << e.what() << '\n';
    return ExitCode::config_error;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return ExitCode::numerical_failure;
  }

  try {
    std::filesystem::create_directories(inv.out_dir);
    write_atomically(inv.out_dir / (inv.command + ".csv"), out.csv);
    write_atomically(inv.out_dir / (inv.command + ".json"), out.summary_json);
  } catch (const std::exception& e) {
    err << "output error: " << e.what() << '\n';
    return ExitCode::config_error;
  }
  if (out.violated) {
    err << inv.command << ": bound violated, see " << (inv.out_dir / (inv.command + ".json")).string() << '\n';
    return ExitCode::violation;
  }
  return ExitCode::ok;
}

}  // namespace duality_lab::cli
