#pragma once

// Scenario files: one JSON object per run.
//
//   {
//     "name": "canonical",
//     "n": 64,                      or "n_list": [8, 16, 32]
//     "phi": [re0, im0, re1, im1],  normalized to 1e-9
//     "schedule": {
//       "segments": [{"t_start": 0, "h0": [0, 0, 1], "v": [1, 0, 0]}],
//       "horizon": 1.0              optional, defaults to t_final
//     },
//     "t_final": 1.0,
//     "output_step": 0.05,          optional, defaults to t_final / 20
//     "dt": 1e-4,                   optional integrator step
//     "engine": "auto",             full | symmetric | auto
//     "seed": 0,
//     ...command-specific keys (k_list, t_list, samples, x0_list, axis, phi_b,
//        max_full_qubits)
//   }

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "duality_lab/duality.hpp"
#include "duality_lab/errors.hpp"
#include "duality_lab/schedule.hpp"

namespace duality_lab {

// Schema violation; line() is 1-based, 0 when no position applies.
class ConfigError : public InvalidInput {
 public:
  ConfigError(const std::string& message, int line) : InvalidInput(message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct Scenario {
  std::string name;
  std::optional<int> n;
  std::vector<int> n_list;
  std::array<double, 4> phi{};
  std::vector<Segment> segments;
  double horizon = 0.0;
  double t_final = 0.0;
  double output_step = 0.0;
  std::optional<double> dt;
  Engine engine = Engine::automatic;
  std::uint64_t seed = 0;

  std::vector<int> k_list{1};
  std::vector<double> t_list;  // empty: use the output grid
  int samples = 200;
  std::vector<double> x0_list;
  int axis = 1;  // 1, 2, 3 for x, y, z
  std::optional<std::array<double, 4>> phi_b;
  int max_full_qubits = full::kDefaultMaxQubits;

  Spinor spinor() const;
  std::optional<Spinor> spinor_b() const;
  Schedule schedule() const;
  std::vector<double> grid() const;
  // n_list if given, otherwise {n}.
  std::vector<int> sizes() const;
  std::vector<double> check_times() const;

  bool operator==(const Scenario& other) const;
};

Scenario parse_scenario(std::string_view text, const std::string& source = "<config>");
Scenario load_scenario(const std::filesystem::path& path);

// Canonical JSON for the resolved scenario (defaults filled in). Parsing it
// back yields an equal Scenario.
std::string scenario_to_json(const Scenario& s, int indent = 2);

}  // namespace duality_lab
