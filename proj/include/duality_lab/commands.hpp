#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "duality_lab/duality.hpp"
#include "duality_lab/scenario.hpp"

namespace duality_lab::cli {

enum class ExitCode : int { ok = 0, violation = 1, config_error = 2, numerical_failure = 3 };

const std::vector<std::string>& command_names();

struct CommandOutput {
  std::string csv;
  std::string summary_json;  // includes the resolved config under "config"
  bool violated = false;
};

// Runs one command on an already validated scenario. Throws the library
// exceptions (InvalidInput, NumericalFailure, ...) unchanged.
CommandOutput execute(const std::string& command, const Scenario& s);

struct Invocation {
  std::string command;
  std::filesystem::path config;
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<Engine> engine;
};

// Loads, overrides, runs and writes <out_dir>/<command>.csv and .json.
// Diagnostics go to err.
ExitCode run(const Invocation& inv, std::ostream& err);

// temp file in the same directory, then rename
void write_atomically(const std::filesystem::path& path, const std::string& content);

// Per-task seed derived from the scenario seed and a task key.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

}  // namespace duality_lab::cli
