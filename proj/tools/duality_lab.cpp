#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "duality_lab/commands.hpp"

int main(int argc, char** argv) {
  using namespace duality_lab;

  CLI::App app{"Mean-field versus exact central-spin dynamics"};
  app.require_subcommand(1, 1);

  cli::Invocation inv;
  std::string config;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string engine;

  for (const auto& name : cli::command_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " study");
    sub->add_option("--config", config, "scenario JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out-dir", out_dir, "directory for <command>.csv and <command>.json")->required();
    sub->add_option("--seed", seed, "override the scenario seed");
    sub->add_option("--engine", engine, "override the engine")->check(CLI::IsMember({"full", "symmetric", "auto"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(cli::ExitCode::config_error);
  }

  inv.command = app.get_subcommands().front()->get_name();
  inv.config = config;
  inv.out_dir = out_dir;
  const auto* sub = app.get_subcommands().front();
  if (sub->count("--seed")) inv.seed = seed;
  if (sub->count("--engine")) inv.engine = parse_engine(engine);
  return static_cast<int>(cli::run(inv, std::cerr));
}
