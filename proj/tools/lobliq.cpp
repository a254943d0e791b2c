#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "lobliq/config.hpp"
#include "lobliq/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Optimal limit-order liquidation: solvers, fluid limits, simulation and reports"};
  app.require_subcommand(1);
  app.set_version_flag("--version", lobliq::kVersion);

  std::string config_path;
  std::optional<std::string> out_dir, format;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<int> figure;

  for (const char* name : {"solve", "fluid", "converge", "simulate", "curves", "regimes", "exchanges", "figures"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "root seed for simulation");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--format", format, "csv, json or both")->check(CLI::IsMember({"csv", "json", "both"}));
    if (std::string(name) == "figures") sub->add_option("--figure", figure, "figure number 1-4")->check(CLI::Range(1, 4));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return lobliq::kExitConfig;
  }

  lobliq::RunConfig config;
  try {
    if (!config_path.empty()) config = lobliq::load_config(config_path);
  } catch (const lobliq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return lobliq::kExitConfig;
  }
  config.command = app.get_subcommands().front()->get_name();
  if (out_dir) config.output.dir = *out_dir;
  if (format) config.output.format = *format;
  if (seed) config.simulation.seed = *seed;
  if (threads) config.simulation.threads = *threads;
  if (figure) config.figure = *figure;

  const auto outcome = lobliq::run(config);
  if (outcome.exit_code != lobliq::kExitOk) {
    std::cerr << outcome.message << '\n';
    return outcome.exit_code;
  }
  for (const auto& f : outcome.files) std::cout << config.output.dir << '/' << f << '\n';
  return lobliq::kExitOk;
}
