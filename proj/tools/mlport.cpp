// mlport command-line entry point: estimate | simulate | backtest.

#include "mlport/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

namespace {

std::string dashed(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return key;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Portfolio weight estimation with penalised regression"};
  app.require_subcommand(1);
  app.set_version_flag("--version", mlport::cli::kVersion);

  std::map<std::string, std::map<std::string, std::string>> flags;
  std::map<std::string, std::string> config_paths;
  for (const char* command : {"estimate", "simulate", "backtest"}) {
    auto* sub = app.add_subcommand(command);
    sub->add_option("--config", config_paths[command], "flat key = value settings file");
    for (const auto& key : mlport::cli::known_keys()) {
      sub->add_option("--" + dashed(key), flags[command][key]);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code != 0) {
      std::cerr << mlport::cli::error_record("ConfigError", e.what()).dump() << "\n";
      return 2;
    }
    return 0;
  }

  const auto* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  mlport::cli::Settings settings;
  try {
    const auto& path = config_paths[command];
    if (!path.empty()) settings = mlport::io::parse_config(mlport::io::read_file(path));
  } catch (const mlport::Error& e) {
    std::cerr << mlport::cli::error_record(e).dump() << "\n";
    return 2;
  }
  for (const auto& key : mlport::cli::known_keys()) {
    if (sub->count("--" + dashed(key)) > 0) settings[key] = flags[command][key];
  }
  return mlport::cli::run(command, settings);
}
