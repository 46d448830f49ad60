#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <optional>

#include "commands.hpp"
#include "mfchain/types.hpp"

namespace mfchain::cli {

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mean-field controlled Markov chains: simulation, validation, adjoint solves"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;

  using Command = int (*)(const RunConfig&, ArtifactSet&, std::ostream&);
  const std::vector<std::tuple<std::string, std::string, Command>> commands = {
      {"simulate", "simulate paths under the controlled measure", cmd_simulate},
      {"validate", "run the invariant suite; exit 1 if any check fails", cmd_validate},
      {"riccati-table", "exit times of the constrained Riccati equation", cmd_riccati_table},
      {"solve", "coupled mean fixed point and adjoint sweep", cmd_solve},
      {"cost", "direct and reweighted cost estimates", cmd_cost},
  };
  for (const auto& [name, help, fn] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "master seed (overrides the config)");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  const auto* chosen = app.get_subcommands().front();
  try {
    RunConfig cfg = config_path.empty() ? parse_config(nlohmann::json::object()) : load_config(config_path);
    if (seed) cfg.seed = *seed;
    ArtifactSet artifacts(out_dir);
    Command fn = nullptr;
    for (const auto& [name, help, f] : commands)
      if (name == chosen->get_name()) fn = f;
    int code = fn(cfg, artifacts, out);
    artifacts.write_manifest(chosen->get_name(), cfg);
    return code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace mfchain::cli
