#include <chrono>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "experiments.hpp"
#include "nhring/errors.hpp"

namespace {

using namespace nhring;
using namespace nhring::cli;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct RunOptions {
  std::string config_path;
  std::string preset_name;
  std::string out_dir = "out";
  std::optional<std::string> window;
  std::optional<double> rtol;
  std::optional<double> atol;
  std::optional<int> samples;
};

void add_run_options(CLI::App* sub, RunOptions& o) {
  auto* cfg = sub->add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  auto* pre = sub->add_option("--preset", o.preset_name, "compiled-in configuration");
  cfg->excludes(pre);
  sub->add_option("--out", o.out_dir, "output directory")->capture_default_str();
  sub->add_option("--window", o.window, "mode window: auto or lo,hi");
  sub->add_option("--rtol", o.rtol, "relative tolerance");
  sub->add_option("--atol", o.atol, "absolute tolerance");
  sub->add_option("--samples", o.samples, "number of output time samples");
}

RunConfig resolve(const RunOptions& o) {
  if (o.config_path.empty() && o.preset_name.empty()) throw ConfigError("give --config <path> or --preset <name>");
  RunConfig cfg = o.config_path.empty() ? preset(o.preset_name) : load_config(o.config_path);
  if (o.window) cfg.window = parse_window(*o.window);
  if (o.rtol) cfg.propagator.rtol = *o.rtol;
  if (o.atol) cfg.propagator.atol = *o.atol;
  if (o.samples) cfg.samples = *o.samples;
  // Re-validate after overrides.
  return parse_config(to_json(cfg));
}

using Command = std::function<CommandResult(const RunConfig&, const std::filesystem::path&)>;

int run(std::string_view name, const Command& command, const RunOptions& o) {
  const RunConfig cfg = resolve(o);
  const auto start = std::chrono::steady_clock::now();
  const CommandResult result = command(cfg, o.out_dir);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(o.out_dir, name, cfg, result, wall);
  std::cout << result.metrics.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flux-driven ring with a complex periodic potential: spectra, dynamics and Landau-Zener analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  RunOptions spectrum_opts;
  RunOptions evolve_opts;
  RunOptions transparency_opts;
  RunOptions lz_opts;
  auto* spectrum = app.add_subcommand("spectrum", "band structure, exceptional points and level diagrams");
  auto* evolve = app.add_subcommand("evolve", "time evolution under the configured flux program");
  auto* transparency = app.add_subcommand("transparency", "delayed-transparency protocol with a switched-off twin run");
  auto* lz_scan = app.add_subcommand("lz-scan", "two-level Zener probabilities against the closed form");
  add_run_options(spectrum, spectrum_opts);
  add_run_options(evolve, evolve_opts);
  add_run_options(transparency, transparency_opts);
  add_run_options(lz_scan, lz_opts);

  auto* preset_cmd = app.add_subcommand("preset", "inspect compiled-in configurations");
  preset_cmd->require_subcommand(1);
  std::string dump_name;
  auto* dump = preset_cmd->add_subcommand("dump", "print a preset as JSON");
  dump->add_option("name", dump_name, "preset name")->required();
  auto* list = preset_cmd->add_subcommand("list", "list preset names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (spectrum->parsed()) return run("spectrum", cmd_spectrum, spectrum_opts);
    if (evolve->parsed()) return run("evolve", cmd_evolve, evolve_opts);
    if (transparency->parsed()) return run("transparency", cmd_transparency, transparency_opts);
    if (lz_scan->parsed()) return run("lz-scan", cmd_lz_scan, lz_opts);
    if (dump->parsed()) {
      std::cout << to_json(preset(dump_name)).dump(2) << '\n';
      return 0;
    }
    if (list->parsed()) {
      for (const auto& n : preset_names()) std::cout << n << '\n';
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidParameter& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const BracketInvalid& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
