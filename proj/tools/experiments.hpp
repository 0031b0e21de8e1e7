#pragma once

// Run configuration, compiled-in presets and the command implementations
// behind the nhring CLI.

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "nhring/dynamics.hpp"
#include "nhring/ring_model.hpp"

namespace nhring::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PotentialSpec {
  std::optional<ReferenceProfile> reference;  // v0, alpha
  std::map<int, Complex> coeffs;              // used when reference is empty

  RingPotential build() const;
};

struct FluxSpec {
  bool ramp = false;
  double f0 = 0.0;     // static
  double sigma = 0.0;  // ramp
  double tau0 = 0.0;

  FluxProgram build() const;
};

struct InitialSpec {
  enum class Kind { Delta, Gaussian, Amplitudes };
  Kind kind = Kind::Delta;
  int n0 = 0;
  double center = 0.0;  // c_n ~ exp(-(n - center)^2 / width^2)
  double width = 1.0;
  int n_first = 0;      // explicit amplitudes start here
  std::vector<Complex> amps;

  // Normalized state on a window wide enough to hold its support.
  WaveState build() const;
};

struct SpectrumSpec {
  int n_f = 101;
  std::pair<double, double> f_search{0.0, 1.0};
  double gap_tol = 1e-6;
  double vec_tol = 1e-4;
  int ep_scan = 201;
  int level_samples = 400;  // tau grid for ramped level diagrams
};

struct TransparencySpec {
  int M = -7;
  double T = 1200.0;
};

struct LzScanSpec {
  std::vector<double> sigmas;
  std::vector<double> v0s;     // defaults to the potential's v0
  std::vector<double> alphas;  // defaults to the potential's alpha
  int n = 0;
  double margin_scale = 200.0;
};

struct RunConfig {
  std::string name;
  PotentialSpec potential;
  FluxSpec flux;
  std::optional<ModeWindow> window;  // empty means "auto"
  InitialSpec initial;
  std::pair<double, double> tau_span{0.0, 2000.0};
  int samples = kDefaultSamples;
  int phi_samples = 128;
  PropagatorConfig propagator;
  std::vector<std::string> outputs{"trajectory", "wavefunction"};
  SpectrumSpec spectrum;
  std::optional<TransparencySpec> transparency;
  std::optional<LzScanSpec> lz_scan;
};

// Throws ConfigError with the offending key on malformed input.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

std::vector<std::string> preset_names();
// Throws ConfigError for unknown names.
RunConfig preset(std::string_view name);

// Parses "auto" or "lo,hi".
std::optional<ModeWindow> parse_window(std::string_view text);

struct CommandResult {
  nlohmann::json metrics = nlohmann::json::object();
  std::vector<std::string> files;
};

CommandResult cmd_spectrum(const RunConfig& cfg, const std::filesystem::path& out_dir);
CommandResult cmd_evolve(const RunConfig& cfg, const std::filesystem::path& out_dir);
CommandResult cmd_transparency(const RunConfig& cfg, const std::filesystem::path& out_dir);
CommandResult cmd_lz_scan(const RunConfig& cfg, const std::filesystem::path& out_dir);

// manifest.json: config echo, tool version, wall time, metrics, file list.
void write_manifest(const std::filesystem::path& out_dir, std::string_view command,
                    const RunConfig& cfg, const CommandResult& result, double wall_seconds);

inline constexpr std::string_view kToolVersion = NHRING_VERSION;

}  // namespace nhring::cli
