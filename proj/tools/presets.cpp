#include <algorithm>
#include <string>

#include "experiments.hpp"

namespace nhring::cli {
namespace {

struct PresetText {
  std::string_view name;
  std::string_view json;
};

// Kept as JSON so `preset dump` prints exactly what runs.
constexpr PresetText kPresets[] = {
    {"fig1b", R"({
      "name": "fig1b",
      "potential": {"v0": 0.08, "alpha": 0.0},
      "flux": {"kind": "ramp", "sigma": 0.003, "tau0": 0.0},
      "tau_span": [0.0, 2000.0],
      "spectrum": {"n_f": 101, "f_search": [0.0, 1.0], "level_samples": 400}
    })"},
    {"ep-alpha1", R"({
      "name": "ep-alpha1",
      "potential": {"v0": 0.02, "alpha": 1.0},
      "flux": {"kind": "static", "f": 0.0},
      "spectrum": {"n_f": 101, "f_search": [0.0, 2.0], "ep_scan": 401}
    })"},
    {"fig2a", R"({
      "name": "fig2a",
      "potential": {"v0": 0.08, "alpha": 0.0},
      "flux": {"kind": "ramp", "sigma": -0.003, "tau0": 0.0},
      "initial": {"kind": "delta", "n0": 0},
      "tau_span": [0.0, 2000.0]
    })"},
    {"fig2b", R"({
      "name": "fig2b",
      "potential": {"v0": 0.08, "alpha": 0.0},
      "flux": {"kind": "ramp", "sigma": 0.003, "tau0": 0.0},
      "initial": {"kind": "delta", "n0": 0},
      "tau_span": [0.0, 2000.0]
    })"},
    {"fig3a", R"({
      "name": "fig3a",
      "potential": {"v0": 0.08, "alpha": 0.3},
      "flux": {"kind": "ramp", "sigma": -0.003, "tau0": 0.0},
      "initial": {"kind": "delta", "n0": 0},
      "tau_span": [0.0, 2000.0]
    })"},
    {"fig3b", R"({
      "name": "fig3b",
      "potential": {"v0": 0.08, "alpha": 0.3},
      "flux": {"kind": "ramp", "sigma": 0.003, "tau0": 0.0},
      "initial": {"kind": "delta", "n0": 0},
      "tau_span": [0.0, 2000.0]
    })"},
    {"fig4a", R"({
      "name": "fig4a",
      "potential": {"v0": 0.02, "alpha": 1.0},
      "flux": {"kind": "ramp", "sigma": -0.003, "tau0": 0.0},
      "initial": {"kind": "delta", "n0": 0},
      "tau_span": [0.0, 2000.0]
    })"},
    {"fig4b", R"({
      "name": "fig4b",
      "potential": {"v0": 0.02, "alpha": 1.0},
      "flux": {"kind": "ramp", "sigma": 0.003, "tau0": 0.0},
      "initial": {"kind": "delta", "n0": 0},
      "tau_span": [0.0, 2000.0]
    })"},
    {"fig5", R"({
      "name": "fig5",
      "potential": {"v0": 0.02, "alpha": 1.0},
      "flux": {"kind": "ramp", "sigma": -0.003, "tau0": 0.0},
      "initial": {"kind": "gaussian", "center": -4.0, "width": 3.0},
      "tau_span": [0.0, 2000.0],
      "samples": 800,
      "transparency": {"M": -7, "T": 1200.0}
    })"},
    {"lz-scan", R"({
      "name": "lz-scan",
      "potential": {"v0": 0.08, "alpha": 0.0},
      "flux": {"kind": "ramp", "sigma": 0.003, "tau0": 0.0},
      "tau_span": [0.0, 2000.0],
      "lz_scan": {"sigma_range": [0.001, 0.05], "count": 12, "alphas": [0.0, 0.3], "n": 0}
    })"},
};

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& p : kPresets) out.emplace_back(p.name);
  return out;
}

RunConfig preset(std::string_view name) {
  const auto it = std::find_if(std::begin(kPresets), std::end(kPresets), [&](const auto& p) { return p.name == name; });
  if (it == std::end(kPresets)) {
    std::string known;
    for (const auto& p : kPresets) known += (known.empty() ? "" : ", ") + std::string(p.name);
    throw ConfigError("unknown preset '" + std::string(name) + "' (known: " + known + ")");
  }
  return parse_config(nlohmann::json::parse(it->json));
}

}  // namespace nhring::cli
