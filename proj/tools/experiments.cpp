#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <sstream>

#include "nhring/csv.hpp"
#include "nhring/errors.hpp"
#include "nhring/lz_analysis.hpp"
#include "nhring/spectrum.hpp"

namespace nhring::cli {
namespace {

using nlohmann::json;

const ModeWindow kSpectralWindow(-16, 16);

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& ctx) {
  if (!obj.is_object()) throw ConfigError(ctx + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(ctx + ": unknown key '" + key + "'");
    }
  }
}

template <class T>
T read(const json& obj, std::string_view key, const std::string& ctx) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(ctx + ": missing key '" + std::string(key) + "'");
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(ctx + "." + std::string(key) + ": " + e.what());
  }
}

template <class T>
T read_or(const json& obj, std::string_view key, T fallback, const std::string& ctx) {
  return obj.contains(key) ? read<T>(obj, key, ctx) : fallback;
}

std::pair<double, double> read_pair(const json& obj, std::string_view key, const std::string& ctx) {
  const auto v = read<std::vector<double>>(obj, key, ctx);
  if (v.size() != 2) throw ConfigError(ctx + "." + std::string(key) + ": expected [lo, hi]");
  return {v[0], v[1]};
}

PotentialSpec parse_potential(const json& j) {
  const std::string ctx = "potential";
  check_keys(j, {"v0", "alpha", "coeffs"}, ctx);
  PotentialSpec spec;
  if (j.contains("coeffs")) {
    if (j.contains("v0") || j.contains("alpha")) throw ConfigError(ctx + ": give either v0/alpha or coeffs");
    for (const auto& c : j.at("coeffs")) {
      check_keys(c, {"q", "re", "im"}, ctx + ".coeffs[]");
      spec.coeffs[read<int>(c, "q", ctx)] = {read_or<double>(c, "re", 0.0, ctx), read_or<double>(c, "im", 0.0, ctx)};
    }
  } else {
    spec.reference = ReferenceProfile{read<double>(j, "v0", ctx), read_or<double>(j, "alpha", 0.0, ctx)};
  }
  return spec;
}

FluxSpec parse_flux(const json& j) {
  const std::string ctx = "flux";
  check_keys(j, {"kind", "f", "sigma", "tau0"}, ctx);
  FluxSpec spec;
  const auto kind = read<std::string>(j, "kind", ctx);
  if (kind == "static") {
    spec.ramp = false;
    spec.f0 = read<double>(j, "f", ctx);
  } else if (kind == "ramp") {
    spec.ramp = true;
    spec.sigma = read<double>(j, "sigma", ctx);
    spec.tau0 = read_or<double>(j, "tau0", 0.0, ctx);
  } else {
    throw ConfigError(ctx + ".kind: expected 'static' or 'ramp', got '" + kind + "'");
  }
  return spec;
}

InitialSpec parse_initial(const json& j) {
  const std::string ctx = "initial";
  check_keys(j, {"kind", "n0", "center", "width", "n_first", "re", "im"}, ctx);
  InitialSpec spec;
  const auto kind = read<std::string>(j, "kind", ctx);
  if (kind == "delta") {
    spec.kind = InitialSpec::Kind::Delta;
    spec.n0 = read<int>(j, "n0", ctx);
  } else if (kind == "gaussian") {
    spec.kind = InitialSpec::Kind::Gaussian;
    spec.center = read<double>(j, "center", ctx);
    spec.width = read<double>(j, "width", ctx);
    if (!(spec.width > 0.0)) throw ConfigError(ctx + ".width must be positive");
  } else if (kind == "amplitudes") {
    spec.kind = InitialSpec::Kind::Amplitudes;
    spec.n_first = read<int>(j, "n_first", ctx);
    const auto re = read<std::vector<double>>(j, "re", ctx);
    const auto im = read_or<std::vector<double>>(j, "im", std::vector<double>(re.size(), 0.0), ctx);
    if (re.empty() || re.size() != im.size()) throw ConfigError(ctx + ": re/im must be non-empty and equally long");
    for (std::size_t k = 0; k < re.size(); ++k) spec.amps.emplace_back(re[k], im[k]);
  } else {
    throw ConfigError(ctx + ".kind: expected 'delta', 'gaussian' or 'amplitudes', got '" + kind + "'");
  }
  return spec;
}

LzScanSpec parse_lz_scan(const json& j) {
  const std::string ctx = "lz_scan";
  check_keys(j, {"sigmas", "sigma_range", "count", "v0s", "alphas", "n", "margin_scale"}, ctx);
  LzScanSpec spec;
  if (j.contains("sigmas")) {
    spec.sigmas = read<std::vector<double>>(j, "sigmas", ctx);
  } else {
    // Log-spaced between the endpoints.
    const auto [lo, hi] = read_pair(j, "sigma_range", ctx);
    const int count = read<int>(j, "count", ctx);
    if (!(lo > 0.0 && hi > lo) || count < 2) throw ConfigError(ctx + ": need 0 < lo < hi and count >= 2");
    for (int k = 0; k < count; ++k) spec.sigmas.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (count - 1)));
  }
  if (spec.sigmas.empty()) throw ConfigError(ctx + ": empty sigma grid");
  spec.v0s = read_or<std::vector<double>>(j, "v0s", {}, ctx);
  spec.alphas = read_or<std::vector<double>>(j, "alphas", {}, ctx);
  spec.n = read_or<int>(j, "n", 0, ctx);
  spec.margin_scale = read_or<double>(j, "margin_scale", 200.0, ctx);
  return spec;
}

json window_json(const std::optional<ModeWindow>& w) {
  if (!w) return "auto";
  return json::array({w->n_min(), w->n_max()});
}

json window_json(const ModeWindow& w) { return json::array({w.n_min(), w.n_max()}); }

std::ofstream open_output(const std::filesystem::path& out_dir, const std::string& name, CommandResult& result) {
  std::ofstream os(out_dir / name, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + (out_dir / name).string() + " for writing");
  result.files.push_back(name);
  return os;
}

bool wants(const RunConfig& cfg, std::string_view what) {
  return std::find(cfg.outputs.begin(), cfg.outputs.end(), what) != cfg.outputs.end();
}

std::vector<double> phi_grid(int count) {
  std::vector<double> phis(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) phis[static_cast<std::size_t>(j)] = 2.0 * std::numbers::pi * j / count;
  return phis;
}

// Initial state on the run window, rejecting windows that cut its support.
WaveState initial_on_run_window(const RunConfig& cfg, const FluxProgram& flux, ModeWindow* window_out) {
  const WaveState wide = cfg.initial.build();
  const ModeWindow window = cfg.window ? *cfg.window : auto_window(wide, flux, cfg.tau_span);
  WaveState init = wide.on_window(window);
  if (init.norm2() < (1.0 - 1e-10) * wide.norm2()) {
    throw ConfigError("window [" + std::to_string(window.n_min()) + ", " + std::to_string(window.n_max()) +
                      "] cuts off part of the initial state; widen it or use \"auto\"");
  }
  *window_out = window;
  return init;
}

json mode_maxima(const Trajectory& traj) {
  json out = json::object();
  const ModeWindow w = traj.window();
  for (int n = w.n_min(); n <= w.n_max(); ++n) {
    double m = 0.0;
    for (const auto& s : traj.states) m = std::max(m, std::abs(s.amp(n)));
    out[std::to_string(n)] = m;
  }
  return out;
}

}  // namespace

RingPotential PotentialSpec::build() const {
  if (reference) return make_reference_potential(reference->v0, reference->alpha);
  return RingPotential::from_coeffs(coeffs);
}

FluxProgram FluxSpec::build() const { return ramp ? FluxProgram::ramp(sigma, tau0) : FluxProgram::constant(f0); }

WaveState InitialSpec::build() const {
  switch (kind) {
    case Kind::Delta:
      return WaveState::delta(ModeWindow(n0 - 3, n0 + 3), n0);
    case Kind::Gaussian: {
      const int reach = static_cast<int>(std::ceil(6.0 * width)) + 3;
      const int c = static_cast<int>(std::lround(center));
      const ModeWindow w(c - reach, c + reach);
      Eigen::VectorXcd a(w.size());
      for (int n = w.n_min(); n <= w.n_max(); ++n) {
        const double d = (n - center) / width;
        a[w.index(n)] = std::exp(-d * d);
      }
      a /= a.norm();
      return WaveState(0.0, w, std::move(a));
    }
    case Kind::Amplitudes: {
      const int n_last = n_first + static_cast<int>(amps.size()) - 1;
      const ModeWindow w(n_first - 1, std::max(n_last + 1, n_first + 1));
      Eigen::VectorXcd a = Eigen::VectorXcd::Zero(w.size());
      for (std::size_t k = 0; k < amps.size(); ++k) a[w.index(n_first + static_cast<int>(k))] = amps[k];
      const double norm = a.norm();
      if (!(norm > 0.0)) throw ConfigError("initial amplitudes are all zero");
      a /= norm;
      return WaveState(0.0, w, std::move(a));
    }
  }
  throw ConfigError("unhandled initial state kind");
}

RunConfig parse_config(const json& doc) {
  check_keys(doc, {"name", "potential", "flux", "window", "initial", "tau_span", "samples", "phi_samples",
                   "propagator", "outputs", "spectrum", "transparency", "lz_scan"},
             "config");
  RunConfig cfg;
  try {
    cfg.name = read_or<std::string>(doc, "name", "", "config");
    cfg.potential = parse_potential(doc.at("potential"));
    if (doc.contains("flux")) cfg.flux = parse_flux(doc.at("flux"));
    if (doc.contains("window")) {
      const auto& w = doc.at("window");
      if (w.is_string()) {
        cfg.window = parse_window(w.get<std::string>());
      } else {
        const auto v = read<std::vector<int>>(doc, "window", "config");
        if (v.size() != 2) throw ConfigError("config.window: expected \"auto\" or [n_min, n_max]");
        cfg.window = ModeWindow(v[0], v[1]);
      }
    }
    if (doc.contains("initial")) cfg.initial = parse_initial(doc.at("initial"));
    if (doc.contains("tau_span")) cfg.tau_span = read_pair(doc, "tau_span", "config");
    cfg.samples = read_or<int>(doc, "samples", cfg.samples, "config");
    cfg.phi_samples = read_or<int>(doc, "phi_samples", cfg.phi_samples, "config");
    if (doc.contains("propagator")) {
      const auto& pj = doc.at("propagator");
      check_keys(pj, {"rtol", "atol", "max_step", "boundary_guard"}, "propagator");
      auto& pc = cfg.propagator;
      pc.rtol = read_or<double>(pj, "rtol", pc.rtol, "propagator");
      pc.atol = read_or<double>(pj, "atol", pc.atol, "propagator");
      pc.max_step = read_or<double>(pj, "max_step", pc.max_step, "propagator");
      pc.boundary_guard = read_or<double>(pj, "boundary_guard", pc.boundary_guard, "propagator");
    }
    if (doc.contains("outputs")) cfg.outputs = read<std::vector<std::string>>(doc, "outputs", "config");
    if (doc.contains("spectrum")) {
      const auto& sj = doc.at("spectrum");
      check_keys(sj, {"n_f", "f_search", "gap_tol", "vec_tol", "ep_scan", "level_samples"}, "spectrum");
      auto& s = cfg.spectrum;
      s.n_f = read_or<int>(sj, "n_f", s.n_f, "spectrum");
      if (sj.contains("f_search")) s.f_search = read_pair(sj, "f_search", "spectrum");
      s.gap_tol = read_or<double>(sj, "gap_tol", s.gap_tol, "spectrum");
      s.vec_tol = read_or<double>(sj, "vec_tol", s.vec_tol, "spectrum");
      s.ep_scan = read_or<int>(sj, "ep_scan", s.ep_scan, "spectrum");
      s.level_samples = read_or<int>(sj, "level_samples", s.level_samples, "spectrum");
    }
    if (doc.contains("transparency")) {
      const auto& tj = doc.at("transparency");
      check_keys(tj, {"M", "T"}, "transparency");
      cfg.transparency = TransparencySpec{read<int>(tj, "M", "transparency"), read<double>(tj, "T", "transparency")};
    }
    if (doc.contains("lz_scan")) cfg.lz_scan = parse_lz_scan(doc.at("lz_scan"));
    cfg.propagator.validate();
    (void)cfg.potential.build();
    (void)cfg.flux.build();
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what());
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  }
  if (!(cfg.tau_span.second > cfg.tau_span.first)) throw ConfigError("config.tau_span: need start < end");
  if (cfg.samples < 2) throw ConfigError("config.samples must be >= 2");
  if (cfg.phi_samples < 1) throw ConfigError("config.phi_samples must be >= 1");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& cfg) {
  json j;
  if (!cfg.name.empty()) j["name"] = cfg.name;
  if (cfg.potential.reference) {
    j["potential"] = {{"v0", cfg.potential.reference->v0}, {"alpha", cfg.potential.reference->alpha}};
  } else {
    json coeffs = json::array();
    for (const auto& [q, u] : cfg.potential.coeffs) coeffs.push_back({{"q", q}, {"re", u.real()}, {"im", u.imag()}});
    j["potential"] = {{"coeffs", coeffs}};
  }
  if (cfg.flux.ramp) {
    j["flux"] = {{"kind", "ramp"}, {"sigma", cfg.flux.sigma}, {"tau0", cfg.flux.tau0}};
  } else {
    j["flux"] = {{"kind", "static"}, {"f", cfg.flux.f0}};
  }
  j["window"] = window_json(cfg.window);
  switch (cfg.initial.kind) {
    case InitialSpec::Kind::Delta:
      j["initial"] = {{"kind", "delta"}, {"n0", cfg.initial.n0}};
      break;
    case InitialSpec::Kind::Gaussian:
      j["initial"] = {{"kind", "gaussian"}, {"center", cfg.initial.center}, {"width", cfg.initial.width}};
      break;
    case InitialSpec::Kind::Amplitudes: {
      std::vector<double> re;
      std::vector<double> im;
      for (const auto& a : cfg.initial.amps) {
        re.push_back(a.real());
        im.push_back(a.imag());
      }
      j["initial"] = {{"kind", "amplitudes"}, {"n_first", cfg.initial.n_first}, {"re", re}, {"im", im}};
      break;
    }
  }
  j["tau_span"] = {cfg.tau_span.first, cfg.tau_span.second};
  j["samples"] = cfg.samples;
  j["phi_samples"] = cfg.phi_samples;
  j["propagator"] = {{"rtol", cfg.propagator.rtol},
                     {"atol", cfg.propagator.atol},
                     {"max_step", cfg.propagator.max_step},
                     {"boundary_guard", cfg.propagator.boundary_guard}};
  j["outputs"] = cfg.outputs;
  j["spectrum"] = {{"n_f", cfg.spectrum.n_f},
                   {"f_search", {cfg.spectrum.f_search.first, cfg.spectrum.f_search.second}},
                   {"gap_tol", cfg.spectrum.gap_tol},
                   {"vec_tol", cfg.spectrum.vec_tol},
                   {"ep_scan", cfg.spectrum.ep_scan},
                   {"level_samples", cfg.spectrum.level_samples}};
  if (cfg.transparency) j["transparency"] = {{"M", cfg.transparency->M}, {"T", cfg.transparency->T}};
  if (cfg.lz_scan) {
    j["lz_scan"] = {{"sigmas", cfg.lz_scan->sigmas}, {"n", cfg.lz_scan->n}, {"margin_scale", cfg.lz_scan->margin_scale}};
    if (!cfg.lz_scan->v0s.empty()) j["lz_scan"]["v0s"] = cfg.lz_scan->v0s;
    if (!cfg.lz_scan->alphas.empty()) j["lz_scan"]["alphas"] = cfg.lz_scan->alphas;
  }
  return j;
}

std::optional<ModeWindow> parse_window(std::string_view text) {
  if (text == "auto") return std::nullopt;
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) throw ConfigError("window: expected \"auto\" or \"lo,hi\"");
  try {
    const int lo = std::stoi(std::string(text.substr(0, comma)));
    const int hi = std::stoi(std::string(text.substr(comma + 1)));
    return ModeWindow(lo, hi);
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what());
  } catch (const std::exception&) {
    throw ConfigError("window: cannot parse '" + std::string(text) + "'");
  }
}

CommandResult cmd_spectrum(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  CommandResult result;
  const RingPotential p = cfg.potential.build();
  const ModeWindow window = cfg.window.value_or(kSpectralWindow);
  const auto& spec = cfg.spectrum;

  const double drift = window_drift(p, 0.25, window);
  result.metrics["window"] = window_json(window);
  result.metrics["window_drift"] = drift;
  if (!(drift < 1e-8)) {
    std::ostringstream msg;
    msg << "spectrum not converged on window [" << window.n_min() << ", " << window.n_max()
        << "]: doubling it moves the lowest bands by " << drift << " (limit 1e-8)";
    throw SolverFailure(msg.str());
  }

  const BandStructure bands = band_sweep(p, window, spec.n_f);
  {
    auto os = open_output(out_dir, "bands.csv", result);
    write_bands_csv(os, bands);
  }
  result.metrics["max_im"] = bands.max_im;
  result.metrics["tracking_flags"] = bands.flags.size();

  EPSearchOptions ep_opts;
  ep_opts.n_scan = spec.ep_scan;
  const auto eps = locate_exceptional_points(p, window, spec.f_search, spec.gap_tol, spec.vec_tol, ep_opts);
  {
    auto os = open_output(out_dir, "eps.csv", result);
    write_ep_csv(os, eps);
  }
  json ep_list = json::array();
  for (const auto& e : eps) {
    ep_list.push_back({{"f_star", e.f_star},
                       {"pair", {e.pair.first, e.pair.second}},
                       {"gap", e.gap},
                       {"coalescence_metric", e.coalescence_metric}});
  }
  result.metrics["exceptional_points"] = ep_list;

  if (cfg.flux.ramp) {
    // Diabatic parabolas (n - f(tau))^2 next to the instantaneous eigenvalues.
    const FluxProgram flux = cfg.flux.build();
    const auto taus = uniform_samples(cfg.tau_span, spec.level_samples);
    auto os = open_output(out_dir, "levels.csv", result);
    os << "tau,kind,level,re_E,im_E\n";
    for (const double tau : taus) {
      const double f = flux.at(tau);
      for (int n = window.n_min(); n <= window.n_max(); ++n) csv::row(os, tau, "diabatic", n, free_energy(n, f), 0.0);
      const auto sol = eigensolve(build_hamiltonian(p, f, window));
      for (Eigen::Index k = 0; k < sol.eigenvalues.size(); ++k) {
        csv::row(os, tau, "adiabatic", static_cast<int>(k), sol.eigenvalues[k].real(), sol.eigenvalues[k].imag());
      }
    }
  }
  return result;
}

CommandResult cmd_evolve(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  CommandResult result;
  const RingPotential p = cfg.potential.build();
  const FluxProgram flux = cfg.flux.build();
  ModeWindow window(0, 2);
  const WaveState init = initial_on_run_window(cfg, flux, &window);

  const Trajectory traj = evolve(p, flux, window, init, cfg.tau_span, cfg.propagator, cfg.samples);

  if (wants(cfg, "trajectory")) {
    auto os = open_output(out_dir, "trajectory.csv", result);
    write_trajectory_csv(os, traj);
  }
  if (wants(cfg, "wavefunction")) {
    auto os = open_output(out_dir, "wavefunction.csv", result);
    const auto phis = phi_grid(cfg.phi_samples);
    write_wavefunction_csv(os, traj, phis);
  }

  double drift = 0.0;
  for (const double n : traj.norms) drift = std::max(drift, std::abs(n - traj.norms.front()));
  result.metrics["window"] = window_json(window);
  result.metrics["norm_initial"] = traj.norms.front();
  result.metrics["norm_final"] = traj.norms.back();
  result.metrics["max_norm_drift"] = drift;
  result.metrics["max_boundary_fraction"] = traj.max_boundary_fraction;
  result.metrics["mean_winding_final"] = traj.mean_winding.back();
  result.metrics["max_abs_c"] = mode_maxima(traj);
  return result;
}

CommandResult cmd_transparency(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  if (!cfg.transparency) throw ConfigError("transparency: missing 'transparency' block with M and T");
  if (!cfg.flux.ramp) throw ConfigError("transparency: needs a ramped flux");
  TransparencyPlan plan{};
  try {
    plan = plan_transparency(cfg.transparency->M, cfg.flux.sigma, cfg.transparency->T);
  } catch (const InvalidParameter& e) {
    throw ConfigError(std::string("transparency: ") + e.what());
  }
  if (!(plan.T > cfg.tau_span.first && plan.T < cfg.tau_span.second)) {
    throw ConfigError("transparency: target delay T must lie strictly inside tau_span");
  }
  std::filesystem::create_directories(out_dir);
  CommandResult result;

  const RingPotential p = cfg.potential.build();
  const FluxProgram flux = FluxProgram::ramp(plan.sigma, plan.tau0);
  ModeWindow window(0, 2);
  const WaveState init = initial_on_run_window(cfg, flux, &window);

  auto times = uniform_samples(cfg.tau_span, cfg.samples);
  if (std::find(times.begin(), times.end(), plan.T) == times.end()) {
    times.insert(std::upper_bound(times.begin(), times.end(), plan.T), plan.T);
  }
  const auto k_t = static_cast<std::size_t>(std::find(times.begin(), times.end(), plan.T) - times.begin());

  const Trajectory full = evolve(p, flux, window, init, std::span<const double>(times), cfg.propagator);
  const std::span<const double> late(times.data() + k_t, times.size() - k_t);
  const Trajectory off = evolve(RingPotential{}, flux, window, full.states[k_t], late, cfg.propagator);

  Trajectory switched;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto& src = k < k_t ? full : off;
    const std::size_t i = k < k_t ? k : k - k_t;
    switched.times.push_back(times[k]);
    switched.states.push_back(src.states[i]);
    switched.norms.push_back(src.norms[i]);
    switched.mean_winding.push_back(src.mean_winding[i]);
  }
  switched.max_boundary_fraction = std::max(full.max_boundary_fraction, off.max_boundary_fraction);

  double frozen = 0.0;
  for (std::size_t k = k_t + 1; k < times.size(); ++k) {
    for (int n = window.n_min(); n <= window.n_max(); ++n) {
      frozen = std::max(frozen, std::abs(std::abs(full.states[k].amp(n)) - std::abs(full.states[k_t].amp(n))));
    }
  }

  const double origin[] = {0.0};
  double peak = 0.0;
  double max_diff = 0.0;
  {
    auto os = open_output(out_dir, "psi0_overlap.csv", result);
    os << "tau,re_psi0_full,re_psi0_switched\n";
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double a = reconstruct_wavefunction(full.states[k], origin)[0].real();
      const double b = reconstruct_wavefunction(switched.states[k], origin)[0].real();
      csv::row(os, times[k], a, b);
      if (k >= k_t) {
        peak = std::max(peak, std::abs(a));
        max_diff = std::max(max_diff, std::abs(a - b));
      }
    }
  }

  if (wants(cfg, "trajectory")) {
    auto os_full = open_output(out_dir, "trajectory_full.csv", result);
    write_trajectory_csv(os_full, full);
    auto os_sw = open_output(out_dir, "trajectory_switched.csv", result);
    write_trajectory_csv(os_sw, switched);
  }
  if (wants(cfg, "wavefunction")) {
    const auto phis = phi_grid(cfg.phi_samples);
    auto os_full = open_output(out_dir, "wavefunction_full.csv", result);
    write_wavefunction_csv(os_full, full, phis);
    auto os_sw = open_output(out_dir, "wavefunction_switched.csv", result);
    write_wavefunction_csv(os_sw, switched, phis);
  }

  result.metrics["plan"] = {{"M", plan.M}, {"sigma", plan.sigma}, {"tau0", plan.tau0}, {"T", plan.T}};
  result.metrics["window"] = window_json(window);
  result.metrics["frozen_metric"] = frozen;
  result.metrics["psi0_peak_after_T"] = peak;
  result.metrics["psi0_max_diff_after_T"] = max_diff;
  result.metrics["psi0_diff_ratio"] = peak > 0.0 ? max_diff / peak : 0.0;
  result.metrics["max_boundary_fraction"] = switched.max_boundary_fraction;
  result.metrics["norm_final"] = full.norms.back();
  return result;
}

CommandResult cmd_lz_scan(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  if (!cfg.lz_scan) throw ConfigError("lz-scan: missing 'lz_scan' block");
  if (!cfg.potential.reference) throw ConfigError("lz-scan: needs a reference potential (v0, alpha)");
  const auto& scan = *cfg.lz_scan;
  const std::vector<double> v0s = scan.v0s.empty() ? std::vector<double>{cfg.potential.reference->v0} : scan.v0s;
  const std::vector<double> alphas =
      scan.alphas.empty() ? std::vector<double>{cfg.potential.reference->alpha} : scan.alphas;
  for (const double a : alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("lz-scan: alphas must lie in [0, 1] (formula invalid above 1)");
  }
  std::filesystem::create_directories(out_dir);
  CommandResult result;

  double worst = 0.0;
  std::size_t rows = 0;
  {
    auto os = open_output(out_dir, "lz_scan.csv", result);
    os << "sigma,v0,alpha,S1,S2,S_eff,x,p_theory,p_numeric,rel_err\n";
    for (const double v0 : v0s) {
      for (const double alpha : alphas) {
        for (const double sigma : scan.sigmas) {
          const double s1 = v0 * (1.0 + alpha);
          const double s2 = v0 * (1.0 - alpha);
          const double s_eff = std::sqrt(s1 * s2);
          const double x = std::numbers::pi * s1 * s2 / std::abs(sigma);
          const double p_theory = lz_probability(s1, s2, sigma);
          const auto c = two_level_lz(s1, s2, scan.n, sigma, crossing_span(scan.n, sigma, scan.margin_scale),
                                      {Complex{1.0}, Complex{}}, cfg.propagator);
          // Undo the gauge factor (S1/S2)^{1/2} carried by the upper level.
          double p_numeric = std::norm(c[1]);
          if (s1 > 0.0 && s2 > 0.0) p_numeric *= s2 / s1;
          const double rel = p_theory > 0.0 ? std::abs(p_numeric - p_theory) / p_theory : std::abs(p_numeric - p_theory);
          csv::row(os, sigma, v0, alpha, s1, s2, s_eff, x, p_theory, p_numeric, rel);
          ++rows;
          if (x >= 0.4 && x <= 20.0) worst = std::max(worst, rel);
        }
      }
    }
  }
  result.metrics["rows"] = rows;
  result.metrics["max_rel_err_in_range"] = worst;

  if (cfg.flux.ramp) {
    const double sigma = cfg.flux.sigma;
    const double s1 = v0s.front() * (1.0 + alphas.front());
    const double s2 = v0s.front() * (1.0 - alphas.front());
    // n with tau_n = (2n + 1) / (2 sigma) inside tau_span
    const double a = (2.0 * sigma * cfg.tau_span.first - 1.0) / 2.0;
    const double b = (2.0 * sigma * cfg.tau_span.second - 1.0) / 2.0;
    const int n_first = static_cast<int>(std::ceil(std::min(a, b)));
    const int n_last = static_cast<int>(std::floor(std::max(a, b)));
    if (n_first <= n_last) {
      auto os = open_output(out_dir, "crossings.csv", result);
      write_crossings_csv(os, crossing_times(sigma, n_first, n_last, s1, s2));
    }
  }
  return result;
}

void write_manifest(const std::filesystem::path& out_dir, std::string_view command, const RunConfig& cfg,
                    const CommandResult& result, double wall_seconds) {
  json manifest;
  manifest["command"] = command;
  manifest["tool_version"] = kToolVersion;
  manifest["config"] = to_json(cfg);
  manifest["wall_time_s"] = wall_seconds;
  manifest["metrics"] = result.metrics;
  manifest["files"] = result.files;
  std::ofstream os(out_dir / "manifest.json");
  if (!os) throw std::runtime_error("cannot write manifest.json");
  os << manifest.dump(2) << '\n';
}

}  // namespace nhring::cli
