#include "pcno/cli/run_config.hpp"

#include <charconv>

#include "pcno/consistency/schedule.hpp"
#include "pcno/core/error.hpp"
#include "pcno/core/kv_text.hpp"
#include "pcno/solvers/dataset.hpp"
#include "pcno/surrogate/fno.hpp"
#include "pcno/surrogate/train.hpp"

namespace pcno::cli {

namespace {

std::string num(double v)
{
  return format_double(v);
}

std::string num(std::size_t v)
{
  return std::to_string(v);
}

std::string list(const std::vector<double>& v)
{
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out += (i ? "," : "") + format_double(v[i]);
  return out;
}

std::string sizes_text(const std::vector<std::size_t>& v)
{
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::vector<KeySpec> generate_keys()
{
  const KseConfig kse;
  const KolmogorovConfig kol;
  const SweDatasetConfig swe;
  return {
      {"kind", "kse", "solver: kse | kolmogorov | swe"},
      {"count", "4", "number of trajectories"},
      {"kse.points", num(kse.points), "grid points"},
      {"kse.length_min", num(kse.length_min), "domain length range"},
      {"kse.length_max", num(kse.length_max), ""},
      {"kse.dt_min", num(kse.dt_min), "recorded time step range"},
      {"kse.dt_max", num(kse.dt_max), ""},
      {"kse.nu", num(kse.nu), "viscosity"},
      {"kse.nu_random", "false", "draw the viscosity per trajectory"},
      {"kse.nu_min", num(kse.nu_min), ""},
      {"kse.nu_max", num(kse.nu_max), ""},
      {"kse.warmup", num(kse.warmup), "discarded steps"},
      {"kse.steps", num(kse.steps), "recorded steps"},
      {"kse.substeps", num(kse.substeps), "solver steps per recorded step"},
      {"kolmogorov.points", num(kol.points), "grid points per axis"},
      {"kolmogorov.nu", num(kol.nu), "viscosity"},
      {"kolmogorov.dt", num(kol.dt), "solver time step"},
      {"kolmogorov.forcing", num(kol.forcing), "forcing amplitude"},
      {"kolmogorov.frames", num(kol.frames), "recorded frames"},
      {"kolmogorov.record_every", num(kol.record_every), "solver steps between frames"},
      {"kolmogorov.warmup", num(kol.warmup), "discarded solver steps"},
      {"kolmogorov.tau", num(kol.tau), "initial field length scale"},
      {"kolmogorov.alpha", num(kol.alpha), "initial field smoothness"},
      {"kolmogorov.form", "velocity", "velocity | vorticity"},
      {"swe.nx", num(swe.nx), "cells along x"},
      {"swe.ny", num(swe.ny), "cells along y"},
      {"swe.dx", num(swe.solver.dx), "cell size (m)"},
      {"swe.terrain", to_string(swe.terrain), "flat | tilted | valley"},
      {"swe.slope", num(swe.slope), "terrain slope"},
      {"swe.rain_min", num(swe.rain_min), "rain rate range (mm/h)"},
      {"swe.rain_max", num(swe.rain_max), ""},
      {"swe.rain_duration", num(swe.rain_duration), "rain duration (s)"},
      {"swe.rainfall_interval", num(swe.solver.rainfall_interval), "rain rate interval (s)"},
      {"swe.duration", num(swe.solver.duration), "simulated time (s)"},
      {"swe.frame_interval", num(swe.solver.frame_interval), "time between frames (s)"},
      {"swe.manning", num(swe.solver.manning), "Manning roughness"},
      {"swe.cfl", num(swe.solver.cfl), "CFL number"},
      {"swe.infiltration", num(swe.solver.infiltration), "infiltration rate (m/s)"},
  };
}

std::vector<KeySpec> train_keys()
{
  const FnoHyper h;
  const TrainConfig t;
  return {
      {"dataset", "", "dataset directory"},
      {"model", "pcno", "fno | pcno | diffpcno | refiner"},
      {"trajectories", "0", "trajectories used, 0 for all"},
      {"strategy", to_string(t.strategy), "markov | one_shot"},
      {"t_in", "1", "input frames"},
      {"t_out", "10", "predicted frames (one_shot)"},
      {"layers", num(h.layers), "Fourier layers"},
      {"modes", sizes_text(h.modes), "retained modes per axis"},
      {"width", num(h.width), "channel width"},
      {"time_padding", "0", "zero frames on the time axis (one_shot)"},
      {"activation", to_string(h.activation), "gelu | identity"},
      {"selector", "auto", "projection: auto | none | mass | momentum | both"},
      {"mass_mode", "spatial2d", "spatial2d | spatiotemporal3d"},
      {"learnable_projection", "false", "learn the projection weights"},
      {"epochs", num(t.epochs), "passes over the samples"},
      {"batch", num(t.batch), "samples per step"},
      {"lr", num(t.lr), "peak learning rate"},
      {"weight_decay", num(t.weight_decay), "decoupled weight decay"},
      {"pcno", "", "frozen surrogate model (diffpcno, refiner)"},
      {"ct.steps", "1000", "consistency training steps"},
      {"ct.batch", "16", "consistency batch size"},
      {"ct.lr", "1e-4", "consistency learning rate"},
      {"ct.hidden", "64", "denoiser hidden width"},
      {"ct.embed", "8", "time embedding size"},
      {"ct.huber_c", "0", "pseudo-Huber constant, 0 for the default"},
      {"ct.s0", "10", "initial discretization"},
      {"ct.s1", "1280", "final discretization"},
  };
}

std::string time_points_text()
{
  return list(default_time_points());
}

std::vector<CommandSchema> build_schemas()
{
  return {
      {"generate", "Generate a reference dataset", generate_keys()},
      {"project",
       "Apply a conservation projection to a field file",
       {{"input", "", "input field"},
        {"selector", "mass", "none | mass | momentum | both"},
        {"mass_mode", "spatial2d", "spatial2d | spatiotemporal3d"},
        {"momentum.padding", "", "zero cells per axis, empty for the default"},
        {"w_inv.center", "1", "invariant stencil centre"},
        {"w_inv.edge", "0", "invariant stencil edge"},
        {"w_inv.corner", "0", "invariant stencil corner"}}},
      {"train", "Train a surrogate or a residual denoiser", train_keys()},
      {"rollout",
       "Autoregressive surrogate forecast",
       {{"model", "", "surrogate model"},
        {"init", "", "trajectory file or dataset directory"},
        {"start", "0", "first frame of the input window"},
        {"steps", "10", "forecast steps"}}},
      {"sample",
       "Sample one-step forecasts with a denoiser",
       {{"model", "", "denoiser model"},
        {"pcno", "", "frozen surrogate model"},
        {"init", "", "trajectory file"},
        {"start", "0", "first frame of the input window"},
        {"samples", "1", "number of samples"},
        {"time_points", time_points_text(), "descending sampling times"}}},
      {"uncertainty",
       "Ensemble mean and standard deviation of stochastic rollouts",
       {{"model", "", "denoiser or surrogate model"},
        {"pcno", "", "frozen surrogate model (denoiser only)"},
        {"init", "", "trajectory file"},
        {"start", "0", "first frame of the input window"},
        {"steps", "10", "forecast steps"},
        {"n_traj", "50", "ensemble size"},
        {"time_points", time_points_text(), "descending sampling times"}}},
      {"evaluate",
       "Score predicted trajectories against the truth",
       {{"pred", "", "directory of predicted trajectories"},
        {"truth", "", "dataset directory"},
        {"metrics", "nrmse,mse,pearson", "nrmse, mse, pearson, divergence, momentum, csi"},
        {"csi_thresholds", "0.05,0.5", "flood thresholds"},
        {"corr_thresholds", "0.9,0.8", "correlation horizons"},
        {"truth_offset", "0", "truth frame aligned with prediction step 0"}}},
  };
}

} // namespace

const std::vector<CommandSchema>& command_schemas()
{
  static const std::vector<CommandSchema> schemas = [] {
    auto s = build_schemas();
    for (auto& c : s)
      c.keys.insert(c.keys.begin(), {"seed", "0", "root random seed"});
    return s;
  }();
  return schemas;
}

const CommandSchema& schema_for(const std::string& command)
{
  for (const auto& s : command_schemas())
    if (s.name == command)
      return s;
  throw UsageError("unknown command '" + command + "'");
}

RunConfig::RunConfig(const CommandSchema& schema) : schema_(&schema)
{
  for (const auto& k : schema.keys)
    values_.push_back(k.default_value);
}

std::size_t RunConfig::index(const std::string& key) const
{
  for (std::size_t i = 0; i < schema_->keys.size(); ++i)
    if (schema_->keys[i].key == key)
      return i;
  throw UsageError("unknown configuration key '" + key + "' for command " + schema_->name);
}

void RunConfig::set(const std::string& key, const std::string& value)
{
  values_[index(key)] = trim(value);
}

void RunConfig::load_file(const std::filesystem::path& path)
{
  KvStanza kv;
  try {
    kv = parse_kv(read_text_file(path));
  } catch (const FormatError& e) {
    throw UsageError("cannot read config " + path.string() + ": " + e.what());
  }
  for (const auto& [key, value] : kv) {
    if (key == "command") {
      if (value != schema_->name)
        throw UsageError("config " + path.string() + " is for command '" + value + "', not '" + schema_->name + "'");
      continue;
    }
    set(key, value);
  }
}

const std::string& RunConfig::text(const std::string& key) const
{
  return values_[index(key)];
}

std::int64_t RunConfig::integer(const std::string& key) const
{
  try {
    return parse_int(text(key));
  } catch (const Error&) {
    throw UsageError("configuration key '" + key + "' needs an integer, got '" + text(key) + "'");
  }
}

std::size_t RunConfig::size(const std::string& key) const
{
  const auto v = integer(key);
  if (v < 0)
    throw UsageError("configuration key '" + key + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

double RunConfig::real(const std::string& key) const
{
  try {
    return parse_double(text(key));
  } catch (const Error&) {
    throw UsageError("configuration key '" + key + "' needs a number, got '" + text(key) + "'");
  }
}

bool RunConfig::flag(const std::string& key) const
{
  const auto& v = text(key);
  if (v == "true" || v == "1" || v == "yes")
    return true;
  if (v == "false" || v == "0" || v == "no")
    return false;
  throw UsageError("configuration key '" + key + "' needs true or false, got '" + v + "'");
}

std::vector<double> RunConfig::reals(const std::string& key) const
{
  if (text(key).empty())
    return {};
  try {
    return parse_double_list(text(key));
  } catch (const Error&) {
    throw UsageError("configuration key '" + key + "' needs a comma-separated number list");
  }
}

std::vector<std::size_t> RunConfig::sizes(const std::string& key) const
{
  std::vector<std::size_t> out;
  for (const auto& w : words(key)) {
    std::size_t v = 0;
    const auto [end, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc() || end != w.data() + w.size())
      throw UsageError("configuration key '" + key + "' needs a comma-separated list of counts");
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> RunConfig::words(const std::string& key) const
{
  std::vector<std::string> out;
  const std::string& v = text(key);
  std::size_t at = 0;
  while (at <= v.size() && !v.empty()) {
    const auto comma = v.find(',', at);
    const std::string w = trim(std::string_view(v).substr(at, comma == std::string::npos ? std::string::npos : comma - at));
    if (w.empty())
      throw UsageError("configuration key '" + key + "' has an empty list entry");
    out.push_back(w);
    if (comma == std::string::npos)
      break;
    at = comma + 1;
  }
  return out;
}

std::uint64_t RunConfig::seed() const
{
  const std::string& v = text("seed");
  std::uint64_t s = 0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
  if (ec != std::errc() || end != v.data() + v.size())
    throw UsageError("seed must be an unsigned 64-bit integer, got '" + v + "'");
  return s;
}

std::string RunConfig::snapshot() const
{
  KvStanza kv{{"command", schema_->name}};
  for (std::size_t i = 0; i < values_.size(); ++i)
    kv.emplace_back(schema_->keys[i].key, values_[i]);
  return format_kv_stanzas({kv});
}

} // namespace pcno::cli
