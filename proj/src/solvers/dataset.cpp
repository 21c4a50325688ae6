#include "pcno/solvers/dataset.hpp"

#include "pcno/core/parallel.hpp"
#include "pcno/spectral/fld_io.hpp"

namespace pcno {

SolverKind parse_solver_kind(const std::string& name)
{
  if (name == "kse")
    return SolverKind::kse;
  if (name == "kolmogorov")
    return SolverKind::kolmogorov;
  if (name == "swe")
    return SolverKind::swe;
  throw UsageError("unknown dataset kind '" + name + "' (kse|kolmogorov|swe)");
}

std::string to_string(SolverKind kind)
{
  switch (kind) {
  case SolverKind::kse: return "kse";
  case SolverKind::kolmogorov: return "kolmogorov";
  case SolverKind::swe: return "swe";
  }
  return "kse";
}

namespace {

std::string str(std::size_t v)
{
  return std::to_string(v);
}

Trajectory kse_trajectory(const KseConfig& cfg, Rng& rng, KvStanza params)
{
  const auto sample = sample_kse(cfg, rng);
  params.insert(params.end(), {{"L", format_double(sample.length)},
                               {"dt", format_double(sample.dt)},
                               {"nu", format_double(sample.nu)},
                               {"N", str(cfg.points)},
                               {"warmup", str(cfg.warmup)},
                               {"steps", str(cfg.steps)},
                               {"substeps", str(cfg.substeps)}});
  return {std::move(params), solve_kse(cfg, sample)};
}

Trajectory kolmogorov_trajectory(const KolmogorovConfig& cfg, Rng& rng, KvStanza params)
{
  const auto w0 = kolmogorov_initial(cfg, rng);
  auto result = solve_kolmogorov(cfg, w0);
  params.insert(params.end(), {{"N", str(cfg.points)},
                               {"nu", format_double(cfg.nu)},
                               {"dt", format_double(cfg.dt)},
                               {"frame_dt", format_double(cfg.dt * static_cast<double>(cfg.record_every))},
                               {"forcing", format_double(cfg.forcing)},
                               {"frames", str(cfg.frames)},
                               {"record_every", str(cfg.record_every)},
                               {"warmup", str(cfg.warmup)},
                               {"tau", format_double(cfg.tau)},
                               {"alpha", format_double(cfg.alpha)},
                               {"form", cfg.form == FlowForm::velocity ? "velocity" : "vorticity"}});
  return {std::move(params), cfg.form == FlowForm::velocity ? std::move(result.velocity) : std::move(result.vorticity)};
}

Trajectory swe_trajectory(const SweDatasetConfig& cfg, Rng& rng, KvStanza params)
{
  const double rain_mm_h = uniform(rng, cfg.rain_min, cfg.rain_max);
  SweConfig solver = cfg.solver;
  const double rate = rain_mm_h / 1000.0 / 3600.0;
  const auto intervals = static_cast<std::size_t>(std::ceil(cfg.rain_duration / solver.rainfall_interval - 1e-9));
  solver.rainfall.assign(intervals, rate);
  const auto dem = make_dem(cfg.terrain, cfg.ny, cfg.nx, solver.dx, cfg.slope);
  const RealField h0(dem.grid(), 1);
  auto result = solve_swe_flood(solver, dem, h0);
  params.insert(params.end(), {{"terrain", to_string(cfg.terrain)},
                               {"slope", format_double(cfg.slope)},
                               {"nx", str(cfg.nx)},
                               {"ny", str(cfg.ny)},
                               {"dx", format_double(solver.dx)},
                               {"manning", format_double(solver.manning)},
                               {"rain_rate", format_double(rate)},
                               {"rain_duration", format_double(cfg.rain_duration)},
                               {"dt", format_double(solver.frame_interval)},
                               {"duration", format_double(solver.duration)},
                               {"solver_steps", str(result.steps)}});
  return {std::move(params), std::move(result.depth)};
}

} // namespace

Trajectory generate_trajectory(const DatasetSpec& spec, std::size_t index)
{
  Rng rng = make_stream(spec.seed, "solver", index);
  KvStanza params{{"trajectory", str(index)}, {"seed", std::to_string(spec.seed)}, {"stream", "solver/" + str(index)}};
  switch (spec.kind) {
  case SolverKind::kse: return kse_trajectory(spec.kse, rng, std::move(params));
  case SolverKind::kolmogorov: return kolmogorov_trajectory(spec.kolmogorov, rng, std::move(params));
  case SolverKind::swe: return swe_trajectory(spec.swe, rng, std::move(params));
  }
  throw UsageError("unknown dataset kind");
}

std::string trajectory_file_name(std::size_t index)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "traj_%04zu.fld", index);
  return buf;
}

void write_dataset(const DatasetSpec& spec, const std::filesystem::path& dir, int threads)
{
  require(spec.count >= 1, "dataset count must be >= 1");
  std::filesystem::create_directories(dir);
  std::vector<KvStanza> stanzas(spec.count + 1);
  stanzas[0] = {{"kind", to_string(spec.kind)}, {"count", str(spec.count)}, {"seed", std::to_string(spec.seed)}};
  parallel_for(spec.count, threads, [&](std::size_t i) {
    auto traj = generate_trajectory(spec, i);
    write_fld(traj.data, dir / trajectory_file_name(i));
    stanzas[i + 1] = std::move(traj.params);
  });
  write_text_file(dir / "manifest", format_kv_stanzas(stanzas));
}

DatasetManifest read_manifest(const std::filesystem::path& dir)
{
  const auto path = dir / "manifest";
  if (!std::filesystem::exists(path))
    throw FormatError("dataset manifest not found: " + path.string());
  auto stanzas = parse_kv_stanzas(read_text_file(path));
  if (stanzas.empty())
    throw FormatError("dataset manifest is empty: " + path.string());
  DatasetManifest m;
  m.header = std::move(stanzas.front());
  m.trajectories.assign(std::make_move_iterator(stanzas.begin() + 1), std::make_move_iterator(stanzas.end()));
  const auto count = parse_int(kv_require(m.header, "count"));
  if (count != static_cast<std::int64_t>(m.trajectories.size()))
    throw FormatError("manifest declares " + std::to_string(count) + " trajectories but lists " +
                      std::to_string(m.trajectories.size()));
  return m;
}

RealField load_trajectory(const std::filesystem::path& dir, std::size_t index)
{
  const auto path = dir / trajectory_file_name(index);
  if (!std::filesystem::exists(path))
    throw FormatError("trajectory " + std::to_string(index) + " missing: " + path.string());
  return read_fld(path);
}

} // namespace pcno
