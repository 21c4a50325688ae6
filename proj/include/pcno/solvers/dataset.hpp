#pragma once

#include <filesystem>
#include <string>

#include "pcno/core/kv_text.hpp"
#include "pcno/solvers/kolmogorov.hpp"
#include "pcno/solvers/kse.hpp"
#include "pcno/solvers/swe.hpp"

namespace pcno {

enum class SolverKind { kse, kolmogorov, swe };

SolverKind parse_solver_kind(const std::string& name);
std::string to_string(SolverKind kind);

/// Flood scenarios: one synthetic terrain, a constant rain rate drawn per
/// trajectory and held for `rain_duration`, starting from dry ground.
struct SweDatasetConfig
{
  SweConfig solver;
  std::size_t nx = 32, ny = 32;
  Terrain terrain = Terrain::valley;
  double slope = 0.01;
  double rain_min = 20.0, rain_max = 60.0; // mm/h
  double rain_duration = 1800.0;           // s
};

struct DatasetSpec
{
  SolverKind kind = SolverKind::kse;
  std::size_t count = 1;
  std::uint64_t seed = 0;
  KseConfig kse;
  KolmogorovConfig kolmogorov;
  SweDatasetConfig swe;
};

struct Trajectory
{
  KvStanza params; // manifest stanza
  RealField data;  // channels x (t, space...)
};

/// Trajectory `index`, drawn from its own stream "solver/<index>" so the
/// result does not depend on which other trajectories are generated.
Trajectory generate_trajectory(const DatasetSpec& spec, std::size_t index);

std::string trajectory_file_name(std::size_t index);

/// Writes traj_%04d.fld files and a `manifest`; trajectories run on up to
/// `threads` workers with identical output for any thread count.
void write_dataset(const DatasetSpec& spec, const std::filesystem::path& dir, int threads);

struct DatasetManifest
{
  KvStanza header;                  // kind, count, seed
  std::vector<KvStanza> trajectories;
};

DatasetManifest read_manifest(const std::filesystem::path& dir);

RealField load_trajectory(const std::filesystem::path& dir, std::size_t index);

} // namespace pcno
