#pragma once

#include <optional>
#include <vector>

#include "pcno/spectral/field.hpp"

namespace pcno {

// Local inertial shallow water on an Arakawa-C grid:
//   h_t + div q = R - I
//   q_t = -g h dEta/dx - g n^2 |q| q / h^(7/3)
// Explicit momentum with semi-implicit friction, then continuity with
// outflow limiting so no cell is drained below zero. Closed walls.

enum class Terrain { flat, tilted, valley };

Terrain parse_terrain(const std::string& name);
std::string to_string(Terrain t);

/// Terrain elevation (m) on an (ny, nx) grid of spacing dx; `slope` is the
/// downhill gradient along x, valleys add a cross slope of the same size.
RealField make_dem(Terrain terrain, std::size_t ny, std::size_t nx, double dx, double slope);

struct SweConfig
{
  double dx = 10.0;
  double manning = 0.03;
  double g = 9.81;
  double cfl = 0.7;
  double duration = 3600.0;
  double frame_interval = 300.0;
  std::vector<double> rainfall;   // rate (m/s) per rainfall interval, 0 afterwards
  double rainfall_interval = 300.0;
  double infiltration = 0.0;      // m/s, limited by available water
  std::optional<double> fixed_dt; // overrides the CFL step
  double depth_floor = 1e-6;      // no flow through faces shallower than this
};

struct SweResult
{
  RealField depth;         // (t, y, x), 1 channel, frame 0 = initial state
  double rain_volume = 0;  // water added by rainfall
  double infiltrated = 0;  // water removed by infiltration
  std::size_t steps = 0;
};

SweResult solve_swe_flood(const SweConfig& cfg, const RealField& dem, const RealField& h0);

/// Total water volume of one (y, x) depth frame.
double water_volume(const RealField& depth, double dx);

} // namespace pcno
