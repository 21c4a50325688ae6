#include "pcno/solvers/swe.hpp"

#include <cmath>
#include <limits>

#include "pcno/spectral/field_ops.hpp"

namespace pcno {

Terrain parse_terrain(const std::string& name)
{
  if (name == "flat")
    return Terrain::flat;
  if (name == "tilted")
    return Terrain::tilted;
  if (name == "valley")
    return Terrain::valley;
  throw UsageError("unknown terrain '" + name + "' (flat|tilted|valley)");
}

std::string to_string(Terrain t)
{
  switch (t) {
  case Terrain::flat: return "flat";
  case Terrain::tilted: return "tilted";
  case Terrain::valley: return "valley";
  }
  return "flat";
}

namespace {

GridSpec plane_grid(std::size_t ny, std::size_t nx, double dx)
{
  return GridSpec({{"y", ny, dx * static_cast<double>(ny), AxisKind::spatial},
                   {"x", nx, dx * static_cast<double>(nx), AxisKind::spatial}});
}

} // namespace

RealField make_dem(Terrain terrain, std::size_t ny, std::size_t nx, double dx, double slope)
{
  RealField z(plane_grid(ny, nx, dx), 1);
  const double mid = 0.5 * static_cast<double>(ny - 1);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      double v = 0.0;
      if (terrain != Terrain::flat)
        v = slope * dx * static_cast<double>(nx - 1 - i);
      if (terrain == Terrain::valley)
        v += slope * dx * std::abs(static_cast<double>(j) - mid);
      z(0, static_cast<Eigen::Index>(j * nx + i)) = v;
    }
  return z;
}

double water_volume(const RealField& depth, double dx)
{
  return depth.data().sum() * dx * dx;
}

SweResult solve_swe_flood(const SweConfig& cfg, const RealField& dem, const RealField& h0)
{
  require(dem.grid().rank() == 2 && dem.channels() == 1, "DEM must be one channel on a (y, x) grid");
  require(h0.same_shape(dem), "initial depth must match the DEM");
  require_finite(dem, "DEM");
  require_finite(h0, "initial depth");
  require((h0.data() >= 0.0).all(), "initial depth must be non-negative");
  require(cfg.dx > 0 && cfg.g > 0 && cfg.manning >= 0 && cfg.cfl > 0 && cfg.cfl < 1, "invalid SWE parameters");
  require(cfg.frame_interval > 0 && cfg.duration >= cfg.frame_interval, "SWE needs duration >= frame_interval > 0");
  require(cfg.rainfall_interval > 0 && cfg.infiltration >= 0, "invalid rainfall or infiltration settings");

  const std::size_t ny = dem.grid().size(0), nx = dem.grid().size(1);
  const auto frames = static_cast<std::size_t>(std::llround(cfg.duration / cfg.frame_interval)) + 1;
  const double dx = cfg.dx, cell_area = dx * dx;
  const Eigen::ArrayXd& z = dem.data();
  Eigen::ArrayXd h = h0.data();
  // qx[j * (nx + 1) + i] sits between cells i - 1 and i of row j; boundary faces stay 0.
  Eigen::ArrayXd qx = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(ny * (nx + 1)));
  Eigen::ArrayXd qy = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>((ny + 1) * nx));
  Eigen::ArrayXd outflow(h.size()), factor(h.size());

  SweResult result;
  std::vector<RealField> out_frames;
  const GridSpec grid = plane_grid(ny, nx, dx);
  out_frames.emplace_back(grid, 1, h);

  auto cell = [nx](std::size_t j, std::size_t i) { return static_cast<Eigen::Index>(j * nx + i); };
  auto face_flux = [&](double q, Eigen::Index a, Eigen::Index b, double dt) {
    const double eta_a = z[a] + h[a], eta_b = z[b] + h[b];
    const double hf = std::max(eta_a, eta_b) - std::max(z[a], z[b]);
    if (hf <= cfg.depth_floor)
      return 0.0;
    const double num = q - cfg.g * hf * dt * (eta_b - eta_a) / dx;
    const double den = 1.0 + cfg.g * dt * cfg.manning * cfg.manning * std::abs(q) / std::pow(hf, 7.0 / 3.0);
    return num / den;
  };

  double t = 0.0;
  const double eps_time = 1e-9 * cfg.frame_interval;
  for (std::size_t frame = 1; frame < frames; ++frame) {
    const double frame_end = cfg.frame_interval * static_cast<double>(frame);
    while (frame_end - t > eps_time) {
      const double hmax = h.maxCoeff();
      double dt = std::numeric_limits<double>::infinity();
      if (cfg.fixed_dt) {
        dt = *cfg.fixed_dt;
      } else if (hmax > 0.0) {
        dt = cfg.cfl * dx / std::sqrt(cfg.g * hmax);
        if (dt < 1e-6)
          throw NumericalError("SWE timestep underflow at t = " + std::to_string(t) + " s (dt = " +
                               std::to_string(dt) + " s, max depth " + std::to_string(hmax) + " m)");
      }
      const auto rain_index = static_cast<std::size_t>(std::floor((t + eps_time) / cfg.rainfall_interval));
      const double rain_end = cfg.rainfall_interval * static_cast<double>(rain_index + 1);
      dt = std::min({dt, frame_end - t, rain_end - t});
      const double rate = rain_index < cfg.rainfall.size() ? cfg.rainfall[rain_index] : 0.0;

      if (rate != 0.0) {
        h += rate * dt;
        result.rain_volume += rate * dt * cell_area * static_cast<double>(h.size());
      }
      if (cfg.infiltration > 0.0) {
        const Eigen::ArrayXd taken = h.min(cfg.infiltration * dt);
        h -= taken;
        result.infiltrated += taken.sum() * cell_area;
      }

      for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 1; i < nx; ++i) {
          auto& q = qx[static_cast<Eigen::Index>(j * (nx + 1) + i)];
          q = face_flux(q, cell(j, i - 1), cell(j, i), dt);
        }
      for (std::size_t j = 1; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i) {
          auto& q = qy[static_cast<Eigen::Index>(j * nx + i)];
          q = face_flux(q, cell(j - 1, i), cell(j, i), dt);
        }

      // Scale each cell's outgoing fluxes so it cannot export more than it holds.
      outflow.setZero();
      for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 1; i < nx; ++i) {
          const double q = qx[static_cast<Eigen::Index>(j * (nx + 1) + i)];
          outflow[q > 0 ? cell(j, i - 1) : cell(j, i)] += std::abs(q);
        }
      for (std::size_t j = 1; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i) {
          const double q = qy[static_cast<Eigen::Index>(j * nx + i)];
          outflow[q > 0 ? cell(j - 1, i) : cell(j, i)] += std::abs(q);
        }
      outflow *= dt / dx;
      for (Eigen::Index c = 0; c < h.size(); ++c)
        factor[c] = outflow[c] > h[c] ? h[c] / outflow[c] : 1.0;
      for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 1; i < nx; ++i) {
          auto& q = qx[static_cast<Eigen::Index>(j * (nx + 1) + i)];
          q *= factor[q > 0 ? cell(j, i - 1) : cell(j, i)];
        }
      for (std::size_t j = 1; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i) {
          auto& q = qy[static_cast<Eigen::Index>(j * nx + i)];
          q *= factor[q > 0 ? cell(j - 1, i) : cell(j, i)];
        }

      const double r = dt / dx;
      for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i) {
          const double net = qx[static_cast<Eigen::Index>(j * (nx + 1) + i)] -
                             qx[static_cast<Eigen::Index>(j * (nx + 1) + i + 1)] +
                             qy[static_cast<Eigen::Index>(j * nx + i)] - qy[static_cast<Eigen::Index>((j + 1) * nx + i)];
          auto& hc = h[cell(j, i)];
          hc = std::max(0.0, hc + r * net);
        }
      if (!h.isFinite().all())
        throw NumericalError("SWE depth became non-finite at t = " + std::to_string(t) + " s");
      t += dt;
      ++result.steps;
    }
    t = frame_end;
    out_frames.emplace_back(grid, 1, h);
  }
  result.depth = stack_frames(out_frames, {"t", frames, cfg.frame_interval * static_cast<double>(frames), AxisKind::temporal});
  return result;
}

} // namespace pcno
