#pragma once

#include "pcno/core/rng.hpp"
#include "pcno/spectral/field.hpp"

namespace pcno {

// Vorticity form on the unit torus:
//   w_t + u . grad(w) = nu lap(w) + f,  f = A (sin 2pi(x+y) + cos 2pi(x+y)).
// Crank-Nicolson diffusion, Adams-Bashforth-2 advection (Euler first step),
// advection dealiased with the 2/3 rule.

enum class FlowForm { velocity, vorticity };

struct KolmogorovConfig
{
  std::size_t points = 64;
  double nu = 1e-3;
  double dt = 1e-4;
  double forcing = 0.1;
  std::size_t frames = 30;       // recorded frames including the initial state
  std::size_t record_every = 100; // solver steps between frames
  std::size_t warmup = 0;         // solver steps discarded before frame 0
  double tau = 7.0, alpha = 2.5;  // initial Gaussian random field
  FlowForm form = FlowForm::velocity;
};

/// Zero-mean Gaussian random vorticity with power envelope (4 pi^2 |n|^2 + tau^2)^(-alpha).
RealField kolmogorov_initial(const KolmogorovConfig& cfg, Rng& rng);

struct KolmogorovResult
{
  RealField vorticity; // (t, x, y), 1 channel
  RealField velocity;  // (t, x, y), 2 channels
};

KolmogorovResult solve_kolmogorov(const KolmogorovConfig& cfg, const RealField& w0);

/// psi = w / |k|^2 (zero mode dropped), u = (d psi / dy, -d psi / dx).
/// Uses derivative wavenumbers, so modes without a differentiable component
/// (pure Nyquist) carry no velocity.
RealField vorticity_to_velocity(const RealField& w);

/// d u_y / dx - d u_x / dy.
RealField curl(const RealField& u);

} // namespace pcno
