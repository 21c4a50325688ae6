#include "pcno/projection/momentum.hpp"

#include "pcno/spectral/fft.hpp"
#include "pcno/spectral/field_ops.hpp"

namespace pcno {

std::array<std::array<double, 3>, 3> InvariantConvP4::stencil() const
{
  return {{{corner, edge, corner}, {edge, center, edge}, {corner, edge, corner}}};
}

RealField InvariantConvP4::apply(const RealField& f) const
{
  if (is_identity())
    return f;
  const auto& grid = f.grid();
  const auto spatial = grid.spatial_axes();
  require(!spatial.empty(), "invariant convolution needs a spatial axis");
  const auto w = stencil();
  RealField out(grid, f.channels());
  const auto points = static_cast<std::size_t>(f.points());

  if (spatial.size() == 1) {
    const std::size_t ax = spatial[0], n = grid.size(ax), st = grid.stride(ax);
    for (std::size_t p = 0; p < points; ++p) {
      const std::size_t i = (p / st) % n;
      const std::size_t lo = p - i * st + ((i + n - 1) % n) * st;
      const std::size_t hi = p - i * st + ((i + 1) % n) * st;
      for (Eigen::Index c = 0; c < f.channels(); ++c)
        out(c, static_cast<Eigen::Index>(p)) = center * f(c, static_cast<Eigen::Index>(p)) +
                                               edge * (f(c, static_cast<Eigen::Index>(lo)) + f(c, static_cast<Eigen::Index>(hi)));
    }
    return out;
  }

  const std::size_t ay = spatial[spatial.size() - 2], ax = spatial.back();
  const std::size_t ny = grid.size(ay), nx = grid.size(ax);
  const std::size_t sy = grid.stride(ay), sx = grid.stride(ax);
  for (std::size_t p = 0; p < points; ++p) {
    const std::size_t i = (p / sy) % ny, j = (p / sx) % nx;
    const std::size_t base = p - i * sy - j * sx;
    for (Eigen::Index c = 0; c < f.channels(); ++c) {
      double acc = 0.0;
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          const double wk = w[static_cast<std::size_t>(di + 1)][static_cast<std::size_t>(dj + 1)];
          if (wk == 0.0)
            continue;
          const std::size_t q = base + ((i + ny + static_cast<std::size_t>(di + 1) - 1) % ny) * sy +
                                ((j + nx + static_cast<std::size_t>(dj + 1) - 1) % nx) * sx;
          acc += wk * f(c, static_cast<Eigen::Index>(q));
        }
      out(c, static_cast<Eigen::Index>(p)) = acc;
    }
  }
  return out;
}

std::size_t rotate180(std::size_t c, std::size_t n)
{
  return n % 2 == 0 ? (n - c) % n : n - 1 - c;
}

Eigen::ArrayXcd RotationInvariantKernel::centered(Eigen::Index channel) const
{
  const auto& sizes = lattice();
  std::size_t points = 1;
  for (auto n : sizes)
    points *= n;
  Eigen::ArrayXcd out = Eigen::ArrayXcd::Zero(static_cast<Eigen::Index>(points));
  const auto& modes = multiplier.modes;
  std::vector<std::size_t> c(sizes.size()), r(sizes.size());
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const auto& m = modes.mode(i);
    for (std::size_t a = 0; a < sizes.size(); ++a) {
      c[a] = static_cast<std::size_t>(m[a] + static_cast<long>(sizes[a] / 2));
      r[a] = rotate180(c[a], sizes[a]);
    }
    const auto w = multiplier.weights(static_cast<Eigen::Index>(i), channel);
    const auto fc = static_cast<Eigen::Index>(ravel(c, sizes));
    const auto fr = static_cast<Eigen::Index>(ravel(r, sizes));
    if (fc == fr) {
      out[fc] = w.real();
    } else {
      out[fc] = w;
      out[fr] = std::conj(w);
    }
  }
  return out;
}

RotationInvariantKernel RotationInvariantKernel::unit(const std::vector<std::size_t>& lattice, Eigen::Index channels)
{
  return {HermitianMultiplier::unit(HermitianModeSet::lattice(lattice), channels)};
}

RotationInvariantKernel RotationInvariantKernel::random(const std::vector<std::size_t>& lattice, Eigen::Index channels,
                                                        Rng& rng)
{
  auto set = HermitianModeSet::lattice(lattice);
  Eigen::MatrixXcd w(static_cast<Eigen::Index>(set.size()), channels);
  std::normal_distribution<double> n(0.0, 1.0);
  for (Eigen::Index i = 0; i < w.size(); ++i)
    w.data()[i] = {n(rng), n(rng)};
  return {{std::move(set), std::move(w)}};
}

std::vector<std::size_t> default_padding(const GridSpec& grid)
{
  std::vector<std::size_t> pad(grid.rank(), 0);
  for (auto a : grid.spatial_axes())
    pad[a] = (grid.size(a) + 3) / 4;
  return pad;
}

std::vector<std::size_t> momentum_padding(const GridSpec& grid, const MomentumProjection& m)
{
  auto pad = m.padding ? *m.padding : default_padding(grid);
  require(pad.size() == grid.rank(), "momentum padding needs one entry per axis");
  return pad;
}

std::vector<std::size_t> momentum_lattice(const GridSpec& grid, const MomentumProjection& m)
{
  auto sizes = grid.sizes();
  const auto pad = momentum_padding(grid, m);
  for (std::size_t a = 0; a < sizes.size(); ++a)
    sizes[a] += pad[a];
  return sizes;
}

namespace {

// crop(IFFT(unshift(K . shift(FFT(pad x))))) with K or conj(K).
RealField kernel_branch(const RealField& x, const RotationInvariantKernel& k, const std::vector<std::size_t>& pad,
                        bool conjugate)
{
  const auto padded = zero_pad(x, pad);
  require(k.lattice() == padded.grid().sizes(), "momentum kernel lattice does not match the padded grid");
  require(k.channels() == x.channels(), "momentum kernel channel count does not match the field");
  auto s = fft_center_shift(fft_forward(padded), ShiftDirection::forward);
  for (Eigen::Index c = 0; c < x.channels(); ++c) {
    const auto kc = k.centered(c);
    if (conjugate)
      s.channel(c) *= kc.conjugate();
    else
      s.channel(c) *= kc;
  }
  auto back = fft_center_shift(s, ShiftDirection::inverse);
  symmetrize(back);
  return crop(fft_inverse(back), x.grid().sizes());
}

} // namespace

RealField project_momentum(const RealField& v, const MomentumProjection& m)
{
  const auto pad = momentum_padding(v.grid(), m);
  RealField sum = v;
  if (m.kernel)
    sum.data() += kernel_branch(v, *m.kernel, pad, false).data();
  else
    sum.data() *= 2.0;
  return m.w_inv.apply(sum);
}

MomentumProjectionGradient project_momentum_vjp(const RealField& v, const RealField& g, const MomentumProjection& m)
{
  require(g.same_shape(v), "momentum projection gradient shape mismatch");
  const auto pad = momentum_padding(v.grid(), m);
  // W_inv is symmetric, so it is its own adjoint.
  const RealField g1 = m.w_inv.apply(g);
  MomentumProjectionGradient out;
  out.input = g1;
  if (!m.kernel) {
    out.input.data() *= 2.0;
    return out;
  }
  const auto& k = *m.kernel;
  out.input.data() += kernel_branch(g1, k, pad, true).data();

  const auto x_hat = fft_forward(zero_pad(v, pad));
  const auto g_hat = fft_forward(zero_pad(g1, pad));
  const auto placement = k.multiplier.modes.placement(x_hat.grid().sizes());
  out.kernel = Eigen::MatrixXcd::Zero(k.multiplier.weights.rows(), k.channels());
  for (Eigen::Index c = 0; c < v.channels(); ++c)
    accumulate_multiplier_gradient(placement, x_hat.channel(c), g_hat.channel(c), out.kernel.col(c));
  return out;
}

} // namespace pcno
