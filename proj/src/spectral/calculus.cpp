#include "pcno/spectral/calculus.hpp"

#include <numbers>

#include "pcno/spectral/fft.hpp"

namespace pcno {

namespace {

Wavenumbers make_wavenumbers(const GridSpec& grid, bool zero_nyquist)
{
  Wavenumbers k;
  for (std::size_t a = 0; a < grid.rank(); ++a) {
    const std::size_t n = grid.size(a);
    const auto freq = fft_frequencies(n);
    Eigen::ArrayXd ka(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j)
      ka[static_cast<Eigen::Index>(j)] = 2.0 * std::numbers::pi * static_cast<double>(freq[j]) / grid.extent(a);
    if (zero_nyquist && n % 2 == 0)
      ka[static_cast<Eigen::Index>(n / 2)] = 0.0;
    k.axes.push_back(std::move(ka));
  }
  return k;
}

} // namespace

Wavenumbers wavenumbers(const GridSpec& grid)
{
  return make_wavenumbers(grid, false);
}

Wavenumbers derivative_wavenumbers(const GridSpec& grid)
{
  return make_wavenumbers(grid, true);
}

Eigen::ArrayXd wavenumber_field(const GridSpec& grid, std::size_t axis, bool derivative)
{
  require(axis < grid.rank(), "axis " + std::to_string(axis) + " does not exist");
  const auto k = make_wavenumbers(grid, derivative).axes[axis];
  const std::size_t stride = grid.stride(axis);
  const std::size_t n = grid.size(axis);
  Eigen::ArrayXd out(static_cast<Eigen::Index>(grid.points()));
  for (std::size_t p = 0; p < grid.points(); ++p)
    out[static_cast<Eigen::Index>(p)] = k[static_cast<Eigen::Index>((p / stride) % n)];
  return out;
}

Eigen::ArrayXd wavenumber_norm2(const GridSpec& grid)
{
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(grid.points()));
  for (std::size_t a = 0; a < grid.rank(); ++a)
    out += wavenumber_field(grid, a, false).square();
  return out;
}

SpectralField spectral_gradient(const SpectralField& s, std::size_t axis)
{
  require(!s.centered, "spectral_gradient expects an uncentered spectrum");
  const Eigen::ArrayXcd ik = wavenumber_field(s.grid(), axis, true).cast<std::complex<double>>() * std::complex<double>(0.0, 1.0);
  SpectralField out = s;
  for (Eigen::Index c = 0; c < s.channels(); ++c)
    out.channel(c) *= ik;
  if (out.hermitian)
    symmetrize(out);
  return out;
}

SpectralField spectral_divergence(const SpectralField& v)
{
  require(!v.centered, "spectral_divergence expects an uncentered spectrum");
  const auto rank = static_cast<Eigen::Index>(v.grid().rank());
  require(v.channels() == rank, "spectral_divergence: " + std::to_string(v.channels()) +
                                  " channels for " + std::to_string(rank) + " axes");
  SpectralField out(v.grid(), 1, v.hermitian);
  for (Eigen::Index j = 0; j < rank; ++j) {
    const Eigen::ArrayXcd ik = wavenumber_field(v.grid(), static_cast<std::size_t>(j), true).cast<std::complex<double>>() *
                               std::complex<double>(0.0, 1.0);
    out.channel(0) += ik * v.channel(j);
  }
  if (out.hermitian)
    symmetrize(out);
  return out;
}

SpectralField spectral_laplacian(const SpectralField& s)
{
  require(!s.centered, "spectral_laplacian expects an uncentered spectrum");
  const Eigen::ArrayXd k2 = wavenumber_norm2(s.grid());
  SpectralField out = s;
  for (Eigen::Index c = 0; c < s.channels(); ++c)
    out.channel(c) *= (-k2).cast<std::complex<double>>();
  if (out.hermitian)
    symmetrize(out);
  return out;
}

SpectralField spectral_laplacian_inverse(const SpectralField& s)
{
  require(!s.centered, "spectral_laplacian_inverse expects an uncentered spectrum");
  const Eigen::ArrayXd k2 = wavenumber_norm2(s.grid());
  const Eigen::ArrayXd inv = (k2 > 0.0).select(-1.0 / k2, 0.0);
  SpectralField out = s;
  for (Eigen::Index c = 0; c < s.channels(); ++c)
    out.channel(c) *= inv.cast<std::complex<double>>();
  if (out.hermitian)
    symmetrize(out);
  return out;
}

RealField gradient(const RealField& f, std::size_t axis)
{
  return fft_inverse(spectral_gradient(fft_forward(f), axis));
}

RealField divergence(const RealField& v)
{
  return fft_inverse(spectral_divergence(fft_forward(v)));
}

} // namespace pcno
