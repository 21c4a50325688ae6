#include "pcno/solvers/kolmogorov.hpp"

#include <cmath>
#include <numbers>

#include "pcno/spectral/calculus.hpp"
#include "pcno/spectral/fft.hpp"
#include "pcno/spectral/field_ops.hpp"

namespace pcno {

namespace {

using cd = std::complex<double>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

class KolmogorovStepper
{
public:
  KolmogorovStepper(const KolmogorovConfig& cfg) : cfg_(cfg), sizes_{cfg.points, cfg.points}
  {
    const GridSpec grid = GridSpec::periodic(sizes_);
    kx_ = wavenumber_field(grid, 0, true);
    ky_ = wavenumber_field(grid, 1, true);
    const Eigen::ArrayXd kd2 = kx_.square() + ky_.square();
    inv_kd2_ = (kd2 > 0.0).select(1.0 / kd2, 0.0);
    const Eigen::ArrayXd k2 = wavenumber_norm2(grid);
    const double half = 0.5 * cfg.nu * cfg.dt;
    explicit_ = 1.0 - half * k2;
    implicit_ = 1.0 / (1.0 + half * k2);

    const auto freq = fft_frequencies(cfg.points);
    const auto n = static_cast<long>(cfg.points);
    mask_.resize(static_cast<Eigen::Index>(grid.points()));
    for (std::size_t p = 0; p < grid.points(); ++p) {
      const auto i = freq[p / cfg.points], j = freq[p % cfg.points];
      mask_[static_cast<Eigen::Index>(p)] = (3 * std::abs(i) < n && 3 * std::abs(j) < n) ? 1.0 : 0.0;
    }

    forcing_hat_ = Eigen::ArrayXcd::Zero(mask_.size());
    if (cfg.forcing != 0.0) {
      for (std::size_t p = 0; p < grid.points(); ++p) {
        const double x = static_cast<double>(p / cfg.points) / static_cast<double>(cfg.points);
        const double y = static_cast<double>(p % cfg.points) / static_cast<double>(cfg.points);
        forcing_hat_[static_cast<Eigen::Index>(p)] =
          cfg.forcing * (std::sin(kTwoPi * (x + y)) + std::cos(kTwoPi * (x + y)));
      }
      fft_inplace(forcing_hat_.data(), sizes_, false);
    }
  }

  void step(Eigen::ArrayXcd& w_hat, std::size_t index)
  {
    advection(w_hat, index);
    if (first_) {
      previous_ = current_;
      first_ = false;
    }
    w_hat = implicit_ * (explicit_ * w_hat + cfg_.dt * (1.5 * current_ - 0.5 * previous_ + forcing_hat_));
    std::swap(previous_, current_);
  }

private:
  // current_ = -FFT(u . grad w), dealiased
  void advection(const Eigen::ArrayXcd& w_hat, std::size_t index)
  {
    const Eigen::ArrayXcd w = w_hat * mask_;
    const Eigen::ArrayXcd psi = w * inv_kd2_;
    ux_ = cd(0, 1) * ky_ * psi;
    uy_ = -cd(0, 1) * kx_ * psi;
    wx_ = cd(0, 1) * kx_ * w;
    wy_ = cd(0, 1) * ky_ * w;
    for (auto* a : {&ux_, &uy_, &wx_, &wy_})
      fft_inplace(a->data(), sizes_, true);

    const double cfl = cfg_.dt * static_cast<double>(cfg_.points) *
                       (ux_.real().abs().maxCoeff() + uy_.real().abs().maxCoeff());
    if (!std::isfinite(cfl) || cfl >= 1.0)
      throw NumericalError("Kolmogorov CFL violation at step " + std::to_string(index) + " (CFL = " +
                           std::to_string(cfl) + ", dt = " + std::to_string(cfg_.dt) + ")");

    current_ = (ux_.real() * wx_.real() + uy_.real() * wy_.real()).cast<cd>();
    fft_inplace(current_.data(), sizes_, false);
    current_ *= -mask_;
  }

  const KolmogorovConfig& cfg_;
  std::vector<std::size_t> sizes_;
  Eigen::ArrayXd kx_, ky_, inv_kd2_, explicit_, implicit_, mask_;
  Eigen::ArrayXcd forcing_hat_, current_, previous_, ux_, uy_, wx_, wy_;
  bool first_ = true;
};

GridSpec frame_grid(std::size_t n)
{
  return GridSpec({{"x", n, 1.0, AxisKind::spatial}, {"y", n, 1.0, AxisKind::spatial}});
}

} // namespace

RealField kolmogorov_initial(const KolmogorovConfig& cfg, Rng& rng)
{
  require(cfg.points >= 4, "Kolmogorov grid needs at least 4 points per axis");
  const GridSpec grid = frame_grid(cfg.points);
  const auto points = static_cast<Eigen::Index>(grid.points());
  RealField noise(grid, 1, standard_normal(rng, points).array());
  auto s = fft_forward(noise);
  const Eigen::ArrayXd k2 = wavenumber_norm2(grid);
  const double sigma = std::pow(cfg.tau, cfg.alpha - 1.0);
  const double scale = std::sqrt(2.0 * static_cast<double>(points)) * sigma;
  const Eigen::ArrayXd amp = scale * (k2 + cfg.tau * cfg.tau).pow(-cfg.alpha / 2.0);
  s.channel(0) *= amp.cast<cd>();
  s(0, 0) = 0.0;
  symmetrize(s);
  return fft_inverse(s);
}

KolmogorovResult solve_kolmogorov(const KolmogorovConfig& cfg, const RealField& w0)
{
  require(cfg.frames >= 2 && cfg.record_every >= 1, "Kolmogorov needs frames >= 2 and record_every >= 1");
  require(cfg.nu >= 0.0 && cfg.dt > 0.0, "Kolmogorov needs nu >= 0 and dt > 0");
  require(w0.channels() == 1 && w0.grid().sizes() == std::vector<std::size_t>{cfg.points, cfg.points},
          "initial vorticity must be one channel on the configured grid");
  require_finite(w0, "initial vorticity");

  KolmogorovStepper stepper(cfg);
  const std::vector<std::size_t> sizes{cfg.points, cfg.points};
  Eigen::ArrayXcd w_hat = w0.data().cast<cd>();
  fft_inplace(w_hat.data(), sizes, false);

  std::size_t index = 0;
  for (std::size_t s = 0; s < cfg.warmup; ++s)
    stepper.step(w_hat, index++);

  const GridSpec grid = frame_grid(cfg.points);
  std::vector<RealField> vort, vel;
  for (std::size_t f = 0; f < cfg.frames; ++f) {
    if (f > 0)
      for (std::size_t s = 0; s < cfg.record_every; ++s)
        stepper.step(w_hat, index++);
    SpectralField spec(grid, 1, w_hat);
    symmetrize(spec);
    RealField w = fft_inverse(spec);
    vel.push_back(vorticity_to_velocity(w));
    vort.push_back(std::move(w));
  }
  const Axis time{"t", cfg.frames, cfg.dt * static_cast<double>(cfg.record_every * cfg.frames), AxisKind::temporal};
  return {stack_frames(vort, time), stack_frames(vel, time)};
}

RealField vorticity_to_velocity(const RealField& w)
{
  require(w.channels() == 1 && w.grid().rank() == 2, "vorticity_to_velocity expects one channel on a 2-axis grid");
  const auto s = fft_forward(w);
  const Eigen::ArrayXd kx = wavenumber_field(w.grid(), 0, true);
  const Eigen::ArrayXd ky = wavenumber_field(w.grid(), 1, true);
  const Eigen::ArrayXd kd2 = kx.square() + ky.square();
  const Eigen::ArrayXcd psi = s.channel(0) * (kd2 > 0.0).select(1.0 / kd2, 0.0).cast<cd>();
  SpectralField u(w.grid(), 2);
  u.channel(0) = cd(0, 1) * ky.cast<cd>() * psi;
  u.channel(1) = -cd(0, 1) * kx.cast<cd>() * psi;
  symmetrize(u);
  return fft_inverse(u);
}

RealField curl(const RealField& u)
{
  require(u.channels() == 2 && u.grid().rank() == 2, "curl expects two channels on a 2-axis grid");
  const auto s = fft_forward(u);
  SpectralField out(u.grid(), 1);
  const auto dyx = spectral_gradient(SpectralField(u.grid(), 1, s.channel(1)), 0);
  const auto dxy = spectral_gradient(SpectralField(u.grid(), 1, s.channel(0)), 1);
  out.channel(0) = dyx.channel(0) - dxy.channel(0);
  symmetrize(out);
  return fft_inverse(out);
}

} // namespace pcno
