#include "pcno/solvers/kse.hpp"

#include <cmath>
#include <numbers>

#include "pcno/spectral/fft.hpp"

namespace pcno {

namespace {

using cd = std::complex<double>;

// phi1(z) = (e^z - 1) / z, phi2(z) = (e^z - 1 - z) / z^2 with series near 0.
double phi1(double z)
{
  if (std::abs(z) < 1e-2)
    return 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0 + z * z * z * z / 120.0;
  return std::expm1(z) / z;
}

double phi2(double z)
{
  if (std::abs(z) < 1e-2)
    return 0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0 + z * z * z * z / 720.0;
  return (std::expm1(z) - z) / (z * z);
}

class KseStepper
{
public:
  KseStepper(std::size_t n, double length, double nu, double h, bool nonlinear)
    : nonlinear_(nonlinear), sizes_{n}
  {
    const auto freq = fft_frequencies(n);
    const auto size = static_cast<Eigen::Index>(n);
    ik_.resize(size);
    keep_.resize(size);
    e_.resize(size);
    p1_.resize(size);
    p2_.resize(size);
    for (std::size_t j = 0; j < n; ++j) {
      const auto i = static_cast<Eigen::Index>(j);
      const double k = 2.0 * std::numbers::pi * static_cast<double>(freq[j]) / length;
      const double lin = k * k - nu * k * k * k * k;
      ik_[i] = (n % 2 == 0 && j == n / 2) ? cd(0.0) : cd(0.0, k);
      keep_[i] = 3 * std::abs(freq[j]) < static_cast<long>(n) ? 1.0 : 0.0;
      e_[i] = std::exp(lin * h);
      p1_[i] = h * phi1(lin * h);
      p2_[i] = h * phi2(lin * h);
    }
  }

  void step(Eigen::ArrayXcd& u_hat)
  {
    nonlinear_term(u_hat, nl_u_);
    const Eigen::ArrayXcd a = e_ * u_hat + p1_ * nl_u_;
    nonlinear_term(a, nl_a_);
    u_hat = a + p2_ * (nl_a_ - nl_u_);
  }

private:
  // -(ik / 2) FFT(u^2), dealiased
  void nonlinear_term(const Eigen::ArrayXcd& u_hat, Eigen::ArrayXcd& out)
  {
    if (!nonlinear_) {
      out = Eigen::ArrayXcd::Zero(u_hat.size());
      return;
    }
    buf_ = u_hat * keep_;
    fft_inplace(buf_.data(), sizes_, true);
    buf_ = buf_.real().square().cast<cd>();
    fft_inplace(buf_.data(), sizes_, false);
    out = -0.5 * ik_ * buf_ * keep_;
  }

  bool nonlinear_;
  std::vector<std::size_t> sizes_;
  Eigen::ArrayXcd ik_, e_, p1_, p2_, buf_, nl_u_, nl_a_;
  Eigen::ArrayXd keep_;
};

} // namespace

KseSample sample_kse(const KseConfig& cfg, Rng& rng)
{
  require(cfg.points >= 8, "KSE needs at least 8 grid points");
  KseSample s;
  s.length = uniform(rng, cfg.length_min, cfg.length_max);
  s.dt = uniform(rng, cfg.dt_min, cfg.dt_max);
  s.nu = cfg.nu_random ? uniform(rng, cfg.nu_min, cfg.nu_max) : cfg.nu;
  s.initial = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(cfg.points));
  std::uniform_int_distribution<int> wave(1, 8);
  for (int j = 0; j < 10; ++j) {
    const double amp = uniform(rng, -1.0, 1.0);
    const int k = wave(rng);
    const double phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    for (Eigen::Index i = 0; i < s.initial.size(); ++i) {
      const double x = static_cast<double>(i) / static_cast<double>(cfg.points);
      s.initial[i] += amp * std::sin(2.0 * std::numbers::pi * k * x + phase);
    }
  }
  return s;
}

RealField solve_kse(const KseConfig& cfg, const KseSample& sample)
{
  require(cfg.steps >= 2 && cfg.substeps >= 1, "KSE needs steps >= 2 and substeps >= 1");
  require(sample.initial.size() == static_cast<Eigen::Index>(cfg.points), "KSE initial state has the wrong size");
  require(sample.length > 0 && sample.dt > 0 && sample.nu > 0, "KSE parameters must be positive");
  require(sample.initial.isFinite().all(), "KSE initial state is not finite");

  const std::size_t n = cfg.points;
  const double h = sample.dt / static_cast<double>(cfg.substeps);
  KseStepper stepper(n, sample.length, sample.nu, h, cfg.nonlinear);
  const std::vector<std::size_t> sizes{n};

  Eigen::ArrayXcd u_hat = sample.initial.cast<cd>();
  fft_inplace(u_hat.data(), sizes, false);

  Eigen::ArrayXcd tmp;
  auto physical = [&] {
    tmp = u_hat;
    fft_inplace(tmp.data(), sizes, true);
    return Eigen::ArrayXd(tmp.real());
  };
  auto advance = [&](std::size_t step_index) {
    for (std::size_t s = 0; s < cfg.substeps; ++s)
      stepper.step(u_hat);
    const double peak = u_hat.abs().sum() / static_cast<double>(n); // bounds max |u|
    if (!std::isfinite(peak) || peak > 1e6) {
      const double actual = physical().abs().maxCoeff();
      if (!std::isfinite(actual) || actual > 1e6)
        throw NumericalError("KSE blow-up at step " + std::to_string(step_index) + " (max |u| = " +
                             std::to_string(actual) + ", L = " + std::to_string(sample.length) +
                             ", dt = " + std::to_string(sample.dt) + ", nu = " + std::to_string(sample.nu) + ")");
    }
  };

  for (std::size_t w = 0; w < cfg.warmup; ++w)
    advance(w);

  const GridSpec grid({{"t", cfg.steps, sample.dt * static_cast<double>(cfg.steps), AxisKind::temporal},
                       {"x", n, sample.length, AxisKind::spatial}});
  RealField out(grid, 1);
  for (std::size_t t = 0; t < cfg.steps; ++t) {
    if (t > 0)
      advance(cfg.warmup + t);
    out.data().segment(static_cast<Eigen::Index>(t * n), static_cast<Eigen::Index>(n)) = physical();
  }
  return out;
}

} // namespace pcno
