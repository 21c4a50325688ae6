#include "pcno/projection/mass.hpp"

#include "pcno/spectral/calculus.hpp"
#include "pcno/spectral/fft.hpp"

namespace pcno {

namespace {

void check_shape(const RealField& v, MassMode mode)
{
  const Eigen::Index want = mode == MassMode::spatial2d ? 2 : 3;
  if (v.channels() != want || static_cast<Eigen::Index>(v.grid().rank()) != want)
    throw ContractError("mass projection (" + std::string(mode == MassMode::spatial2d ? "spatial2d" : "spatiotemporal3d") +
                        ") needs " + std::to_string(want) + " channels on a " + std::to_string(want) +
                        "-axis grid, got " + std::to_string(v.channels()) + " channels on " +
                        std::to_string(v.grid().rank()) + " axes");
  if (mode == MassMode::spatial2d && v.grid().temporal_axis())
    throw ContractError("spatial2d mass projection expects two spatial axes");
}

void apply_multiplier(SpectralField& s, const HermitianMultiplier& w, bool conjugate)
{
  require(w.channels() == s.channels(), "W_spe channel count does not match the field");
  const auto sizes = s.grid().sizes();
  for (Eigen::Index c = 0; c < s.channels(); ++c) {
    const Eigen::ArrayXcd m = w.expand(sizes, c, 1.0);
    if (conjugate)
      s.channel(c) *= m.conjugate();
    else
      s.channel(c) *= m;
  }
}

} // namespace

void helmholtz_project_spectrum(SpectralField& s)
{
  require(!s.centered, "helmholtz projection expects an uncentered spectrum");
  const auto rank = s.grid().rank();
  require(static_cast<std::size_t>(s.channels()) == rank, "helmholtz projection needs one channel per axis");
  std::vector<Eigen::ArrayXd> k;
  for (std::size_t a = 0; a < rank; ++a)
    k.push_back(wavenumber_field(s.grid(), a, true));
  for (Eigen::Index p = 0; p < s.points(); ++p) {
    double norm2 = 0.0;
    std::complex<double> dot = 0.0;
    for (std::size_t a = 0; a < rank; ++a) {
      norm2 += k[a][p] * k[a][p];
      dot += k[a][p] * s(static_cast<Eigen::Index>(a), p);
    }
    if (norm2 == 0.0)
      continue;
    const auto scaled = dot / norm2;
    for (std::size_t a = 0; a < rank; ++a)
      s(static_cast<Eigen::Index>(a), p) -= k[a][p] * scaled;
  }
  symmetrize(s);
}

RealField project_divergence_free(const RealField& v, const MassProjectionConfig& cfg)
{
  check_shape(v, cfg.mode);
  auto s = fft_forward(v);
  if (cfg.w_spe)
    apply_multiplier(s, *cfg.w_spe, false);
  helmholtz_project_spectrum(s);
  return fft_inverse(s);
}

MassProjectionGradient project_divergence_free_vjp(const RealField& v, const RealField& g,
                                                   const MassProjectionConfig& cfg)
{
  check_shape(v, cfg.mode);
  require(g.same_shape(v), "mass projection gradient shape mismatch");
  auto gs = fft_forward(g);
  helmholtz_project_spectrum(gs);
  MassProjectionGradient out;
  if (cfg.w_spe) {
    const auto& w = *cfg.w_spe;
    const auto vs = fft_forward(v);
    const auto placement = w.modes.placement(v.grid().sizes());
    out.w_spe = Eigen::MatrixXcd::Zero(w.weights.rows(), w.weights.cols());
    for (Eigen::Index c = 0; c < v.channels(); ++c)
      accumulate_multiplier_gradient(placement, vs.channel(c), gs.channel(c), out.w_spe.col(c));
    apply_multiplier(gs, w, true);
  }
  out.input = fft_inverse(gs);
  return out;
}

HermitianMultiplier random_w_spe(const std::vector<std::size_t>& modes, Eigen::Index channels, Rng& rng)
{
  auto set = HermitianModeSet::truncated(modes);
  Eigen::MatrixXcd w(static_cast<Eigen::Index>(set.size()), channels);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (Eigen::Index i = 0; i < w.size(); ++i)
    w.data()[i] = {1.0 + u(rng), u(rng)};
  return {std::move(set), std::move(w)};
}

} // namespace pcno
