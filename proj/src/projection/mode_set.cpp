#include "pcno/projection/mode_set.hpp"

#include "pcno/core/error.hpp"
#include "pcno/spectral/grid.hpp"

namespace pcno {

namespace {

bool lex_at_least(const std::vector<long>& a, const std::vector<long>& b)
{
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i])
      return a[i] > b[i];
  return true;
}

// Visits every integer vector with lo[a] <= v[a] <= hi[a], last axis fastest.
template <typename Fn>
void for_each_box(const std::vector<long>& lo, const std::vector<long>& hi, Fn&& fn)
{
  std::vector<long> v = lo;
  while (true) {
    fn(v);
    std::size_t a = v.size();
    while (a > 0) {
      --a;
      if (v[a] < hi[a]) {
        ++v[a];
        break;
      }
      v[a] = lo[a];
      if (a == 0)
        return;
    }
    if (v.empty())
      return;
  }
}

std::size_t wrap(long m, std::size_t n)
{
  const long ln = static_cast<long>(n);
  return static_cast<std::size_t>(((m % ln) + ln) % ln);
}

} // namespace

HermitianModeSet HermitianModeSet::truncated(const std::vector<std::size_t>& modes)
{
  require(!modes.empty(), "mode set needs at least one axis");
  HermitianModeSet set;
  set.extent_ = modes;
  std::vector<long> lo, hi;
  for (auto m : modes) {
    require(m >= 1, "retained mode count must be >= 1");
    lo.push_back(-static_cast<long>(m) + 1);
    hi.push_back(static_cast<long>(m) - 1);
  }
  for_each_box(lo, hi, [&](const std::vector<long>& m) {
    std::vector<long> neg(m.size());
    for (std::size_t a = 0; a < m.size(); ++a)
      neg[a] = -m[a];
    if (lex_at_least(m, neg))
      set.modes_.push_back(m);
  });
  return set;
}

HermitianModeSet HermitianModeSet::lattice(const std::vector<std::size_t>& sizes)
{
  require(!sizes.empty(), "mode set needs at least one axis");
  HermitianModeSet set;
  set.extent_ = sizes;
  set.lattice_ = true;
  std::vector<long> lo, hi;
  for (auto n : sizes) {
    require(n >= 2, "lattice axes need size >= 2");
    lo.push_back(-static_cast<long>(n / 2));
    hi.push_back(static_cast<long>(n) - 1 - static_cast<long>(n / 2));
  }
  for_each_box(lo, hi, [&](const std::vector<long>& m) {
    std::vector<long> neg(m.size());
    for (std::size_t a = 0; a < m.size(); ++a)
      neg[a] = -m[a] > hi[a] ? -m[a] - static_cast<long>(sizes[a]) : -m[a];
    if (lex_at_least(m, neg))
      set.modes_.push_back(m);
  });
  return set;
}

std::vector<ModePlacement> HermitianModeSet::placement(const std::vector<std::size_t>& sizes) const
{
  require(sizes.size() == rank(), "mode set has " + std::to_string(rank()) + " axes, grid has " +
                                    std::to_string(sizes.size()));
  if (lattice_)
    require(sizes == extent_, "kernel lattice does not match the grid size");
  std::vector<ModePlacement> out;
  out.reserve(modes_.size());
  std::vector<std::size_t> pos(sizes.size()), neg(sizes.size());
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const auto& m = modes_[i];
    bool present = true;
    for (std::size_t a = 0; a < sizes.size() && present; ++a) {
      if (!lattice_ && std::abs(m[a]) > static_cast<long>((sizes[a] - 1) / 2))
        present = false;
      pos[a] = wrap(m[a], sizes[a]);
      neg[a] = wrap(-m[a], sizes[a]);
    }
    if (present)
      out.push_back({i, ravel(pos, sizes), ravel(neg, sizes)});
  }
  return out;
}

Eigen::ArrayXcd HermitianMultiplier::expand(const std::vector<std::size_t>& sizes, Eigen::Index channel,
                                            std::complex<double> fill) const
{
  require(weights.rows() == static_cast<Eigen::Index>(modes.size()), "multiplier weights do not match its mode set");
  std::size_t points = 1;
  for (auto n : sizes)
    points *= n;
  Eigen::ArrayXcd out = Eigen::ArrayXcd::Constant(static_cast<Eigen::Index>(points), fill);
  for (const auto& p : modes.placement(sizes)) {
    const auto w = weights(static_cast<Eigen::Index>(p.index), channel);
    if (p.flat == p.mirror) {
      out[static_cast<Eigen::Index>(p.flat)] = w.real();
    } else {
      out[static_cast<Eigen::Index>(p.flat)] = w;
      out[static_cast<Eigen::Index>(p.mirror)] = std::conj(w);
    }
  }
  return out;
}

HermitianMultiplier HermitianMultiplier::unit(HermitianModeSet modes, Eigen::Index channels)
{
  const auto n = static_cast<Eigen::Index>(modes.size());
  return {std::move(modes), Eigen::MatrixXcd::Ones(n, channels)};
}

void accumulate_multiplier_gradient(const std::vector<ModePlacement>& placement, const Eigen::ArrayXcd& x_hat,
                                    const Eigen::ArrayXcd& g_hat, Eigen::Ref<Eigen::VectorXcd> grad)
{
  const double inv_points = 1.0 / static_cast<double>(x_hat.size());
  for (const auto& p : placement) {
    const auto f = static_cast<Eigen::Index>(p.flat);
    const std::complex<double> a = std::conj(x_hat[f]) * g_hat[f] * inv_points;
    if (p.flat == p.mirror)
      grad[static_cast<Eigen::Index>(p.index)] += a.real();
    else
      grad[static_cast<Eigen::Index>(p.index)] += 2.0 * a;
  }
}

} // namespace pcno
