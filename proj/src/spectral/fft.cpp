#include "pcno/spectral/fft.hpp"

#include <cmath>
#include <map>

#include <unsupported/Eigen/FFT>

namespace pcno {

namespace {

using cd = std::complex<double>;

// Eigen::FFT caches twiddle plans per size; one engine per thread keeps the
// cache private.
Eigen::FFT<double>& engine()
{
  thread_local Eigen::FFT<double> fft = [] {
    Eigen::FFT<double> f;
    f.SetFlag(Eigen::FFT<double>::Unscaled);
    return f;
  }();
  return fft;
}

} // namespace

void fft_inplace(cd* data, const std::vector<std::size_t>& sizes, bool inverse)
{
  std::size_t total = 1;
  for (auto n : sizes)
    total *= n;

  auto& fft = engine();
  std::vector<cd> line, out;
  std::size_t stride = total;
  for (std::size_t axis = 0; axis < sizes.size(); ++axis) {
    const std::size_t n = sizes[axis];
    stride /= n;
    const std::size_t block = n * stride;
    line.resize(n);
    out.resize(n);
    for (std::size_t outer = 0; outer < total; outer += block) {
      for (std::size_t inner = 0; inner < stride; ++inner) {
        cd* base = data + outer + inner;
        for (std::size_t j = 0; j < n; ++j)
          line[j] = base[j * stride];
        if (inverse)
          fft.inv(out.data(), line.data(), static_cast<Eigen::Index>(n));
        else
          fft.fwd(out.data(), line.data(), static_cast<Eigen::Index>(n));
        for (std::size_t j = 0; j < n; ++j)
          base[j * stride] = out[j];
      }
    }
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(total);
    for (std::size_t i = 0; i < total; ++i)
      data[i] *= scale;
  }
}

SpectralField fft_forward(const RealField& f)
{
  require_finite(f, "fft_forward");
  SpectralField s(f.grid(), f.channels(), f.data().cast<cd>(), true);
  const auto sizes = f.grid().sizes();
  for (Eigen::Index c = 0; c < f.channels(); ++c)
    fft_inplace(s.data().data() + c * s.points(), sizes, false);
  return s;
}

RealField fft_inverse(const SpectralField& s)
{
  require(!s.centered, "fft_inverse: spectrum is centre-shifted; shift it back first");
  require(s.hermitian, "fft_inverse: spectrum is not flagged Hermitian");
  const double defect = hermitian_defect(s);
  if (defect > kHermitianTolerance)
    throw ContractError("fft_inverse: Hermitian symmetry violated (relative defect " + std::to_string(defect) + ")");
  ComplexField tmp = fft_inverse_complex(s);
  return RealField(s.grid(), s.channels(), tmp.data().real());
}

ComplexField fft_forward_complex(const ComplexField& f)
{
  ComplexField s = f;
  const auto sizes = f.grid().sizes();
  for (Eigen::Index c = 0; c < f.channels(); ++c)
    fft_inplace(s.data().data() + c * s.points(), sizes, false);
  return s;
}

ComplexField fft_inverse_complex(const ComplexField& s)
{
  ComplexField f = s;
  const auto sizes = s.grid().sizes();
  for (Eigen::Index c = 0; c < s.channels(); ++c)
    fft_inplace(f.data().data() + c * f.points(), sizes, true);
  return f;
}

SpectralField fft_center_shift(const SpectralField& s, ShiftDirection direction)
{
  const auto sizes = s.grid().sizes();
  SpectralField out(s.grid(), s.channels(), s.hermitian);
  out.centered = (direction == ShiftDirection::forward);
  const auto points = static_cast<std::size_t>(s.points());
  std::vector<std::size_t> src(sizes.size());
  for (std::size_t p = 0; p < points; ++p) {
    const auto dst = unravel(p, sizes);
    for (std::size_t a = 0; a < sizes.size(); ++a) {
      const std::size_t half = sizes[a] / 2;
      // forward: out[i] = in[(i - n/2) mod n]; inverse: out[i] = in[(i + n/2) mod n]
      src[a] = direction == ShiftDirection::forward ? (dst[a] + sizes[a] - half) % sizes[a]
                                                    : (dst[a] + half) % sizes[a];
    }
    const std::size_t q = ravel(src, sizes);
    for (Eigen::Index c = 0; c < s.channels(); ++c)
      out(c, static_cast<Eigen::Index>(p)) = s(c, static_cast<Eigen::Index>(q));
  }
  return out;
}

std::size_t negated_index(std::size_t flat, const std::vector<std::size_t>& sizes)
{
  auto idx = unravel(flat, sizes);
  for (std::size_t a = 0; a < sizes.size(); ++a)
    idx[a] = (sizes[a] - idx[a]) % sizes[a];
  return ravel(idx, sizes);
}

const std::vector<std::size_t>& mirror_table(const std::vector<std::size_t>& sizes)
{
  thread_local std::map<std::vector<std::size_t>, std::vector<std::size_t>> cache;
  auto it = cache.find(sizes);
  if (it != cache.end())
    return it->second;
  std::vector<std::size_t> table{0};
  // build axis by axis: mirror(i, rest) = (n - i) % n, mirror(rest)
  for (auto it_axis = sizes.rbegin(); it_axis != sizes.rend(); ++it_axis) {
    const std::size_t n = *it_axis;
    const std::size_t inner = table.size();
    std::vector<std::size_t> next(n * inner);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t r = 0; r < inner; ++r)
        next[i * inner + r] = ((n - i) % n) * inner + table[r];
    table = std::move(next);
  }
  return cache.emplace(sizes, std::move(table)).first->second;
}

void symmetrize(SpectralField& s)
{
  const auto& mirror = mirror_table(s.grid().sizes());
  for (Eigen::Index c = 0; c < s.channels(); ++c) {
    auto ch = s.channel(c);
    for (Eigen::Index p = 0; p < s.points(); ++p) {
      const auto q = static_cast<Eigen::Index>(mirror[static_cast<std::size_t>(p)]);
      if (q < p)
        continue;
      const cd h = 0.5 * (ch[p] + std::conj(ch[q]));
      ch[p] = h;
      ch[q] = std::conj(h);
    }
  }
  s.hermitian = true;
}

double hermitian_defect(const ComplexField& s)
{
  const double scale = s.data().abs().maxCoeff();
  if (scale == 0.0)
    return 0.0;
  const auto& mirror = mirror_table(s.grid().sizes());
  double worst = 0.0;
  for (Eigen::Index c = 0; c < s.channels(); ++c) {
    const auto ch = s.channel(c);
    for (Eigen::Index p = 0; p < s.points(); ++p)
      worst = std::max(worst, std::abs(ch[static_cast<Eigen::Index>(mirror[static_cast<std::size_t>(p)])] - std::conj(ch[p])));
  }
  return worst / scale;
}

} // namespace pcno
