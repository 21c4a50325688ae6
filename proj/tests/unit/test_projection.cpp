#include <doctest.h>

#include <Eigen/Dense>

#include "pcno/projection/atmosphere.hpp"
#include "pcno/projection/compose.hpp"
#include "pcno/spectral/calculus.hpp"
#include "pcno/spectral/fft.hpp"
#include "pcno/spectral/field_ops.hpp"
#include "test_util.hpp"

using namespace pcno;
using namespace pcno::testing;
using cd = std::complex<double>;

namespace {

double divergence_loss(const RealField& v)
{
  return divergence(v).data().abs().mean();
}

double inner(const RealField& a, const RealField& b)
{
  return (a.data() * b.data()).sum();
}

// Fourier differentiation matrix on an even periodic grid of unit length:
// D_ij = pi (-1)^(i-j) cot(pi (i-j) / N), zero on the diagonal.
Eigen::MatrixXd fourier_diff_matrix(int n)
{
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j)
        d(i, j) = kPi * ((i - j) % 2 == 0 ? 1.0 : -1.0) / std::tan(kPi * (i - j) / n);
  return d;
}

// Dense oracle: remove the least-squares gradient component G phi from v.
RealField dense_helmholtz(const RealField& v)
{
  const int n = static_cast<int>(v.grid().size(0));
  const auto d = fourier_diff_matrix(n);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd dx(n * n, n * n), dy(n * n, n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          dx(i * n + j, k * n + l) = d(i, k) * id(j, l);
          dy(i * n + j, k * n + l) = id(i, k) * d(j, l);
        }
  Eigen::MatrixXd g(2 * n * n, n * n);
  g << dx, dy;
  const Eigen::VectorXd rhs = v.data().matrix();
  const Eigen::VectorXd phi = g.completeOrthogonalDecomposition().solve(rhs);
  return RealField(v.grid(), 2, (rhs - g * phi).array());
}

RealField solenoidal_field(std::size_t n)
{
  const auto g = GridSpec::periodic({n, n});
  const auto u = sample(g, [](const auto& x) { return 2 * kPi * std::sin(2 * kPi * x[0]) * std::cos(2 * kPi * x[1]); });
  const auto w = sample(g, [](const auto& x) { return -2 * kPi * std::cos(2 * kPi * x[0]) * std::sin(2 * kPi * x[1]); });
  return concat_channels({u, w});
}

RealField with_data(const RealField& like, Eigen::ArrayXd data)
{
  return RealField(like.grid(), like.channels(), std::move(data));
}

} // namespace

TEST_CASE("HermitianModeSet counts and placement")
{
  const auto box = HermitianModeSet::truncated({3, 3});
  CHECK(box.size() == (25 + 1) / 2);
  CHECK(box.mode(0) == std::vector<long>{0, 0});
  for (std::size_t i = 1; i < box.size(); ++i) {
    const auto& m = box.mode(i);
    CHECK((m[0] > 0 || (m[0] == 0 && m[1] > 0)));
  }
  // 4x4 grid only represents |m| <= 1 along each axis
  CHECK(box.placement({4, 4}).size() == (9 + 1) / 2);
  CHECK(box.placement({5, 8}).size() == box.size());

  for (const auto& sizes : {std::vector<std::size_t>{8, 8}, {7, 6}, {5, 5}, {4, 6, 3}}) {
    const auto lat = HermitianModeSet::lattice(sizes);
    std::size_t points = 1, self = 1;
    for (auto n : sizes) {
      points *= n;
      self *= (n % 2 == 0) ? 2 : 1;
    }
    CHECK(lat.size() == (points + self) / 2);
    const auto place = lat.placement(sizes);
    std::vector<int> hit(points, 0);
    for (const auto& p : place) {
      ++hit[p.flat];
      if (p.mirror != p.flat)
        ++hit[p.mirror];
    }
    CHECK(std::all_of(hit.begin(), hit.end(), [](int h) { return h == 1; }));
  }
  CHECK_THROWS_AS(HermitianModeSet::lattice({8, 8}).placement({8, 9}), ContractError);
}

TEST_CASE("mass projection: analytic examples")
{
  const auto sol = solenoidal_field(32);
  CHECK(max_abs_diff(project_divergence_free(sol), sol) < 1e-10);

  const auto g = GridSpec::periodic({32, 32});
  const auto phix = sample(g, [](const auto& x) { return 2 * kPi * std::cos(2 * kPi * x[0]) * std::cos(2 * kPi * x[1]); });
  const auto phiy = sample(g, [](const auto& x) { return -2 * kPi * std::sin(2 * kPi * x[0]) * std::sin(2 * kPi * x[1]); });
  CHECK(max_abs(project_divergence_free(concat_channels({phix, phiy})).data()) < 1e-10);

  Rng rng(1);
  const auto v = random_field(g, 2, rng);
  CHECK(divergence_loss(project_divergence_free(v)) < 1e-10);
}

TEST_CASE("mass projection matches the dense least-squares oracle on 8x8")
{
  Rng rng(2);
  for (int trial = 0; trial < 3; ++trial) {
    const auto v = random_field(GridSpec::periodic({8, 8}), 2, rng);
    CHECK(max_abs_diff(project_divergence_free(v), dense_helmholtz(v)) < 1e-10);
  }
}

TEST_CASE("mass projection is a symmetric idempotent linear map")
{
  const auto grid = GridSpec::periodic({8, 8});
  const Eigen::Index n = 2 * 64;
  Eigen::MatrixXd p(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    RealField e(grid, 2);
    e.data()[j] = 1.0;
    p.col(j) = project_divergence_free(e).data().matrix();
  }
  CHECK((p - p.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((p * p - p).cwiseAbs().maxCoeff() < 1e-12);

  Rng rng(3);
  for (const auto& sizes : {std::vector<std::size_t>{16, 16}, {12, 10}, {9, 7}}) {
    const auto g = GridSpec::periodic(sizes);
    const auto a = random_field(g, 2, rng);
    const auto b = random_field(g, 2, rng);
    const auto pa = project_divergence_free(a);
    CHECK(rel_diff(project_divergence_free(pa), pa) < 1e-12);
    const auto mix = with_data(a, 0.3 * a.data() - 1.7 * b.data());
    const auto pb = project_divergence_free(b);
    CHECK(rel_diff(project_divergence_free(mix), with_data(a, 0.3 * pa.data() - 1.7 * pb.data())) < 1e-12);
    CHECK(std::abs(inner(pa, b) - inner(a, pb)) < 1e-10 * std::abs(inner(a, b) + 1.0));
    CHECK(divergence_loss(pa) < 1e-10);
  }
}

TEST_CASE("mass projection leaves the zero mode untouched")
{
  Rng rng(4);
  auto v = random_field(GridSpec::periodic({16, 16}), 2, rng);
  v.data() += 3.0;
  const auto sv = fft_forward(v);
  const auto sp = fft_forward(project_divergence_free(v));
  for (Eigen::Index c = 0; c < 2; ++c)
    CHECK(std::abs(sp(c, 0) - sv(c, 0)) < 1e-12 * std::abs(sv(c, 0)));
}

TEST_CASE("spatiotemporal mass projection")
{
  const GridSpec g({{"t", 8, 1.0, AxisKind::temporal}, {"x", 10, 1.0}, {"y", 8, 2.0}});
  Rng rng(5);
  const auto v = random_field(g, 3, rng);
  MassProjectionConfig cfg{MassMode::spatiotemporal3d, std::nullopt};
  const auto p = project_divergence_free(v, cfg);
  CHECK(divergence_loss(p) < 1e-10);
  CHECK(rel_diff(project_divergence_free(p, cfg), p) < 1e-12);
  CHECK_THROWS_AS(project_divergence_free(v), ContractError);
  CHECK_THROWS_AS(project_divergence_free(channel_slice(v, 0, 2), cfg), ContractError);
}

TEST_CASE("mass projection with spectral multipliers")
{
  Rng rng(6);
  const auto g = GridSpec::periodic({16, 16});
  const auto v = random_field(g, 2, rng);
  MassProjectionConfig cfg;
  cfg.w_spe = HermitianMultiplier::unit(HermitianModeSet::truncated({5, 5}), 2);
  CHECK(max_abs_diff(project_divergence_free(v, cfg), project_divergence_free(v)) < 1e-12);
  cfg.w_spe = random_w_spe({5, 5}, 2, rng);
  const auto p = project_divergence_free(v, cfg);
  CHECK(divergence_loss(p) < 1e-10);
  CHECK(max_abs_diff(p, project_divergence_free(v)) > 1e-3);
}

TEST_CASE("momentum kernel symmetry")
{
  Rng rng(7);
  for (const auto& lat : {std::vector<std::size_t>{8, 8}, {9, 6}, {7, 7}, {6, 5, 4}}) {
    const auto k = RotationInvariantKernel::random(lat, 2, rng);
    std::size_t points = 1;
    for (auto n : lat)
      points *= n;
    for (Eigen::Index c = 0; c < 2; ++c) {
      const auto kc = k.centered(c);
      std::vector<std::size_t> r(lat.size());
      bool exact = true;
      for (std::size_t p = 0; p < points; ++p) {
        const auto idx = unravel(p, lat);
        for (std::size_t a = 0; a < lat.size(); ++a)
          r[a] = rotate180(idx[a], lat[a]);
        exact = exact && kc[static_cast<Eigen::Index>(ravel(r, lat))] == std::conj(kc[static_cast<Eigen::Index>(p)]);
      }
      CHECK(exact);

      // centred construction agrees with the FFT-order expansion
      SpectralField s(GridSpec::periodic(lat), 1, k.multiplier.expand(lat, c, 0.0));
      const auto shifted = fft_center_shift(s, ShiftDirection::forward);
      CHECK((shifted.channel(0) - kc).abs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("InvariantConvP4")
{
  const InvariantConvP4 w{0.6, 0.1, 0.05};
  const auto s = w.stencil();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(s[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] ==
            s[static_cast<std::size_t>(2 - j)][static_cast<std::size_t>(i)]);

  Rng rng(8);
  const auto f = random_field(GridSpec::periodic({6, 7}), 2, rng);
  CHECK(max_abs_diff(InvariantConvP4{}.apply(f), f) == 0.0);

  RealField expected(f.grid(), 2);
  for (long di = -1; di <= 1; ++di)
    for (long dj = -1; dj <= 1; ++dj)
      expected.data() += s[static_cast<std::size_t>(di + 1)][static_cast<std::size_t>(dj + 1)] *
                         circular_shift(f, {-di, -dj}).data();
  CHECK(max_abs_diff(w.apply(f), expected) < 1e-14);

  // self-adjoint
  const auto h = random_field(f.grid(), 2, rng);
  CHECK(std::abs(inner(w.apply(f), h) - inner(f, w.apply(h))) < 1e-12);
}

TEST_CASE("momentum projection")
{
  Rng rng(9);
  const auto g = GridSpec::periodic({16, 16});
  const auto v = random_field(g, 2, rng);

  SUBCASE("unit kernel, identity stencil, no padding doubles the input")
  {
    MomentumProjection m;
    m.padding = std::vector<std::size_t>{0, 0};
    m.kernel = RotationInvariantKernel::unit({16, 16}, 2);
    RealField twice = v;
    twice.data() *= 2.0;
    CHECK(max_abs_diff(project_momentum(v, m), twice) < 1e-12);
  }
  SUBCASE("zero input gives zero output")
  {
    MomentumProjection m;
    m.kernel = RotationInvariantKernel::random(momentum_lattice(g, m), 2, rng);
    m.w_inv = {0.5, 0.1, 0.02};
    CHECK(max_abs(project_momentum(RealField(g, 2), m).data()) == 0.0);
  }
  SUBCASE("outputs stay real")
  {
    MomentumProjection m;
    const auto lat = momentum_lattice(g, m);
    CHECK(lat == std::vector<std::size_t>{20, 20});
    m.kernel = RotationInvariantKernel::random(lat, 2, rng);
    auto s = fft_center_shift(fft_forward(zero_pad(v, {4, 4})), ShiftDirection::forward);
    for (Eigen::Index c = 0; c < 2; ++c)
      s.channel(c) *= m.kernel->centered(c);
    const auto back = fft_inverse_complex(fft_center_shift(s, ShiftDirection::inverse));
    CHECK(back.data().imag().abs().maxCoeff() < 1e-12 * back.data().real().abs().maxCoeff());
    CHECK_NOTHROW(project_momentum(v, m));
  }
  SUBCASE("lattice mismatch is rejected")
  {
    MomentumProjection m;
    m.kernel = RotationInvariantKernel::unit({16, 16}, 2);
    CHECK_THROWS_AS(project_momentum(v, m), ContractError);
  }
}

TEST_CASE("momentum projection commutes with circular shifts")
{
  Rng rng(10);
  const auto g = GridSpec::periodic({32, 32});
  MomentumProjection m;
  m.padding = std::vector<std::size_t>{0, 0};
  m.kernel = RotationInvariantKernel::random({32, 32}, 2, rng);
  m.w_inv = {0.7, 0.1, 0.05};
  for (int trial = 0; trial < 3; ++trial) {
    const auto v = random_field(g, 2, rng);
    const std::vector<long> shift{static_cast<long>(rng() % 32), static_cast<long>(rng() % 32)};
    const auto a = project_momentum(circular_shift(v, shift), m);
    const auto b = circular_shift(project_momentum(v, m), shift);
    CHECK(max_abs_diff(a, b) < 1e-10);
  }
}

TEST_CASE("compose_projection")
{
  Rng rng(11);
  const auto g = GridSpec::periodic({16, 16});
  const auto v = random_field(g, 2, rng);
  CHECK(max_abs_diff(compose_projection(v, Selector::none), v) == 0.0);

  ProjectionParams params;
  params.momentum.padding = std::vector<std::size_t>{0, 0};
  params.momentum.kernel = RotationInvariantKernel::unit({16, 16}, 2);
  const auto both = compose_projection(v, Selector::both, params);
  RealField expected = project_divergence_free(v);
  expected.data() *= 2.0;
  CHECK(max_abs_diff(both, expected) < 1e-12);
  CHECK(divergence_loss(both) < 1e-10);

  const auto sol = solenoidal_field(16);
  CHECK(max_abs_diff(compose_projection(sol, Selector::mass), sol) < 1e-10);
  CHECK_THROWS_AS(compose_projection(channel_slice(v, 0, 1), Selector::mass), ContractError);

  CHECK(parse_selector("both") == Selector::both);
  CHECK(to_string(Selector::momentum) == "momentum");
  CHECK_THROWS_AS(parse_selector("mass+"), UsageError);
}

TEST_CASE("projection gradients match finite differences")
{
  Rng rng(12);
  const auto g = GridSpec::periodic({8, 8});
  ProjectionParams params;
  params.mass.w_spe = random_w_spe({3, 3}, 2, rng);
  params.momentum.kernel = RotationInvariantKernel::random(momentum_lattice(g, params.momentum), 2, rng);
  params.momentum.w_inv = {0.8, 0.07, 0.02};
  const auto v = random_field(g, 2, rng);
  const auto w = random_field(g, 2, rng);
  const double h = 1e-6;

  for (auto sel : {Selector::mass, Selector::momentum, Selector::both}) {
    auto loss = [&](const RealField& x, const ProjectionParams& p) { return inner(w, compose_projection(x, sel, p)); };
    const auto grad = compose_projection_vjp(v, w, sel, params);

    for (Eigen::Index i : {0, 17, 63, 100}) {
      RealField plus = v, minus = v;
      plus.data()[i] += h;
      minus.data()[i] -= h;
      const double fd = (loss(plus, params) - loss(minus, params)) / (2 * h);
      CHECK(std::abs(fd - grad.input.data()[i]) < 1e-6 * std::max(1.0, std::abs(fd)));
    }

    auto check = [&](auto get, const Eigen::MatrixXcd& analytic) {
      REQUIRE(analytic.size() > 0);
      for (Eigen::Index i = 0; i < analytic.rows(); i += 3) {
        for (int part = 0; part < 2; ++part) {
          ProjectionParams pp = params, pm = params;
          const cd step = part == 0 ? cd(h, 0) : cd(0, h);
          get(pp)(i, 1) += step;
          get(pm)(i, 1) -= step;
          const double fd = (loss(v, pp) - loss(v, pm)) / (2 * h);
          const double an = part == 0 ? analytic(i, 1).real() : analytic(i, 1).imag();
          CHECK(std::abs(fd - an) < 1e-6 * std::max(1.0, std::abs(fd)));
        }
      }
    };
    if (sel != Selector::momentum)
      check([](ProjectionParams& p) -> Eigen::MatrixXcd& { return p.mass.w_spe->weights; }, grad.w_spe);
    if (sel != Selector::mass)
      check([](ProjectionParams& p) -> Eigen::MatrixXcd& { return p.momentum.kernel->multiplier.weights; }, grad.kernel);
  }
}

TEST_CASE("atmosphere flux transform")
{
  const auto g = GridSpec::periodic({6, 8});
  Eigen::ArrayXd theta(6);
  for (int i = 0; i < 6; ++i)
    theta[i] = kPi * (i + 0.5) / 6.0;
  const double radius = 6.371;

  RealField zero(g, 1), h(g, 1);
  h.data().setConstant(2.0);
  const auto c = atmos_to_conserved(zero, zero, h, radius, theta);
  CHECK(max_abs(c.channel(0)) == 0.0);
  CHECK(max_abs(c.channel(1)) == 0.0);
  CHECK(c(2, 8 * 3 + 5) == doctest::Approx(radius * 2.0 * std::sin(theta[3])));

  Rng rng(13);
  const auto ux = random_field(g, 1, rng);
  const auto uy = random_field(g, 1, rng);
  RealField hr = random_field(g, 1, rng);
  hr.data() = hr.data().abs() + 0.5;
  const auto cr = atmos_to_conserved(ux, uy, hr, radius, theta);
  const auto back = atmos_from_conserved(cr, radius, theta);
  CHECK(rel_diff(back.ux, ux) < 1e-12);
  CHECK(rel_diff(back.uy, uy) < 1e-12);
  CHECK(rel_diff(back.h, hr) < 1e-12);
  for (Eigen::Index p = 0; p < cr.points(); ++p)
    CHECK(radius * cr(1, p) / cr(2, p) == doctest::Approx(uy(0, p)).epsilon(1e-12));

  Eigen::ArrayXd polar = theta;
  polar[0] = 0.0;
  CHECK_THROWS_AS(atmos_to_conserved(ux, uy, hr, radius, polar), ContractError);
  RealField bad = cr;
  bad(2, 4) = 0.0;
  CHECK_THROWS_AS(atmos_from_conserved(bad, radius, theta), ContractError);
}
