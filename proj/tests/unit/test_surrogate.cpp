#include <doctest.h>

#include "pcno/spectral/calculus.hpp"
#include "pcno/spectral/field_ops.hpp"
#include "pcno/surrogate/model_io.hpp"
#include "pcno/surrogate/optimizer.hpp"
#include "pcno/surrogate/train.hpp"
#include "test_util.hpp"

using namespace pcno;
using namespace pcno::testing;

namespace {

FnoHyper small_hyper(std::vector<std::size_t> modes, std::size_t width, Eigen::Index in_ch, Eigen::Index out_ch)
{
  FnoHyper h;
  h.layers = 1;
  h.modes = std::move(modes);
  h.width = width;
  h.in_ch = in_ch;
  h.out_ch = out_ch;
  return h;
}

double divergence_loss(const RealField& v)
{
  return divergence(v).data().abs().mean();
}

// Perturbs every weight so that unit-initialised projection parameters are generic.
void jitter(FnoParams& p, Rng& rng, double scale)
{
  Eigen::VectorXd flat = flatten(p);
  for (Eigen::Index i = 0; i < flat.size(); ++i)
    flat[i] += scale * uniform(rng, -1.0, 1.0);
  unflatten(p, flat);
}

double sample_loss(const FnoParams& p, const Sample& s)
{
  return relative_mse(pcno_forward(p, s.input, s.cond), s.target);
}

// Central differences on up to `per_group` coordinates of every parameter group.
void check_gradient(const FnoParams& p, const Sample& s, std::size_t per_group)
{
  Eigen::VectorXd grad;
  loss_and_gradient(p, {s}, {0}, grad);
  const Eigen::VectorXd theta = flatten(p);
  const double h = 1e-6;
  for (const auto& g : parameter_groups(p)) {
    const std::size_t stride = std::max<std::size_t>(1, g.count / per_group);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < g.count; k += stride) {
      const auto i = static_cast<Eigen::Index>(g.offset + k);
      FnoParams q = p;
      Eigen::VectorXd t = theta;
      t[i] = theta[i] + h;
      unflatten(q, t);
      const double up = sample_loss(q, s);
      t[i] = theta[i] - h;
      unflatten(q, t);
      const double down = sample_loss(q, s);
      const double fd = (up - down) / (2 * h);
      num += (fd - grad[i]) * (fd - grad[i]);
      den += fd * fd;
    }
    INFO("group " << g.name);
    REQUIRE(den > 0.0);
    CHECK(std::sqrt(num / den) < 1e-5);
  }
}

} // namespace

TEST_CASE("fno_forward: degenerate weights")
{
  Rng rng(1);
  const auto grid = GridSpec::periodic({8, 8});
  const auto u = random_field(grid, 1, rng);

  SUBCASE("zero weights except the head bias give a constant")
  {
    auto p = init_fno(small_hyper({3, 3}, 4, 2, 2), rng);
    p = zeros_like(p);
    p.head2_b << 0.25, -1.5;
    const auto out = fno_forward(p, u, {0.7});
    CHECK(max_abs(out.channel(0) - 0.25) == 0.0);
    CHECK(max_abs(out.channel(1) + 1.5) == 0.0);
  }
  SUBCASE("linear single layer reduces to lift then head")
  {
    auto h = small_hyper({3, 3}, 5, 2, 1);
    h.activation = Activation::identity;
    auto p = init_fno(h, rng);
    p.layers[0].kernel.setZero();
    p.layers[0].w.setIdentity();
    p.layers[0].b.setZero();
    const double c = 0.3;
    const auto out = fno_forward(p, u, {c});
    const Eigen::MatrixXd a = p.head2_w * p.head1_w * p.lift_w;
    const Eigen::VectorXd bias = p.head2_w * (p.head1_w * p.lift_b + p.head1_b) + p.head2_b;
    const Eigen::ArrayXd expected = a(0, 0) * u.data() + a(0, 1) * c + bias[0];
    CHECK((out.data() - expected).abs().maxCoeff() < 1e-12);
  }
  SUBCASE("shape errors")
  {
    auto p = init_fno(small_hyper({3, 3}, 4, 2, 1), rng);
    CHECK_THROWS_AS(fno_forward(p, u, {}), ContractError);
    CHECK_THROWS_AS(fno_forward(p, random_field(GridSpec::periodic({8}), 1, rng), {0.0}), ContractError);
  }
}

TEST_CASE("PCNO forward properties")
{
  Rng rng(2);
  const auto grid = GridSpec::periodic({16, 16});
  auto p = init_fno(small_hyper({5, 5}, 6, 3, 2), rng);
  p.layers.push_back(p.layers[0]);
  p.hyper.layers = 2;
  const auto u = random_field(grid, 2, rng);
  const std::vector<double> cond{0.4};
  const auto plain = fno_forward(p, u, cond);

  SUBCASE("selector none is fno_forward")
  {
    CHECK(max_abs_diff(pcno_forward(p, u, cond), plain) == 0.0);
  }
  SUBCASE("mass projection is divergence-free for any weights")
  {
    attach_projection(p, Selector::mass, grid, true);
    jitter(p, rng, 0.3);
    const auto out = pcno_forward(p, u, cond);
    CHECK(divergence_loss(out) < 1e-10);
    CHECK(divergence_loss(plain) > 1e-3);
  }
  SUBCASE("both with a unit kernel doubles the mass projection")
  {
    attach_projection(p, Selector::both, grid, false);
    const auto out = pcno_forward(p, u, cond);
    RealField expected = project_divergence_free(plain);
    expected.data() *= 2.0;
    CHECK(max_abs_diff(out, expected) < 1e-12);
  }
  SUBCASE("shift equivariance of the full map")
  {
    attach_projection(p, Selector::both, grid, true);
    p.projection.momentum.padding = std::vector<std::size_t>{0, 0};
    p.projection.momentum.kernel = RotationInvariantKernel::random({16, 16}, 2, rng);
    p.projection.momentum.w_inv = {0.5, 0.2, 0.05};
    jitter(p, rng, 0.1);
    const std::vector<long> shift{3, -5};
    const auto a = pcno_forward(p, circular_shift(u, shift), cond);
    const auto b = circular_shift(pcno_forward(p, u, cond), shift);
    CHECK(max_abs_diff(a, b) < 1e-10);
  }
}

TEST_CASE("relative MSE loss")
{
  Rng rng(3);
  const auto t = random_field(GridSpec::periodic({6, 6}), 2, rng);
  RealField zero(t.grid(), 2);
  RealField twice = t;
  twice.data() *= 2.0;
  CHECK(relative_mse(t, t) == 0.0);
  CHECK(relative_mse(zero, t) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(relative_mse(twice, t) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(loss_relative_mse({t, zero}, {t, t}) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_AS(relative_mse(t, zero), ContractError);
}

TEST_CASE("backprop matches finite differences")
{
  Rng rng(4);
  SUBCASE("2D, both projections, every group")
  {
    const auto grid = GridSpec::periodic({16, 16});
    auto p = init_fno(small_hyper({4, 4}, 4, 3, 2), rng);
    attach_projection(p, Selector::both, grid, true);
    p.projection.momentum.w_inv = {0.6, 0.1, 0.05};
    jitter(p, rng, 0.2);
    const Sample s{random_field(grid, 2, rng), {0.3}, random_field(grid, 2, rng)};
    check_gradient(p, s, 12);
  }
  SUBCASE("1D, no projection")
  {
    const auto grid = GridSpec::periodic({16});
    const Sample s{random_field(grid, 1, rng), {}, random_field(grid, 1, rng)};
    check_gradient(init_fno(small_hyper({5}, 3, 1, 1), rng), s, 20);
  }
  SUBCASE("space-time grid with time padding and the 3D mass projection")
  {
    const GridSpec grid({{"t", 6, 6.0, AxisKind::temporal},
                         {"x", 8, 1.0, AxisKind::spatial},
                         {"y", 8, 1.0, AxisKind::spatial}});
    auto h = small_hyper({3, 3, 3}, 3, 1, 3);
    h.time_padding = 2;
    auto p = init_fno(h, rng);
    attach_projection(p, Selector::mass, grid, true, MassMode::spatiotemporal3d);
    jitter(p, rng, 0.2);
    const Sample s{random_field(grid, 1, rng), {}, random_field(grid, 3, rng)};
    check_gradient(p, s, 8);
  }
  SUBCASE("input gradient")
  {
    const auto grid = GridSpec::periodic({8, 8});
    auto p = init_fno(small_hyper({3, 3}, 3, 2, 2), rng);
    attach_projection(p, Selector::mass, grid, false);
    const auto u = random_field(grid, 2, rng);
    const auto g = random_field(grid, 2, rng);
    FnoTape tape;
    pcno_forward(p, u, {}, &tape);
    RealField gu;
    pcno_backward(p, tape, g, &gu);
    const auto objective = [&](const RealField& x) { return (pcno_forward(p, x, {}).data() * g.data()).sum(); };
    for (Eigen::Index i : {0, 17, 70, 127}) {
      RealField up = u, down = u;
      up.data()[i] += 1e-6;
      down.data()[i] -= 1e-6;
      const double fd = (objective(up) - objective(down)) / 2e-6;
      CHECK(std::abs(fd - gu.data()[i]) < 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("gradient structure")
{
  Rng rng(5);
  const auto grid = GridSpec::periodic({8, 8});
  auto p = init_fno(small_hyper({3, 3}, 4, 1, 1), rng);
  const auto u = random_field(grid, 1, rng);
  FnoTape tape;
  const auto out = pcno_forward(p, u, {}, &tape);

  Eigen::VectorXd grad;
  loss_and_gradient(p, {{u, {}, out}}, {0}, grad);
  CHECK(grad.cwiseAbs().maxCoeff() == 0.0);

  const auto g1 = random_field(grid, 1, rng);
  const auto g2 = random_field(grid, 1, rng);
  RealField mix = g1;
  mix.data() = 2.5 * g1.data() - 0.75 * g2.data();
  const Eigen::VectorXd a = flatten(pcno_backward(p, tape, g1));
  const Eigen::VectorXd b = flatten(pcno_backward(p, tape, g2));
  const Eigen::VectorXd c = flatten(pcno_backward(p, tape, mix));
  CHECK((c - (2.5 * a - 0.75 * b)).cwiseAbs().maxCoeff() < 1e-12 * std::max(1.0, c.cwiseAbs().maxCoeff()));
}

TEST_CASE("parameters: count, flattening and serialization")
{
  Rng rng(6);
  FnoHyper h = small_hyper({4, 4}, 5, 3, 2);
  h.layers = 2;
  const auto p = init_fno(h, rng);
  const auto q = init_fno(h, rng);
  const std::size_t free = HermitianModeSet::truncated({4, 4}).size();
  CHECK(free == 25);
  const std::size_t expected = 5 * 3 + 5 + 2 * (2 * 25 * 25 + 25 + 5) + 25 + 5 + 2 * 5 + 2;
  CHECK(parameter_count(p) == expected);
  CHECK(parameter_count(q) == expected);

  FnoParams r = zeros_like(p);
  unflatten(r, flatten(p));
  CHECK(flatten(r) == flatten(p));

  const auto grid = GridSpec::periodic({12, 12});
  FnoParams full = p;
  attach_projection(full, Selector::both, grid, true);
  full.projection.momentum.w_inv = {0.5, 0.125, 0.0625};
  full.projection.momentum.padding = std::vector<std::size_t>{4, 4};
  full.projection.momentum.kernel = RotationInvariantKernel::random({16, 16}, 2, rng);
  jitter(full, rng, 1e-3);

  const auto path = std::filesystem::temp_directory_path() / "pcno_model_test.bin";
  save_fno(full, path, {{"t_in", "1"}});
  const auto c = read_container(path);
  CHECK(kv_require(c.header, "t_in") == "1");
  const auto back = load_fno(path);
  CHECK(flatten(back) == flatten(full));
  CHECK(back.hyper == full.hyper);
  CHECK(back.selector == Selector::both);
  CHECK(back.projection.momentum.padding == full.projection.momentum.padding);
  CHECK(back.projection.momentum.w_inv.edge == 0.125);
  CHECK(encode_container(fno_to_container(back, {{"t_in", "1"}})) == read_text_file(path));

  const auto u = random_field(grid, 2, rng);
  CHECK(max_abs_diff(pcno_forward(back, u, {1.0}), pcno_forward(full, u, {1.0})) == 0.0);

  const auto bytes = read_text_file(path);
  CHECK_THROWS_AS(decode_container("nonsense"), FormatError);
  CHECK_THROWS_AS(decode_container(bytes.substr(0, bytes.size() - 3)), FormatError);
  CHECK_THROWS_AS(decode_container(bytes + "x"), FormatError);
  std::filesystem::remove(path);
}

TEST_CASE("optimizer")
{
  CHECK(cosine_lr(0.1, 0, 10) == 0.1);
  CHECK(cosine_lr(0.1, 5, 10) == doctest::Approx(0.05).epsilon(1e-14));
  CHECK(cosine_lr(0.1, 10, 10) == doctest::Approx(0.0));

  AdamW opt(2, {.weight_decay = 0.5});
  Eigen::VectorXd x(2), g(2);
  x << 1.0, -2.0;
  g << 3.0, -0.5;
  opt.step(x, g, 0.1);
  // first step: m_hat / sqrt(v_hat) = sign(g) up to eps; decay applied first
  CHECK(x[0] == doctest::Approx(1.0 * 0.95 - 0.1 * 3.0 / (3.0 + 1e-8)).epsilon(1e-14));
  CHECK(x[1] == doctest::Approx(-2.0 * 0.95 + 0.1 * 0.5 / (0.5 + 1e-8)).epsilon(1e-14));
}

TEST_CASE("training and rollout")
{
  Rng rng(7);
  const GridSpec frame = GridSpec::periodic({16, 16});
  std::vector<RealField> frames;
  for (int i = 0; i < 9; ++i) {
    const double a = uniform(rng, 0.5, 1.5), b = uniform(rng, -1.0, 1.0);
    frames.push_back(sample(frame, [&](const auto& x) {
      return a * std::sin(2 * kPi * x[0]) + b * std::cos(2 * kPi * (x[0] + 2 * x[1])) + 0.3;
    }));
  }
  const RealField traj = stack_frames(frames, {"t", 9, 9.0, AxisKind::temporal});

  SUBCASE("sample builders")
  {
    const auto m = markov_samples(traj, 2, {0.1});
    REQUIRE(m.size() == 7);
    CHECK(m[0].input.channels() == 2);
    CHECK(max_abs_diff(channel_slice(m[3].input, 1, 1), frames[4]) == 0.0);
    CHECK(max_abs_diff(m[3].target, frames[5]) == 0.0);
    const auto o = one_shot_sample(traj, 1, 4, {});
    CHECK(o.input.grid().sizes() == std::vector<std::size_t>{4, 16, 16});
    CHECK(max_abs_diff(time_slice(o.input, 3), frames[0]) == 0.0);
    CHECK(max_abs_diff(time_slice(o.target, 2), frames[3]) == 0.0);
    CHECK_THROWS_AS(one_shot_sample(traj, 4, 6, {}), ContractError);
  }

  std::vector<Sample> identity;
  for (const auto& f : frames)
    identity.push_back({f, {}, f});
  auto h = small_hyper({4, 4}, 8, 1, 1);
  const auto init = init_fno(h, rng);
  TrainConfig cfg;
  cfg.batch = 3;
  cfg.lr = 3e-2;
  cfg.seed = 11;

  SUBCASE("zero epochs leave parameters untouched")
  {
    cfg.epochs = 0;
    const auto r = train(init, identity, cfg);
    CHECK(r.losses.empty());
    CHECK(flatten(r.params) == flatten(init));
  }
  SUBCASE("identity map is learnable, deterministic and thread independent")
  {
    cfg.epochs = 67; // 3 batches per epoch -> 201 steps
    const auto r = train(init, identity, cfg);
    REQUIRE(r.losses.size() == 201);
    CHECK(r.losses.back() < 1e-4);
    cfg.threads = 3;
    const auto again = train(init, identity, cfg);
    CHECK(again.losses == r.losses);
    CHECK(flatten(again.params) == flatten(r.params));

    const auto roll = rollout(r.params, frames[2], {}, 5);
    CHECK(roll.grid().sizes() == std::vector<std::size_t>{5, 16, 16});
    for (std::size_t t = 0; t < 5; ++t)
      CHECK(rel_diff(time_slice(roll, t), frames[2]) < 0.05);
  }
  SUBCASE("strategy must match the samples")
  {
    cfg.strategy = Strategy::one_shot;
    CHECK_THROWS_AS(train(init, identity, cfg), ContractError);
  }
  SUBCASE("divergence guard")
  {
    std::vector<Sample> hard{{frames[0], {}, frames[1]}};
    hard[0].target.data() *= 1e-6;
    cfg.epochs = 1;
    cfg.batch = 1;
    CHECK_THROWS_AS(train(init, hard, cfg), NumericalError);
  }
  SUBCASE("rollout")
  {
    auto p = init_fno(small_hyper({4, 4}, 4, 4, 2), rng);
    attach_projection(p, Selector::mass, frame, false);
    const auto u0 = random_field(frame, 4, rng);
    const auto roll = rollout(p, u0, {}, 4);
    CHECK(max_abs_diff(time_slice(roll, 0), pcno_forward(p, u0, {})) == 0.0);
    const auto second = pcno_forward(p, concat_channels({channel_slice(u0, 2, 2), time_slice(roll, 0)}), {});
    CHECK(max_abs_diff(time_slice(roll, 1), second) == 0.0);
    for (std::size_t t = 0; t < 4; ++t)
      CHECK(divergence_loss(time_slice(roll, t)) < 1e-10);
    const auto single = rollout(p, u0, {}, 1);
    CHECK(single.grid().size(0) == 1);
    CHECK(max_abs_diff(time_slice(single, 0), pcno_forward(p, u0, {})) == 0.0);
    CHECK_THROWS_AS(rollout(p, u0, {}, 0), ContractError);
  }
}
