#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "pcno/consistency/sampling.hpp"
#include "pcno/consistency/training.hpp"
#include "pcno/spectral/field_ops.hpp"
#include "pcno/surrogate/train.hpp"
#include "test_util.hpp"

using namespace pcno;
using namespace pcno::testing;

namespace {

// Direct transcription of the rho-warped grid, kept separate from the library.
double karras_t(std::size_t i, std::size_t n)
{
  const double a = std::pow(0.002, 1.0 / 7.0), b = std::pow(80.0, 1.0 / 7.0);
  return std::pow(a + static_cast<double>(i - 1) / static_cast<double>(n - 1) * (b - a), 7.0);
}

GridSpec plane(std::size_t n)
{
  return GridSpec({{"y", n, 1.0, AxisKind::spatial}, {"x", n, 1.0, AxisKind::spatial}});
}

ToyDenoiser small_denoiser(Eigen::Index target, Eigen::Index cond, std::size_t hidden, std::uint64_t seed)
{
  DenoiserHyper h;
  h.target_size = target;
  h.cond_size = cond;
  h.hidden = hidden;
  h.embed = 4;
  Rng rng = make_stream(seed, "ct/init");
  return init_denoiser(h, rng);
}

struct ToyTask
{
  FnoParams pcno;
  std::vector<CtSample> data;
};

// Residual y - u_hat is N(mu, sigma^2) per pixel; all samples share the 4x4 grid.
ToyTask toy_task(std::size_t count, double mu, double sigma, std::uint64_t seed)
{
  FnoHyper h;
  h.layers = 1;
  h.modes = {2, 2};
  h.width = 4;
  Rng rng = make_stream(seed, "toy");
  ToyTask task{init_fno(h, rng), {}};
  std::vector<Sample> raw;
  for (std::size_t n = 0; n < count; ++n) {
    const RealField u = random_field(plane(4), 1, rng);
    raw.push_back({u, {}, u});
  }
  task.data = ct_samples(task.pcno, raw);
  for (auto& s : task.data)
    s.y = RealField(s.u_hat.grid(), 1, s.u_hat.data() + mu + sigma * standard_normal(rng, 16).array());
  return task;
}

ConsistencyModel model_for(const ToyTask& task, CtVariant variant, std::size_t hidden)
{
  ConsistencyModel m;
  m.variant = variant;
  m.normalizer = fit_normalizer(variant, task.data);
  m.denoiser = small_denoiser(16, 32, hidden, 5);
  return m;
}

} // namespace

TEST_CASE("timestep endpoints and monotonicity")
{
  for (std::size_t n = 2; n <= 1281; ++n) {
    CHECK(timestep(1, n) == 0.002);
    CHECK(timestep(n, n) == 80.0);
    double prev = timestep(1, n);
    bool increasing = true;
    for (std::size_t i = 2; i <= n; ++i) {
      const double t = timestep(i, n);
      increasing = increasing && t > prev;
      prev = t;
    }
    CHECK(increasing);
  }
  CHECK(timestep(5, 10) == doctest::Approx(1.501741979068008).epsilon(1e-13));
  for (std::size_t i = 2; i < 20; ++i)
    CHECK(timestep(i, 20) == doctest::Approx(karras_t(i, 20)).epsilon(1e-13));
  CHECK_THROWS_AS(timestep(0, 5), ContractError);
  CHECK_THROWS_AS(timestep(6, 5), ContractError);
  CHECK_THROWS_AS(timestep(1, 1), ContractError);
}

TEST_CASE("discretization curriculum")
{
  CHECK(curriculum_period(800) == 100);
  CHECK(curriculum_n(0, 800) == 11);
  CHECK(curriculum_n(99, 800) == 11);
  CHECK(curriculum_n(100, 800) == 21);
  CHECK(curriculum_n(700, 800) == 1281);
  CHECK(curriculum_n(799, 800) == 1281);
  CHECK(curriculum_n(0, 1) == 11);
  CHECK(curriculum_period(3) == 1);
  for (std::size_t total : {1, 7, 100, 1000, 5000}) {
    std::size_t prev = 0;
    for (std::size_t k = 0; k < total; ++k) {
      const std::size_t n = curriculum_n(k, total);
      CHECK_LE(n, 1281);
      CHECK_GE(n, prev);
      prev = n;
    }
  }
  CHECK(curriculum_n(1'000'000, 2'000'000, {3, 20}) == 7);
  CHECK_THROWS_AS(curriculum_n(10, 10), ContractError);
}

TEST_CASE("lognormal index weights and sampler")
{
  const auto w2 = index_weights(2);
  REQUIRE(w2.size() == 1);
  CHECK(w2[0] == 1.0);
  Rng rng = make_stream(1, "index");
  for (int k = 0; k < 100; ++k)
    CHECK(sample_index(2, {}, rng) == 1);

  for (std::size_t n : {3, 11, 20, 1281}) {
    const auto w = index_weights(n);
    REQUIRE(w.size() == n - 1);
    double sum = 0.0;
    for (double v : w) {
      CHECK(v > 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
  }

  const std::size_t n = 20;
  std::vector<double> oracle(n - 1);
  double total = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    auto cdf = [](double t) { return std::erf((std::log(t) + 1.1) / (std::sqrt(2.0) * 2.0)); };
    oracle[i - 1] = cdf(karras_t(i + 1, n)) - cdf(karras_t(i, n));
    total += oracle[i - 1];
  }
  const auto w = index_weights(n);
  for (std::size_t i = 0; i + 1 < n; ++i)
    CHECK(w[i] == doctest::Approx(oracle[i] / total).epsilon(1e-12));

  const std::size_t draws = 1'000'000;
  std::vector<std::size_t> counts(n - 1, 0);
  Rng law = make_stream(2, "index");
  for (std::size_t k = 0; k < draws; ++k) {
    const std::size_t i = sample_index(n, {}, law);
    REQUIRE(i >= 1);
    REQUIRE(i < n);
    ++counts[i - 1];
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double p = oracle[i] / total;
    const double expected = p * static_cast<double>(draws);
    CHECK(std::abs(static_cast<double>(counts[i]) - expected) <= 3.0 * std::sqrt(expected * (1.0 - p)));
  }
}

TEST_CASE("pseudo-Huber distance")
{
  Eigen::VectorXd x(2), y(2);
  x << 3.0, 0.0;
  y << 0.0, 0.0;
  CHECK(pseudo_huber(x, y, 4.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pseudo_huber(x, x, 0.1) == 0.0);
  Rng rng = make_stream(3, "huber");
  for (int k = 0; k < 200; ++k) {
    const Eigen::VectorXd a = standard_normal(rng, 7), b = standard_normal(rng, 7);
    const double c = uniform(rng, 1e-4, 2.0);
    const double d = pseudo_huber(a, b, c), norm = (a - b).norm();
    CHECK(d >= 0.0);
    CHECK(d <= norm + 1e-15);
    CHECK(d >= norm - c);
  }
  // Convex in the distance: midpoint value below the chord.
  for (double r : {0.01, 0.5, 3.0}) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(1), lo(1), hi(1), mid(1);
    lo << r;
    hi << 3.0 * r;
    mid << 2.0 * r;
    CHECK(pseudo_huber(mid, a, 0.3) <= 0.5 * (pseudo_huber(lo, a, 0.3) + pseudo_huber(hi, a, 0.3)));
  }
  CHECK(default_huber_c(10000) == doctest::Approx(0.054));
  CHECK_THROWS_AS(pseudo_huber(x, y, 0.0), ContractError);
}

TEST_CASE("skip and output coefficients")
{
  const auto [skip0, out0] = skip_out_coeffs(0.002);
  CHECK(skip0 == 1.0);
  CHECK(out0 == 0.0);
  CHECK(skip_out_coeffs(1e6).first < 1e-12);
  CHECK(skip_out_coeffs(1e6).second == doctest::Approx(0.5).epsilon(1e-6));
  double prev = 2.0;
  for (int k = 0; k <= 400; ++k) {
    const double t = 0.002 * std::pow(80.0 / 0.002, k / 400.0);
    const double s = skip_out_coeffs(t).first;
    CHECK(s < prev);
    prev = s;
  }
  // sigma_data = 0.5, t = 1: 0.25 / (0.998^2 + 0.25), 0.5 * 0.998 / sqrt(1.25).
  CHECK(skip_out_coeffs(1.0).first == doctest::Approx(0.25 / (0.998 * 0.998 + 0.25)).epsilon(1e-14));
  CHECK(skip_out_coeffs(1.0).second == doctest::Approx(0.499 / std::sqrt(1.25)).epsilon(1e-14));
  CHECK(input_scale(1.0) == doctest::Approx(1.0 / std::sqrt(1.25)).epsilon(1e-15));
  CHECK(default_time_points() == std::vector<double>{80.0, 24.4, 5.84, 0.9, 0.661});
}

TEST_CASE("residual normalizer")
{
  Rng rng = make_stream(4, "norm");
  std::vector<RealField> samples;
  for (int k = 0; k < 6; ++k) {
    RealField f = random_field(plane(4), 2, rng);
    f.data().tail(16) *= 5.0;
    samples.push_back(f);
  }
  const auto norm = ResidualNormalizer::fit(samples);
  REQUIRE(norm.channels() == 2);
  CHECK(norm.r_max[1] > norm.r_max[0]);
  for (const auto& s : samples) {
    const RealField x = norm.normalize(s);
    CHECK(x.data().minCoeff() >= -1.0 - 1e-15);
    CHECK(x.data().maxCoeff() <= 1.0 + 1e-15);
    CHECK(max_abs_diff(norm.denormalize(x), s) < 1e-12);
  }
  RealField outside(plane(4), 2);
  outside.data().setConstant(7.0);
  const RealField back = norm.denormalize(outside);
  CHECK(back.data().head(16).maxCoeff() == doctest::Approx(norm.r_max[0]));
  outside.data().setConstant(-7.0);
  CHECK(norm.denormalize(outside).data().tail(16).minCoeff() == doctest::Approx(norm.r_min[1]));

  RealField zero(plane(4), 1);
  const auto flat = ResidualNormalizer::fit({zero, zero});
  CHECK(flat.normalize(zero).data().abs().maxCoeff() == 0.0);
  RealField noise = random_field(plane(4), 1, rng);
  CHECK(flat.denormalize(noise).data().abs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(ResidualNormalizer::fit({}), ContractError);
  CHECK_THROWS_AS(norm.normalize(zero), ContractError);
  ResidualNormalizer unfitted;
  CHECK_THROWS_AS(unfitted.normalize(zero), ContractError);
}

TEST_CASE("toy denoiser forward, gradient and container")
{
  const ToyDenoiser d = small_denoiser(5, 4, 6, 11);
  Rng rng = make_stream(12, "den");
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 3), cond = Eigen::MatrixXd::Random(4, 3);
  Eigen::VectorXd t(3);
  t << 0.002, 0.7, 45.0;
  DenoiserTape tape;
  const Eigen::MatrixXd f = consistency_f(d, x, t, cond, &tape);
  REQUIRE(f.rows() == 5);
  REQUIRE(f.cols() == 3);
  CHECK((f.col(0) - x.col(0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((f.col(1) - x.col(1)).cwiseAbs().maxCoeff() > 1e-3);
  CHECK(time_embedding(0.002, 4, {})[1] == doctest::Approx(1.0));

  const Eigen::MatrixXd g = Eigen::MatrixXd::Random(5, 3);
  const Eigen::VectorXd grad = consistency_f_backward(d, tape, g);
  const Eigen::VectorXd theta = flatten(d);
  REQUIRE(static_cast<std::size_t>(grad.size()) == parameter_count(d));
  double worst = 0.0;
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    ToyDenoiser p = d;
    const double h = 1e-6;
    Eigen::VectorXd th = theta;
    th[k] += h;
    unflatten(p, th);
    const double up = (g.array() * consistency_f(p, x, t, cond).array()).sum();
    th[k] -= 2 * h;
    unflatten(p, th);
    const double down = (g.array() * consistency_f(p, x, t, cond).array()).sum();
    const double fd = (up - down) / (2 * h);
    worst = std::max(worst, std::abs(fd - grad[k]) / std::max(1e-3, std::abs(fd)));
  }
  CHECK(worst < 1e-6);

  ConsistencyModel m{d, ResidualNormalizer::fit({random_field(plane(2), 1, rng), random_field(plane(2), 1, rng)}),
                     CtVariant::refiner};
  const auto back = consistency_from_container(decode_container(encode_container(consistency_to_container(m))));
  CHECK(back.variant == CtVariant::refiner);
  CHECK(back.denoiser.hyper == d.hyper);
  CHECK((flatten(back.denoiser).array() == theta.array()).all());
  CHECK((back.normalizer.r_min.array() == m.normalizer.r_min.array()).all());
  CHECK((back.normalizer.r_max.array() == m.normalizer.r_max.array()).all());

  FnoHyper fh;
  fh.layers = 1;
  fh.modes = {2, 2};
  fh.width = 2;
  FnoParams fno = init_fno(fh, rng);
  CHECK_THROWS_AS(consistency_from_container(fno_to_container(fno)), FormatError);
  CHECK_THROWS_AS(parse_ct_variant("ddpm"), UsageError);
  DenoiserHyper odd;
  odd.embed = 3;
  CHECK_THROWS_AS(init_denoiser(odd, rng), ContractError);
}

TEST_CASE("consistency training loss")
{
  const ToyTask task = toy_task(12, 0.3, 0.1, 21);
  const ConsistencyModel m = model_for(task, CtVariant::diffpcno, 8);
  const auto& d = m.denoiser;

  SUBCASE("identical branches give exactly zero loss and gradient")
  {
    Eigen::MatrixXd x0(16, 4), cond(32, 4), z(16, 4);
    for (Eigen::Index j = 0; j < 4; ++j) {
      x0.col(j) = ct_target(m.variant, task.data[static_cast<std::size_t>(j)], m.normalizer);
      cond.col(j) = ct_condition(task.data[static_cast<std::size_t>(j)]);
    }
    z.setRandom();
    Eigen::VectorXd t(4);
    t << 0.002, 0.3, 4.0, 80.0;
    const CtLoss l = consistency_pair_loss(d, x0, cond, t, t, z, Eigen::VectorXd::Constant(4, 3.0), 0.01);
    CHECK(l.loss == 0.0);
    CHECK(l.grad.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("single sample matches a hand-composed evaluation")
  {
    Rng rng = make_stream(30, "draws");
    const auto draws = draw_ct(11, 1, 16, d.sched, rng);
    const std::vector<CtSample> one{task.data[3]};
    const CtLoss l = ct_loss(m, one, draws, 11, 0.02);

    const auto& s = task.data[3];
    RealField r(s.y.grid(), 1, s.y.data() - s.u_hat.data());
    const Eigen::VectorXd x0 = m.normalizer.normalize(r).data().matrix();
    Eigen::VectorXd cond(32);
    cond << s.u_t.data().matrix(), s.u_hat.data().matrix();
    const double t_lo = karras_t(draws[0].i, 11), t_hi = karras_t(draws[0].i + 1, 11);
    Eigen::VectorXd tl(1), th(1);
    tl << t_lo;
    th << t_hi;
    const Eigen::VectorXd student = consistency_f(d, x0 + t_hi * draws[0].z, th, cond);
    const Eigen::VectorXd teacher = consistency_f(d, x0 + t_lo * draws[0].z, tl, cond);
    CHECK(l.loss == doctest::Approx(pseudo_huber(student, teacher, 0.02) / (t_hi - t_lo)).epsilon(1e-11));

    // Student-only gradient: finite differences with the teacher output frozen.
    const Eigen::VectorXd theta = flatten(d);
    for (Eigen::Index k = 0; k < theta.size(); k += 7) {
      auto eval = [&](double delta) {
        ToyDenoiser p = d;
        Eigen::VectorXd th2 = theta;
        th2[k] += delta;
        unflatten(p, th2);
        return pseudo_huber(consistency_f(p, x0 + t_hi * draws[0].z, th, cond), teacher, 0.02) / (t_hi - t_lo);
      };
      const double fd = (eval(1e-6) - eval(-1e-6)) / 2e-6;
      CHECK(l.grad[k] == doctest::Approx(fd).epsilon(1e-5).scale(1e-3));
    }
  }

  SUBCASE("mean reduction is order independent")
  {
    Rng rng = make_stream(31, "draws");
    std::vector<CtSample> batch(task.data.begin(), task.data.begin() + 5);
    auto draws = draw_ct(41, 5, 16, d.sched, rng);
    const CtLoss a = ct_loss(m, batch, draws, 41);
    std::reverse(batch.begin(), batch.end());
    std::reverse(draws.begin(), draws.end());
    const CtLoss b = ct_loss(m, batch, draws, 41);
    CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-13));
    CHECK((a.grad - b.grad).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + a.grad.cwiseAbs().maxCoeff()));
  }

  SUBCASE("curriculum-driven losses replay their draws")
  {
    const std::vector<CtSample> batch(task.data.begin(), task.data.begin() + 3);
    Rng a = make_stream(32, "ct");
    const CtLoss l = ct_loss_diffpcno(d, batch, 150, 800, d.sched, {}, m.normalizer, a);
    Rng b = make_stream(32, "ct");
    const auto draws = draw_ct(21, 3, 16, d.sched, b);
    CHECK(l.loss == ct_loss(m, batch, draws, 21).loss);

    ConsistencyModel refiner = m;
    refiner.variant = CtVariant::refiner;
    refiner.normalizer = fit_normalizer(CtVariant::refiner, task.data);
    Rng c = make_stream(33, "ct");
    const CtLoss lr = ct_loss_refiner(d, batch, 0, 800, d.sched, {}, refiner.normalizer, c);
    Rng e = make_stream(33, "ct");
    CHECK(lr.loss == ct_loss(refiner, batch, draw_ct(11, 3, 16, d.sched, e), 11).loss);
    CHECK(lr.loss != l.loss);
    // The refiner noises the normalized state itself.
    CHECK((ct_target(CtVariant::refiner, batch[0], refiner.normalizer).array() ==
           refiner.normalizer.normalize(batch[0].y).data()).all());

    Rng f = make_stream(34, "ct");
    CHECK_THROWS_AS(ct_loss_diffpcno(d, batch, 0, 10, d.sched, {}, ResidualNormalizer{}, f), ContractError);
  }
}

TEST_CASE("consistency training is deterministic and reduces the loss")
{
  const ToyTask task = toy_task(64, 0.5, 0.2, 40);
  const ConsistencyModel m = model_for(task, CtVariant::diffpcno, 16);
  CtTrainConfig cfg;
  cfg.steps = 400;
  cfg.batch = 8;
  cfg.lr = 3e-3;
  cfg.seed = 8;
  const auto a = train_consistency(m, task.data, cfg);
  const auto b = train_consistency(m, task.data, cfg);
  REQUIRE(a.losses.size() == 400);
  CHECK(a.losses == b.losses);
  CHECK((flatten(a.model.denoiser).array() == flatten(b.model.denoiser).array()).all());
  double head = 0.0, tail = 0.0;
  for (std::size_t k = 0; k < 80; ++k) {
    head += a.losses[k];
    tail += a.losses[320 + k];
  }
  CHECK(tail < head);
  cfg.steps = 0;
  CHECK(train_consistency(m, task.data, cfg).losses.empty());
}

TEST_CASE("multistep sampling")
{
  CHECK(injection_scale(0.9) == doctest::Approx(0.8999977777750343).epsilon(1e-14));
  const ToyDenoiser d = small_denoiser(6, 2, 5, 50);
  const Eigen::VectorXd cond = Eigen::VectorXd::Constant(2, 0.3);

  Rng a = make_stream(51, "sample");
  const Eigen::VectorXd one = sample_multistep(d, cond, {80.0}, a);
  Rng b = make_stream(51, "sample");
  Eigen::VectorXd t(1);
  t << 80.0;
  const Eigen::VectorXd direct = consistency_f(d, 80.0 * standard_normal(b, 6), t, cond);
  CHECK((one.array() == direct.array()).all());

  Rng c = make_stream(51, "sample");
  const Eigen::VectorXd two = sample_multistep(d, cond, {80.0, 0.9}, c);
  Rng e = make_stream(51, "sample");
  const Eigen::VectorXd z0 = standard_normal(e, 6), z1 = standard_normal(e, 6);
  const Eigen::VectorXd x1 = consistency_f(d, 80.0 * z0, t, cond);
  t << 0.9;
  const Eigen::VectorXd x2 = consistency_f(d, x1 + std::sqrt(0.81 - 0.002 * 0.002) * z1, t, cond);
  CHECK((two - x2).cwiseAbs().maxCoeff() < 1e-15);

  Rng r1 = make_stream(52, "sample"), r2 = make_stream(52, "sample");
  CHECK((sample_multistep(d, cond, default_time_points(), r1).array() ==
         sample_multistep(d, cond, default_time_points(), r2).array()).all());
  CHECK_THROWS_AS(sample_multistep(d, cond, {0.9, 5.84}, r1), ContractError);
  CHECK_THROWS_AS(sample_multistep(d, cond, {80.0, 80.0}, r1), ContractError);
  CHECK_THROWS_AS(sample_multistep(d, cond, {100.0}, r1), ContractError);
  CHECK_THROWS_AS(sample_multistep(d, cond, {}, r1), ContractError);
}

TEST_CASE("diffpcno steps and ensembles")
{
  ToyTask task = toy_task(8, 0.0, 0.0, 60);
  for (auto& s : task.data)
    s.y = s.u_hat;
  const ConsistencyModel zero = model_for(task, CtVariant::diffpcno, 8);
  const RealField& u0 = task.data[0].u_t;

  Rng rng = make_stream(61, "step");
  const DiffStep step = diffpcno_step(task.pcno, zero, u0, {}, default_time_points(), rng);
  CHECK((step.prediction.data() == step.pcno_prediction.data()).all());
  CHECK(step.residual.data().abs().maxCoeff() == 0.0);

  const Ensemble ens = diffpcno_ensemble(task.pcno, zero, u0, {}, default_time_points(), 3, 5, 7);
  CHECK(ens.std.data().abs().maxCoeff() == 0.0);
  CHECK((ens.mean.data() == rollout(task.pcno, u0, {}, 3).data()).all());
  CHECK(ens.mean.grid().size(0) == 3);

  // Reproducible with a fixed seed for a model that does inject noise.
  const ToyTask noisy = toy_task(16, 0.5, 0.2, 62);
  const ConsistencyModel m = model_for(noisy, CtVariant::diffpcno, 8);
  Rng s1 = make_stream(63, "step"), s2 = make_stream(63, "step");
  const auto p1 = diffpcno_step(noisy.pcno, m, u0, {}, default_time_points(), s1);
  const auto p2 = diffpcno_step(noisy.pcno, m, u0, {}, default_time_points(), s2);
  CHECK((p1.prediction.data() == p2.prediction.data()).all());
  CHECK(max_abs_diff(p1.residual, RealField(u0.grid(), 1, p1.prediction.data() - p1.pcno_prediction.data())) == 0.0);

  ConsistencyModel refiner = m;
  refiner.variant = CtVariant::refiner;
  refiner.normalizer = fit_normalizer(CtVariant::refiner, noisy.data);
  Rng s3 = make_stream(64, "step");
  const auto p3 = diffpcno_step(noisy.pcno, refiner, u0, {}, default_time_points(), s3);
  CHECK(p3.prediction.data().minCoeff() >= refiner.normalizer.r_min[0] - 1e-12);
  CHECK(p3.prediction.data().maxCoeff() <= refiner.normalizer.r_max[0] + 1e-12);

  CHECK_THROWS_AS(diffpcno_ensemble(task.pcno, zero, u0, {}, default_time_points(), 1, 1, 7), ContractError);
}

TEST_CASE("ensemble spread of injected Gaussian noise")
{
  const double sigma = 0.3;
  const StochasticStep step = [&](const RealField& w, Rng& rng) {
    return RealField(w.grid(), w.channels(), w.data() + sigma * standard_normal(rng, w.data().size()).array());
  };
  RealField u0(plane(8), 1);
  u0.data().setConstant(2.0);
  const std::size_t n = 50;
  const Ensemble e = uncertainty_ensemble(step, u0, 1, n, 70);
  const double bound = 3.0 * sigma / std::sqrt(2.0 * static_cast<double>(n - 1));
  CHECK(std::abs(e.std.data().mean() - sigma) < bound);
  CHECK(std::abs(e.mean.data().mean() - 2.0) < 3.0 * sigma / std::sqrt(static_cast<double>(n)));
  const Ensemble threaded = uncertainty_ensemble(step, u0, 1, n, 70, 3);
  CHECK((threaded.std.data() == e.std.data()).all());
  CHECK((threaded.mean.data() == e.mean.data()).all());

  // Two-frame window, newest frame last: the spread accumulates as a random walk.
  const StochasticStep newest = [&](const RealField& w, Rng& rng) { return step(channel_slice(w, 1, 1), rng); };
  const Ensemble walk = uncertainty_ensemble(newest, concat_channels({u0, u0}), 4, 400, 71);
  CHECK(walk.std.channels() == 1);
  CHECK(walk.std.grid().size(0) == 4);
  CHECK(walk.std.data().tail(64).mean() == doctest::Approx(2.0 * sigma).epsilon(0.1));
}
