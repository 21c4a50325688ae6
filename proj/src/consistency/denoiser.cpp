#include "pcno/consistency/denoiser.hpp"

#include <cmath>
#include <numbers>

namespace pcno {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

double gelu(double v)
{
  return 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
}

double gelu_grad(double v)
{
  return 0.5 * (1.0 + std::erf(v * kInvSqrt2)) + v * std::exp(-0.5 * v * v) / std::sqrt(2.0 * std::numbers::pi);
}

Eigen::MatrixXd uniform_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double bound)
{
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i)
      m(i, j) = uniform(rng, -bound, bound);
  return m;
}

template <typename F>
void for_each_block(ToyDenoiser& d, F&& f)
{
  f(d.w1);
  f(d.b1);
  f(d.w2);
  f(d.b2);
  f(d.w3);
  f(d.b3);
}

template <typename F>
void for_each_block(const ToyDenoiser& d, F&& f)
{
  f(d.w1);
  f(d.b1);
  f(d.w2);
  f(d.b2);
  f(d.w3);
  f(d.b3);
}

Eigen::Index input_size(const DenoiserHyper& h)
{
  return h.target_size + h.cond_size + static_cast<Eigen::Index>(h.embed);
}

std::string format_list(const Eigen::VectorXd& v)
{
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out += (i ? "," : "") + format_double(v[i]);
  return out;
}

Eigen::VectorXd parse_list(const std::string& s)
{
  const auto values = parse_double_list(s);
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

} // namespace

ToyDenoiser init_denoiser(const DenoiserHyper& hyper, Rng& rng, const NoiseSchedule& sched)
{
  require(hyper.target_size >= 1 && hyper.cond_size >= 0 && hyper.hidden >= 1, "invalid denoiser size");
  require(hyper.embed % 2 == 0, "denoiser time embedding size must be even");
  const auto h = static_cast<Eigen::Index>(hyper.hidden);
  const double b_in = 1.0 / std::sqrt(static_cast<double>(input_size(hyper)));
  const double b_h = 1.0 / std::sqrt(static_cast<double>(hyper.hidden));
  ToyDenoiser d;
  d.hyper = hyper;
  d.sched = sched;
  d.w1 = uniform_matrix(rng, h, input_size(hyper), b_in);
  d.b1 = uniform_matrix(rng, h, 1, b_in);
  d.w2 = uniform_matrix(rng, h, h, b_h);
  d.b2 = uniform_matrix(rng, h, 1, b_h);
  d.w3 = uniform_matrix(rng, hyper.target_size, h, b_h);
  d.b3 = uniform_matrix(rng, hyper.target_size, 1, b_h);
  return d;
}

Eigen::VectorXd time_embedding(double t, std::size_t dims, const NoiseSchedule& sched)
{
  const double tau = std::log(t / sched.t_min) / std::log(sched.t_max / sched.t_min);
  Eigen::VectorXd e(static_cast<Eigen::Index>(dims));
  for (std::size_t k = 0; k < dims / 2; ++k) {
    const double a = std::numbers::pi * std::ldexp(1.0, static_cast<int>(k)) * tau;
    e[static_cast<Eigen::Index>(2 * k)] = std::sin(a);
    e[static_cast<Eigen::Index>(2 * k + 1)] = std::cos(a);
  }
  return e;
}

std::size_t parameter_count(const ToyDenoiser& d)
{
  std::size_t n = 0;
  for_each_block(d, [&](const auto& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

Eigen::VectorXd flatten(const ToyDenoiser& d)
{
  Eigen::VectorXd out(static_cast<Eigen::Index>(parameter_count(d)));
  Eigen::Index at = 0;
  for_each_block(d, [&](const auto& m) {
    out.segment(at, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
    at += m.size();
  });
  return out;
}

void unflatten(ToyDenoiser& d, const Eigen::VectorXd& flat)
{
  require(static_cast<std::size_t>(flat.size()) == parameter_count(d), "denoiser parameter vector has the wrong length");
  Eigen::Index at = 0;
  for_each_block(d, [&](auto& m) {
    Eigen::Map<Eigen::VectorXd>(m.data(), m.size()) = flat.segment(at, m.size());
    at += m.size();
  });
}

Eigen::MatrixXd consistency_f(const ToyDenoiser& d, const Eigen::MatrixXd& x, const Eigen::VectorXd& t,
                              const Eigen::MatrixXd& cond, DenoiserTape* tape)
{
  const auto& h = d.hyper;
  const Eigen::Index batch = x.cols();
  require(x.rows() == h.target_size && cond.rows() == h.cond_size, "denoiser input sizes do not match");
  require(cond.cols() == batch && t.size() == batch, "denoiser batch sizes differ");

  Eigen::MatrixXd input(input_size(h), batch);
  Eigen::VectorXd c_skip(batch), c_out(batch);
  for (Eigen::Index j = 0; j < batch; ++j) {
    const auto [skip, out] = skip_out_coeffs(t[j], d.sched);
    c_skip[j] = skip;
    c_out[j] = out;
    input.col(j).head(h.target_size) = input_scale(t[j], d.sched) * x.col(j);
    input.col(j).segment(h.target_size, h.cond_size) = cond.col(j);
    input.col(j).tail(static_cast<Eigen::Index>(h.embed)) = time_embedding(t[j], h.embed, d.sched);
  }
  Eigen::MatrixXd a1 = (d.w1 * input).colwise() + d.b1;
  Eigen::MatrixXd a2 = (d.w2 * a1.unaryExpr(&gelu)).colwise() + d.b2;
  Eigen::MatrixXd h2 = a2.unaryExpr(&gelu);
  Eigen::MatrixXd f = (d.w3 * h2).colwise() + d.b3;
  f = f * c_out.asDiagonal();
  f += x * c_skip.asDiagonal();
  if (tape) {
    tape->input = std::move(input);
    tape->a1 = std::move(a1);
    tape->a2 = std::move(a2);
    tape->h2 = std::move(h2);
    tape->c_out = c_out;
  }
  return f;
}

Eigen::VectorXd consistency_f_backward(const ToyDenoiser& d, const DenoiserTape& tape, const Eigen::MatrixXd& g)
{
  require(g.rows() == d.hyper.target_size && g.cols() == tape.c_out.size(), "denoiser gradient shape mismatch");
  ToyDenoiser grad = d;
  const Eigen::MatrixXd g_f = g * tape.c_out.asDiagonal();
  grad.w3 = g_f * tape.h2.transpose();
  grad.b3 = g_f.rowwise().sum();
  const Eigen::MatrixXd g_a2 = (d.w3.transpose() * g_f).cwiseProduct(tape.a2.unaryExpr(&gelu_grad));
  grad.w2 = g_a2 * tape.a1.unaryExpr(&gelu).transpose();
  grad.b2 = g_a2.rowwise().sum();
  const Eigen::MatrixXd g_a1 = (d.w2.transpose() * g_a2).cwiseProduct(tape.a1.unaryExpr(&gelu_grad));
  grad.w1 = g_a1 * tape.input.transpose();
  grad.b1 = g_a1.rowwise().sum();
  return flatten(grad);
}

CtVariant parse_ct_variant(const std::string& name)
{
  if (name == "diffpcno")
    return CtVariant::diffpcno;
  if (name == "refiner")
    return CtVariant::refiner;
  throw UsageError("unknown consistency variant '" + name + "' (diffpcno|refiner)");
}

std::string to_string(CtVariant v)
{
  return v == CtVariant::diffpcno ? "diffpcno" : "refiner";
}

ModelContainer consistency_to_container(const ConsistencyModel& m, const KvStanza& extra)
{
  require(m.normalizer.fitted(), "cannot save a consistency model with an unfitted normalizer");
  const auto& d = m.denoiser;
  ModelContainer c;
  c.header = {{"model_kind", "denoiser"},
              {"variant", to_string(m.variant)},
              {"target_size", std::to_string(d.hyper.target_size)},
              {"cond_size", std::to_string(d.hyper.cond_size)},
              {"hidden", std::to_string(d.hyper.hidden)},
              {"embed", std::to_string(d.hyper.embed)},
              {"t_min", format_double(d.sched.t_min)},
              {"t_max", format_double(d.sched.t_max)},
              {"rho", format_double(d.sched.rho)},
              {"sigma_data", format_double(d.sched.sigma_data)},
              {"p_mean", format_double(d.sched.p_mean)},
              {"p_std", format_double(d.sched.p_std)},
              {"normalizer_min", format_list(m.normalizer.r_min)},
              {"normalizer_max", format_list(m.normalizer.r_max)}};
  c.header.insert(c.header.end(), extra.begin(), extra.end());
  for_each_block(d, [&](const auto& b) {
    Tensor t;
    t.dims = {static_cast<std::uint64_t>(b.size())};
    t.values.assign(b.data(), b.data() + b.size());
    c.blocks.push_back(std::move(t));
  });
  return c;
}

ConsistencyModel consistency_from_container(const ModelContainer& c)
{
  const auto& h = c.header;
  if (kv_require(h, "model_kind") != "denoiser")
    throw FormatError("model file holds a '" + kv_require(h, "model_kind") + "' model, expected denoiser");
  DenoiserHyper hy;
  hy.target_size = parse_int(kv_require(h, "target_size"));
  hy.cond_size = parse_int(kv_require(h, "cond_size"));
  hy.hidden = static_cast<std::size_t>(parse_int(kv_require(h, "hidden")));
  hy.embed = static_cast<std::size_t>(parse_int(kv_require(h, "embed")));
  NoiseSchedule s;
  s.t_min = parse_double(kv_require(h, "t_min"));
  s.t_max = parse_double(kv_require(h, "t_max"));
  s.rho = parse_double(kv_require(h, "rho"));
  s.sigma_data = parse_double(kv_require(h, "sigma_data"));
  s.p_mean = parse_double(kv_require(h, "p_mean"));
  s.p_std = parse_double(kv_require(h, "p_std"));
  ConsistencyModel m;
  try {
    m.variant = parse_ct_variant(kv_require(h, "variant"));
  } catch (const UsageError& e) {
    throw FormatError(e.what());
  }
  Rng rng(0);
  m.denoiser = init_denoiser(hy, rng, s);
  m.normalizer.r_min = parse_list(kv_require(h, "normalizer_min"));
  m.normalizer.r_max = parse_list(kv_require(h, "normalizer_max"));
  if (m.normalizer.r_min.size() == 0 || m.normalizer.r_min.size() != m.normalizer.r_max.size())
    throw FormatError("normalizer statistics are missing or inconsistent");
  if (c.blocks.size() != 6)
    throw FormatError("denoiser file needs 6 parameter blocks, found " + std::to_string(c.blocks.size()));
  std::size_t b = 0;
  bool ok = true;
  for_each_block(m.denoiser, [&](auto& blk) {
    const auto& values = c.blocks[b++].values;
    if (values.size() != static_cast<std::size_t>(blk.size())) {
      ok = false;
      return;
    }
    std::copy(values.begin(), values.end(), blk.data());
  });
  if (!ok)
    throw FormatError("denoiser parameter block has the wrong size");
  return m;
}

void save_consistency(const ConsistencyModel& m, const std::filesystem::path& path, const KvStanza& extra)
{
  write_container(consistency_to_container(m, extra), path);
}

ConsistencyModel load_consistency(const std::filesystem::path& path)
{
  return consistency_from_container(read_container(path));
}

} // namespace pcno
