#include "pcno/cli/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <ostream>

#include <CLI11.hpp>

#include "pcno/consistency/sampling.hpp"
#include "pcno/consistency/training.hpp"
#include "pcno/core/error.hpp"
#include "pcno/core/parallel.hpp"
#include "pcno/metrics/metrics.hpp"
#include "pcno/projection/compose.hpp"
#include "pcno/solvers/dataset.hpp"
#include "pcno/spectral/field_ops.hpp"
#include "pcno/spectral/fld_io.hpp"
#include "pcno/surrogate/model_io.hpp"
#include "pcno/surrogate/train.hpp"

namespace pcno::cli {

namespace {

namespace fs = std::filesystem;

const std::string kSnapshot = "config.snapshot";

void prepare_out(const RunConfig& cfg, const RunContext& ctx)
{
  if (ctx.out.empty())
    throw UsageError("--out is required");
  fs::create_directories(ctx.out);
  write_text_file(ctx.out / kSnapshot, cfg.snapshot());
}

const std::string& required(const RunConfig& cfg, const std::string& key)
{
  const auto& v = cfg.text(key);
  if (v.empty())
    throw UsageError("configuration key '" + key + "' is required for " + cfg.command());
  return v;
}

template <typename F>
auto usage_enum(F&& parse, const std::string& key, const std::string& value)
{
  try {
    return parse(value);
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError("configuration key '" + key + "': " + e.what());
  }
}

/// Marks the first axis as time.
RealField as_trajectory(const RealField& f)
{
  require(f.grid().rank() >= 2, "a trajectory needs a time axis and at least one spatial axis");
  auto axes = f.grid().axes();
  if (axes[0].kind == AxisKind::temporal)
    return f;
  axes[0] = {"t", axes[0].size, static_cast<double>(axes[0].size), AxisKind::temporal};
  return RealField(GridSpec(std::move(axes)), f.channels(), f.data());
}

RealField frames(const RealField& traj, std::size_t first, std::size_t count)
{
  require(first + count <= traj.grid().size(0), "trajectory has " + std::to_string(traj.grid().size(0)) +
                                                     " frames, need frames [" + std::to_string(first) + ", " +
                                                     std::to_string(first + count) + ")");
  std::vector<RealField> out;
  for (std::size_t t = first; t < first + count; ++t)
    out.push_back(time_slice(traj, t));
  return stack_frames(out, {"t", count, static_cast<double>(count), AxisKind::temporal});
}

RealField input_window(const RealField& traj, std::size_t start, std::size_t t_in)
{
  std::vector<RealField> parts;
  for (std::size_t t = start; t < start + t_in; ++t) {
    require(t < traj.grid().size(0), "input window runs past the end of the trajectory");
    parts.push_back(time_slice(traj, t));
  }
  return concat_channels(parts);
}

std::size_t frames_in(const FnoParams& p)
{
  require(p.hyper.in_ch % p.hyper.out_ch == 0, "surrogate input channels are not a whole number of frames");
  return static_cast<std::size_t>(p.hyper.in_ch / p.hyper.out_ch);
}

std::string model_kind(const fs::path& path)
{
  return kv_require(read_container(path).header, "model_kind");
}

void write_losses(const fs::path& path, const std::vector<double>& losses)
{
  std::string csv = "step,loss\n";
  for (std::size_t k = 0; k < losses.size(); ++k)
    csv += std::to_string(k) + "," + format_double(losses[k]) + "\n";
  write_text_file(path, csv);
}

std::vector<RealField> load_dataset(const fs::path& dir, std::size_t limit)
{
  const auto manifest = read_manifest(dir);
  const std::size_t count = manifest.trajectories.size();
  if (limit > count)
    throw UsageError("requested " + std::to_string(limit) + " trajectories but the dataset has " +
                     std::to_string(count));
  const std::size_t n = limit == 0 ? count : limit;
  std::vector<RealField> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(as_trajectory(load_trajectory(dir, i)));
  return out;
}

FlowForm parse_form(const std::string& s)
{
  if (s == "velocity")
    return FlowForm::velocity;
  if (s == "vorticity")
    return FlowForm::vorticity;
  throw UsageError("unknown flow form '" + s + "' (velocity|vorticity)");
}

MassMode parse_mode(const std::string& s)
{
  if (s == "spatial2d")
    return MassMode::spatial2d;
  if (s == "spatiotemporal3d")
    return MassMode::spatiotemporal3d;
  throw UsageError("unknown mass mode '" + s + "' (spatial2d|spatiotemporal3d)");
}

std::vector<double> time_points(const RunConfig& cfg)
{
  const auto t = cfg.reals("time_points");
  if (t.empty())
    throw UsageError("time_points must list at least one time");
  return t;
}

} // namespace

void cmd_generate(const RunConfig& cfg, const RunContext& ctx)
{
  DatasetSpec spec;
  spec.kind = usage_enum(parse_solver_kind, "kind", cfg.text("kind"));
  spec.count = cfg.size("count");
  if (spec.count < 1)
    throw UsageError("count must be at least 1");
  spec.seed = cfg.seed();

  auto& k = spec.kse;
  k.points = cfg.size("kse.points");
  k.length_min = cfg.real("kse.length_min");
  k.length_max = cfg.real("kse.length_max");
  k.dt_min = cfg.real("kse.dt_min");
  k.dt_max = cfg.real("kse.dt_max");
  k.nu = cfg.real("kse.nu");
  k.nu_random = cfg.flag("kse.nu_random");
  k.nu_min = cfg.real("kse.nu_min");
  k.nu_max = cfg.real("kse.nu_max");
  k.warmup = cfg.size("kse.warmup");
  k.steps = cfg.size("kse.steps");
  k.substeps = cfg.size("kse.substeps");

  auto& f = spec.kolmogorov;
  f.points = cfg.size("kolmogorov.points");
  f.nu = cfg.real("kolmogorov.nu");
  f.dt = cfg.real("kolmogorov.dt");
  f.forcing = cfg.real("kolmogorov.forcing");
  f.frames = cfg.size("kolmogorov.frames");
  f.record_every = cfg.size("kolmogorov.record_every");
  f.warmup = cfg.size("kolmogorov.warmup");
  f.tau = cfg.real("kolmogorov.tau");
  f.alpha = cfg.real("kolmogorov.alpha");
  f.form = parse_form(cfg.text("kolmogorov.form"));

  auto& s = spec.swe;
  s.nx = cfg.size("swe.nx");
  s.ny = cfg.size("swe.ny");
  s.solver.dx = cfg.real("swe.dx");
  s.terrain = usage_enum(parse_terrain, "swe.terrain", cfg.text("swe.terrain"));
  s.slope = cfg.real("swe.slope");
  s.rain_min = cfg.real("swe.rain_min");
  s.rain_max = cfg.real("swe.rain_max");
  s.rain_duration = cfg.real("swe.rain_duration");
  s.solver.rainfall_interval = cfg.real("swe.rainfall_interval");
  s.solver.duration = cfg.real("swe.duration");
  s.solver.frame_interval = cfg.real("swe.frame_interval");
  s.solver.manning = cfg.real("swe.manning");
  s.solver.cfl = cfg.real("swe.cfl");
  s.solver.infiltration = cfg.real("swe.infiltration");

  prepare_out(cfg, ctx);
  write_dataset(spec, ctx.out, ctx.threads);
}

void cmd_project(const RunConfig& cfg, const RunContext& ctx)
{
  RealField v = read_fld(required(cfg, "input"));
  const Selector selector = usage_enum(parse_selector, "selector", cfg.text("selector"));
  ProjectionParams params;
  params.mass.mode = parse_mode(cfg.text("mass_mode"));
  params.momentum.w_inv = {cfg.real("w_inv.center"), cfg.real("w_inv.edge"), cfg.real("w_inv.corner")};
  if (const auto pad = cfg.sizes("momentum.padding"); !pad.empty())
    params.momentum.padding = pad;
  prepare_out(cfg, ctx);

  RealField out;
  if (params.mass.mode == MassMode::spatiotemporal3d) {
    out = compose_projection(as_trajectory(v), selector, params);
  } else if (selector != Selector::none && v.grid().rank() == 3) {
    // A stack of 2-D frames is projected frame by frame.
    const RealField traj = as_trajectory(v);
    std::vector<RealField> parts;
    for (std::size_t t = 0; t < traj.grid().size(0); ++t)
      parts.push_back(compose_projection(time_slice(traj, t), selector, params));
    out = stack_frames(parts, traj.grid().axis(0));
  } else {
    out = compose_projection(v, selector, params);
  }
  write_fld(out, ctx.out / "projected.fld");
}

void cmd_train(const RunConfig& cfg, const RunContext& ctx)
{
  const std::string model = cfg.text("model");
  if (model != "fno" && model != "pcno" && model != "diffpcno" && model != "refiner")
    throw UsageError("unknown model '" + model + "' (fno|pcno|diffpcno|refiner)");
  const fs::path dataset = required(cfg, "dataset");
  const bool diffusion = model == "diffpcno" || model == "refiner";
  if (diffusion && cfg.text("pcno").empty())
    throw UsageError(model + " training needs a frozen surrogate: set pcno = <model file>");
  const auto trajectories = load_dataset(dataset, cfg.size("trajectories"));
  const Eigen::Index channels = trajectories.front().channels();
  prepare_out(cfg, ctx);

  if (diffusion) {
    const FnoParams pcno = load_fno(cfg.text("pcno"));
    const std::size_t t_in = frames_in(pcno);
    std::vector<Sample> raw;
    for (const auto& traj : trajectories)
      for (auto& s : markov_samples(traj, t_in, {}))
        raw.push_back(std::move(s));
    require(!raw.empty(), "trajectories are too short for the surrogate's input window");
    const auto data = ct_samples(pcno, raw);
    ConsistencyModel m;
    m.variant = parse_ct_variant(model);
    m.normalizer = fit_normalizer(m.variant, data);
    DenoiserHyper h;
    h.target_size = data.front().y.data().size();
    h.cond_size = data.front().u_t.data().size() + data.front().u_hat.data().size();
    h.hidden = cfg.size("ct.hidden");
    h.embed = cfg.size("ct.embed");
    Rng init = make_stream(cfg.seed(), "ct/init");
    m.denoiser = init_denoiser(h, init);
    CtTrainConfig tc;
    tc.steps = cfg.size("ct.steps");
    tc.batch = cfg.size("ct.batch");
    tc.lr = cfg.real("ct.lr");
    tc.seed = cfg.seed();
    tc.huber_c = cfg.real("ct.huber_c");
    tc.curriculum = {cfg.size("ct.s0"), cfg.size("ct.s1")};
    const auto result = train_consistency(m, data, tc);
    save_consistency(result.model, ctx.out / "model.bin");
    write_losses(ctx.out / "losses.csv", result.losses);
    return;
  }

  TrainConfig tc;
  tc.strategy = usage_enum(parse_strategy, "strategy", cfg.text("strategy"));
  tc.epochs = cfg.size("epochs");
  tc.batch = cfg.size("batch");
  tc.lr = cfg.real("lr");
  tc.weight_decay = cfg.real("weight_decay");
  tc.seed = cfg.seed();
  tc.threads = ctx.threads;
  const std::size_t t_in = cfg.size("t_in");
  std::vector<Sample> data;
  for (const auto& traj : trajectories) {
    if (tc.strategy == Strategy::markov) {
      for (auto& s : markov_samples(traj, t_in, {}))
        data.push_back(std::move(s));
    } else {
      data.push_back(one_shot_sample(traj, t_in, cfg.size("t_out"), {}));
    }
  }
  require(!data.empty(), "trajectories are too short for t_in");

  FnoHyper h;
  h.layers = cfg.size("layers");
  h.modes = cfg.sizes("modes");
  h.width = cfg.size("width");
  h.in_ch = static_cast<Eigen::Index>(t_in) * channels;
  h.out_ch = channels;
  h.time_padding = cfg.size("time_padding");
  h.activation = usage_enum(parse_activation, "activation", cfg.text("activation"));
  Rng init = make_stream(cfg.seed(), "train/init");
  FnoParams p = init_fno(h, init);

  Selector selector = model == "pcno" ? Selector::mass : Selector::none;
  if (cfg.text("selector") != "auto")
    selector = usage_enum(parse_selector, "selector", cfg.text("selector"));
  if (model == "fno" && selector != Selector::none)
    throw UsageError("model fno has no projection; use model = pcno for selector " + to_string(selector));
  if (selector != Selector::none)
    attach_projection(p, selector, data.front().input.grid(), cfg.flag("learnable_projection"),
                      parse_mode(cfg.text("mass_mode")));

  const auto result = train(p, data, tc);
  save_fno(result.params, ctx.out / "model.bin", {{"strategy", to_string(tc.strategy)}});
  write_losses(ctx.out / "losses.csv", result.losses);
}

void cmd_rollout(const RunConfig& cfg, const RunContext& ctx)
{
  const FnoParams p = load_fno(required(cfg, "model"));
  const fs::path init = required(cfg, "init");
  const std::size_t start = cfg.size("start"), steps = cfg.size("steps");
  if (steps < 1)
    throw UsageError("steps must be at least 1");
  const std::size_t t_in = frames_in(p);
  if (fs::is_directory(init)) {
    const auto trajectories = load_dataset(init, 0);
    prepare_out(cfg, ctx);
    std::vector<RealField> out(trajectories.size());
    parallel_for(trajectories.size(), ctx.threads, [&](std::size_t i) {
      out[i] = rollout(p, input_window(trajectories[i], start, t_in), {}, steps);
    });
    for (std::size_t i = 0; i < out.size(); ++i)
      write_fld(out[i], ctx.out / trajectory_file_name(i));
    return;
  }
  const RealField traj = as_trajectory(read_fld(init));
  const RealField window = input_window(traj, start, t_in);
  prepare_out(cfg, ctx);
  write_fld(rollout(p, window, {}, steps), ctx.out / "rollout.fld");
}

void cmd_sample(const RunConfig& cfg, const RunContext& ctx)
{
  const fs::path model_path = required(cfg, "model");
  if (model_kind(model_path) != "denoiser")
    throw ContractError("sample needs a denoiser model, got " + model_path.string());
  const ConsistencyModel m = load_consistency(model_path);
  const FnoParams pcno = load_fno(required(cfg, "pcno"));
  const auto tp = time_points(cfg);
  const std::size_t count = cfg.size("samples");
  if (count < 1)
    throw UsageError("samples must be at least 1");
  const RealField traj = as_trajectory(read_fld(required(cfg, "init")));
  const RealField window = input_window(traj, cfg.size("start"), frames_in(pcno));
  prepare_out(cfg, ctx);

  std::vector<RealField> draws(count);
  parallel_for(count, ctx.threads, [&](std::size_t j) {
    Rng rng = make_stream(cfg.seed(), "sample", j);
    draws[j] = diffpcno_step(pcno, m, window, {}, tp, rng).prediction;
  });
  write_fld(stack_frames(draws, {"sample", count, static_cast<double>(count), AxisKind::temporal}),
            ctx.out / "sample.fld");
  write_fld(pcno_forward(pcno, window, {}), ctx.out / "pcno.fld");
}

void cmd_uncertainty(const RunConfig& cfg, const RunContext& ctx)
{
  const fs::path model_path = required(cfg, "model");
  const std::string kind = model_kind(model_path);
  const std::size_t steps = cfg.size("steps"), n_traj = cfg.size("n_traj");
  if (steps < 1 || n_traj < 2)
    throw UsageError("uncertainty needs steps >= 1 and n_traj >= 2");
  const auto tp = time_points(cfg);
  const RealField traj = as_trajectory(read_fld(required(cfg, "init")));

  Ensemble ens;
  if (kind == "denoiser") {
    const ConsistencyModel m = load_consistency(model_path);
    const FnoParams pcno = load_fno(required(cfg, "pcno"));
    const RealField window = input_window(traj, cfg.size("start"), frames_in(pcno));
    prepare_out(cfg, ctx);
    ens = diffpcno_ensemble(pcno, m, window, {}, tp, steps, n_traj, cfg.seed(), ctx.threads);
  } else {
    const FnoParams p = load_fno(model_path);
    const RealField window = input_window(traj, cfg.size("start"), frames_in(p));
    prepare_out(cfg, ctx);
    const StochasticStep step = [&](const RealField& w, Rng&) { return pcno_forward(p, w, {}); };
    ens = uncertainty_ensemble(step, window, steps, n_traj, cfg.seed(), ctx.threads);
  }
  write_fld(ens.mean, ctx.out / "mean.fld");
  write_fld(ens.std, ctx.out / "std.fld");
}

void cmd_evaluate(const RunConfig& cfg, const RunContext& ctx)
{
  const fs::path pred_dir = required(cfg, "pred"), truth_dir = required(cfg, "truth");
  std::vector<MetricKind> metrics;
  for (const auto& w : cfg.words("metrics"))
    metrics.push_back(parse_metric(w));
  if (metrics.empty())
    throw UsageError("metrics must name at least one metric");
  const auto manifest = read_manifest(truth_dir);
  const std::size_t offset = cfg.size("truth_offset");
  std::vector<RealField> pred, truth;
  for (std::size_t i = 0; i < manifest.trajectories.size(); ++i) {
    const fs::path p = pred_dir / trajectory_file_name(i);
    if (!fs::exists(p))
      throw FormatError("prediction for trajectory " + trajectory_file_name(i) + " missing: " + p.string());
    pred.push_back(as_trajectory(read_fld(p)));
    const RealField t = as_trajectory(load_trajectory(truth_dir, i));
    truth.push_back(frames(t, offset, pred.back().grid().size(0)));
    pred.back() = RealField(truth.back().grid(), pred.back().channels(), pred.back().data());
  }
  const MetricReport report =
      evaluate_trajectories(pred, truth, metrics, cfg.reals("csi_thresholds"), cfg.reals("corr_thresholds"));
  prepare_out(cfg, ctx);
  write_text_file(ctx.out / "report.txt", report.to_text());
  write_text_file(ctx.out / "report.csv", report.to_csv());
}

void run_command(const RunConfig& cfg, const RunContext& ctx)
{
  static const std::map<std::string, void (*)(const RunConfig&, const RunContext&)> table{
      {"generate", cmd_generate}, {"project", cmd_project},         {"train", cmd_train},
      {"rollout", cmd_rollout},   {"sample", cmd_sample},           {"uncertainty", cmd_uncertainty},
      {"evaluate", cmd_evaluate}};
  table.at(cfg.command())(cfg, ctx);
}

int resolve_threads(int flag_value)
{
  if (flag_value > 0)
    return flag_value;
  if (flag_value < 0)
    throw UsageError("--threads must be at least 1");
  if (const char* env = std::getenv("SPECPROJ_THREADS"); env && *env) {
    std::int64_t v = 0;
    try {
      v = parse_int(env);
    } catch (const Error&) {
      throw UsageError(std::string("SPECPROJ_THREADS must be a positive integer, got '") + env + "'");
    }
    if (v < 1)
      throw UsageError("SPECPROJ_THREADS must be at least 1");
    return static_cast<int>(v);
  }
  return 1;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Physically consistent neural operator toolkit", "pcno"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string seed, config, out_dir;
  int threads = 0;
  app.add_option("--seed", seed, "root random seed");
  app.add_option("--config", config, "flat key = value configuration file");
  app.add_option("--threads", threads, "worker threads (default: SPECPROJ_THREADS or 1)");
  app.add_option("--out", out_dir, "output directory");

  std::map<std::string, std::map<std::string, std::string>> given;
  std::map<std::string, CLI::App*> subs;
  for (const auto& schema : command_schemas()) {
    CLI::App* sub = app.add_subcommand(schema.name, schema.help);
    subs[schema.name] = sub;
    auto& values = given[schema.name];
    for (const auto& key : schema.keys) {
      if (key.key == "seed")
        continue;
      const std::string names = schema.name == "generate" && key.key == "kind" ? "kind,--kind" : "--" + key.key;
      std::string help = key.help;
      if (!key.default_value.empty())
        help += (help.empty() ? "" : " ") + std::string("[") + key.default_value + "]";
      sub->add_option(names, values[key.key], help);
    }
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    std::string command;
    for (const auto& [name, sub] : subs)
      if (sub->parsed())
        command = name;
    RunConfig cfg(schema_for(command));
    if (!config.empty())
      cfg.load_file(config);
    for (const auto& [key, value] : given[command])
      if (subs[command]->count(key == "kind" && command == "generate" ? "kind" : "--" + key) > 0)
        cfg.set(key, value);
    if (!seed.empty())
      cfg.set("seed", seed);
    cfg.seed();
    RunContext ctx{out_dir, resolve_threads(threads)};
    if (ctx.out.empty())
      throw UsageError("--out is required");
    run_command(cfg, ctx);
    out << command << ": wrote " << ctx.out.string() << '\n';
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

} // namespace pcno::cli
