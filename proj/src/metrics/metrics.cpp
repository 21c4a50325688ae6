#include "pcno/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pcno/core/error.hpp"
#include "pcno/spectral/calculus.hpp"
#include "pcno/spectral/field_ops.hpp"

namespace pcno {

namespace {

void require_same(const RealField& a, const RealField& b, const char* what)
{
  require(a.same_shape(b), std::string(what) + ": prediction and truth differ in shape");
}

void require_pairs(const std::vector<RealField>& pred, const std::vector<RealField>& truth, const char* what)
{
  require(!pred.empty() && pred.size() == truth.size(), std::string(what) + " needs matching non-empty sample lists");
}

double mean(const std::vector<double>& v)
{
  double s = 0.0;
  for (double x : v)
    s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

bool leading_time(const RealField& f)
{
  const auto t = f.grid().temporal_axis();
  return t && *t == 0;
}

std::size_t frame_count(const RealField& f)
{
  require(leading_time(f), "per-step metrics need a leading temporal axis");
  return f.grid().size(0);
}

template <typename F>
std::vector<double> per_step(const RealField& pred, const RealField& truth, F&& f)
{
  require_same(pred, truth, "per-step metric");
  std::vector<double> out(frame_count(pred));
  for (std::size_t t = 0; t < out.size(); ++t)
    out[t] = f(time_slice(pred, t), time_slice(truth, t));
  return out;
}

double frame_divergence(const RealField& v)
{
  require(v.channels() == static_cast<Eigen::Index>(v.grid().rank()),
          "divergence needs one velocity channel per spatial axis");
  return divergence(v).data().abs().mean();
}

} // namespace

double nrmse(const std::vector<RealField>& pred, const std::vector<RealField>& truth)
{
  require_pairs(pred, truth, "nRMSE");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    require_same(pred[i], truth[i], "nRMSE");
    const double denom = truth[i].data().matrix().norm();
    require(denom > 0.0, "nRMSE is undefined for an all-zero truth sample");
    sum += (pred[i].data() - truth[i].data()).matrix().norm() / denom;
  }
  return sum / static_cast<double>(pred.size());
}

double nrmse(const RealField& pred, const RealField& truth)
{
  return nrmse(std::vector<RealField>{pred}, std::vector<RealField>{truth});
}

double mse(const std::vector<RealField>& pred, const std::vector<RealField>& truth)
{
  require_pairs(pred, truth, "MSE");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    require_same(pred[i], truth[i], "MSE");
    sum += (pred[i].data() - truth[i].data()).square().sum();
  }
  return sum / static_cast<double>(pred.size());
}

double mse(const RealField& pred, const RealField& truth)
{
  return mse(std::vector<RealField>{pred}, std::vector<RealField>{truth});
}

double pearson(const RealField& pred, const RealField& truth)
{
  require_same(pred, truth, "Pearson");
  const Eigen::ArrayXd a = pred.data() - pred.data().mean();
  const Eigen::ArrayXd b = truth.data() - truth.data().mean();
  const double saa = a.square().sum(), sbb = b.square().sum();
  if (saa == 0.0 || sbb == 0.0)
    return 0.0;
  return std::clamp((a * b).sum() / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::size_t high_corr_step(const std::vector<double>& correlation, double threshold)
{
  for (std::size_t t = 0; t < correlation.size(); ++t)
    if (correlation[t] < threshold)
      return t;
  return kNeverBelow;
}

double divergence_loss(const RealField& v)
{
  if (!leading_time(v))
    return frame_divergence(v);
  const std::size_t frames = v.grid().size(0);
  double sum = 0.0;
  for (std::size_t t = 0; t < frames; ++t)
    sum += frame_divergence(time_slice(v, t));
  return sum / static_cast<double>(frames);
}

double momentum_loss(const RealField& pred, const RealField& ref)
{
  require_same(pred, ref, "momentum loss");
  const auto n = static_cast<double>(pred.grid().points());
  double total = 0.0;
  for (Eigen::Index c = 0; c < pred.channels(); ++c) {
    const double d = pred.channel(c).sum() - ref.channel(c).sum();
    total += d * d;
  }
  return total / n;
}

double csi(const RealField& pred, const RealField& truth, double gamma)
{
  require_same(pred, truth, "CSI");
  require(gamma > 0.0, "CSI threshold must be positive");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (Eigen::Index i = 0; i < pred.data().size(); ++i) {
    const bool p = pred.data()[i] > gamma, t = truth.data()[i] > gamma;
    tp += p && t;
    fp += p && !t;
    fn += !p && t;
  }
  const std::size_t denom = tp + fp + fn;
  return denom == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(denom);
}

std::vector<double> per_step_nrmse(const RealField& pred, const RealField& truth)
{
  return per_step(pred, truth, [](const RealField& a, const RealField& b) { return nrmse(a, b); });
}

std::vector<double> per_step_mse(const RealField& pred, const RealField& truth)
{
  return per_step(pred, truth, [](const RealField& a, const RealField& b) { return mse(a, b); });
}

std::vector<double> per_step_pearson(const RealField& pred, const RealField& truth)
{
  return per_step(pred, truth, [](const RealField& a, const RealField& b) { return pearson(a, b); });
}

std::vector<double> per_step_divergence(const RealField& pred)
{
  std::vector<double> out(frame_count(pred));
  for (std::size_t t = 0; t < out.size(); ++t)
    out[t] = frame_divergence(time_slice(pred, t));
  return out;
}

std::vector<double> per_step_momentum(const RealField& pred, const RealField& truth)
{
  return per_step(pred, truth, [](const RealField& a, const RealField& b) { return momentum_loss(a, b); });
}

std::vector<double> per_step_csi(const RealField& pred, const RealField& truth, double gamma)
{
  return per_step(pred, truth, [gamma](const RealField& a, const RealField& b) { return csi(a, b, gamma); });
}

void MetricReport::add(const std::string& name, std::vector<double> values)
{
  MetricSeries s{name, std::move(values), 0.0};
  s.aggregate = mean(s.per_step);
  series.push_back(std::move(s));
}

const MetricSeries& MetricReport::find(const std::string& name) const
{
  for (const auto& s : series)
    if (s.name == name)
      return s;
  throw ContractError("metric report has no series '" + name + "'");
}

std::string MetricReport::to_text() const
{
  KvStanza kv;
  kv.emplace_back("trajectories", std::to_string(trajectories));
  std::string sizes;
  for (std::size_t i = 0; i < grid_sizes.size(); ++i)
    sizes += (i ? "," : "") + std::to_string(grid_sizes[i]);
  kv.emplace_back("grid", sizes);
  auto list = [](const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i)
      out += (i ? "," : "") + format_double(v[i]);
    return out;
  };
  if (!csi_thresholds.empty())
    kv.emplace_back("csi_thresholds", list(csi_thresholds));
  for (const auto& s : series) {
    kv.emplace_back(s.name, format_double(s.aggregate));
    if (s.name == "pearson")
      for (double th : corr_thresholds) {
        const std::size_t step = high_corr_step(s.per_step, th);
        kv.emplace_back("high_corr_step@" + format_double(th), step == kNeverBelow ? "never" : std::to_string(step));
      }
  }
  return format_kv_stanzas({kv});
}

std::string MetricReport::to_csv() const
{
  std::ostringstream out;
  out << "step,metric,value\n";
  for (const auto& s : series)
    for (std::size_t t = 0; t < s.per_step.size(); ++t)
      out << t << ',' << s.name << ',' << format_double(s.per_step[t]) << '\n';
  return out.str();
}

MetricReport parse_metric_csv(const std::string& csv)
{
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "step,metric,value")
    throw FormatError("metric CSV must start with the header 'step,metric,value'");
  MetricReport report;
  std::vector<std::pair<std::string, std::vector<double>>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty())
      continue;
    const auto a = line.find(','), b = line.rfind(',');
    if (a == std::string::npos || a == b)
      throw FormatError("metric CSV line " + std::to_string(lineno) + " needs three fields");
    const std::string name = line.substr(a + 1, b - a - 1);
    const auto step = static_cast<std::size_t>(parse_int(line.substr(0, a)));
    if (rows.empty() || rows.back().first != name)
      rows.emplace_back(name, std::vector<double>{});
    if (step != rows.back().second.size())
      throw FormatError("metric CSV line " + std::to_string(lineno) + " is out of step order");
    rows.back().second.push_back(parse_double(line.substr(b + 1)));
  }
  for (auto& [name, values] : rows)
    report.add(name, std::move(values));
  return report;
}

MetricKind parse_metric(const std::string& name)
{
  if (name == "nrmse")
    return MetricKind::nrmse;
  if (name == "mse")
    return MetricKind::mse;
  if (name == "pearson")
    return MetricKind::pearson;
  if (name == "divergence")
    return MetricKind::divergence;
  if (name == "momentum")
    return MetricKind::momentum;
  if (name == "csi")
    return MetricKind::csi;
  throw UsageError("unknown metric '" + name + "' (nrmse|mse|pearson|divergence|momentum|csi)");
}

std::string to_string(MetricKind m)
{
  switch (m) {
  case MetricKind::nrmse: return "nrmse";
  case MetricKind::mse: return "mse";
  case MetricKind::pearson: return "pearson";
  case MetricKind::divergence: return "divergence";
  case MetricKind::momentum: return "momentum";
  case MetricKind::csi: return "csi";
  }
  return "nrmse";
}

MetricReport evaluate_trajectories(const std::vector<RealField>& pred, const std::vector<RealField>& truth,
                                   const std::vector<MetricKind>& metrics, const std::vector<double>& csi_thresholds,
                                   const std::vector<double>& corr_thresholds)
{
  require_pairs(pred, truth, "evaluation");
  MetricReport report;
  report.trajectories = pred.size();
  report.grid_sizes = truth.front().grid().sizes();
  report.corr_thresholds = corr_thresholds;
  const std::size_t steps = frame_count(truth.front());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    require_same(pred[i], truth[i], "evaluation");
    require(frame_count(truth[i]) == steps, "all trajectories must have the same number of steps");
  }
  auto averaged = [&](auto&& f) {
    std::vector<double> acc(steps, 0.0);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const std::vector<double> v = f(pred[i], truth[i]);
      for (std::size_t t = 0; t < steps; ++t)
        acc[t] += v[t];
    }
    for (auto& v : acc)
      v /= static_cast<double>(pred.size());
    return acc;
  };
  for (MetricKind m : metrics) {
    switch (m) {
    case MetricKind::nrmse:
      report.add("nrmse", averaged(per_step_nrmse));
      report.add("nrmse_total", {nrmse(pred, truth)});
      break;
    case MetricKind::mse:
      report.add("mse", averaged(per_step_mse));
      report.add("mse_total", {mse(pred, truth)});
      break;
    case MetricKind::pearson: report.add("pearson", averaged(per_step_pearson)); break;
    case MetricKind::divergence:
      report.add("divergence", averaged([](const RealField& p, const RealField&) { return per_step_divergence(p); }));
      break;
    case MetricKind::momentum: report.add("momentum", averaged(per_step_momentum)); break;
    case MetricKind::csi:
      require(!csi_thresholds.empty(), "CSI needs at least one threshold");
      report.csi_thresholds = csi_thresholds;
      for (double g : csi_thresholds)
        report.add("csi@" + format_double(g),
                   averaged([g](const RealField& p, const RealField& t) { return per_step_csi(p, t, g); }));
      break;
    }
  }
  return report;
}

} // namespace pcno
