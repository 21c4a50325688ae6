#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "pcno/core/kv_text.hpp"
#include "pcno/spectral/field.hpp"

namespace pcno {

/// Mean over samples of ||pred_i - truth_i|| / ||truth_i||, norms over the
/// flattened field.
double nrmse(const std::vector<RealField>& pred, const std::vector<RealField>& truth);
double nrmse(const RealField& pred, const RealField& truth);

/// Mean over samples of ||pred_i - truth_i||^2 (a sum over points, not a mean).
double mse(const std::vector<RealField>& pred, const std::vector<RealField>& truth);
double mse(const RealField& pred, const RealField& truth);

/// Pearson correlation of the flattened values; 0 when either side is constant.
double pearson(const RealField& pred, const RealField& truth);

inline constexpr std::size_t kNeverBelow = std::numeric_limits<std::size_t>::max();

/// First step whose correlation is below `threshold`, or kNeverBelow.
std::size_t high_corr_step(const std::vector<double>& correlation, double threshold);

/// Mean |div v| with spectral derivatives; channel j is the component along
/// spatial axis j. A leading temporal axis is averaged over frames.
double divergence_loss(const RealField& v);

/// (1/N) ||sum pred - sum ref||^2: per-channel sums over all N grid points,
/// squared norm across channels.
double momentum_loss(const RealField& pred, const RealField& ref);

/// TP / (TP + FP + FN) with a cell flooded when its value exceeds gamma.
/// 1 when no cell is flooded in either field.
double csi(const RealField& pred, const RealField& truth, double gamma);

/// Per-step rows for a (t, ...) trajectory; each frame is one sample.
std::vector<double> per_step_nrmse(const RealField& pred, const RealField& truth);
std::vector<double> per_step_mse(const RealField& pred, const RealField& truth);
std::vector<double> per_step_pearson(const RealField& pred, const RealField& truth);
std::vector<double> per_step_divergence(const RealField& pred);
std::vector<double> per_step_momentum(const RealField& pred, const RealField& truth);
std::vector<double> per_step_csi(const RealField& pred, const RealField& truth, double gamma);

struct MetricSeries
{
  std::string name; // e.g. "nrmse", "csi@0.05"
  std::vector<double> per_step;
  double aggregate = 0.0; // mean of per_step
};

struct MetricReport
{
  std::vector<MetricSeries> series;
  std::vector<double> csi_thresholds;
  std::vector<double> corr_thresholds;
  std::vector<std::size_t> grid_sizes;
  std::size_t trajectories = 0;

  /// Appends a series; the aggregate is the mean of the values.
  void add(const std::string& name, std::vector<double> values);
  const MetricSeries& find(const std::string& name) const;

  /// Flat key = value text: aggregates, horizons and metadata.
  std::string to_text() const;
  /// step,metric,value rows.
  std::string to_csv() const;
};

MetricReport parse_metric_csv(const std::string& csv);

enum class MetricKind { nrmse, mse, pearson, divergence, momentum, csi };

MetricKind parse_metric(const std::string& name);
std::string to_string(MetricKind m);

/// Per-step metrics averaged over trajectory pairs; whole-trajectory nRMSE and MSE
/// are added as "nrmse_total" and "mse_total" when requested.
MetricReport evaluate_trajectories(const std::vector<RealField>& pred, const std::vector<RealField>& truth,
                                   const std::vector<MetricKind>& metrics, const std::vector<double>& csi_thresholds,
                                   const std::vector<double>& corr_thresholds = {0.9, 0.8});

} // namespace pcno
