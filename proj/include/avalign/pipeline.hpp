#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "avalign/aggregation.hpp"
#include "avalign/report.hpp"

namespace avalign {

enum class UpsamplePath {
  Nearest,  // materialize nearest-neighbor upsampled tensor
  Linear,   // materialize trilinear upsampled tensor
  Coarse,   // score on the coarse tensor, equivalent to Nearest with integer factors
};

enum class SoftmaxAxis { None, Space, Time };

struct RunConfig {
  std::filesystem::path gt_path;
  std::filesystem::path tensor_dir;  // <sample_id>.avt per sample; may be empty for baseline runs
  std::filesystem::path out_dir;
  UpsamplePath upsample = UpsamplePath::Nearest;
  SoftmaxAxis softmax = SoftmaxAxis::None;
  double softmax_temperature = 1.0;
  double threshold = 0.5;  // echoed into the summary for provenance
  std::uint64_t seed = 0;
  int workers = 1;
  bool strict = false;
  MetricSelection metrics;
  bool confusion = false;

  // Baseline runs replace every tensor with seeded uniform noise. Dims come
  // from the sample's tensor file when tensor_dir is set, otherwise from
  // baseline_dims.
  bool baseline = false;
  std::optional<EvalResolution> baseline_dims;
};

struct RunResult {
  AggregateResult aggregate;
  int samples_total = 0;
  int samples_scored = 0;
  int samples_skipped = 0;  // missing/unreadable tensors in lenient mode
  int pairs_scored = 0;
  int pairs_skipped = 0;  // degenerate pairs dropped while loading ground truth
  double wall_seconds = 0.0;
};

// Scores every ground-truth pair against its sample tensor and writes
// records.csv, class_scores.csv, summary.json (and confusion.csv when
// enabled) into out_dir. Outputs are byte-identical for a fixed
// (config, seed) regardless of worker count. In strict mode any unreadable
// or missing input aborts before reports are written.
RunResult run_eval(const RunConfig& config);

}  // namespace avalign
