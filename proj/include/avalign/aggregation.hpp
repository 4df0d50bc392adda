#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "avalign/metrics.hpp"

namespace avalign {

// Unweighted per-class means over all records of that class.
struct ClassScore {
  std::string class_id;
  int count = 0;
  PairScores means;
};

// Macro-averaged dataset result: total = mean of class means, so small
// classes weigh the same as large ones.
struct AggregateResult {
  std::vector<ClassScore> classes;  // ordered by class_id
  PairScores totals;
  int record_count = 0;
};

AggregateResult aggregate(std::span<const ScoreRecord> records);

enum class Covariate { ObjectSize, WordDuration };

const char* covariate_name(Covariate c);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

struct ScatterPoint {
  std::string class_id;  // empty for binned points
  double x = 0.0;
  double y = 0.0;
  int count = 0;
};

// Per-class points (mean covariate, mean metric) plus an ordinary
// least-squares line over those points. The covariate is relative object
// size |S_c|/(N_x*N_y) or word duration in milliseconds. When n_bins > 0,
// `binned` additionally holds equal-width bin means for plotting; the fit is
// always computed on the unbinned class points. A degenerate covariate
// (fewer than 2 distinct values) yields no fit.
struct ScatterResult {
  std::vector<ScatterPoint> points;
  std::vector<ScatterPoint> binned;
  std::optional<LinearFit> fit;
};

ScatterResult scatter_data(std::span<const ScoreRecord> records, Covariate covariate,
                           Metric metric, int n_bins = 0);

// Least-squares line over arbitrary points; no fit when x variance is zero.
std::optional<LinearFit> ols_fit(std::span<const double> x, std::span<const double> y);

// Square cross-modal similarity matrix; entry (i, j) is the similarity of
// speech item i to image j. True matches sit on the diagonal.
struct SimilarityMatrix {
  int n = 0;
  std::vector<double> values;  // row-major

  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * n + j]; }
  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * n + j]; }
};

enum class RetrievalDirection { SpeechToImage, ImageToSpeech };

// Fraction of queries whose true match ranks within the top k. Ties rank the
// lower index first, so results are deterministic.
double recall_at_k(const SimilarityMatrix& sims, int k, RetrievalDirection direction);

}  // namespace avalign
