#include "avalign/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "avalign/errors.hpp"

namespace avalign {

AggregateResult aggregate(std::span<const ScoreRecord> records) {
  if (records.empty()) throw DataError("aggregate: no records");
  std::map<std::string, std::pair<PairScores, int>> by_class;
  for (const ScoreRecord& r : records) {
    auto& [sums, count] = by_class[r.class_id];
    sums.as_object += r.scores.as_object;
    sums.as_word += r.scores.as_word;
    sums.gs_object += r.scores.gs_object;
    sums.gs_word += r.scores.gs_word;
    ++count;
  }

  AggregateResult out;
  out.record_count = static_cast<int>(records.size());
  PairScores total_sums;
  for (const auto& [class_id, entry] : by_class) {
    const auto& [sums, count] = entry;
    ClassScore cs;
    cs.class_id = class_id;
    cs.count = count;
    cs.means.as_object = sums.as_object / count;
    cs.means.as_word = sums.as_word / count;
    cs.means.gs_object = sums.gs_object / count;
    cs.means.gs_word = sums.gs_word / count;
    total_sums.as_object += cs.means.as_object;
    total_sums.as_word += cs.means.as_word;
    total_sums.gs_object += cs.means.gs_object;
    total_sums.gs_word += cs.means.gs_word;
    out.classes.push_back(std::move(cs));
  }
  const double n = static_cast<double>(out.classes.size());
  out.totals.as_object = total_sums.as_object / n;
  out.totals.as_word = total_sums.as_word / n;
  out.totals.gs_object = total_sums.gs_object / n;
  out.totals.gs_word = total_sums.gs_word / n;
  return out;
}

const char* covariate_name(Covariate c) {
  return c == Covariate::ObjectSize ? "object_size" : "word_duration";
}

std::optional<LinearFit> ols_fit(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) return std::nullopt;
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

ScatterResult scatter_data(std::span<const ScoreRecord> records, Covariate covariate,
                           Metric metric, int n_bins) {
  if (records.empty()) throw DataError("scatter_data: no records");

  struct Acc {
    double x = 0.0, y = 0.0;
    int count = 0;
  };
  std::map<std::string, Acc> by_class;
  for (const ScoreRecord& r : records) {
    const double x = covariate == Covariate::ObjectSize
                         ? static_cast<double>(r.object_pixels) / static_cast<double>(r.image_pixels)
                         : r.word_frames * r.frame_ms;
    Acc& a = by_class[r.class_id];
    a.x += x;
    a.y += r.scores.get(metric);
    ++a.count;
  }

  ScatterResult out;
  std::vector<double> xs, ys;
  for (const auto& [class_id, a] : by_class) {
    ScatterPoint p;
    p.class_id = class_id;
    p.x = a.x / a.count;
    p.y = a.y / a.count;
    p.count = a.count;
    xs.push_back(p.x);
    ys.push_back(p.y);
    out.points.push_back(std::move(p));
  }
  out.fit = ols_fit(xs, ys);

  if (n_bins > 0 && !out.points.empty()) {
    const auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
    const double lo = *lo_it, hi = *hi_it;
    std::vector<Acc> bins(static_cast<std::size_t>(n_bins));
    for (const ScatterPoint& p : out.points) {
      int b = hi == lo ? 0
                       : static_cast<int>((p.x - lo) / (hi - lo) * n_bins);
      b = std::clamp(b, 0, n_bins - 1);
      bins[b].x += p.x;
      bins[b].y += p.y;
      ++bins[b].count;
    }
    for (const Acc& a : bins) {
      if (a.count == 0) continue;
      out.binned.push_back(ScatterPoint{{}, a.x / a.count, a.y / a.count, a.count});
    }
  }
  return out;
}

double recall_at_k(const SimilarityMatrix& sims, int k, RetrievalDirection direction) {
  if (sims.n < 1 || sims.values.size() != static_cast<std::size_t>(sims.n) * sims.n) {
    throw DataError("similarity matrix must be square and nonempty");
  }
  if (k < 1 || k > sims.n) {
    throw DataError("recall k must be in [1, " + std::to_string(sims.n) + "]");
  }
  const int n = sims.n;
  int hits = 0;
  for (int q = 0; q < n; ++q) {
    const double truth = sims.at(q, q);
    // Rank of the diagonal among candidates; ties go to the lower index.
    int better = 0;
    for (int c = 0; c < n; ++c) {
      const double v = direction == RetrievalDirection::SpeechToImage ? sims.at(q, c)
                                                                      : sims.at(c, q);
      if (v > truth || (v == truth && c < q)) ++better;
    }
    if (better < k) ++hits;
  }
  return static_cast<double>(hits) / n;
}

}  // namespace avalign
