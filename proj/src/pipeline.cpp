#include "avalign/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <thread>
#include <vector>

#include <json.hpp>

#include "avalign/avt_io.hpp"
#include "avalign/errors.hpp"
#include "avalign/ground_truth.hpp"
#include "avalign/log.hpp"
#include "avalign/metrics.hpp"
#include "avalign/tensor.hpp"

namespace avalign {

namespace {

using nlohmann::json;

const char* upsample_name(UpsamplePath p) {
  switch (p) {
    case UpsamplePath::Nearest: return "nearest";
    case UpsamplePath::Linear: return "linear";
    case UpsamplePath::Coarse: return "coarse";
  }
  return "?";
}

const char* softmax_name(SoftmaxAxis a) {
  switch (a) {
    case SoftmaxAxis::None: return "none";
    case SoftmaxAxis::Space: return "space";
    case SoftmaxAxis::Time: return "time";
  }
  return "?";
}

struct SampleOutcome {
  bool scored = false;
  std::string error;  // nonempty on failure
  std::vector<ScoreRecord> records;
  std::vector<SampleConfusion> confusions;
};

constexpr Metric kAllMetrics[] = {Metric::AsObject, Metric::AsWord, Metric::GsObject,
                                  Metric::GsWord};

AlignmentTensor obtain_tensor(const RunConfig& config, const SampleGroundTruth& gt) {
  const std::filesystem::path path =
      config.tensor_dir.empty() ? std::filesystem::path{}
                                : config.tensor_dir / (gt.sample_id + ".avt");
  if (!config.baseline) {
    if (!std::filesystem::exists(path)) {
      throw DataError("missing tensor file: " + path.string());
    }
    return read_avt(path);
  }
  // Baseline: seeded noise with the dims the model tensor would have had.
  int w, h, f;
  float frame_ms;
  if (!path.empty() && std::filesystem::exists(path)) {
    const AlignmentTensor shape = read_avt(path);
    w = shape.width;
    h = shape.height;
    f = shape.frames;
    frame_ms = shape.frame_ms;
  } else if (config.baseline_dims) {
    w = config.baseline_dims->width;
    h = config.baseline_dims->height;
    f = config.baseline_dims->frames;
    frame_ms = static_cast<float>(gt.frame_ms * gt.frames / f);
  } else {
    throw DataError("baseline: no tensor file for " + gt.sample_id +
                    " and no baseline dims configured");
  }
  return random_baseline_tensor(w, h, f, derive_sample_seed(config.seed, gt.sample_id), frame_ms);
}

SampleOutcome process_sample(const RunConfig& config, const SampleGroundTruth& gt) {
  SampleOutcome out;
  try {
    AlignmentTensor tensor = obtain_tensor(config, gt);

    switch (config.softmax) {
      case SoftmaxAxis::None:
        // Raw tensors must honor the nonnegativity invariant; negatives are
        // only meaningful as softmax inputs.
        validate_tensor(tensor, true);
        break;
      case SoftmaxAxis::Space:
        tensor = softmax_space(tensor, config.softmax_temperature);
        break;
      case SoftmaxAxis::Time:
        tensor = softmax_time(tensor, config.softmax_temperature);
        break;
    }

    const EvalResolution eval{gt.image_w, gt.image_h, gt.frames};
    const bool coarse = config.upsample == UpsamplePath::Coarse &&
                        !(tensor.width == eval.width && tensor.height == eval.height &&
                          tensor.frames == eval.frames);
    if (!coarse && !(tensor.width == eval.width && tensor.height == eval.height &&
                     tensor.frames == eval.frames)) {
      tensor = upsample(tensor, eval.width, eval.height, eval.frames,
                        config.upsample == UpsamplePath::Linear ? UpsampleMode::Linear
                                                                : UpsampleMode::Nearest);
    }

    for (const auto& entry : gt.entries) {
      ScoreRecord rec;
      if (coarse) {
        rec.sample_id = gt.sample_id;
        rec.class_id = entry.class_id;
        rec.word = entry.word;
        rec.scores = score_pair_coarse(tensor, gt.mask_for(entry), entry.span_frames, eval);
        rec.object_pixels = gt.mask_for(entry).pixel_count();
        rec.word_frames = entry.span_frames.count();
        rec.image_pixels = static_cast<std::int64_t>(gt.image_w) * gt.image_h;
        rec.utterance_frames = gt.frames;
        rec.frame_ms = gt.frame_ms;
      } else {
        rec = score_pair_record(tensor, gt, entry);
      }
      out.records.push_back(std::move(rec));
    }

    if (config.confusion) {
      for (Metric m : kAllMetrics) {
        if (!config.metrics.has(m)) continue;
        std::vector<ConfusionCell> cells = coarse ? confusion_scores_coarse(tensor, gt, m)
                                                  : confusion_scores(tensor, gt, m);
        if (!cells.empty()) {
          out.confusions.push_back(SampleConfusion{gt.sample_id, std::move(cells)});
        }
      }
    }
    out.scored = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

json totals_json(const PairScores& totals, const MetricSelection& sel) {
  json j = json::object();
  for (Metric m : kAllMetrics) {
    if (sel.has(m)) j[metric_name(m)] = totals.get(m);
  }
  return j;
}

}  // namespace

RunResult run_eval(const RunConfig& config) {
  const auto t_start = std::chrono::steady_clock::now();
  if (config.workers < 1) throw UsageError("worker count must be >= 1");
  if (config.out_dir.empty()) throw UsageError("output directory required");
  if (!config.baseline && config.tensor_dir.empty()) {
    throw UsageError("tensor directory required");
  }

  LoadStats load_stats;
  std::vector<SampleGroundTruth> samples =
      load_ground_truth(config.gt_path, config.strict, &load_stats);
  if (samples.empty()) throw DataError("no usable samples in " + config.gt_path.string());
  std::sort(samples.begin(), samples.end(),
            [](const SampleGroundTruth& a, const SampleGroundTruth& b) {
              return a.sample_id < b.sample_id;
            });

  // Work-sharing parallel map; per-sample outcomes land in fixed slots so the
  // emission order never depends on scheduling.
  std::vector<SampleOutcome> outcomes(samples.size());
  std::atomic<std::size_t> next{0};
  const int n_threads = std::max(1, std::min<int>(config.workers,
                                                  static_cast<int>(samples.size())));
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= samples.size()) return;
      outcomes[i] = process_sample(config, samples[i]);
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }

  RunResult result;
  result.samples_total = static_cast<int>(samples.size());
  result.pairs_skipped = load_stats.pairs_skipped;
  std::vector<ScoreRecord> records;
  std::vector<SampleConfusion> confusions;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    SampleOutcome& o = outcomes[i];
    if (!o.scored) {
      if (config.strict) {
        throw DataError("sample " + samples[i].sample_id + ": " + o.error);
      }
      log::warn("sample " + samples[i].sample_id + " skipped: " + o.error);
      ++result.samples_skipped;
      continue;
    }
    ++result.samples_scored;
    result.pairs_scored += static_cast<int>(o.records.size());
    std::move(o.records.begin(), o.records.end(), std::back_inserter(records));
    std::move(o.confusions.begin(), o.confusions.end(), std::back_inserter(confusions));
  }
  if (records.empty()) throw DataError("no pairs scored");

  result.aggregate = aggregate(records);

  // Analytic chance levels under a uniform random tensor: relative object
  // size for the object metrics, relative word duration for the word metrics.
  std::vector<ScoreRecord> chance_records = records;
  for (ScoreRecord& r : chance_records) {
    const double rel_size =
        static_cast<double>(r.object_pixels) / static_cast<double>(r.image_pixels);
    const double rel_dur =
        static_cast<double>(r.word_frames) / static_cast<double>(r.utterance_frames);
    r.scores = PairScores{rel_size, rel_dur, rel_size, rel_dur};
  }
  const AggregateResult chance = aggregate(chance_records);

  std::filesystem::create_directories(config.out_dir);
  write_records_csv(config.out_dir / "records.csv", records, config.metrics);
  write_class_csv(config.out_dir / "class_scores.csv", result.aggregate, config.metrics);
  if (config.confusion) {
    write_confusion_csv(config.out_dir / "confusion.csv", confusions);
  }

  json fits = json::object();
  for (Metric m : kAllMetrics) {
    if (!config.metrics.has(m)) continue;
    json per_metric = json::object();
    for (Covariate cov : {Covariate::ObjectSize, Covariate::WordDuration}) {
      const ScatterResult sc = scatter_data(records, cov, m);
      per_metric[covariate_name(cov)] = fit_to_json(sc.fit);
    }
    fits[metric_name(m)] = std::move(per_metric);
  }

  json classes = json::array();
  for (const ClassScore& c : result.aggregate.classes) {
    json jc{{"class", c.class_id}, {"count", c.count}};
    for (Metric m : kAllMetrics) {
      if (config.metrics.has(m)) jc[metric_name(m)] = c.means.get(m);
    }
    classes.push_back(std::move(jc));
  }

  const json summary{
      {"mode", config.baseline ? "baseline" : "eval"},
      {"config",
       {{"gt", config.gt_path.string()},
        {"tensors", config.tensor_dir.string()},
        {"upsample", upsample_name(config.upsample)},
        {"softmax", softmax_name(config.softmax)},
        {"threshold", config.threshold},
        {"seed", config.seed},
        {"strict", config.strict},
        {"confusion", config.confusion}}},
      {"counts",
       {{"samples_total", result.samples_total},
        {"samples_scored", result.samples_scored},
        {"samples_skipped", result.samples_skipped},
        {"pairs_scored", result.pairs_scored},
        {"pairs_skipped", result.pairs_skipped},
        {"classes", static_cast<int>(result.aggregate.classes.size())}}},
      {"totals", totals_json(result.aggregate.totals, config.metrics)},
      {"chance_totals", totals_json(chance.totals, config.metrics)},
      {"classes", classes},
      {"fits", fits},
  };
  std::ofstream out(config.out_dir / "summary.json", std::ios::trunc | std::ios::binary);
  if (!out) throw DataError("cannot write summary.json");
  out << summary.dump(2) << "\n";

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

}  // namespace avalign
