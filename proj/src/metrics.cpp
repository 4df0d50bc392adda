#include "avalign/metrics.hpp"

#include <algorithm>
#include <random>

#include "avalign/errors.hpp"

namespace avalign {

const char* metric_name(Metric m) {
  switch (m) {
    case Metric::AsObject: return "as_object";
    case Metric::AsWord: return "as_word";
    case Metric::GsObject: return "gs_object";
    case Metric::GsWord: return "gs_word";
  }
  return "?";
}

double PairScores::get(Metric m) const {
  switch (m) {
    case Metric::AsObject: return as_object;
    case Metric::AsWord: return as_word;
    case Metric::GsObject: return gs_object;
    case Metric::GsWord: return gs_word;
  }
  return 0.0;
}

namespace {

struct PairInputs {
  std::vector<std::int32_t> mask_offsets;  // within-frame offsets of set pixels
  std::int64_t mask_pixels = 0;
  std::int64_t image_pixels = 0;
};

PairInputs check_pair(const AlignmentTensor& t, const ObjectMask& mask, FrameRange span) {
  if (mask.width != t.width || mask.height != t.height) {
    throw DataError("mask dims " + std::to_string(mask.width) + "x" + std::to_string(mask.height) +
                    " do not match tensor " + std::to_string(t.width) + "x" +
                    std::to_string(t.height));
  }
  if (span.empty()) throw DataError("empty word span");
  if (span.begin < 0 || span.end > t.frames) {
    throw DataError("span [" + std::to_string(span.begin) + ", " + std::to_string(span.end) +
                    ") outside tensor frames " + std::to_string(t.frames));
  }
  PairInputs in;
  in.image_pixels = t.pixels();
  in.mask_offsets.reserve(64);
  for (std::size_t p = 0; p < mask.bits.size(); ++p) {
    if (mask.bits[p]) in.mask_offsets.push_back(static_cast<std::int32_t>(p));
  }
  in.mask_pixels = static_cast<std::int64_t>(in.mask_offsets.size());
  if (in.mask_pixels == 0) throw DataError("empty object mask");
  return in;
}

double frame_total(std::span<const float> frame) {
  double s = 0.0;
  for (float v : frame) s += v;
  return s;
}

double mask_total(std::span<const float> frame, const std::vector<std::int32_t>& offsets) {
  double s = 0.0;
  for (std::int32_t o : offsets) s += frame[o];
  return s;
}

}  // namespace

double alignment_score_object(const AlignmentTensor& t, const ObjectMask& mask, FrameRange span) {
  const PairInputs in = check_pair(t, mask, span);
  const double uniform_share =
      static_cast<double>(in.mask_pixels) / static_cast<double>(in.image_pixels);
  double acc = 0.0;
  for (int f = span.begin; f < span.end; ++f) {
    const auto frame = t.frame(f);
    const double total = frame_total(frame);
    acc += total == 0.0 ? uniform_share : mask_total(frame, in.mask_offsets) / total;
  }
  return acc / span.count();
}

double alignment_score_word(const AlignmentTensor& t, const ObjectMask& mask, FrameRange span) {
  const PairInputs in = check_pair(t, mask, span);
  const double uniform_share = static_cast<double>(span.count()) / static_cast<double>(t.frames);
  std::vector<double> span_sum(in.mask_offsets.size(), 0.0);
  std::vector<double> all_sum(in.mask_offsets.size(), 0.0);
  for (int f = 0; f < t.frames; ++f) {
    const auto frame = t.frame(f);
    const bool in_span = f >= span.begin && f < span.end;
    for (std::size_t i = 0; i < in.mask_offsets.size(); ++i) {
      const double v = frame[in.mask_offsets[i]];
      all_sum[i] += v;
      if (in_span) span_sum[i] += v;
    }
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < in.mask_offsets.size(); ++i) {
    acc += all_sum[i] == 0.0 ? uniform_share : span_sum[i] / all_sum[i];
  }
  return acc / static_cast<double>(in.mask_pixels);
}

double glancing_score_object(const AlignmentTensor& t, const ObjectMask& mask, FrameRange span) {
  const PairInputs in = check_pair(t, mask, span);
  double total = 0.0;
  double on_mask = 0.0;
  for (int f = span.begin; f < span.end; ++f) {
    const auto frame = t.frame(f);
    total += frame_total(frame);
    on_mask += mask_total(frame, in.mask_offsets);
  }
  if (total == 0.0) {
    return static_cast<double>(in.mask_pixels) / static_cast<double>(in.image_pixels);
  }
  return on_mask / total;
}

double glancing_score_word(const AlignmentTensor& t, const ObjectMask& mask, FrameRange span) {
  const PairInputs in = check_pair(t, mask, span);
  double total = 0.0;
  double in_span = 0.0;
  for (int f = 0; f < t.frames; ++f) {
    const double v = mask_total(t.frame(f), in.mask_offsets);
    total += v;
    if (f >= span.begin && f < span.end) in_span += v;
  }
  if (total == 0.0) {
    return static_cast<double>(span.count()) / static_cast<double>(t.frames);
  }
  return in_span / total;
}

PairScores score_pair(const AlignmentTensor& t, const ObjectMask& mask, FrameRange span) {
  const PairInputs in = check_pair(t, mask, span);
  const std::size_t n_mask = in.mask_offsets.size();
  const double uniform_space =
      static_cast<double>(in.mask_pixels) / static_cast<double>(in.image_pixels);
  const double uniform_time = static_cast<double>(span.count()) / static_cast<double>(t.frames);

  // Single pass: per-pixel sums restricted to the mask, per-frame totals.
  std::vector<double> pixel_span_sum(n_mask, 0.0);
  std::vector<double> pixel_all_sum(n_mask, 0.0);
  double as_object_acc = 0.0;
  double gs_obj_on_mask = 0.0;
  double gs_obj_total = 0.0;
  double gs_word_in_span = 0.0;
  double gs_word_total = 0.0;
  for (int f = 0; f < t.frames; ++f) {
    const auto frame = t.frame(f);
    const bool in_span = f >= span.begin && f < span.end;
    double on_mask = 0.0;
    for (std::size_t i = 0; i < n_mask; ++i) {
      const double v = frame[in.mask_offsets[i]];
      on_mask += v;
      pixel_all_sum[i] += v;
      if (in_span) pixel_span_sum[i] += v;
    }
    gs_word_total += on_mask;
    if (in_span) {
      const double total = frame_total(frame);
      as_object_acc += total == 0.0 ? uniform_space : on_mask / total;
      gs_obj_on_mask += on_mask;
      gs_obj_total += total;
      gs_word_in_span += on_mask;
    }
  }

  PairScores s;
  s.as_object = as_object_acc / span.count();
  double as_word_acc = 0.0;
  for (std::size_t i = 0; i < n_mask; ++i) {
    as_word_acc += pixel_all_sum[i] == 0.0 ? uniform_time : pixel_span_sum[i] / pixel_all_sum[i];
  }
  s.as_word = as_word_acc / static_cast<double>(in.mask_pixels);
  s.gs_object = gs_obj_total == 0.0 ? uniform_space : gs_obj_on_mask / gs_obj_total;
  s.gs_word = gs_word_total == 0.0 ? uniform_time : gs_word_in_span / gs_word_total;
  return s;
}

ScoreRecord score_pair_record(const AlignmentTensor& t, const SampleGroundTruth& gt,
                              const SampleGroundTruth::PairEntry& entry) {
  const ObjectMask& mask = gt.mask_for(entry);
  ScoreRecord rec;
  rec.sample_id = gt.sample_id;
  rec.class_id = entry.class_id;
  rec.word = entry.word;
  rec.scores = score_pair(t, mask, entry.span_frames);
  rec.object_pixels = mask.pixel_count();
  rec.word_frames = entry.span_frames.count();
  rec.image_pixels = static_cast<std::int64_t>(gt.image_w) * gt.image_h;
  rec.utterance_frames = gt.frames;
  rec.frame_ms = gt.frame_ms;
  return rec;
}

namespace {

double single_metric(const AlignmentTensor& t, const ObjectMask& mask, FrameRange span,
                     Metric metric) {
  switch (metric) {
    case Metric::AsObject: return alignment_score_object(t, mask, span);
    case Metric::AsWord: return alignment_score_word(t, mask, span);
    case Metric::GsObject: return glancing_score_object(t, mask, span);
    case Metric::GsWord: return glancing_score_word(t, mask, span);
  }
  return 0.0;
}

template <typename ScoreFn>
std::vector<ConfusionCell> confusion_impl(const SampleGroundTruth& gt, Metric metric,
                                          ScoreFn&& score_one) {
  if (gt.class_masks.size() < 2) return {};
  std::vector<ConfusionCell> cells;
  for (const ObjectMask& mask : gt.class_masks) {
    // Group span entries by word class, averaging over occurrences.
    std::map<std::string, std::pair<double, int>> acc;
    for (const SampleGroundTruth::PairEntry& e : gt.entries) {
      if (e.class_id == mask.class_id) continue;
      auto& slot = acc[e.class_id];
      slot.first += score_one(mask, e.span_frames);
      slot.second += 1;
    }
    for (const auto& [word_class, sum_count] : acc) {
      cells.push_back(ConfusionCell{mask.class_id, word_class, metric,
                                    sum_count.first / sum_count.second});
    }
  }
  return cells;
}

}  // namespace

std::vector<ConfusionCell> confusion_scores(const AlignmentTensor& t, const SampleGroundTruth& gt,
                                            Metric metric) {
  return confusion_impl(gt, metric, [&](const ObjectMask& mask, FrameRange span) {
    return single_metric(t, mask, span, metric);
  });
}

// --- Coarse-grid fast path ---------------------------------------------------

namespace {

struct CoarseFactors {
  int sx = 1, sy = 1, st = 1;
};

CoarseFactors coarse_factors(const AlignmentTensor& coarse, const EvalResolution& eval) {
  if (eval.width < coarse.width || eval.height < coarse.height || eval.frames < coarse.frames ||
      eval.width % coarse.width != 0 || eval.height % coarse.height != 0 ||
      eval.frames % coarse.frames != 0) {
    throw DataError("coarse path requires eval dims to be integer multiples of tensor dims (" +
                    std::to_string(coarse.width) + "x" + std::to_string(coarse.height) + "x" +
                    std::to_string(coarse.frames) + " -> " + std::to_string(eval.width) + "x" +
                    std::to_string(eval.height) + "x" + std::to_string(eval.frames) + ")");
  }
  return CoarseFactors{eval.width / coarse.width, eval.height / coarse.height,
                       eval.frames / coarse.frames};
}

// Count of fine mask pixels falling in each coarse cell.
std::vector<std::int64_t> mask_cell_counts(const ObjectMask& mask, const AlignmentTensor& coarse,
                                           const CoarseFactors& f) {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(coarse.pixels()), 0);
  for (int y = 0; y < mask.height; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * mask.width;
    const std::size_t crow = static_cast<std::size_t>(y / f.sy) * coarse.width;
    for (int x = 0; x < mask.width; ++x) {
      if (mask.bits[row + x]) ++counts[crow + x / f.sx];
    }
  }
  return counts;
}

// Count of fine span frames mapping onto each coarse frame.
std::vector<std::int64_t> span_frame_counts(FrameRange span, int coarse_frames,
                                            const CoarseFactors& f) {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(coarse_frames), 0);
  for (int t = span.begin; t < span.end; ++t) ++counts[t / f.st];
  return counts;
}

}  // namespace

PairScores score_pair_coarse(const AlignmentTensor& coarse, const ObjectMask& mask,
                             FrameRange span, const EvalResolution& eval) {
  const CoarseFactors fac = coarse_factors(coarse, eval);
  if (mask.width != eval.width || mask.height != eval.height) {
    throw DataError("mask dims do not match eval resolution");
  }
  if (span.empty()) throw DataError("empty word span");
  if (span.begin < 0 || span.end > eval.frames) throw DataError("span outside eval frames");

  const std::vector<std::int64_t> mcount = mask_cell_counts(mask, coarse, fac);
  const std::vector<std::int64_t> scount = span_frame_counts(span, coarse.frames, fac);
  std::int64_t mask_pixels = 0;
  for (std::int64_t c : mcount) mask_pixels += c;
  if (mask_pixels == 0) throw DataError("empty object mask");
  const std::int64_t image_pixels = static_cast<std::int64_t>(eval.width) * eval.height;
  const double uniform_space = static_cast<double>(mask_pixels) / static_cast<double>(image_pixels);
  const double uniform_time = static_cast<double>(span.count()) / static_cast<double>(eval.frames);
  const double cell_area = static_cast<double>(fac.sx) * fac.sy;
  const std::int64_t cells = coarse.pixels();

  // Per-coarse-frame: total and mask-weighted sums. Per-cell: all-time and
  // span-weighted sums.
  std::vector<double> cell_all(static_cast<std::size_t>(cells), 0.0);
  std::vector<double> cell_span(static_cast<std::size_t>(cells), 0.0);
  double as_object_acc = 0.0;
  double gs_obj_on_mask = 0.0;
  double gs_obj_total = 0.0;
  double gs_word_in_span = 0.0;
  double gs_word_total = 0.0;
  for (int n = 0; n < coarse.frames; ++n) {
    const auto frame = coarse.frame(n);
    const double span_mult = static_cast<double>(scount[n]);
    double total = 0.0;
    double weighted = 0.0;
    for (std::int64_t c = 0; c < cells; ++c) {
      const double v = frame[c];
      total += v;
      weighted += mcount[c] * v;
      cell_all[c] += v;
      if (scount[n] > 0) cell_span[c] += span_mult * v;
    }
    gs_word_total += weighted;
    if (scount[n] > 0) {
      // Each of the scount[n] fine frames mapped here contributes the same
      // normalized share: weighted / (cell_area * total).
      as_object_acc +=
          span_mult * (total == 0.0 ? uniform_space : weighted / (cell_area * total));
      gs_obj_on_mask += span_mult * weighted;
      gs_obj_total += span_mult * total;
      gs_word_in_span += span_mult * weighted;
    }
  }

  PairScores s;
  s.as_object = as_object_acc / span.count();

  // A fine pixel in cell c has time-series total st * cell_all[c] and span
  // share cell_span[c] / (st * cell_all[c]); mcount[c] pixels share it.
  double as_word_acc = 0.0;
  for (std::int64_t c = 0; c < cells; ++c) {
    if (mcount[c] == 0) continue;
    as_word_acc += mcount[c] * (cell_all[c] == 0.0
                                    ? uniform_time
                                    : cell_span[c] / (fac.st * cell_all[c]));
  }
  s.as_word = as_word_acc / static_cast<double>(mask_pixels);
  // Fine-resolution totals are the coarse sums scaled by the block size.
  s.gs_object =
      gs_obj_total == 0.0 ? uniform_space : gs_obj_on_mask / (cell_area * gs_obj_total);
  s.gs_word =
      gs_word_total == 0.0 ? uniform_time : gs_word_in_span / (fac.st * gs_word_total);
  return s;
}

std::vector<ConfusionCell> confusion_scores_coarse(const AlignmentTensor& coarse,
                                                   const SampleGroundTruth& gt, Metric metric) {
  const EvalResolution eval{gt.image_w, gt.image_h, gt.frames};
  return confusion_impl(gt, metric, [&](const ObjectMask& mask, FrameRange span) {
    return score_pair_coarse(coarse, mask, span, eval).get(metric);
  });
}

AlignmentTensor random_baseline_tensor(int width, int height, int frames, std::uint64_t seed,
                                       float frame_ms) {
  AlignmentTensor t(width, height, frames, frame_ms);
  std::mt19937_64 rng(seed);
  for (float& v : t.values) {
    // Top 24 bits -> uniform [0, 1) float; avoids the implementation-defined
    // behavior of std::uniform_real_distribution.
    v = static_cast<float>(rng() >> 40) * 0x1.0p-24f;
  }
  return t;
}

std::uint64_t derive_sample_seed(std::uint64_t master_seed, const std::string& sample_id) {
  // FNV-1a over the id, then splitmix64-style mixing with the master seed.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : sample_id) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::uint64_t z = h + 0x9E3779B97F4A7C15ull * (master_seed + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace avalign
