#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "avalign/ground_truth.hpp"
#include "avalign/tensor.hpp"

namespace avalign {

enum class Metric { AsObject, AsWord, GsObject, GsWord };

const char* metric_name(Metric m);

struct PairScores {
  double as_object = 0.0;
  double as_word = 0.0;
  double gs_object = 0.0;
  double gs_word = 0.0;

  double get(Metric m) const;
};

// Per-(sample, concept) scores plus the covariates used by aggregation.
struct ScoreRecord {
  std::string sample_id;
  std::string class_id;
  std::string word;
  PairScores scores;
  std::int64_t object_pixels = 0;   // |S_c|
  int word_frames = 0;              // |T_c|
  std::int64_t image_pixels = 0;    // N_x * N_y
  int utterance_frames = 0;         // T
  double frame_ms = 10.0;
};

struct ConfusionCell {
  std::string object_class;  // c1, supplies the mask
  std::string word_class;    // c2, supplies the span
  Metric metric = Metric::AsObject;
  double score = 0.0;
};

// Fraction of per-frame-normalized attention that falls on the mask, averaged
// over the span frames. Frames with zero total attention count as uniform.
double alignment_score_object(const AlignmentTensor& t, const ObjectMask& mask, FrameRange span);

// Fraction of per-pixel-normalized attention that falls inside the span,
// averaged over the mask pixels. All-zero pixel series count as uniform.
double alignment_score_word(const AlignmentTensor& t, const ObjectMask& mask, FrameRange span);

// Share of the cumulative span attention map that falls on the mask; the map
// is normalized over the image, with a uniform fallback when it is all zero.
double glancing_score_object(const AlignmentTensor& t, const ObjectMask& mask, FrameRange span);

// Share of the mask's total attention-over-time curve that falls inside the
// span; the curve is normalized over the utterance, uniform fallback when all
// zero.
double glancing_score_word(const AlignmentTensor& t, const ObjectMask& mask, FrameRange span);

// All four scores in a single pass over the tensor.
PairScores score_pair(const AlignmentTensor& t, const ObjectMask& mask, FrameRange span);

ScoreRecord score_pair_record(const AlignmentTensor& t, const SampleGroundTruth& gt,
                              const SampleGroundTruth::PairEntry& entry);

// The chosen metric for every ordered class pair (c1 != c2) present in the
// sample: mask of c1 against span(s) of c2, averaged over c2's word
// occurrences. Fewer than two distinct classes yields an empty list.
std::vector<ConfusionCell> confusion_scores(const AlignmentTensor& t, const SampleGroundTruth& gt,
                                            Metric metric);

// Scoring a coarse tensor against full-resolution ground truth, equivalent to
// nearest-neighbor upsampling by integer factors without materializing the
// upsampled tensor. eval dims must be integer multiples of the tensor dims.
struct EvalResolution {
  int width = 0;
  int height = 0;
  int frames = 0;
};

PairScores score_pair_coarse(const AlignmentTensor& coarse, const ObjectMask& mask,
                             FrameRange span, const EvalResolution& eval);

std::vector<ConfusionCell> confusion_scores_coarse(const AlignmentTensor& coarse,
                                                   const SampleGroundTruth& gt, Metric metric);

// Independent uniform [0, 1) values from a seeded generator; the same seed
// always yields a bit-identical tensor.
AlignmentTensor random_baseline_tensor(int width, int height, int frames, std::uint64_t seed,
                                       float frame_ms = 10.0f);

// Deterministic per-sample seed derivation for parallel baseline runs.
std::uint64_t derive_sample_seed(std::uint64_t master_seed, const std::string& sample_id);

}  // namespace avalign
