#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "avalign/ground_truth.hpp"
#include "avalign/metrics.hpp"
#include "avalign/tensor.hpp"

namespace avalign::fixtures {

// Exact fraction in [0, 1]; planted scenes are built from integer-valued
// tensors so their scores are exact rationals instead of float residue.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// Best rational approximation with bounded denominator (continued
// fractions). Returns nothing when |p - num/den| > tol for every candidate.
std::optional<Fraction> rationalize(double p, std::int64_t max_den = 4096, double tol = 1e-12);

enum class Background { Uniform, Random };

// Synthetic tensor with an analytically known score profile: every span
// frame carries mass fraction exactly p on the mask and 1-p on the
// complement; frames outside the span are uniform. All stored values are
// small integers, so `expected` holds the construction's scores to within a
// few double ulps (AS_object and GS_object equal p by construction).
struct PlantedScene {
  AlignmentTensor tensor;
  ObjectMask mask;
  FrameRange span;
  double p = 0.0;
  PairScores expected;
};

PlantedScene plant_alignment(int width, int height, int frames, const ObjectMask& mask,
                             FrameRange span, Fraction p, Background background = Background::Uniform,
                             std::uint64_t seed = 0);

// Convenience overload; rejects p that has no small-denominator rational
// representation (exactness would be unattainable).
PlantedScene plant_alignment(int width, int height, int frames, const ObjectMask& mask,
                             FrameRange span, double p, Background background = Background::Uniform,
                             std::uint64_t seed = 0);

// Reference scores computed with plain nested scalar loops and 64-bit
// accumulation. Deliberately unoptimized and independent of the metrics
// module; equivalence tests treat this as ground truth.
PairScores oracle_scores(const AlignmentTensor& t, const ObjectMask& mask, FrameRange span);

// Synthetic dataset emission for end-to-end pipeline tests: one AVT1 tensor
// per sample under <out>/tensors plus <out>/gt.jsonl. In planted mode the
// tensor dims must equal the evaluation dims, each sample carries one planted
// pair, and <out>/expected.json records the planted fractions.
struct SynthConfig {
  int n_samples = 10;
  int tensor_w = 8, tensor_h = 8, tensor_frames = 16;
  int image_w = 8, image_h = 8, frames = 16;
  double frame_ms = 10.0;
  int pairs_per_sample = 2;
  std::uint64_t seed = 0;
  bool planted = false;
};

void write_synthetic_dataset(const SynthConfig& config, const std::filesystem::path& out_dir);

}  // namespace avalign::fixtures
