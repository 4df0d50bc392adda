#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace avalign {

// Dense nonnegative association-strength volume between image positions and
// speech frames. Values are stored frame-major with row-major frames:
//   offset(x, y, t) = t * (width * height) + y * width + x
// so one frame is a contiguous block. Values are 32-bit floats; every
// accumulation over them is done in 64-bit.
struct AlignmentTensor {
  int width = 0;
  int height = 0;
  int frames = 0;
  float frame_ms = 10.0f;  // duration of one frame in milliseconds
  std::vector<float> values;

  AlignmentTensor() = default;
  AlignmentTensor(int w, int h, int f, float frame_ms_ = 10.0f, float fill = 0.0f);

  std::int64_t pixels() const { return static_cast<std::int64_t>(width) * height; }
  std::size_t size() const { return values.size(); }

  float& at(int x, int y, int t) {
    return values[static_cast<std::size_t>(t) * pixels() + static_cast<std::size_t>(y) * width + x];
  }
  float at(int x, int y, int t) const {
    return values[static_cast<std::size_t>(t) * pixels() + static_cast<std::size_t>(y) * width + x];
  }

  std::span<const float> frame(int t) const {
    return std::span<const float>(values).subspan(static_cast<std::size_t>(t) * pixels(), pixels());
  }
  std::span<float> frame(int t) {
    return std::span<float>(values).subspan(static_cast<std::size_t>(t) * pixels(), pixels());
  }

  bool same_shape(const AlignmentTensor& other) const {
    return width == other.width && height == other.height && frames == other.frames;
  }
};

// Throws DataError when dims/frame_ms/value-count are inconsistent or values
// are not finite. Nonnegativity is checked only when require_nonnegative is
// set: tensors built with clamping disabled may legitimately hold negatives
// until a softmax is applied.
void validate_tensor(const AlignmentTensor& t, bool require_nonnegative = false);

// Spatial grid of embedding vectors, cell-major then dimension:
//   offset(x, y, d) = (y * width + x) * dim + d
struct EmbeddingGrid {
  int width = 0;
  int height = 0;
  int dim = 0;
  bool unit_normalized = false;
  std::vector<float> values;

  std::span<const float> cell(int x, int y) const {
    return std::span<const float>(values).subspan(
        (static_cast<std::size_t>(y) * width + x) * dim, dim);
  }
};

// Temporal sequence of embedding vectors, frame-major then dimension.
struct EmbeddingSequence {
  int frames = 0;
  int dim = 0;
  bool unit_normalized = false;
  std::vector<float> values;

  std::span<const float> frame_vec(int t) const {
    return std::span<const float>(values).subspan(static_cast<std::size_t>(t) * dim, dim);
  }
};

void validate_embedding_grid(const EmbeddingGrid& g);
void validate_embedding_sequence(const EmbeddingSequence& s);

// Combines a spatial embedding grid with a temporal embedding sequence into
// an alignment tensor: value(x, y, t) = <grid(x, y), seq(t)>. Negative dot
// products are clamped to zero by default so the result satisfies the
// nonnegativity invariant; pass clamp_negative = false when a softmax will
// be applied afterwards.
AlignmentTensor build_alignment_tensor(const EmbeddingGrid& grid, const EmbeddingSequence& seq,
                                       bool clamp_negative = true);

// Per-frame normalization: every frame of the result sums to 1. Frames whose
// total is zero become uniform 1/(width*height).
AlignmentTensor normalize_per_frame(const AlignmentTensor& t);

// Per-pixel normalization: every pixel time-series of the result sums to 1.
// All-zero series become uniform 1/frames.
AlignmentTensor normalize_per_pixel(const AlignmentTensor& t);

// Softmax over the spatial positions of each frame. temperature must be > 0.
AlignmentTensor softmax_space(const AlignmentTensor& t, double temperature = 1.0);

// Softmax over time for each pixel. temperature must be > 0.
AlignmentTensor softmax_time(const AlignmentTensor& t, double temperature = 1.0);

enum class UpsampleMode { Nearest, Linear };

// Upsamples to (target_w, target_h, target_frames); every target dim must be
// >= the source dim. Nearest replicates source cells (index = floor(i*src/dst),
// exact block replication for integer factors); Linear trilinearly
// interpolates with edge clamping. frame_ms is rescaled by the frame ratio.
AlignmentTensor upsample(const AlignmentTensor& t, int target_w, int target_h, int target_frames,
                         UpsampleMode mode);

}  // namespace avalign
