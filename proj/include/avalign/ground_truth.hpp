#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace avalign {

// Binary pixel set for one object class within one image, row-major.
struct ObjectMask {
  int width = 0;
  int height = 0;
  std::string class_id;
  std::vector<std::uint8_t> bits;  // 0 or 1 per pixel, bits[y * width + x]

  std::int64_t pixel_count() const;
  bool get(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v = true) {
    bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
  }
};

// Millisecond interval of one spoken word occurrence.
struct WordSpan {
  double onset_ms = 0.0;
  double offset_ms = 0.0;
  std::string class_id;
};

// Contiguous half-open frame interval [begin, end).
struct FrameRange {
  int begin = 0;
  int end = 0;

  int count() const { return end - begin; }
  bool empty() const { return end <= begin; }
};

// Ground-truth word-object pairing: spoken token, object category, and the
// similarity that linked them.
struct ConceptPair {
  std::string class_id;
  std::string word;
  std::string object_label;
  double similarity = 0.0;
};

// One image-utterance sample: per-class (unioned) masks plus one entry per
// word occurrence. Repeated words are separate entries sharing the class mask.
struct SampleGroundTruth {
  struct PairEntry {
    std::string class_id;
    std::string word;
    WordSpan span;
    FrameRange span_frames;
    int mask_index = 0;  // into class_masks
  };

  std::string sample_id;
  int image_w = 0;
  int image_h = 0;
  int frames = 0;
  double frame_ms = 10.0;
  std::vector<ObjectMask> class_masks;
  std::vector<PairEntry> entries;

  const ObjectMask& mask_for(const PairEntry& e) const { return class_masks[e.mask_index]; }
};

// Expands MSCOCO-style run lengths (zero-run first, alternating) into a
// row-major bitmap. The run sum must equal width*height.
ObjectMask decode_mask_rle(const std::vector<std::int64_t>& runs, int width, int height,
                           std::string class_id = {});

// Canonical inverse of decode_mask_rle: leading zero run (possibly 0), then
// strictly positive alternating runs.
std::vector<std::int64_t> encode_mask_rle(const ObjectMask& mask);

// Pixelwise OR of all masks; dims must match.
ObjectMask union_class_masks(const std::vector<ObjectMask>& masks, const std::string& class_id);

// Frames f with f*frame_ms in [onset_ms, offset_ms), clipped to
// [0, total_frames). Half-open so adjacent words never share a frame. An
// empty result marks the span degenerate; callers decide whether to skip.
FrameRange span_to_frames(const WordSpan& span, double frame_ms, int total_frames);

// Word-to-label similarity lookup, loaded from "word<TAB>label<TAB>sim" lines.
struct SimilarityTable {
  std::map<std::pair<std::string, std::string>, double> entries;

  std::optional<double> lookup(const std::string& word, const std::string& label) const;
};

SimilarityTable load_similarity_tsv(const std::filesystem::path& path);

// Emits every (noun, label) pair with similarity strictly above threshold,
// ordered by label then noun. Missing table entries count as -1 (no pair).
std::vector<ConceptPair> pair_concepts(const std::vector<std::string>& nouns,
                                       const std::vector<std::string>& labels,
                                       const SimilarityTable& sims, double threshold = 0.5);

struct LoadStats {
  int samples_loaded = 0;
  int samples_skipped = 0;
  int pairs_skipped = 0;
};

// Reads JSON-lines ground truth (one sample object per line). Masks of the
// same class within a sample are unioned; every word occurrence stays a
// separate entry. In strict mode any bad record aborts with a DataError
// carrying the line number; in lenient mode bad pairs/samples are skipped
// and counted.
std::vector<SampleGroundTruth> load_ground_truth(const std::filesystem::path& path, bool strict,
                                                 LoadStats* stats = nullptr);

}  // namespace avalign
