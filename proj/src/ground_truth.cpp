#include "avalign/ground_truth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "avalign/errors.hpp"
#include "avalign/log.hpp"

namespace avalign {

std::int64_t ObjectMask::pixel_count() const {
  std::int64_t n = 0;
  for (std::uint8_t b : bits) n += b;
  return n;
}

ObjectMask decode_mask_rle(const std::vector<std::int64_t>& runs, int width, int height,
                           std::string class_id) {
  if (width < 1 || height < 1) throw DataError("mask dims must be >= 1");
  const std::int64_t total = static_cast<std::int64_t>(width) * height;
  std::int64_t sum = 0;
  for (std::int64_t r : runs) {
    if (r < 0) throw DataError("RLE runs must be nonnegative");
    sum += r;
  }
  if (sum != total) {
    throw DataError("RLE run sum " + std::to_string(sum) + " does not match " +
                    std::to_string(total) + " pixels");
  }
  ObjectMask mask;
  mask.width = width;
  mask.height = height;
  mask.class_id = std::move(class_id);
  mask.bits.assign(static_cast<std::size_t>(total), 0);
  std::size_t pos = 0;
  std::uint8_t value = 0;  // zero-run first
  for (std::int64_t r : runs) {
    if (value) std::fill_n(mask.bits.begin() + pos, r, std::uint8_t{1});
    pos += static_cast<std::size_t>(r);
    value ^= 1;
  }
  return mask;
}

std::vector<std::int64_t> encode_mask_rle(const ObjectMask& mask) {
  std::vector<std::int64_t> runs;
  std::uint8_t current = 0;
  std::int64_t len = 0;
  for (std::uint8_t b : mask.bits) {
    if (b == current) {
      ++len;
    } else {
      runs.push_back(len);
      current = b;
      len = 1;
    }
  }
  runs.push_back(len);
  return runs;
}

ObjectMask union_class_masks(const std::vector<ObjectMask>& masks, const std::string& class_id) {
  if (masks.empty()) throw DataError("union_class_masks: no masks given");
  ObjectMask out = masks.front();
  out.class_id = class_id;
  for (std::size_t i = 1; i < masks.size(); ++i) {
    const ObjectMask& m = masks[i];
    if (m.width != out.width || m.height != out.height) {
      throw DataError("union_class_masks: mask dim mismatch for class " + class_id);
    }
    for (std::size_t p = 0; p < out.bits.size(); ++p) out.bits[p] |= m.bits[p];
  }
  return out;
}

FrameRange span_to_frames(const WordSpan& span, double frame_ms, int total_frames) {
  if (!(frame_ms > 0.0)) throw DataError("frame_ms must be > 0");
  // Smallest f with f*frame_ms >= bound, robust against division rounding.
  const auto first_at_or_after = [frame_ms](double bound) {
    std::int64_t f = static_cast<std::int64_t>(std::ceil(bound / frame_ms));
    while (f > 0 && (f - 1) * frame_ms >= bound) --f;
    while (f * frame_ms < bound) ++f;
    return f;
  };
  std::int64_t begin = first_at_or_after(span.onset_ms);
  std::int64_t end = first_at_or_after(span.offset_ms);
  begin = std::max<std::int64_t>(begin, 0);
  end = std::min<std::int64_t>(end, total_frames);
  if (end <= begin) return FrameRange{0, 0};
  return FrameRange{static_cast<int>(begin), static_cast<int>(end)};
}

std::optional<double> SimilarityTable::lookup(const std::string& word,
                                              const std::string& label) const {
  auto it = entries.find({word, label});
  if (it == entries.end()) return std::nullopt;
  return it->second;
}

SimilarityTable load_similarity_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open similarity table: " + path.string());
  SimilarityTable table;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) {
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": expected word<TAB>label<TAB>similarity");
    }
    const std::string word = line.substr(0, tab1);
    const std::string label = line.substr(tab1 + 1, tab2 - tab1 - 1);
    double sim = 0.0;
    try {
      sim = std::stod(line.substr(tab2 + 1));
    } catch (const std::exception&) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": bad similarity value");
    }
    table.entries[{word, label}] = sim;
  }
  return table;
}

std::vector<ConceptPair> pair_concepts(const std::vector<std::string>& nouns,
                                       const std::vector<std::string>& labels,
                                       const SimilarityTable& sims, double threshold) {
  if (threshold < -1.0 || threshold > 1.0) throw DataError("threshold must be in [-1, 1]");
  std::set<std::string> noun_set(nouns.begin(), nouns.end());
  std::set<std::string> label_set(labels.begin(), labels.end());
  std::vector<ConceptPair> out;
  for (const std::string& label : label_set) {
    for (const std::string& noun : noun_set) {
      double sim = -1.0;
      if (auto found = sims.lookup(noun, label)) {
        sim = *found;
      } else {
        log::debug("no similarity entry for (" + noun + ", " + label + "), treating as -1");
      }
      if (sim > threshold) {
        out.push_back(ConceptPair{label, noun, label, sim});
      }
    }
  }
  return out;
}

namespace {

using nlohmann::json;

// Throws DataError on any schema/content problem; the caller adds context.
SampleGroundTruth parse_sample(const json& j, bool strict, LoadStats& stats) {
  if (!j.is_object()) throw DataError("record is not a JSON object");
  SampleGroundTruth gt;
  gt.sample_id = j.at("sample_id").get<std::string>();
  gt.image_w = j.at("image_w").get<int>();
  gt.image_h = j.at("image_h").get<int>();
  gt.frames = j.at("frames").get<int>();
  gt.frame_ms = j.at("frame_ms").get<double>();
  if (gt.sample_id.empty()) throw DataError("empty sample_id");
  if (gt.image_w < 1 || gt.image_h < 1) throw DataError("image dims must be >= 1");
  if (gt.frames < 1) throw DataError("frames must be >= 1");
  if (!(gt.frame_ms > 0.0) || !std::isfinite(gt.frame_ms)) {
    throw DataError("frame_ms must be positive");
  }

  struct RawPair {
    std::string class_id;
    std::string word;
    WordSpan span;
    FrameRange frames;
    ObjectMask mask;
  };
  std::vector<RawPair> raw;
  for (const json& jp : j.at("pairs")) {
    RawPair p;
    p.class_id = jp.at("class").get<std::string>();
    p.word = jp.at("word").get<std::string>();
    p.span.onset_ms = jp.at("onset_ms").get<double>();
    p.span.offset_ms = jp.at("offset_ms").get<double>();
    p.span.class_id = p.class_id;
    if (p.class_id.empty()) throw DataError("empty class id");
    if (!(p.span.onset_ms >= 0.0) || !(p.span.onset_ms < p.span.offset_ms)) {
      throw DataError("pair (" + p.class_id + ", " + p.word +
                      "): need 0 <= onset_ms < offset_ms");
    }
    p.mask = decode_mask_rle(jp.at("mask_rle").get<std::vector<std::int64_t>>(), gt.image_w,
                             gt.image_h, p.class_id);
    if (p.mask.pixel_count() == 0) {
      throw DataError("pair (" + p.class_id + ", " + p.word + "): mask has no set pixels");
    }
    p.frames = span_to_frames(p.span, gt.frame_ms, gt.frames);
    if (p.frames.empty()) {
      const std::string msg = "sample " + gt.sample_id + " pair (" + p.class_id + ", " + p.word +
                              "): span covers no frames after clipping";
      if (strict) throw DataError(msg);
      log::warn(msg + "; pair skipped");
      ++stats.pairs_skipped;
      continue;
    }
    raw.push_back(std::move(p));
  }

  // One unioned mask per class; every occurrence keeps its own span.
  std::map<std::string, int> class_index;
  for (const RawPair& p : raw) {
    auto [it, inserted] = class_index.try_emplace(p.class_id, static_cast<int>(gt.class_masks.size()));
    if (inserted) {
      gt.class_masks.push_back(p.mask);
    } else {
      ObjectMask& existing = gt.class_masks[it->second];
      for (std::size_t i = 0; i < existing.bits.size(); ++i) existing.bits[i] |= p.mask.bits[i];
    }
  }
  for (RawPair& p : raw) {
    gt.entries.push_back(SampleGroundTruth::PairEntry{p.class_id, p.word, p.span, p.frames,
                                                      class_index.at(p.class_id)});
  }
  return gt;
}

}  // namespace

std::vector<SampleGroundTruth> load_ground_truth(const std::filesystem::path& path, bool strict,
                                                 LoadStats* stats) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open ground truth: " + path.string());
  LoadStats local;
  std::vector<SampleGroundTruth> samples;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const int pairs_skipped_before = local.pairs_skipped;
    try {
      const json j = json::parse(line);
      samples.push_back(parse_sample(j, strict, local));
      ++local.samples_loaded;
    } catch (const std::exception& e) {
      local.pairs_skipped = pairs_skipped_before;
      const std::string msg = path.string() + ":" + std::to_string(lineno) + ": " + e.what();
      if (strict) throw DataError(msg);
      log::warn(msg + "; sample skipped");
      ++local.samples_skipped;
    }
  }
  if (stats != nullptr) *stats = local;
  return samples;
}

}  // namespace avalign
