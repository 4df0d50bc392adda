#include "avalign/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <vector>

#include <json.hpp>

#include "avalign/avt_io.hpp"
#include "avalign/errors.hpp"

namespace avalign::fixtures {

std::optional<Fraction> rationalize(double p, std::int64_t max_den, double tol) {
  if (!std::isfinite(p) || p < 0.0) return std::nullopt;
  // Continued fraction convergents of p.
  std::int64_t h0 = 1, h1 = static_cast<std::int64_t>(std::floor(p));
  std::int64_t k0 = 0, k1 = 1;
  double x = p;
  for (int iter = 0; iter < 64; ++iter) {
    if (std::fabs(p - static_cast<double>(h1) / k1) <= tol) return Fraction{h1, k1};
    const double frac = x - std::floor(x);
    if (frac == 0.0) break;
    x = 1.0 / frac;
    const double af = std::floor(x);
    if (af > static_cast<double>(max_den)) break;
    const std::int64_t a = static_cast<std::int64_t>(af);
    const std::int64_t h2 = a * h1 + h0;
    const std::int64_t k2 = a * k1 + k0;
    if (k2 > max_den) break;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
  }
  if (std::fabs(p - static_cast<double>(h1) / k1) <= tol) return Fraction{h1, k1};
  return std::nullopt;
}

namespace {

constexpr double kMaxExactFloat = 16777216.0;  // 2^24

float exact_float(double v) {
  if (v < 0.0 || v > kMaxExactFloat || v != std::floor(v)) {
    throw DataError("plant_alignment: dims/denominator too large for exact float values");
  }
  return static_cast<float>(v);
}

}  // namespace

PlantedScene plant_alignment(int width, int height, int frames, const ObjectMask& mask,
                             FrameRange span, Fraction p, Background background,
                             std::uint64_t seed) {
  if (p.den < 1 || p.num < 0 || p.num > p.den) throw DataError("plant_alignment: p must be in [0, 1]");
  if (mask.width != width || mask.height != height) {
    throw DataError("plant_alignment: mask dims do not match tensor dims");
  }
  if (span.empty() || span.begin < 0 || span.end > frames) {
    throw DataError("plant_alignment: span must be a nonempty range within the frames");
  }
  const std::int64_t total_px = static_cast<std::int64_t>(width) * height;
  const std::int64_t inside_px = mask.pixel_count();
  const std::int64_t outside_px = total_px - inside_px;
  if (inside_px == 0) throw DataError("plant_alignment: mask has no set pixels");
  if (outside_px == 0 && p.num != p.den) {
    throw DataError("plant_alignment: mask covers the whole image, cannot place mass outside");
  }

  const std::int64_t a = p.num, b = p.den;
  // All values are integers chosen so that per-frame (and cumulative) mask
  // shares are exact rationals: inside/outside totals stand in ratio a : b-a.
  double vi, vo_uniform = 0.0, u;
  std::vector<double> vo;  // per outside pixel, Random background only
  if (outside_px == 0) {
    vi = 1.0;
    u = 1.0;
  } else if (background == Background::Uniform) {
    vi = static_cast<double>(a) * outside_px * total_px;
    vo_uniform = static_cast<double>(b - a) * inside_px * total_px;
    u = static_cast<double>(inside_px) * outside_px * b;  // same frame mass as span frames
  } else {
    std::mt19937_64 rng(seed);
    vo.resize(static_cast<std::size_t>(outside_px));
    double r_sum = 0.0;
    for (double& r : vo) {
      r = static_cast<double>((rng() % 256) + 1);
      r_sum += r;
    }
    vi = static_cast<double>(a) * r_sum;
    for (double& r : vo) r *= static_cast<double>(b - a) * inside_px;
    u = 1.0;
  }

  PlantedScene scene;
  scene.mask = mask;
  scene.span = span;
  scene.p = p.value();
  scene.tensor = AlignmentTensor(width, height, frames);

  const float fvi = exact_float(vi);
  const float fu = exact_float(u);
  float fvo_uniform = 0.0f;
  std::vector<float> fvo;
  if (background == Background::Uniform || outside_px == 0) {
    fvo_uniform = exact_float(vo_uniform);
  } else {
    fvo.reserve(vo.size());
    for (double v : vo) fvo.push_back(exact_float(v));
  }

  for (int t = 0; t < frames; ++t) {
    auto frame = scene.tensor.frame(t);
    if (t >= span.begin && t < span.end) {
      std::size_t oi = 0;
      for (std::int64_t px = 0; px < total_px; ++px) {
        if (mask.bits[px]) {
          frame[px] = fvi;
        } else {
          frame[px] = fvo.empty() ? fvo_uniform : fvo[oi++];
        }
      }
    } else {
      for (std::int64_t px = 0; px < total_px; ++px) frame[px] = fu;
    }
  }

  // Expected scores follow from the construction's exact integer masses.
  const double n_span = span.count();
  const double n_frames = frames;
  const double mask_in_span = static_cast<double>(inside_px) * vi;          // a[t], t in span
  double frame_mass = mask_in_span;                                        // full-frame span mass
  if (background == Background::Uniform || outside_px == 0) {
    frame_mass += static_cast<double>(outside_px) * vo_uniform;
  } else {
    for (double v : vo) frame_mass += v;
  }
  const double mask_out_span = static_cast<double>(inside_px) * u;

  scene.expected.as_object = p.value();
  scene.expected.gs_object = p.value();
  const double word_num = n_span * mask_in_span;
  const double word_den = word_num + (n_frames - n_span) * mask_out_span;
  scene.expected.gs_word = word_den == 0.0 ? n_span / n_frames : word_num / word_den;
  const double pix_num = n_span * vi;
  const double pix_den = pix_num + (n_frames - n_span) * u;
  scene.expected.as_word = pix_den == 0.0 ? n_span / n_frames : pix_num / pix_den;
  return scene;
}

PlantedScene plant_alignment(int width, int height, int frames, const ObjectMask& mask,
                             FrameRange span, double p, Background background,
                             std::uint64_t seed) {
  const auto frac = rationalize(p);
  if (!frac || frac->num > frac->den) {
    throw DataError("plant_alignment: p has no exact small-denominator representation");
  }
  return plant_alignment(width, height, frames, mask, span, *frac, background, seed);
}

PairScores oracle_scores(const AlignmentTensor& t, const ObjectMask& mask, FrameRange span) {
  if (mask.width != t.width || mask.height != t.height) {
    throw DataError("oracle: mask dims do not match tensor");
  }
  if (span.empty() || span.begin < 0 || span.end > t.frames) {
    throw DataError("oracle: bad span");
  }
  std::int64_t mask_px = 0;
  for (int y = 0; y < t.height; ++y) {
    for (int x = 0; x < t.width; ++x) {
      if (mask.get(x, y)) ++mask_px;
    }
  }
  if (mask_px == 0) throw DataError("oracle: empty mask");
  const std::int64_t img_px = static_cast<std::int64_t>(t.width) * t.height;

  PairScores s;

  // AS_object: mean over span frames of the mask share of each
  // frame-normalized distribution.
  {
    double acc = 0.0;
    for (int f = span.begin; f < span.end; ++f) {
      double total = 0.0;
      for (int y = 0; y < t.height; ++y) {
        for (int x = 0; x < t.width; ++x) total += t.at(x, y, f);
      }
      double share;
      if (total == 0.0) {
        share = static_cast<double>(mask_px) / static_cast<double>(img_px);
      } else {
        double on = 0.0;
        for (int y = 0; y < t.height; ++y) {
          for (int x = 0; x < t.width; ++x) {
            if (mask.get(x, y)) on += t.at(x, y, f) / total;
          }
        }
        share = on;
      }
      acc += share;
    }
    s.as_object = acc / (span.end - span.begin);
  }

  // AS_word: mean over mask pixels of the span share of each pixel's
  // time-normalized series.
  {
    double acc = 0.0;
    for (int y = 0; y < t.height; ++y) {
      for (int x = 0; x < t.width; ++x) {
        if (!mask.get(x, y)) continue;
        double total = 0.0;
        for (int f = 0; f < t.frames; ++f) total += t.at(x, y, f);
        if (total == 0.0) {
          acc += static_cast<double>(span.end - span.begin) / static_cast<double>(t.frames);
        } else {
          double in_span = 0.0;
          for (int f = span.begin; f < span.end; ++f) in_span += t.at(x, y, f) / total;
          acc += in_span;
        }
      }
    }
    s.as_word = acc / static_cast<double>(mask_px);
  }

  // GS_object: mask share of the cumulative span attention map.
  {
    std::vector<double> accum(static_cast<std::size_t>(img_px), 0.0);
    for (int f = span.begin; f < span.end; ++f) {
      for (int y = 0; y < t.height; ++y) {
        for (int x = 0; x < t.width; ++x) {
          accum[static_cast<std::size_t>(y) * t.width + x] += t.at(x, y, f);
        }
      }
    }
    double total = 0.0;
    for (double v : accum) total += v;
    if (total == 0.0) {
      s.gs_object = static_cast<double>(mask_px) / static_cast<double>(img_px);
    } else {
      double on = 0.0;
      for (int y = 0; y < t.height; ++y) {
        for (int x = 0; x < t.width; ++x) {
          if (mask.get(x, y)) on += accum[static_cast<std::size_t>(y) * t.width + x] / total;
        }
      }
      s.gs_object = on;
    }
  }

  // GS_word: span share of the mask attention-over-time curve.
  {
    std::vector<double> curve(static_cast<std::size_t>(t.frames), 0.0);
    for (int f = 0; f < t.frames; ++f) {
      for (int y = 0; y < t.height; ++y) {
        for (int x = 0; x < t.width; ++x) {
          if (mask.get(x, y)) curve[f] += t.at(x, y, f);
        }
      }
    }
    double total = 0.0;
    for (double v : curve) total += v;
    if (total == 0.0) {
      s.gs_word = static_cast<double>(span.end - span.begin) / static_cast<double>(t.frames);
    } else {
      double in_span = 0.0;
      for (int f = span.begin; f < span.end; ++f) in_span += curve[f] / total;
      s.gs_word = in_span;
    }
  }

  return s;
}

namespace {

using nlohmann::json;

ObjectMask random_rect_mask(std::mt19937_64& rng, int width, int height, std::string class_id) {
  ObjectMask m;
  m.width = width;
  m.height = height;
  m.class_id = std::move(class_id);
  m.bits.assign(static_cast<std::size_t>(width) * height, 0);
  const int rw = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(std::max(1, width / 2)));
  const int rh = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(std::max(1, height / 2)));
  const int x0 = static_cast<int>(rng() % static_cast<std::uint64_t>(width - rw + 1));
  const int y0 = static_cast<int>(rng() % static_cast<std::uint64_t>(height - rh + 1));
  for (int y = y0; y < y0 + rh; ++y) {
    for (int x = x0; x < x0 + rw; ++x) m.set(x, y);
  }
  return m;
}

FrameRange random_span(std::mt19937_64& rng, int frames) {
  const int len = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(std::max(1, frames / 2)));
  const int begin = static_cast<int>(rng() % static_cast<std::uint64_t>(frames - len + 1));
  return FrameRange{begin, begin + len};
}

}  // namespace

void write_synthetic_dataset(const SynthConfig& config, const std::filesystem::path& out_dir) {
  if (config.n_samples < 1 || config.pairs_per_sample < 1) {
    throw DataError("synth: n_samples and pairs_per_sample must be >= 1");
  }
  if (config.planted &&
      (config.tensor_w != config.image_w || config.tensor_h != config.image_h ||
       config.tensor_frames != config.frames)) {
    throw DataError("synth: planted mode requires tensor dims equal to evaluation dims");
  }
  if (config.image_w % config.tensor_w != 0 || config.image_h % config.tensor_h != 0 ||
      config.frames % config.tensor_frames != 0) {
    throw DataError("synth: evaluation dims must be integer multiples of tensor dims");
  }

  const auto tensor_dir = out_dir / "tensors";
  std::filesystem::create_directories(tensor_dir);
  std::ofstream gt_out(out_dir / "gt.jsonl", std::ios::trunc);
  if (!gt_out) throw DataError("synth: cannot write " + (out_dir / "gt.jsonl").string());

  static const Fraction kPlantSet[] = {{0, 1}, {1, 4}, {7, 20}, {1, 2}, {3, 4}, {1, 1}};
  const double coarse_frame_ms =
      config.frame_ms * static_cast<double>(config.frames) / config.tensor_frames;
  json expected = json::array();

  for (int i = 0; i < config.n_samples; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "sample%05d", i);
    std::mt19937_64 rng(derive_sample_seed(config.seed, id));

    json pairs = json::array();
    AlignmentTensor tensor;
    if (config.planted) {
      const Fraction p = kPlantSet[i % (sizeof(kPlantSet) / sizeof(kPlantSet[0]))];
      const std::string class_id = "c" + std::to_string(i % 10);
      ObjectMask mask = random_rect_mask(rng, config.image_w, config.image_h, class_id);
      FrameRange span = random_span(rng, config.frames);
      const Background bg = i % 2 == 0 ? Background::Uniform : Background::Random;
      PlantedScene scene =
          plant_alignment(config.image_w, config.image_h, config.frames, mask, span, p, bg, rng());
      scene.tensor.frame_ms = static_cast<float>(config.frame_ms);
      tensor = std::move(scene.tensor);
      pairs.push_back(json{{"class", class_id},
                           {"word", "w_" + class_id},
                           {"onset_ms", span.begin * config.frame_ms},
                           {"offset_ms", span.end * config.frame_ms},
                           {"mask_rle", encode_mask_rle(mask)}});
      expected.push_back(json{{"sample_id", id},
                              {"class", class_id},
                              {"p", scene.p},
                              {"as_object", scene.expected.as_object},
                              {"as_word", scene.expected.as_word},
                              {"gs_object", scene.expected.gs_object},
                              {"gs_word", scene.expected.gs_word}});
    } else {
      tensor = random_baseline_tensor(config.tensor_w, config.tensor_h, config.tensor_frames,
                                      rng(), static_cast<float>(coarse_frame_ms));
      for (int k = 0; k < config.pairs_per_sample; ++k) {
        const std::string class_id = "c" + std::to_string((i + k) % 20);
        ObjectMask mask = random_rect_mask(rng, config.image_w, config.image_h, class_id);
        FrameRange span = random_span(rng, config.frames);
        pairs.push_back(json{{"class", class_id},
                             {"word", "w_" + class_id},
                             {"onset_ms", span.begin * config.frame_ms},
                             {"offset_ms", span.end * config.frame_ms},
                             {"mask_rle", encode_mask_rle(mask)}});
      }
    }

    write_avt(tensor, tensor_dir / (std::string(id) + ".avt"));
    const json sample{{"sample_id", id},          {"image_w", config.image_w},
                      {"image_h", config.image_h}, {"frames", config.frames},
                      {"frame_ms", config.frame_ms}, {"pairs", pairs}};
    gt_out << sample.dump() << "\n";
  }
  if (config.planted) {
    std::ofstream exp_out(out_dir / "expected.json", std::ios::trunc);
    exp_out << expected.dump(2) << "\n";
  }
}

}  // namespace avalign::fixtures
