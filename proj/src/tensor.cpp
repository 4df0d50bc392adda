#include "avalign/tensor.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "avalign/errors.hpp"

namespace avalign {

namespace {

void check_dims(int w, int h, int f) {
  if (w < 1 || h < 1 || f < 1) {
    throw DataError("tensor dims must be >= 1, got " + std::to_string(w) + "x" +
                    std::to_string(h) + "x" + std::to_string(f));
  }
}

}  // namespace

AlignmentTensor::AlignmentTensor(int w, int h, int f, float frame_ms_, float fill)
    : width(w), height(h), frames(f), frame_ms(frame_ms_) {
  check_dims(w, h, f);
  values.assign(static_cast<std::size_t>(pixels()) * frames, fill);
}

void validate_tensor(const AlignmentTensor& t, bool require_nonnegative) {
  check_dims(t.width, t.height, t.frames);
  if (!(t.frame_ms > 0.0f) || !std::isfinite(t.frame_ms)) {
    throw DataError("tensor frame_ms must be a positive finite number");
  }
  if (t.values.size() != static_cast<std::size_t>(t.pixels()) * t.frames) {
    throw DataError("tensor value count does not match dims");
  }
  for (float v : t.values) {
    if (!std::isfinite(v)) throw DataError("tensor contains non-finite values");
    if (require_nonnegative && v < 0.0f) {
      throw DataError("tensor contains negative values");
    }
  }
}

namespace {

void check_unit_norms(const std::vector<float>& values, int dim, const char* what) {
  const std::size_t n = values.size() / dim;
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0.0;
    for (int d = 0; d < dim; ++d) {
      const double v = values[i * dim + d];
      sq += v * v;
    }
    if (std::fabs(std::sqrt(sq) - 1.0) > 1e-5) {
      throw DataError(std::string(what) + " flagged unit-normalized but vector " +
                      std::to_string(i) + " has norm " + std::to_string(std::sqrt(sq)));
    }
  }
}

}  // namespace

void validate_embedding_grid(const EmbeddingGrid& g) {
  if (g.width < 1 || g.height < 1 || g.dim < 1) {
    throw DataError("embedding grid dims must be >= 1");
  }
  if (g.values.size() != static_cast<std::size_t>(g.width) * g.height * g.dim) {
    throw DataError("embedding grid value count does not match dims");
  }
  if (g.unit_normalized) check_unit_norms(g.values, g.dim, "embedding grid");
}

void validate_embedding_sequence(const EmbeddingSequence& s) {
  if (s.frames < 1 || s.dim < 1) {
    throw DataError("embedding sequence dims must be >= 1");
  }
  if (s.values.size() != static_cast<std::size_t>(s.frames) * s.dim) {
    throw DataError("embedding sequence value count does not match dims");
  }
  if (s.unit_normalized) check_unit_norms(s.values, s.dim, "embedding sequence");
}

AlignmentTensor build_alignment_tensor(const EmbeddingGrid& grid, const EmbeddingSequence& seq,
                                       bool clamp_negative) {
  validate_embedding_grid(grid);
  validate_embedding_sequence(seq);
  if (grid.dim != seq.dim) {
    throw DataError("embedding dim mismatch: grid dim " + std::to_string(grid.dim) +
                    " vs sequence dim " + std::to_string(seq.dim));
  }

  AlignmentTensor out(grid.width, grid.height, seq.frames);
  const int dim = grid.dim;
  const std::int64_t cells = out.pixels();
  for (int t = 0; t < seq.frames; ++t) {
    const float* fv = seq.values.data() + static_cast<std::size_t>(t) * dim;
    float* dst = out.frame(t).data();
    for (std::int64_t c = 0; c < cells; ++c) {
      const float* gv = grid.values.data() + static_cast<std::size_t>(c) * dim;
      double dot = 0.0;
      for (int d = 0; d < dim; ++d) dot += static_cast<double>(gv[d]) * fv[d];
      if (clamp_negative && dot < 0.0) dot = 0.0;
      dst[c] = static_cast<float>(dot);
    }
  }
  return out;
}

AlignmentTensor normalize_per_frame(const AlignmentTensor& t) {
  validate_tensor(t);
  AlignmentTensor out(t.width, t.height, t.frames, t.frame_ms);
  const std::int64_t cells = t.pixels();
  const float uniform = static_cast<float>(1.0 / static_cast<double>(cells));
  for (int f = 0; f < t.frames; ++f) {
    auto src = t.frame(f);
    auto dst = out.frame(f);
    double sum = 0.0;
    for (float v : src) sum += v;
    if (sum == 0.0) {
      for (float& v : dst) v = uniform;
    } else {
      for (std::int64_t c = 0; c < cells; ++c) {
        dst[c] = static_cast<float>(src[c] / sum);
      }
    }
  }
  return out;
}

AlignmentTensor normalize_per_pixel(const AlignmentTensor& t) {
  validate_tensor(t);
  AlignmentTensor out(t.width, t.height, t.frames, t.frame_ms);
  const std::int64_t cells = t.pixels();
  const float uniform = static_cast<float>(1.0 / static_cast<double>(t.frames));
  std::vector<double> sums(static_cast<std::size_t>(cells), 0.0);
  for (int f = 0; f < t.frames; ++f) {
    auto src = t.frame(f);
    for (std::int64_t c = 0; c < cells; ++c) sums[c] += src[c];
  }
  for (int f = 0; f < t.frames; ++f) {
    auto src = t.frame(f);
    auto dst = out.frame(f);
    for (std::int64_t c = 0; c < cells; ++c) {
      dst[c] = sums[c] == 0.0 ? uniform : static_cast<float>(src[c] / sums[c]);
    }
  }
  return out;
}

namespace {

void check_temperature(double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw DataError("softmax temperature must be > 0");
  }
}

}  // namespace

AlignmentTensor softmax_space(const AlignmentTensor& t, double temperature) {
  validate_tensor(t);
  check_temperature(temperature);
  AlignmentTensor out(t.width, t.height, t.frames, t.frame_ms);
  const std::int64_t cells = t.pixels();
  std::vector<double> e(static_cast<std::size_t>(cells));
  for (int f = 0; f < t.frames; ++f) {
    auto src = t.frame(f);
    auto dst = out.frame(f);
    double mx = -std::numeric_limits<double>::infinity();
    for (float v : src) mx = std::max(mx, static_cast<double>(v) / temperature);
    double sum = 0.0;
    for (std::int64_t c = 0; c < cells; ++c) {
      e[c] = std::exp(static_cast<double>(src[c]) / temperature - mx);
      sum += e[c];
    }
    for (std::int64_t c = 0; c < cells; ++c) dst[c] = static_cast<float>(e[c] / sum);
  }
  return out;
}

AlignmentTensor softmax_time(const AlignmentTensor& t, double temperature) {
  validate_tensor(t);
  check_temperature(temperature);
  AlignmentTensor out(t.width, t.height, t.frames, t.frame_ms);
  const std::int64_t cells = t.pixels();
  std::vector<double> mx(static_cast<std::size_t>(cells), -std::numeric_limits<double>::infinity());
  std::vector<double> sum(static_cast<std::size_t>(cells), 0.0);
  for (int f = 0; f < t.frames; ++f) {
    auto src = t.frame(f);
    for (std::int64_t c = 0; c < cells; ++c) {
      mx[c] = std::max(mx[c], static_cast<double>(src[c]) / temperature);
    }
  }
  for (int f = 0; f < t.frames; ++f) {
    auto src = t.frame(f);
    auto dst = out.frame(f);
    for (std::int64_t c = 0; c < cells; ++c) {
      const double v = std::exp(static_cast<double>(src[c]) / temperature - mx[c]);
      dst[c] = static_cast<float>(v);
      sum[c] += v;
    }
  }
  for (int f = 0; f < t.frames; ++f) {
    auto dst = out.frame(f);
    for (std::int64_t c = 0; c < cells; ++c) {
      dst[c] = static_cast<float>(dst[c] / sum[c]);
    }
  }
  return out;
}

namespace {

struct LinearWeights {
  std::vector<int> lo;
  std::vector<int> hi;
  std::vector<double> w;  // weight of hi; lo gets 1 - w
};

// Half-pixel mapping with edge clamping: src = (i + 0.5) * src_n / dst_n - 0.5.
LinearWeights linear_axis(int src_n, int dst_n) {
  LinearWeights lw;
  lw.lo.resize(dst_n);
  lw.hi.resize(dst_n);
  lw.w.resize(dst_n);
  for (int i = 0; i < dst_n; ++i) {
    double s = (i + 0.5) * static_cast<double>(src_n) / dst_n - 0.5;
    if (s < 0.0) s = 0.0;
    if (s > src_n - 1) s = src_n - 1;
    const int lo = static_cast<int>(std::floor(s));
    lw.lo[i] = lo;
    lw.hi[i] = std::min(lo + 1, src_n - 1);
    lw.w[i] = s - lo;
  }
  return lw;
}

std::vector<int> nearest_axis(int src_n, int dst_n) {
  std::vector<int> idx(dst_n);
  for (int i = 0; i < dst_n; ++i) {
    idx[i] = static_cast<int>((static_cast<std::int64_t>(i) * src_n) / dst_n);
  }
  return idx;
}

}  // namespace

AlignmentTensor upsample(const AlignmentTensor& t, int target_w, int target_h, int target_frames,
                         UpsampleMode mode) {
  validate_tensor(t);
  if (target_w < t.width || target_h < t.height || target_frames < t.frames) {
    throw DataError("upsample target must be >= source dims (downsampling not supported)");
  }
  AlignmentTensor out(target_w, target_h, target_frames,
                      static_cast<float>(static_cast<double>(t.frame_ms) * t.frames / target_frames));

  if (mode == UpsampleMode::Nearest) {
    const auto xi = nearest_axis(t.width, target_w);
    const auto yi = nearest_axis(t.height, target_h);
    const auto ti = nearest_axis(t.frames, target_frames);
    for (int f = 0; f < target_frames; ++f) {
      auto src = t.frame(ti[f]);
      auto dst = out.frame(f);
      for (int y = 0; y < target_h; ++y) {
        const std::size_t srow = static_cast<std::size_t>(yi[y]) * t.width;
        const std::size_t drow = static_cast<std::size_t>(y) * target_w;
        for (int x = 0; x < target_w; ++x) dst[drow + x] = src[srow + xi[x]];
      }
    }
    return out;
  }

  const auto wx = linear_axis(t.width, target_w);
  const auto wy = linear_axis(t.height, target_h);
  const auto wt = linear_axis(t.frames, target_frames);
  for (int f = 0; f < target_frames; ++f) {
    auto f0 = t.frame(wt.lo[f]);
    auto f1 = t.frame(wt.hi[f]);
    const double tw = wt.w[f];
    auto dst = out.frame(f);
    for (int y = 0; y < target_h; ++y) {
      const std::size_t r0 = static_cast<std::size_t>(wy.lo[y]) * t.width;
      const std::size_t r1 = static_cast<std::size_t>(wy.hi[y]) * t.width;
      const double yw = wy.w[y];
      const std::size_t drow = static_cast<std::size_t>(y) * target_w;
      for (int x = 0; x < target_w; ++x) {
        const std::size_t c0 = wx.lo[x];
        const std::size_t c1 = wx.hi[x];
        const double xw = wx.w[x];
        const double v00 = (1.0 - xw) * f0[r0 + c0] + xw * f0[r0 + c1];
        const double v01 = (1.0 - xw) * f0[r1 + c0] + xw * f0[r1 + c1];
        const double v10 = (1.0 - xw) * f1[r0 + c0] + xw * f1[r0 + c1];
        const double v11 = (1.0 - xw) * f1[r1 + c0] + xw * f1[r1 + c1];
        const double v0 = (1.0 - yw) * v00 + yw * v01;
        const double v1 = (1.0 - yw) * v10 + yw * v11;
        dst[drow + x] = static_cast<float>((1.0 - tw) * v0 + tw * v1);
      }
    }
  }
  return out;
}

}  // namespace avalign
