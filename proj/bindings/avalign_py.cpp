#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "avalign/aggregation.hpp"
#include "avalign/avt_io.hpp"
#include "avalign/errors.hpp"
#include "avalign/fixtures.hpp"
#include "avalign/ground_truth.hpp"
#include "avalign/metrics.hpp"
#include "avalign/pipeline.hpp"
#include "avalign/tensor.hpp"

namespace py = pybind11;
using namespace avalign;

namespace {

// Tensors cross the boundary as float32 arrays shaped (frames, height, width),
// which matches the frame-major internal layout exactly.
AlignmentTensor tensor_from_array(py::array_t<float, py::array::c_style | py::array::forcecast> arr,
                                  float frame_ms) {
  if (arr.ndim() != 3) throw DataError("expected a 3-D array (frames, height, width)");
  AlignmentTensor t(static_cast<int>(arr.shape(2)), static_cast<int>(arr.shape(1)),
                    static_cast<int>(arr.shape(0)), frame_ms);
  std::copy(arr.data(), arr.data() + arr.size(), t.values.begin());
  return t;
}

py::array_t<float> tensor_to_array(const AlignmentTensor& t) {
  py::array_t<float> arr({t.frames, t.height, t.width});
  std::copy(t.values.begin(), t.values.end(), arr.mutable_data());
  return arr;
}

ObjectMask mask_from_array(py::array_t<bool, py::array::c_style | py::array::forcecast> arr) {
  if (arr.ndim() != 2) throw DataError("expected a 2-D mask (height, width)");
  ObjectMask m;
  m.height = static_cast<int>(arr.shape(0));
  m.width = static_cast<int>(arr.shape(1));
  m.bits.resize(static_cast<std::size_t>(m.width) * m.height);
  const bool* src = arr.data();
  for (std::size_t i = 0; i < m.bits.size(); ++i) m.bits[i] = src[i] ? 1 : 0;
  return m;
}

FrameRange range_from_tuple(std::pair<int, int> span) { return FrameRange{span.first, span.second}; }

py::dict scores_to_dict(const PairScores& s) {
  py::dict d;
  d["as_object"] = s.as_object;
  d["as_word"] = s.as_word;
  d["gs_object"] = s.gs_object;
  d["gs_word"] = s.gs_word;
  return d;
}

}  // namespace

PYBIND11_MODULE(_avalign, m) {
  m.doc() = "Audiovisual alignment tensor scoring";

  py::register_exception<DataError>(m, "DataError");

  py::class_<AlignmentTensor>(m, "AlignmentTensor")
      .def(py::init([](py::array_t<float, py::array::c_style | py::array::forcecast> values,
                       float frame_ms) { return tensor_from_array(values, frame_ms); }),
           py::arg("values"), py::arg("frame_ms") = 10.0f)
      .def_readonly("width", &AlignmentTensor::width)
      .def_readonly("height", &AlignmentTensor::height)
      .def_readonly("frames", &AlignmentTensor::frames)
      .def_readwrite("frame_ms", &AlignmentTensor::frame_ms)
      .def_property_readonly("values", &tensor_to_array)
      .def("__repr__", [](const AlignmentTensor& t) {
        return "AlignmentTensor(" + std::to_string(t.width) + "x" + std::to_string(t.height) +
               "x" + std::to_string(t.frames) + ", frame_ms=" + std::to_string(t.frame_ms) + ")";
      });

  m.def(
      "build_alignment_tensor",
      [](py::array_t<float, py::array::c_style | py::array::forcecast> grid,
         py::array_t<float, py::array::c_style | py::array::forcecast> seq, bool clamp_negative) {
        if (grid.ndim() != 3) throw DataError("grid must be (height, width, dim)");
        if (seq.ndim() != 2) throw DataError("sequence must be (frames, dim)");
        EmbeddingGrid g;
        g.height = static_cast<int>(grid.shape(0));
        g.width = static_cast<int>(grid.shape(1));
        g.dim = static_cast<int>(grid.shape(2));
        g.values.assign(grid.data(), grid.data() + grid.size());
        EmbeddingSequence s;
        s.frames = static_cast<int>(seq.shape(0));
        s.dim = static_cast<int>(seq.shape(1));
        s.values.assign(seq.data(), seq.data() + seq.size());
        return build_alignment_tensor(g, s, clamp_negative);
      },
      py::arg("grid"), py::arg("sequence"), py::arg("clamp_negative") = true,
      "Dot-product tensor from a (H, W, D) grid and a (T, D) sequence");

  m.def("normalize_per_frame", &normalize_per_frame, py::arg("tensor"));
  m.def("normalize_per_pixel", &normalize_per_pixel, py::arg("tensor"));
  m.def("softmax_space", &softmax_space, py::arg("tensor"), py::arg("temperature") = 1.0);
  m.def("softmax_time", &softmax_time, py::arg("tensor"), py::arg("temperature") = 1.0);
  m.def(
      "upsample",
      [](const AlignmentTensor& t, int w, int h, int frames, const std::string& mode) {
        return upsample(t, w, h, frames,
                        mode == "linear" ? UpsampleMode::Linear : UpsampleMode::Nearest);
      },
      py::arg("tensor"), py::arg("width"), py::arg("height"), py::arg("frames"),
      py::arg("mode") = "nearest");

  m.def("read_avt", py::overload_cast<const std::filesystem::path&>(&read_avt), py::arg("path"));
  m.def("write_avt", py::overload_cast<const AlignmentTensor&, const std::filesystem::path&>(&write_avt),
        py::arg("tensor"), py::arg("path"));

  m.def("decode_mask_rle",
        [](const std::vector<std::int64_t>& runs, int width, int height) {
          const ObjectMask mask = decode_mask_rle(runs, width, height);
          py::array_t<bool> arr({height, width});
          bool* dst = arr.mutable_data();
          for (std::size_t i = 0; i < mask.bits.size(); ++i) dst[i] = mask.bits[i] != 0;
          return arr;
        },
        py::arg("runs"), py::arg("width"), py::arg("height"));
  m.def("encode_mask_rle",
        [](py::array_t<bool, py::array::c_style | py::array::forcecast> mask) {
          return encode_mask_rle(mask_from_array(mask));
        },
        py::arg("mask"));

  m.def(
      "span_to_frames",
      [](double onset_ms, double offset_ms, double frame_ms, int total_frames) {
        const FrameRange r = span_to_frames(WordSpan{onset_ms, offset_ms, {}}, frame_ms, total_frames);
        return std::make_pair(r.begin, r.end);
      },
      py::arg("onset_ms"), py::arg("offset_ms"), py::arg("frame_ms") = 10.0,
      py::arg("total_frames") = 1 << 30,
      "Half-open frame interval [begin, end) covered by a word");

  const auto wrap_metric = [](double (*fn)(const AlignmentTensor&, const ObjectMask&, FrameRange)) {
    return [fn](const AlignmentTensor& t,
                py::array_t<bool, py::array::c_style | py::array::forcecast> mask,
                std::pair<int, int> span) { return fn(t, mask_from_array(mask), range_from_tuple(span)); };
  };
  m.def("alignment_score_object", wrap_metric(&alignment_score_object), py::arg("tensor"),
        py::arg("mask"), py::arg("span"));
  m.def("alignment_score_word", wrap_metric(&alignment_score_word), py::arg("tensor"),
        py::arg("mask"), py::arg("span"));
  m.def("glancing_score_object", wrap_metric(&glancing_score_object), py::arg("tensor"),
        py::arg("mask"), py::arg("span"));
  m.def("glancing_score_word", wrap_metric(&glancing_score_word), py::arg("tensor"),
        py::arg("mask"), py::arg("span"));
  m.def(
      "score_pair",
      [](const AlignmentTensor& t, py::array_t<bool, py::array::c_style | py::array::forcecast> mask,
         std::pair<int, int> span) {
        return scores_to_dict(score_pair(t, mask_from_array(mask), range_from_tuple(span)));
      },
      py::arg("tensor"), py::arg("mask"), py::arg("span"));
  m.def(
      "score_pair_coarse",
      [](const AlignmentTensor& t, py::array_t<bool, py::array::c_style | py::array::forcecast> mask,
         std::pair<int, int> span, int eval_w, int eval_h, int eval_frames) {
        return scores_to_dict(score_pair_coarse(t, mask_from_array(mask), range_from_tuple(span),
                                                EvalResolution{eval_w, eval_h, eval_frames}));
      },
      py::arg("tensor"), py::arg("mask"), py::arg("span"), py::arg("eval_width"),
      py::arg("eval_height"), py::arg("eval_frames"));

  m.def("random_baseline_tensor", &random_baseline_tensor, py::arg("width"), py::arg("height"),
        py::arg("frames"), py::arg("seed"), py::arg("frame_ms") = 10.0f);

  m.def(
      "recall_at_k",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> sims, int k,
         const std::string& direction) {
        if (sims.ndim() != 2 || sims.shape(0) != sims.shape(1)) {
          throw DataError("similarity matrix must be square");
        }
        SimilarityMatrix m2;
        m2.n = static_cast<int>(sims.shape(0));
        m2.values.assign(sims.data(), sims.data() + sims.size());
        return recall_at_k(m2, k,
                           direction == "image_to_speech" ? RetrievalDirection::ImageToSpeech
                                                          : RetrievalDirection::SpeechToImage);
      },
      py::arg("sims"), py::arg("k"), py::arg("direction") = "speech_to_image");
}
