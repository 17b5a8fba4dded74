#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "dctf/baseline.hpp"
#include "dctf/error.hpp"
#include "dctf/metrics.hpp"
#include "dctf/store.hpp"
#include "dctf/tasks.hpp"

namespace py = pybind11;
using namespace dctf;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

RgbImage to_image(const U8Array& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw Error("expected an (H, W, 3) uint8 array");
  RgbImage img(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  std::memcpy(img.data.data(), a.data(), img.data.size());
  return img;
}

U8Array from_image(const RgbImage& img) {
  U8Array out({img.height, img.width, 3});
  std::memcpy(out.mutable_data(), img.data.data(), img.data.size());
  return out;
}

py::array_t<std::int64_t> elements_array(const SparseSequence& s) {
  py::array_t<std::int64_t> out({static_cast<py::ssize_t>(s.elements.size()), py::ssize_t{3}});
  auto m = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < s.elements.size(); ++i) {
    m(i, 0) = s.elements[i].channel;
    m(i, 1) = s.elements[i].position;
    m(i, 2) = s.elements[i].value;
  }
  return out;
}

py::bytes as_bytes(const std::vector<std::uint8_t>& b) {
  return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
}

std::vector<std::uint8_t> from_bytes(const py::bytes& b) {
  const std::string s = b;
  return {s.begin(), s.end()};
}

GenerationMode mode_of(const std::string& m) {
  if (m == "sequential") return GenerationMode::Sequential;
  if (m == "parallel") return GenerationMode::Parallel;
  throw Error("mode must be 'sequential' or 'parallel'");
}

}  // namespace

PYBIND11_MODULE(_dctf, m) {
  m.doc() = "Sparse DCT image codec, sequence likelihoods and generation plans";

  auto error = py::register_exception<Error>(m, "Error", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", error.ptr());
  py::register_exception<ZeroProbabilityError>(m, "ZeroProbabilityError", error.ptr());

  py::class_<CodecConfig>(m, "CodecConfig")
      .def(py::init([](int block, int quality, bool chroma) {
             CodecConfig c{block, quality, chroma};
             c.validate();
             return c;
           }),
           py::arg("block_size") = 8, py::arg("quality") = 75, py::arg("chroma_downsampled") = false)
      .def_readonly("block_size", &CodecConfig::block_size)
      .def_readonly("quality", &CodecConfig::quality)
      .def_readonly("chroma_downsampled", &CodecConfig::chroma_downsampled)
      .def("__eq__", [](const CodecConfig& a, const CodecConfig& b) { return a == b; })
      .def("__repr__", [](const CodecConfig& c) {
        return "CodecConfig(block_size=" + std::to_string(c.block_size) + ", quality=" + std::to_string(c.quality) +
               ", chroma_downsampled=" + (c.chroma_downsampled ? "True" : "False") + ")";
      });

  py::class_<QuantizedPlanes>(m, "QuantizedPlanes")
      .def_readonly("config", &QuantizedPlanes::config)
      .def_readonly("height", &QuantizedPlanes::height)
      .def_readonly("width", &QuantizedPlanes::width)
      .def_readonly("saturated", &QuantizedPlanes::saturated)
      .def("__eq__", [](const QuantizedPlanes& a, const QuantizedPlanes& b) { return a == b; });

  py::class_<SparseSequence>(m, "SparseSequence")
      .def_readonly("config", &SparseSequence::config)
      .def_readonly("height", &SparseSequence::height)
      .def_readonly("width", &SparseSequence::width)
      .def_readonly("residual", &SparseSequence::residual)
      .def_property_readonly("elements", &elements_array, "(L, 3) array of channel, position, value")
      .def("__len__", &SparseSequence::length)
      .def("__eq__", [](const SparseSequence& a, const SparseSequence& b) { return a == b; })
      .def("to_bytes", [](const SparseSequence& s) { return as_bytes(encode_sequence(s)); })
      .def_static("from_bytes", [](const py::bytes& b) { return decode_sequence(from_bytes(b)); });

  m.def("encode_image", [](const U8Array& img, const CodecConfig& c) { return encode_image(to_image(img), c); },
        py::arg("image"), py::arg("config"));
  m.def("decode_image", [](const QuantizedPlanes& q) { return from_image(decode_image(q)); });
  m.def("to_sparse", &to_sparse);
  m.def(
      "from_sparse", [](const SparseSequence& s, const QuantizedPlanes* prev) { return from_sparse(s, prev); },
      py::arg("sequence"), py::arg("previous") = nullptr);
  m.def("residual_encode", &residual_encode, py::arg("current"), py::arg("previous"));
  m.def("residual_decode", &residual_decode, py::arg("sequence"), py::arg("previous"));
  m.def("read_sequence", [](const std::string& p) { return read_sequence(p); });
  m.def("write_sequence", [](const std::string& p, const SparseSequence& s) { write_sequence(p, s); });

  m.def("psnr", [](const U8Array& a, const U8Array& b) { return psnr(to_image(a), to_image(b)); });
  m.def("ssim", [](const U8Array& a, const U8Array& b) { return ssim(to_image(a), to_image(b)); });
  m.def(
      "best_of_n",
      [](const U8Array& truth, const std::vector<U8Array>& cands, const std::string& by) {
        std::vector<RgbImage> imgs;
        for (const auto& c : cands) imgs.push_back(to_image(c));
        const auto b = best_of_n(to_image(truth), imgs, by == "ssim" ? Metric::Ssim : Metric::Psnr);
        return py::make_tuple(b.index, b.psnr, b.ssim);
      },
      py::arg("truth"), py::arg("candidates"), py::arg("by") = "psnr");

  py::class_<Predictor>(m, "Predictor");
  py::class_<UniformPredictor, Predictor>(m, "UniformPredictor").def(py::init<>());
  py::class_<BaselinePredictor, Predictor>(m, "BaselinePredictor")
      .def_property_readonly("alpha", &BaselinePredictor::alpha)
      .def("to_bytes", [](const BaselinePredictor& p) { return as_bytes(serialize_baseline(p)); })
      .def_static("from_bytes", [](const py::bytes& b) { return deserialize_baseline(from_bytes(b)); });
  m.def("train_baseline", [](const std::vector<SparseSequence>& corpus, double alpha) {
    py::gil_scoped_release release;
    return train_baseline(corpus, alpha);
  }, py::arg("corpus"), py::arg("alpha") = 1.0);
  m.def(
      "nll",
      [](const SparseSequence& s, const Predictor& p, std::size_t chunk) {
        py::gil_scoped_release release;
        return nll(s, p, chunk).total;
      },
      py::arg("sequence"), py::arg("predictor"), py::arg("chunk_len") = 256, "Negative log-likelihood in nats");
  m.def("bits_per_dimension", &bits_per_dimension, py::arg("nats"), py::arg("height"), py::arg("width"));
  m.def(
      "sample_sequence",
      [](const Predictor& p, const CodecConfig& c, int h, int w, bool residual, double temperature,
         std::size_t max_len, std::uint64_t seed) {
        SampleOptions o;
        o.temperature = temperature;
        o.max_len = max_len;
        o.seed = seed;
        py::gil_scoped_release release;
        return sample_sequence(p, Geometry(c, h, w), residual, {}, o);
      },
      py::arg("predictor"), py::arg("config"), py::arg("height"), py::arg("width"), py::arg("residual") = false,
      py::arg("temperature") = 1.0, py::arg("max_len") = 1 << 16, py::arg("seed") = 0);

  py::class_<GenerationPlan>(m, "GenerationPlan")
      .def_readonly("input_count", &GenerationPlan::input_count)
      .def("__len__", [](const GenerationPlan& p) { return p.steps.size(); })
      .def("context_of", [](const GenerationPlan& p, std::size_t k) {
        std::vector<std::string> refs;
        for (const auto& e : p.steps.at(k).context) refs.push_back(e.frame.str());
        return refs;
      });
  m.def(
      "video_plan",
      [](int n_context, int n_generate, const std::string& mode, int min_frames, int max_frames) {
        return build_video_plan(n_context, n_generate, mode_of(mode), {min_frames, max_frames});
      },
      py::arg("n_context"), py::arg("n_generate"), py::arg("mode") = "sequential", py::arg("min_frames") = 1,
      py::arg("max_frames") = ContextLimits{}.max_frames);
  m.def("translation_plan", &build_translation_plan, py::arg("format"));
  m.def(
      "two_stage_plan",
      [](int seconds, int low, int high) {
        const auto t = build_two_stage_plan(seconds, low, high);
        return py::make_tuple(t.anchors, t.fill, t.total_frames());
      },
      py::arg("seconds"), py::arg("low_fps"), py::arg("high_fps"));
  m.def(
      "plan_manifest",
      [](const std::vector<GenerationPlan>& stages, std::uint64_t seed) { return plan_manifest(stages, seed); },
      py::arg("stages"), py::arg("seed") = 0);
  m.def("parse_plan_manifest", &parse_plan_manifest);
  m.def(
      "execute_plan",
      [](const GenerationPlan& plan, const Predictor& p, const std::vector<QuantizedPlanes>& inputs,
         std::uint64_t seed, double temperature, std::size_t max_len, bool residual) {
        ExecuteOptions o;
        o.seed = seed;
        o.temperature = temperature;
        o.max_len = max_len;
        o.residual = residual;
        py::gil_scoped_release release;
        return execute_plan(plan, p, inputs, o);
      },
      py::arg("plan"), py::arg("predictor"), py::arg("inputs"), py::arg("seed") = 0, py::arg("temperature") = 1.0,
      py::arg("max_len") = 1 << 16, py::arg("residual") = false);
}
