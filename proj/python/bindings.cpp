// Copyright 2026 the dsslic authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <fstream>

#include "dsslic/codec.hpp"
#include "dsslic/container.hpp"
#include "dsslic/evaluation.hpp"
#include "dsslic/losses.hpp"
#include "dsslic/metrics.hpp"
#include "dsslic/training.hpp"

namespace py = pybind11;

namespace {

using namespace dsslic;

ImageU8 image_from_array(const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 3) throw DataError("expected an HxWxC uint8 array");
  ImageU8 img(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)),
              static_cast<int>(a.shape(2)));
  std::memcpy(img.v.data(), a.data(), img.v.size());
  return img;
}

py::array_t<uint8_t> image_to_array(const ImageU8& img) {
  py::array_t<uint8_t> a({img.h, img.w, img.k});
  std::memcpy(a.mutable_data(), img.v.data(), img.v.size());
  return a;
}

Tensor tensor_from_array(const py::array_t<float, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 3) throw DataError("expected a CxHxW float32 array");
  Tensor t(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)),
           static_cast<int>(a.shape(2)));
  std::memcpy(t.v.data(), a.data(), t.v.size() * sizeof(float));
  return t;
}

std::string encode_file(const std::string& input, const std::string& weights,
                        const std::string& out, int quality, bool no_residual,
                        const std::string& seg_dir) {
  ImageU8 x = load_image(input);
  NetworkBundle nets = NetworkBundle::load(weights);
  BackendRegistry registry;
  Pipeline pipe(&nets, &registry);
  pipe.quality = quality;
  pipe.include_residual = !no_residual;
  SegnetAdapter adapter = SegnetAdapter::from_directory(seg_dir, nets.num_labels);
  if (variant_uses_seg(nets.variant)) pipe.segnet = &adapter;
  std::filesystem::path p(input);
  LayeredBitstream b = pipe.encode(x, p.stem().string());
  write_container(out, b);
  return out;
}

std::string decode_file(const std::string& input, const std::string& weights,
                        const std::string& out, bool resilient) {
  NetworkBundle nets = NetworkBundle::load(weights);
  BackendRegistry registry;
  Pipeline pipe(&nets, &registry);
  std::ifstream f(input, std::ios::binary);
  if (!f) throw DataError("cannot open container: " + input);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  DecodeResult r =
      pipe.decode_bytes(bytes, resilient ? ParseMode::kResilient : ParseMode::kStrict);
  save_image(out, r.image);
  return out;
}

void init_weights(const std::string& path, const std::string& variant, int num_labels, int alpha,
                  uint64_t seed) {
  NetworkBundle nets = NetworkBundle::build(parse_variant(variant), num_labels, alpha, seed);
  nets.save(path);
}

}  // namespace

PYBIND11_MODULE(_dsslic, m) {
  m.doc() = "Layered semantic-segmentation image codec";

  py::register_exception<UsageError>(m, "UsageError");
  py::register_exception<DataError>(m, "DataError");
  py::register_exception<BackendError>(m, "BackendError");

  // metrics
  m.def(
      "psnr",
      [](py::array_t<uint8_t, py::array::c_style | py::array::forcecast> a,
         py::array_t<uint8_t, py::array::c_style | py::array::forcecast> b) {
        return psnr(image_from_array(a), image_from_array(b));
      },
      py::arg("x"), py::arg("y"), "PSNR in dB over all channels jointly (identical images: 99.0)");
  m.def(
      "ms_ssim",
      [](py::array_t<uint8_t, py::array::c_style | py::array::forcecast> a,
         py::array_t<uint8_t, py::array::c_style | py::array::forcecast> b, int max_scales) {
        return ms_ssim(image_from_array(a), image_from_array(b), max_scales);
      },
      py::arg("x"), py::arg("y"), py::arg("max_scales") = 5);
  m.def("bpp", &bpp, py::arg("bytes"), py::arg("h"), py::arg("w"), py::arg("k"));

  // losses
  m.def(
      "l1_loss",
      [](py::array_t<float, py::array::c_style | py::array::forcecast> x,
         py::array_t<float, py::array::c_style | py::array::forcecast> xh, double lam) {
        return l1_loss(tensor_from_array(x), tensor_from_array(xh), lam);
      },
      py::arg("x"), py::arg("x_hat"), py::arg("lam") = 10.0);
  m.def(
      "ssim_loss",
      [](py::array_t<float, py::array::c_style | py::array::forcecast> x,
         py::array_t<float, py::array::c_style | py::array::forcecast> xh) {
        return ssim_loss(tensor_from_array(x), tensor_from_array(xh));
      },
      py::arg("x"), py::arg("x_hat"));

  // schedules
  m.def(
      "lr_schedule",
      [](int epoch, int total, int fixed, double lr) {
        TrainingConfig cfg;
        cfg.epochs_total = total;
        cfg.epochs_lr_fixed = fixed;
        cfg.learning_rate = lr;
        return lr_schedule(epoch, cfg);
      },
      py::arg("epoch"), py::arg("epochs_total") = 150, py::arg("epochs_lr_fixed") = 100,
      py::arg("learning_rate") = 0.0002);
  m.def(
      "perceptual_schedule",
      [](int epoch, int total, int tail) {
        TrainingConfig cfg;
        cfg.epochs_total = total;
        cfg.epochs_no_perceptual_tail = tail;
        return perceptual_schedule(epoch, cfg);
      },
      py::arg("epoch"), py::arg("epochs_total") = 150, py::arg("tail") = 50);

  // residual normalization
  m.def(
      "minmax_normalize",
      [](py::array_t<float, py::array::c_style | py::array::forcecast> r) {
        std::vector<float> v(r.data(), r.data() + r.size());
        MinMaxScaled mm = minmax_normalize(v);
        py::array_t<uint8_t> scaled(static_cast<py::ssize_t>(mm.scaled.size()));
        std::memcpy(scaled.mutable_data(), mm.scaled.data(), mm.scaled.size());
        return py::make_tuple(scaled, mm.min, mm.max);
      },
      py::arg("r"));
  m.def(
      "minmax_denormalize",
      [](py::array_t<uint8_t, py::array::c_style | py::array::forcecast> scaled, float mn,
         float mx) {
        std::vector<uint8_t> v(scaled.data(), scaled.data() + scaled.size());
        std::vector<float> r = minmax_denormalize(v, mn, mx);
        py::array_t<float> out(static_cast<py::ssize_t>(r.size()));
        std::memcpy(out.mutable_data(), r.data(), r.size() * sizeof(float));
        return out;
      },
      py::arg("scaled"), py::arg("min"), py::arg("max"));

  // codec
  m.def("encode_file", &encode_file, py::arg("input"), py::arg("weights"), py::arg("out"),
        py::arg("quality") = 28, py::arg("no_residual") = false, py::arg("seg_dir") = "");
  m.def("decode_file", &decode_file, py::arg("input"), py::arg("weights"), py::arg("out"),
        py::arg("resilient") = false);
  m.def("init_weights", &init_weights, py::arg("path"), py::arg("variant"), py::arg("num_labels"),
        py::arg("alpha") = 8, py::arg("seed") = 0,
        "Write a freshly initialized weights file (untrained)");

  m.def(
      "container_roundtrip",
      [](py::bytes data) {
        std::string bytes = data;
        ParseResult p = parse_container(bytes);
        return py::bytes(p.bitstream.serialize());
      },
      py::arg("data"), "Parse a container and serialize it back (bit-exact on valid input)");

  m.def("set_num_threads", &set_num_threads, py::arg("n"));
  m.attr("__version__") = "0.1.0";
}
