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

#ifndef DSSLIC_BACKENDS_HPP_
#define DSSLIC_BACKENDS_HPP_

// Layer codec backends. The segmentation and compact layers go through a
// lossless codec, the residual layer through a lossy one. External codecs
// (FLIF, BPG) run as subprocesses found via configuration; the built-in PNG
// and quantize+PNG backends keep everything runnable with no external
// binaries. Backend ids are recorded in the container header because
// payloads are backend-specific.

#include <memory>
#include <string>
#include <vector>

#include "dsslic/image.hpp"

namespace dsslic {

class LosslessCodec {
 public:
  virtual ~LosslessCodec() = default;
  virtual uint8_t id() const = 0;
  virtual std::string name() const = 0;
  virtual std::string encode(const ImageU8& img) const = 0;
  virtual ImageU8 decode(const std::string& bytes) const = 0;
};

class LossyCodec {
 public:
  virtual ~LossyCodec() = default;
  virtual uint8_t id() const = 0;
  virtual std::string name() const = 0;
  // quality follows the 0..51 quantizer convention (lower = better).
  virtual std::string encode(const ImageU8& img, int quality) const = 0;
  virtual ImageU8 decode(const std::string& bytes) const = 0;
};

// id 1: PNG via OpenCV.
class PngCodec : public LosslessCodec {
 public:
  uint8_t id() const override { return 1; }
  std::string name() const override { return "png"; }
  std::string encode(const ImageU8& img) const override;
  ImageU8 decode(const std::string& bytes) const override;
};

// id 2: FLIF external binary ("flif -e in.png out.flif" / "flif -d").
class FlifCodec : public LosslessCodec {
 public:
  explicit FlifCodec(std::string binary) : binary_(std::move(binary)) {}
  uint8_t id() const override { return 2; }
  std::string name() const override { return "flif"; }
  std::string encode(const ImageU8& img) const override;
  ImageU8 decode(const std::string& bytes) const override;

 private:
  std::string binary_;
};

// id 1: uniform quantizer + PNG. quality <= 4 maps to step 1, i.e. lossless
// on integer input; the step doubles every 6 quality points.
class QuantPngCodec : public LossyCodec {
 public:
  uint8_t id() const override { return 1; }
  std::string name() const override { return "qpng"; }
  std::string encode(const ImageU8& img, int quality) const override;
  ImageU8 decode(const std::string& bytes) const override;

  static int quality_to_step(int quality);
};

// id 2: BPG external binaries ("bpgenc -q <q> -f 444", "bpgdec").
class BpgCodec : public LossyCodec {
 public:
  BpgCodec(std::string encoder, std::string decoder)
      : encoder_(std::move(encoder)), decoder_(std::move(decoder)) {}
  uint8_t id() const override { return 2; }
  std::string name() const override { return "bpg"; }
  std::string encode(const ImageU8& img, int quality) const override;
  ImageU8 decode(const std::string& bytes) const override;

 private:
  std::string encoder_, decoder_;
};

// Owns the configured backends and resolves the ids stored in containers.
class BackendRegistry {
 public:
  // flif_binary / bpg_encoder / bpg_decoder may be empty: the built-in
  // fallbacks then serve as the defaults.
  BackendRegistry(const std::string& flif_binary = "", const std::string& bpg_encoder = "",
                  const std::string& bpg_decoder = "");

  const LosslessCodec& lossless_default() const;
  const LossyCodec& lossy_default() const;
  const LosslessCodec& lossless_by_id(uint8_t id) const;
  const LossyCodec& lossy_by_id(uint8_t id) const;

 private:
  std::vector<std::unique_ptr<LosslessCodec>> lossless_;
  std::vector<std::unique_ptr<LossyCodec>> lossy_;
  size_t lossless_default_ = 0, lossy_default_ = 0;
};

// Runs a command line, returning its exit status; throws BackendError when
// the shell itself cannot run.
int run_command(const std::string& cmd);

// Scratch directory that cleans itself up.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::string path(const std::string& filename) const;

 private:
  std::string dir_;
};

}  // namespace dsslic

#endif  // DSSLIC_BACKENDS_HPP_
