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

#include "dsslic/weights.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "dsslic/common.hpp"

namespace dsslic {

namespace {

constexpr char kMagic[4] = {'D', 'S', 'L', 'W'};

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get(const std::string& in, size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw DataError("weights file truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

void put_name(std::string& out, const std::string& name) {
  if (name.size() > 0xFFFF) throw DataError("weights block name too long");
  put<uint16_t>(out, static_cast<uint16_t>(name.size()));
  out.append(name);
}

std::string get_name(const std::string& in, size_t& pos) {
  uint16_t n = get<uint16_t>(in, pos);
  if (pos + n > in.size()) throw DataError("weights file truncated");
  std::string s(in, pos, n);
  pos += n;
  return s;
}

}  // namespace

const int64_t* WeightsFile::find_meta(const std::string& name) const {
  for (const auto& [k, v] : meta)
    if (k == name) return &v;
  return nullptr;
}

const WeightsBlock* WeightsFile::find_block(const std::string& name) const {
  for (const auto& b : blocks)
    if (b.name == name) return &b;
  return nullptr;
}

void WeightsFile::save(const std::string& path) const {
  std::string out;
  out.append(kMagic, 4);
  put<uint8_t>(out, kFormatVersion);
  put<uint8_t>(out, variant);
  put<uint8_t>(out, num_labels);
  put<uint8_t>(out, alpha);
  put<uint32_t>(out, static_cast<uint32_t>(meta.size()));
  for (const auto& [k, v] : meta) {
    put_name(out, k);
    put<int64_t>(out, v);
  }
  put<uint32_t>(out, static_cast<uint32_t>(blocks.size()));
  for (const auto& b : blocks) {
    put_name(out, b.name);
    put<uint8_t>(out, static_cast<uint8_t>(b.shape.size()));
    size_t n = 1;
    for (int d : b.shape) {
      put<uint32_t>(out, static_cast<uint32_t>(d));
      n *= static_cast<size_t>(d);
    }
    if (n != b.data.size()) throw DataError("weights block shape/payload mismatch: " + b.name);
    out.append(reinterpret_cast<const char*>(b.data.data()), b.data.size() * sizeof(float));
  }

  std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot open for writing: " + tmp);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

WeightsFile WeightsFile::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open weights file: " + path);
  std::string in((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  size_t pos = 0;
  if (in.size() < 4 || std::memcmp(in.data(), kMagic, 4) != 0)
    throw DataError("not a weights file: " + path);
  pos = 4;
  WeightsFile wf;
  uint8_t version = get<uint8_t>(in, pos);
  if (version != kFormatVersion)
    throw DataError("unsupported weights format version " + std::to_string(version));
  wf.variant = get<uint8_t>(in, pos);
  wf.num_labels = get<uint8_t>(in, pos);
  wf.alpha = get<uint8_t>(in, pos);
  uint32_t nmeta = get<uint32_t>(in, pos);
  for (uint32_t i = 0; i < nmeta; ++i) {
    std::string name = get_name(in, pos);
    int64_t v = get<int64_t>(in, pos);
    wf.meta.emplace_back(name, v);
  }
  uint32_t nblocks = get<uint32_t>(in, pos);
  for (uint32_t i = 0; i < nblocks; ++i) {
    WeightsBlock b;
    b.name = get_name(in, pos);
    uint8_t ndim = get<uint8_t>(in, pos);
    size_t n = 1;
    for (uint8_t d = 0; d < ndim; ++d) {
      uint32_t dim = get<uint32_t>(in, pos);
      b.shape.push_back(static_cast<int>(dim));
      n *= dim;
    }
    if (pos + n * sizeof(float) > in.size()) throw DataError("weights file truncated");
    b.data.resize(n);
    std::memcpy(b.data.data(), in.data() + pos, n * sizeof(float));
    pos += n * sizeof(float);
    wf.blocks.push_back(std::move(b));
  }
  return wf;
}

}  // namespace dsslic
