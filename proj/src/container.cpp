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

#include "dsslic/container.hpp"

#include <cstring>
#include <fstream>

#include "dsslic/common.hpp"

namespace dsslic {

namespace {

constexpr char kMagic[4] = {'D', 'S', 'S', 'L'};

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get(const std::string& in, size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw DataError("container truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

bool is_pow2(unsigned n) { return n >= 1 && (n & (n - 1)) == 0; }

}  // namespace

std::string LayeredBitstream::serialize() const {
  std::string out;
  out.reserve(total_bytes());
  out.append(kMagic, 4);
  put<uint8_t>(out, kVersion);
  put<uint16_t>(out, h);
  put<uint16_t>(out, w);
  put<uint8_t>(out, k);
  put<uint8_t>(out, num_labels);
  put<uint8_t>(out, alpha);
  put<float>(out, residual_min);
  put<float>(out, residual_max);
  put<uint8_t>(out, lossless_backend);
  put<uint8_t>(out, lossy_backend);
  put<uint8_t>(out, quality);
  for (const std::string* p : {&seg_payload, &compact_payload, &residual_payload}) {
    put<uint32_t>(out, static_cast<uint32_t>(p->size()));
    out.append(*p);
  }
  return out;
}

ParseResult parse_container(const std::string& bytes, ParseMode mode) {
  size_t pos = 0;
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw DataError("container: bad magic");
  pos = 4;

  ParseResult res;
  LayeredBitstream& b = res.bitstream;
  uint8_t version = get<uint8_t>(bytes, pos);
  if (version != LayeredBitstream::kVersion)
    throw DataError("container: unsupported version " + std::to_string(version));
  b.h = get<uint16_t>(bytes, pos);
  b.w = get<uint16_t>(bytes, pos);
  b.k = get<uint8_t>(bytes, pos);
  b.num_labels = get<uint8_t>(bytes, pos);
  b.alpha = get<uint8_t>(bytes, pos);
  b.residual_min = get<float>(bytes, pos);
  b.residual_max = get<float>(bytes, pos);
  b.lossless_backend = get<uint8_t>(bytes, pos);
  b.lossy_backend = get<uint8_t>(bytes, pos);
  b.quality = get<uint8_t>(bytes, pos);

  if (b.h < 1 || b.w < 1) throw DataError("container: empty dims");
  if (b.k != 1 && b.k != 3) throw DataError("container: bad channel count");
  if (!is_pow2(b.alpha)) throw DataError("container: alpha not a power of two");
  if (!(b.residual_min <= b.residual_max)) throw DataError("container: residual min > max");

  std::string* payloads[3] = {&b.seg_payload, &b.compact_payload, &b.residual_payload};
  for (int i = 0; i < 3; ++i) {
    uint32_t len;
    bool truncated = false;
    if (pos + 4 > bytes.size()) {
      truncated = true;
      len = 0;
    } else {
      len = get<uint32_t>(bytes, pos);
      if (pos + len > bytes.size()) truncated = true;
    }
    if (truncated) {
      // Only a truncated trailing residual is recoverable.
      if (mode == ParseMode::kResilient && i == 2) {
        res.residual_truncated = true;
        b.residual_payload.clear();
        return res;
      }
      throw DataError("container: payload length exceeds available bytes");
    }
    payloads[i]->assign(bytes, pos, len);
    pos += len;
  }
  if (pos != bytes.size()) throw DataError("container: trailing bytes after payloads");
  return res;
}

void write_container(const std::string& path, const LayeredBitstream& b) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot open for writing: " + path);
  std::string bytes = b.serialize();
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw DataError("write failed: " + path);
}

ParseResult read_container(const std::string& path, ParseMode mode) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open container: " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse_container(bytes, mode);
}

}  // namespace dsslic
