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

#include "dsslic/codec.hpp"

#include <cmath>

namespace dsslic {

Tensor upsample_compact(const Tensor& c, int alpha) {
  return ops::upsample_bilinear_fwd(c, alpha);
}

Tensor recnet(NetworkBundle& nets, const SegmentationMap* seg, const Tensor& c) {
  Tensor c_up = upsample_compact(c, nets.alpha);
  Tensor x_prime;
  if (variant_uses_finenet(nets.variant)) {
    Tensor f = nets.finenet.forward(variant_uses_seg(nets.variant) ? seg : nullptr, c_up, nullptr);
    x_prime = std::move(c_up);
    x_prime.add_(f);
  } else {
    x_prime = std::move(c_up);
  }
  for (auto& v : x_prime.v) v = std::clamp(v, -1.f, 1.f);
  return x_prime;
}

// ---------------------------------------------------------------------------
// Min-max residual normalization

MinMaxScaled minmax_normalize(const std::vector<float>& r) {
  if (r.empty()) throw DataError("minmax_normalize: empty input");
  float mn = r[0], mx = r[0];
  for (float v : r) {
    if (!std::isfinite(v)) throw DataError("minmax_normalize: non-finite value");
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  return minmax_normalize(r, mn, mx);
}

MinMaxScaled minmax_normalize(const std::vector<float>& r, float min, float max) {
  MinMaxScaled out;
  out.min = min;
  out.max = max;
  out.scaled.resize(r.size());
  const double span = double(max) - double(min);
  if (span <= 0) {
    // Degenerate constant plane: emit zeros, the inverse restores min.
    std::fill(out.scaled.begin(), out.scaled.end(), uint8_t(0));
    return out;
  }
  for (size_t i = 0; i < r.size(); ++i) {
    double s = (double(r[i]) - double(min)) / span * 255.0;
    out.scaled[i] = static_cast<uint8_t>(std::clamp<long>(std::lround(s), 0, 255));
  }
  return out;
}

std::vector<float> minmax_denormalize(const std::vector<uint8_t>& scaled, float min, float max) {
  if (!(min <= max)) throw DataError("minmax_denormalize: min > max");
  std::vector<float> out(scaled.size());
  const double span = double(max) - double(min);
  for (size_t i = 0; i < scaled.size(); ++i)
    out[i] = static_cast<float>(double(scaled[i]) * span / 255.0 + double(min));
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

// The coarse reconstruction on the 8-bit grid, identical on both sides:
// pad, run the networks on decoded inputs, crop, quantize.
ImageU8 coarse_reconstruction_u8(NetworkBundle& nets, const SegmentationMap* seg_orig,
                                 const Tensor& c_dec, int h, int w) {
  SegmentationMap seg_pad;
  const SegmentationMap* seg = nullptr;
  if (variant_uses_seg(nets.variant)) {
    if (seg_orig == nullptr) throw DataError("codec: missing segmentation map");
    seg_pad = pad_to_multiple(*seg_orig, nets.alpha);
    seg = &seg_pad;
  }
  Tensor x_prime = recnet(nets, seg, c_dec);
  ImagePlane p;
  p.data = crop(x_prime, h, w);
  return to_u8(p);
}

std::string encode_compact(const Tensor& c, const LosslessCodec& codec) {
  ImageU8 img(c.h, c.w, c.c);
  for (int ci = 0; ci < c.c; ++ci)
    for (int y = 0; y < c.h; ++y)
      for (int x = 0; x < c.w; ++x) img.at(y, x, ci) = quantize_unit(c.at(ci, y, x));
  return codec.encode(img);
}

Tensor decode_compact(const std::string& payload, const LosslessCodec& codec, int ch, int cw) {
  ImageU8 img = codec.decode(payload);
  if (img.h != ch || img.w != cw || img.k != 3)
    throw DataError("codec: compact layer dims disagree with header");
  Tensor c(3, ch, cw);
  for (int ci = 0; ci < 3; ++ci)
    for (int y = 0; y < ch; ++y)
      for (int x = 0; x < cw; ++x) c.at(ci, y, x) = dequantize_u8(img.at(y, x, ci));
  return c;
}

std::string encode_segmentation(const SegmentationMap& s, const LosslessCodec& codec) {
  ImageU8 img(s.h, s.w, 1);
  for (int y = 0; y < s.h; ++y)
    for (int x = 0; x < s.w; ++x) img.at(y, x, 0) = static_cast<uint8_t>(s.at(y, x));
  return codec.encode(img);
}

SegmentationMap decode_segmentation(const std::string& payload, const LosslessCodec& codec,
                                    int h, int w, int num_labels) {
  ImageU8 img = codec.decode(payload);
  if (img.h != h || img.w != w || img.k != 1)
    throw DataError("codec: segmentation layer dims disagree with header");
  SegmentationMap s(h, w, num_labels);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      int32_t l = img.at(y, x, 0);
      if (l >= num_labels) throw DataError("codec: decoded label out of range");
      s.at(y, x) = l;
    }
  return s;
}

}  // namespace

LayeredBitstream Pipeline::encode(const ImageU8& x, const std::string& id) const {
  const SegmentationMap* seg = nullptr;
  SegmentationMap s;
  if (variant_uses_seg(nets_->variant)) {
    if (segnet == nullptr) throw DataError("codec: no segmentation adapter configured");
    s = segnet->segment(to_plane(x), id);
    seg = &s;
  }
  return encode_with_map(x, seg);
}

LayeredBitstream Pipeline::encode_with_map(const ImageU8& x, const SegmentationMap* seg) const {
  if (x.k != 3) throw DataError("codec: encoder expects RGB input");
  NetworkBundle& nets = *nets_;
  const bool use_seg = variant_uses_seg(nets.variant);
  if (use_seg && seg != nullptr && (seg->h != x.h || seg->w != x.w))
    throw DataError("codec: segmentation dims disagree with image");

  const LosslessCodec& lossless = backends_->lossless_default();
  const LossyCodec& lossy = backends_->lossy_default();

  // Pad, run CompNet, and reconstruct from the *decoded* compact layer so
  // both sides of the codec agree bit-exactly.
  ImagePlane xp = to_plane(x);
  Tensor x_pad = pad_to_multiple(xp.data, nets.alpha);
  SegmentationMap seg_pad;
  if (use_seg) seg_pad = pad_to_multiple(*seg, nets.alpha);
  Tensor c = nets.compnet.forward(x_pad, use_seg ? &seg_pad : nullptr, nullptr);

  LayeredBitstream b;
  b.h = static_cast<uint16_t>(x.h);
  b.w = static_cast<uint16_t>(x.w);
  b.k = 3;
  b.num_labels = static_cast<uint8_t>(nets.num_labels);
  b.alpha = static_cast<uint8_t>(nets.alpha);
  b.lossless_backend = lossless.id();
  b.lossy_backend = lossy.id();
  b.quality = static_cast<uint8_t>(quality);

  if (use_seg) b.seg_payload = encode_segmentation(*seg, lossless);
  b.compact_payload = encode_compact(c, lossless);
  Tensor c_dec = decode_compact(b.compact_payload, lossless, c.h, c.w);

  if (include_residual) {
    ImageU8 x_prime = coarse_reconstruction_u8(nets, use_seg ? seg : nullptr, c_dec, x.h, x.w);
    // Residual in the integer domain; with a lossless residual backend the
    // decoder recovers x exactly whenever max-min <= 255.
    std::vector<float> r(x.size());
    for (size_t i = 0; i < x.size(); ++i) r[i] = float(int(x.v[i]) - int(x_prime.v[i]));
    MinMaxScaled mm = minmax_normalize(r);
    b.residual_min = mm.min;
    b.residual_max = mm.max;
    ImageU8 scaled(x.h, x.w, 3);
    scaled.v = std::move(mm.scaled);
    b.residual_payload = lossy.encode(scaled, quality);
  }
  return b;
}

DecodeResult Pipeline::decode(const LayeredBitstream& b) const {
  NetworkBundle& nets = *nets_;
  const bool use_seg = variant_uses_seg(nets.variant);
  if (b.num_labels != nets.num_labels || b.alpha != nets.alpha)
    throw DataError("codec: container metadata disagrees with loaded weights");
  if (use_seg && b.seg_payload.empty())
    throw DataError("codec: weights expect a segmentation layer but the container has none");

  const LosslessCodec& lossless = backends_->lossless_by_id(b.lossless_backend);

  SegmentationMap s;
  if (use_seg) s = decode_segmentation(b.seg_payload, lossless, b.h, b.w, b.num_labels);

  const int ph = round_up(b.h, b.alpha), pw = round_up(b.w, b.alpha);
  Tensor c = decode_compact(b.compact_payload, lossless, ph / b.alpha, pw / b.alpha);
  ImageU8 x_prime = coarse_reconstruction_u8(nets, use_seg ? &s : nullptr, c, b.h, b.w);

  DecodeResult out;
  if (b.residual_payload.empty()) {
    out.image = std::move(x_prime);
    out.residual_dropped = false;
    return out;
  }

  const LossyCodec& lossy = backends_->lossy_by_id(b.lossy_backend);
  ImageU8 scaled = lossy.decode(b.residual_payload);
  if (!scaled.same_shape(ImageU8(b.h, b.w, 3)))
    throw DataError("codec: residual layer dims disagree with header");
  std::vector<float> r = minmax_denormalize(scaled.v, b.residual_min, b.residual_max);
  out.image = ImageU8(b.h, b.w, 3);
  for (size_t i = 0; i < r.size(); ++i) {
    long v = long(x_prime.v[i]) + std::lround(r[i]);
    out.image.v[i] = static_cast<uint8_t>(std::clamp(v, 0l, 255l));
  }
  return out;
}

DecodeResult Pipeline::decode_bytes(const std::string& bytes, ParseMode mode) const {
  ParseResult parsed = parse_container(bytes, mode);
  DecodeResult out = decode(parsed.bitstream);
  out.residual_dropped = parsed.residual_truncated;
  return out;
}

ImageU8 Pipeline::reconstruct_prefix(const LayeredBitstream& b, int layers) const {
  if (layers < 1 || layers > 3) throw DataError("reconstruct_prefix: layers must be 1..3");
  LayeredBitstream partial = b;
  if (layers < 3) partial.residual_payload.clear();
  if (layers < 2) {
    // Segmentation-only reconstruction: substitute a neutral compact layer.
    const int ph = round_up(b.h, b.alpha), pw = round_up(b.w, b.alpha);
    Tensor zero(3, ph / b.alpha, pw / b.alpha);
    ImageU8 img(zero.h, zero.w, 3);
    for (size_t i = 0; i < img.size(); ++i) img.v[i] = quantize_unit(0.f);
    partial.compact_payload = backends_->lossless_by_id(b.lossless_backend).encode(img);
  }
  return decode(partial).image;
}

Pipeline pipeline_variant(Variant variant, NetworkBundle* nets, const BackendRegistry* backends) {
  if (nets->variant != variant)
    throw DataError("weights were trained for variant '" + variant_name(nets->variant) +
                    "', not '" + variant_name(variant) + "'");
  Pipeline p(nets, backends);
  p.include_residual = false;  // the ablation variants skip the residual layer
  return p;
}

LayerBreakdown layer_breakdown(const LayeredBitstream& b) {
  LayerBreakdown lb;
  lb.seg_bytes = b.seg_payload.size();
  lb.compact_bytes = b.compact_payload.size();
  lb.residual_bytes = b.residual_payload.size();
  lb.header_bytes = LayeredBitstream::kHeaderBytes + LayeredBitstream::kLayerPrefixBytes;
  return lb;
}

}  // namespace dsslic
