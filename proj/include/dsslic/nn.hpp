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

#ifndef DSSLIC_NN_HPP_
#define DSSLIC_NN_HPP_

#include <memory>
#include <string>
#include <vector>

#include "dsslic/nn_ops.hpp"
#include "dsslic/tensor.hpp"

namespace dsslic {

using ops::Act;
using ops::PadMode;

// A learnable tensor with its gradient and Adam moments.
struct Parameter {
  std::string name;
  std::vector<int> shape;
  std::vector<float> w, g;
  std::vector<float> m, v;  // Adam state, sized on first optimizer step

  size_t size() const { return w.size(); }
  void zero_grad() { std::fill(g.begin(), g.end(), 0.f); }
};

// Per-unit activations saved by a training forward pass; inference passes
// run cache-free. `sub` nests caches for composite units (residual blocks).
struct UnitCache {
  Tensor in;
  Tensor normed;
  Tensor out;
  std::vector<float> inv_std;
  std::vector<int32_t> argmax;
  std::vector<UnitCache> sub;
};

class Unit {
 public:
  virtual ~Unit() = default;
  virtual Tensor forward(const Tensor& x, UnitCache* cc) = 0;
  // Accumulates parameter gradients and returns the input gradient.
  virtual Tensor backward(const Tensor& gy, const UnitCache& cc) = 0;
  virtual void collect(std::vector<Parameter*>& out) {}

  std::string name;
};

// conv (or fractional-stride conv) -> optional instance norm -> activation.
class ConvUnit : public Unit {
 public:
  ConvUnit(int cin, int cout, int kernel, int stride, int pad, PadMode pm, bool transposed,
           bool norm, Act act, Rng& rng);

  Tensor forward(const Tensor& x, UnitCache* cc) override;
  Tensor backward(const Tensor& gy, const UnitCache& cc) override;
  void collect(std::vector<Parameter*>& out) override;

  Parameter weight, bias;
  int cin, cout, kernel, stride, pad;
  PadMode pad_mode;
  bool transposed, norm;
  Act act;
};

// x + branch(x) with branch = two reflect-padded 3x3 convolutions, instance
// norm after each, activation between them, no activation after the sum.
class ResidualUnit : public Unit {
 public:
  ResidualUnit(int channels, Rng& rng);

  Tensor forward(const Tensor& x, UnitCache* cc) override;
  Tensor backward(const Tensor& gy, const UnitCache& cc) override;
  void collect(std::vector<Parameter*>& out) override;

  ConvUnit conv0, conv1;
};

class MaxPoolUnit : public Unit {
 public:
  MaxPoolUnit() = default;
  Tensor forward(const Tensor& x, UnitCache* cc) override;
  Tensor backward(const Tensor& gy, const UnitCache& cc) override;
};

struct NetCache {
  std::vector<UnitCache> units;
};

class SequentialNet {
 public:
  Tensor forward(const Tensor& x, NetCache* cc);
  Tensor backward(const Tensor& gy, const NetCache& cc);

  // Runs the net while exposing the outputs of units [0, taps); used by the
  // discriminators and the pretrained feature extractor.
  Tensor forward_tapped(const Tensor& x, int taps, std::vector<Tensor>* tap_out, NetCache* cc);
  // Backward with extra gradients injected at the tapped unit outputs.
  Tensor backward_tapped(const Tensor& gy, const std::vector<Tensor>* tap_grads,
                         const NetCache& cc);

  std::vector<Parameter*> params();
  void zero_grad();
  void assign_names(const std::string& prefix);
  bool empty() const { return units.empty(); }

  std::vector<std::unique_ptr<Unit>> units;
};

class Adam {
 public:
  Adam(double beta1 = 0.5, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(const std::vector<Parameter*>& params, double lr);

  int64_t t = 0;

 private:
  double beta1_, beta2_, eps_;
};

// Sets the GEMM worker count (Eigen/OpenMP). Results do not depend on it.
void set_num_threads(int n);

}  // namespace dsslic

#endif  // DSSLIC_NN_HPP_
