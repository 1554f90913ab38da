// Copyright 2026 The RideGym Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small dense networks with hand-written backprop, Adam, and a named-array
// checkpoint format.

#ifndef RIDEGYM_NN_H_
#define RIDEGYM_NN_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ridegym/common.h"

namespace ridegym::nn {

enum class Activation { kIdentity, kTanh };

// Fully connected feed-forward network. All weights and biases live in one
// flat parameter vector so optimizers and finite-difference checks can treat
// the model as a point in R^n.
class Mlp {
 public:
  Mlp() = default;
  // sizes = {input, hidden..., output}. Hidden layers use `hidden`, the
  // last layer is linear. Glorot-uniform weights, zero biases.
  Mlp(std::vector<int> sizes, Activation hidden, Rng& rng);

  // Intermediate values kept for Backward.
  struct Tape {
    std::vector<std::vector<double>> activations;  // input, each layer out
  };

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  const std::vector<int>& sizes() const { return sizes_; }
  Activation hidden_activation() const { return hidden_; }

  std::vector<double> Forward(std::span<const double> x) const;
  const std::vector<double>& Forward(std::span<const double> x,
                                     Tape& tape) const;

  // Adds dL/dparams into `grad` (size num_params()) for upstream gradient
  // dL/doutput. Returns dL/dinput.
  std::vector<double> Backward(const Tape& tape,
                               std::span<const double> grad_output,
                               std::span<double> grad) const;

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  size_t num_params() const { return params_.size(); }

  // Offsets of layer l's weight matrix (out x in, row-major) and bias.
  size_t weight_offset(int layer) const { return offsets_[layer]; }
  size_t bias_offset(int layer) const;
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }

  // Restores a network from its shape and parameters.
  static Mlp FromParams(std::vector<int> sizes, Activation hidden,
                        std::vector<double> params);

 private:
  std::vector<int> sizes_;
  Activation hidden_ = Activation::kTanh;
  std::vector<double> params_;
  std::vector<size_t> offsets_;
  void ComputeOffsets();
};

class Adam {
 public:
  explicit Adam(size_t num_params, double learning_rate = 1e-3,
                double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void Step(std::span<double> params, std::span<const double> grad);
  double learning_rate() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<double> m_, v_;
};

// Checkpoint file: 8-byte magic, u32 version, kind string, a manifest of
// (name, shape) entries, then every array's float64 data in manifest order.
struct NamedArray {
  std::string name;
  std::vector<int64_t> shape;
  std::vector<double> data;
};

struct Checkpoint {
  std::string kind;
  std::vector<NamedArray> arrays;

  const NamedArray& Get(const std::string& name) const;
};

inline constexpr char kCheckpointMagic[8] = {'R', 'G', 'Y', 'M',
                                             'C', 'K', 'P', 'T'};
inline constexpr uint32_t kCheckpointVersion = 1;

void SaveCheckpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint LoadCheckpoint(const std::string& path);

// Appends an Mlp's layers as "<prefix>.<l>.weight"/"<prefix>.<l>.bias".
void AppendMlp(Checkpoint& checkpoint, const std::string& prefix,
               const Mlp& mlp);
Mlp ReadMlp(const Checkpoint& checkpoint, const std::string& prefix,
            Activation hidden);

}  // namespace ridegym::nn

#endif  // RIDEGYM_NN_H_
