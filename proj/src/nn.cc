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

#include "ridegym/nn.h"

#include <cmath>
#include <cstring>
#include <fstream>

namespace ridegym::nn {

void Mlp::ComputeOffsets() {
  offsets_.clear();
  size_t offset = 0;
  for (int l = 0; l + 1 < static_cast<int>(sizes_.size()); ++l) {
    offsets_.push_back(offset);
    offset += static_cast<size_t>(sizes_[l]) * sizes_[l + 1] + sizes_[l + 1];
  }
  offsets_.push_back(offset);
}

size_t Mlp::bias_offset(int layer) const {
  return offsets_[layer] +
         static_cast<size_t>(sizes_[layer]) * sizes_[layer + 1];
}

Mlp::Mlp(std::vector<int> sizes, Activation hidden, Rng& rng)
    : sizes_(std::move(sizes)), hidden_(hidden) {
  if (sizes_.size() < 2) throw ArgumentError("an MLP needs >= 2 layer sizes");
  for (int s : sizes_) {
    if (s < 1) throw ArgumentError("layer sizes must be positive");
  }
  ComputeOffsets();
  params_.assign(offsets_.back(), 0.0);
  for (int l = 0; l < num_layers(); ++l) {
    const double limit = std::sqrt(6.0 / (sizes_[l] + sizes_[l + 1]));
    std::uniform_real_distribution<double> init(-limit, limit);
    const size_t count = static_cast<size_t>(sizes_[l]) * sizes_[l + 1];
    for (size_t k = 0; k < count; ++k) params_[offsets_[l] + k] = init(rng);
  }
}

Mlp Mlp::FromParams(std::vector<int> sizes, Activation hidden,
                    std::vector<double> params) {
  Mlp mlp;
  mlp.sizes_ = std::move(sizes);
  mlp.hidden_ = hidden;
  mlp.ComputeOffsets();
  if (params.size() != mlp.offsets_.back()) {
    throw ArgumentError("parameter count does not match layer sizes");
  }
  mlp.params_ = std::move(params);
  return mlp;
}

std::vector<double> Mlp::Forward(std::span<const double> x) const {
  Tape tape;
  return Forward(x, tape);
}

const std::vector<double>& Mlp::Forward(std::span<const double> x,
                                        Tape& tape) const {
  if (static_cast<int>(x.size()) != input_size()) {
    throw ArgumentError("MLP input has the wrong dimension");
  }
  tape.activations.resize(sizes_.size());
  tape.activations[0].assign(x.begin(), x.end());
  for (int l = 0; l < num_layers(); ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const double* w = params_.data() + offsets_[l];
    const double* b = params_.data() + bias_offset(l);
    const std::vector<double>& a = tape.activations[l];
    std::vector<double>& y = tape.activations[l + 1];
    y.resize(out);
    const bool last = l + 1 == num_layers();
    for (int o = 0; o < out; ++o) {
      double acc = b[o];
      for (int i = 0; i < in; ++i) acc += w[static_cast<size_t>(o) * in + i] * a[i];
      y[o] = (!last && hidden_ == Activation::kTanh) ? std::tanh(acc) : acc;
    }
  }
  return tape.activations.back();
}

std::vector<double> Mlp::Backward(const Tape& tape,
                                  std::span<const double> grad_output,
                                  std::span<double> grad) const {
  if (static_cast<int>(grad_output.size()) != output_size() ||
      grad.size() != params_.size()) {
    throw ArgumentError("gradient buffers have the wrong size");
  }
  std::vector<double> delta(grad_output.begin(), grad_output.end());
  for (int l = num_layers() - 1; l >= 0; --l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const bool last = l + 1 == num_layers();
    if (!last && hidden_ == Activation::kTanh) {
      const std::vector<double>& y = tape.activations[l + 1];
      for (int o = 0; o < out; ++o) delta[o] *= 1.0 - y[o] * y[o];
    }
    const std::vector<double>& a = tape.activations[l];
    const double* w = params_.data() + offsets_[l];
    double* gw = grad.data() + offsets_[l];
    double* gb = grad.data() + bias_offset(l);
    std::vector<double> prev(in, 0.0);
    for (int o = 0; o < out; ++o) {
      gb[o] += delta[o];
      for (int i = 0; i < in; ++i) {
        gw[static_cast<size_t>(o) * in + i] += delta[o] * a[i];
        prev[i] += w[static_cast<size_t>(o) * in + i] * delta[o];
      }
    }
    delta = std::move(prev);
  }
  return delta;
}

Adam::Adam(size_t num_params, double learning_rate, double beta1, double beta2,
           double eps)
    : lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps),
      m_(num_params, 0.0),
      v_(num_params, 0.0) {
  if (!(learning_rate > 0.0)) throw ArgumentError("learning rate must be > 0");
}

void Adam::Step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw ArgumentError("Adam buffers have the wrong size");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t k = 0; k < params.size(); ++k) {
    m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * grad[k];
    v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * grad[k] * grad[k];
    params[k] -= lr_ * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + eps_);
  }
}

const NamedArray& Checkpoint::Get(const std::string& name) const {
  for (const NamedArray& a : arrays) {
    if (a.name == name) return a;
  }
  throw ConfigError("checkpoint has no array named " + name);
}

namespace {

template <typename T>
void WritePod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T ReadPod(std::istream& in) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw ConfigError("truncated checkpoint");
  return value;
}

void WriteString(std::ostream& out, const std::string& s) {
  WritePod<uint32_t>(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string ReadString(std::istream& in) {
  const uint32_t n = ReadPod<uint32_t>(in);
  if (n > (1u << 20)) throw ConfigError("corrupt checkpoint string");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw ConfigError("truncated checkpoint");
  return s;
}

}  // namespace

void SaveCheckpoint(const std::string& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write checkpoint: " + path);
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  WritePod(out, kCheckpointVersion);
  WriteString(out, checkpoint.kind);
  WritePod<uint32_t>(out, static_cast<uint32_t>(checkpoint.arrays.size()));
  for (const NamedArray& a : checkpoint.arrays) {
    int64_t count = 1;
    for (int64_t d : a.shape) count *= d;
    if (count != static_cast<int64_t>(a.data.size())) {
      throw ArgumentError("array " + a.name + " does not match its shape");
    }
    WriteString(out, a.name);
    WritePod<uint32_t>(out, static_cast<uint32_t>(a.shape.size()));
    for (int64_t d : a.shape) WritePod(out, d);
  }
  for (const NamedArray& a : checkpoint.arrays) {
    out.write(reinterpret_cast<const char*>(a.data.data()),
              static_cast<std::streamsize>(a.data.size() * sizeof(double)));
  }
  if (!out) throw ConfigError("failed writing checkpoint: " + path);
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint: " + path);
  char magic[sizeof(kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw ConfigError("not a ridegym checkpoint: " + path);
  }
  const uint32_t version = ReadPod<uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw ConfigError("unsupported checkpoint version " +
                      std::to_string(version));
  }
  Checkpoint cp;
  cp.kind = ReadString(in);
  const uint32_t n = ReadPod<uint32_t>(in);
  cp.arrays.resize(n);
  for (NamedArray& a : cp.arrays) {
    a.name = ReadString(in);
    const uint32_t rank = ReadPod<uint32_t>(in);
    int64_t count = 1;
    for (uint32_t r = 0; r < rank; ++r) {
      a.shape.push_back(ReadPod<int64_t>(in));
      if (a.shape.back() < 0 || a.shape.back() > (int64_t{1} << 32)) {
        throw ConfigError("corrupt checkpoint shape");
      }
      count *= a.shape.back();
    }
    a.data.resize(count);
  }
  for (NamedArray& a : cp.arrays) {
    in.read(reinterpret_cast<char*>(a.data.data()),
            static_cast<std::streamsize>(a.data.size() * sizeof(double)));
    if (!in) throw ConfigError("truncated checkpoint data");
  }
  return cp;
}

void AppendMlp(Checkpoint& checkpoint, const std::string& prefix,
               const Mlp& mlp) {
  const auto p = mlp.params();
  for (int l = 0; l < mlp.num_layers(); ++l) {
    const int in = mlp.sizes()[l];
    const int out = mlp.sizes()[l + 1];
    const size_t w = mlp.weight_offset(l);
    const size_t b = mlp.bias_offset(l);
    const std::string base = prefix + "." + std::to_string(l);
    checkpoint.arrays.push_back(
        {base + ".weight", {out, in},
         std::vector<double>(p.begin() + w, p.begin() + b)});
    checkpoint.arrays.push_back(
        {base + ".bias", {out}, std::vector<double>(p.begin() + b, p.begin() + b + out)});
  }
}

Mlp ReadMlp(const Checkpoint& checkpoint, const std::string& prefix,
            Activation hidden) {
  std::vector<int> sizes;
  std::vector<double> params;
  for (int l = 0;; ++l) {
    const std::string base = prefix + "." + std::to_string(l);
    bool found = false;
    for (const NamedArray& a : checkpoint.arrays) found |= a.name == base + ".weight";
    if (!found) break;
    const NamedArray& w = checkpoint.Get(base + ".weight");
    const NamedArray& b = checkpoint.Get(base + ".bias");
    if (w.shape.size() != 2 || b.shape.size() != 1 || b.shape[0] != w.shape[0]) {
      throw ConfigError("inconsistent layer shapes under " + base);
    }
    if (sizes.empty()) sizes.push_back(static_cast<int>(w.shape[1]));
    if (sizes.back() != w.shape[1]) {
      throw ConfigError("layer input does not match previous output: " + base);
    }
    sizes.push_back(static_cast<int>(w.shape[0]));
    params.insert(params.end(), w.data.begin(), w.data.end());
    params.insert(params.end(), b.data.begin(), b.data.end());
  }
  if (sizes.size() < 2) throw ConfigError("no network under prefix " + prefix);
  return Mlp::FromParams(std::move(sizes), hidden, std::move(params));
}

}  // namespace ridegym::nn
