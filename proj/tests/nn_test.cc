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

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "grad_check.h"
#include "gtest/gtest.h"

namespace ridegym::nn {
namespace {

std::string TempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

TEST(MlpTest, ForwardOfKnownWeights) {
  // 2 -> 1 linear: y = 2 x0 - x1 + 0.5.
  Mlp mlp = Mlp::FromParams({2, 1}, Activation::kTanh, {2.0, -1.0, 0.5});
  EXPECT_DOUBLE_EQ(mlp.Forward(std::vector<double>{1.0, 3.0})[0], -0.5);
  EXPECT_THROW(mlp.Forward(std::vector<double>{1.0}), ArgumentError);
}

TEST(MlpTest, BackwardMatchesFiniteDifferences) {
  Rng rng(1);
  Mlp mlp({3, 5, 4, 2}, Activation::kTanh, rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x = {normal(rng), normal(rng), normal(rng)};
    const std::vector<double> upstream = {normal(rng), normal(rng)};
    auto loss = [&]() {
      const auto y = mlp.Forward(x);
      return upstream[0] * y[0] + upstream[1] * y[1];
    };
    Mlp::Tape tape;
    mlp.Forward(x, tape);
    std::vector<double> grad(mlp.num_params(), 0.0);
    const std::vector<double> dx = mlp.Backward(tape, upstream, grad);
    EXPECT_LT(testing::MaxGradientError(mlp.params(), grad, loss), 1e-6);
    EXPECT_LT(testing::MaxGradientError(x, dx, loss), 1e-6);
  }
}

TEST(AdamTest, MinimizesQuadratic) {
  std::vector<double> p = {3.0, -2.0};
  Adam adam(2, 0.05);
  for (int k = 0; k < 2000; ++k) {
    const std::vector<double> g = {2 * (p[0] - 1.0), 2 * (p[1] + 0.5)};
    adam.Step(p, g);
  }
  EXPECT_NEAR(p[0], 1.0, 1e-3);
  EXPECT_NEAR(p[1], -0.5, 1e-3);
}

TEST(CheckpointTest, RoundTrip) {
  Rng rng(2);
  Mlp mlp({4, 8, 2}, Activation::kTanh, rng);
  Checkpoint cp;
  cp.kind = "test";
  cp.arrays.push_back({"scalar", {1}, {42.0}});
  AppendMlp(cp, "net", mlp);
  const std::string path = TempPath("ridegym_nn_roundtrip.ckpt");
  SaveCheckpoint(path, cp);
  const Checkpoint back = LoadCheckpoint(path);
  EXPECT_EQ(back.kind, "test");
  EXPECT_EQ(back.Get("scalar").data, std::vector<double>{42.0});
  const Mlp restored = ReadMlp(back, "net", Activation::kTanh);
  EXPECT_EQ(restored.sizes(), mlp.sizes());
  EXPECT_TRUE(std::equal(restored.params().begin(), restored.params().end(),
                         mlp.params().begin()));
  std::remove(path.c_str());
}

TEST(CheckpointTest, RejectsForeignFiles) {
  const std::string path = TempPath("ridegym_nn_bad.ckpt");
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOTACKPTxxxxxxxx";
  }
  EXPECT_THROW(LoadCheckpoint(path), ConfigError);
  EXPECT_THROW(LoadCheckpoint(TempPath("ridegym_missing.ckpt")), ConfigError);
  std::remove(path.c_str());
}

TEST(CheckpointTest, RejectsShapeMismatch) {
  Checkpoint cp;
  cp.kind = "test";
  cp.arrays.push_back({"bad", {2, 2}, {1.0, 2.0}});
  EXPECT_THROW(SaveCheckpoint(TempPath("ridegym_nn_shape.ckpt"), cp),
               ArgumentError);
}

}  // namespace
}  // namespace ridegym::nn
