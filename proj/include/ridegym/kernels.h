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

// Data-parallel inner loops. Every kernel has a plain serial reference that
// the tests compare against and the benchmark times against. Kernels write
// per-row results only; any reduction over rows is done serially by the
// caller so results do not depend on the thread count.

#ifndef RIDEGYM_KERNELS_H_
#define RIDEGYM_KERNELS_H_

#include <span>

namespace ridegym::kernels {

// Rows below this size run serially even in the parallel kernels.
inline constexpr int kParallelMinRows = 2048;

// z * (lambda * g * d - lambda * g * B - 1).
inline double DecisionScore(double z, double g, double d, double budget_rate,
                            double lambda) {
  return z * (lambda * g * d - lambda * g * budget_rate - 1.0);
}

// For each row i of the row-major N x H matrix `z`, writes the minimum
// decision score and the index attaining it. Exact ties go to the lower
// coupon index.
void RowMinimaSerial(std::span<const double> z, std::span<const double> g,
                     std::span<const double> coupons, double budget_rate,
                     double lambda, std::span<double> min_score,
                     std::span<int> argmin);
void RowMinimaParallel(std::span<const double> z, std::span<const double> g,
                       std::span<const double> coupons, double budget_rate,
                       double lambda, std::span<double> min_score,
                       std::span<int> argmin);

// Labels each of the N points (row-major, `dim` columns) with its nearest
// centroid by squared Euclidean distance; ties go to the lower centroid id.
void NearestCentroidSerial(std::span<const double> points, int dim,
                           std::span<const double> centroids,
                           std::span<int> labels, std::span<double> dist2);
void NearestCentroidParallel(std::span<const double> points, int dim,
                             std::span<const double> centroids,
                             std::span<int> labels, std::span<double> dist2);

}  // namespace ridegym::kernels

#endif  // RIDEGYM_KERNELS_H_
