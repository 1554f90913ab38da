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

#include "ridegym/kernels.h"

#include <cstddef>
#include <limits>

namespace ridegym::kernels {
namespace {

inline void RowMinimum(const double* z_row, double g, const double* coupons,
                       int num_coupons, double budget_rate, double lambda,
                       double* min_score, int* argmin) {
  double best = DecisionScore(z_row[0], g, coupons[0], budget_rate, lambda);
  int best_j = 0;
  for (int j = 1; j < num_coupons; ++j) {
    const double s = DecisionScore(z_row[j], g, coupons[j], budget_rate, lambda);
    if (s < best) {
      best = s;
      best_j = j;
    }
  }
  *min_score = best;
  *argmin = best_j;
}

inline void Nearest(const double* p, int dim, const double* centroids, int k,
                    int* label, double* dist2) {
  double best = std::numeric_limits<double>::infinity();
  int best_c = 0;
  for (int c = 0; c < k; ++c) {
    const double* q = centroids + static_cast<std::ptrdiff_t>(c) * dim;
    double acc = 0.0;
    for (int f = 0; f < dim; ++f) {
      const double diff = p[f] - q[f];
      acc += diff * diff;
    }
    if (acc < best) {
      best = acc;
      best_c = c;
    }
  }
  *label = best_c;
  *dist2 = best;
}

}  // namespace

void RowMinimaSerial(std::span<const double> z, std::span<const double> g,
                     std::span<const double> coupons, double budget_rate,
                     double lambda, std::span<double> min_score,
                     std::span<int> argmin) {
  const int h = static_cast<int>(coupons.size());
  const int n = static_cast<int>(g.size());
  for (int i = 0; i < n; ++i) {
    RowMinimum(z.data() + static_cast<std::ptrdiff_t>(i) * h, g[i],
               coupons.data(), h, budget_rate, lambda, &min_score[i],
               &argmin[i]);
  }
}

void RowMinimaParallel(std::span<const double> z, std::span<const double> g,
                       std::span<const double> coupons, double budget_rate,
                       double lambda, std::span<double> min_score,
                       std::span<int> argmin) {
  const int h = static_cast<int>(coupons.size());
  const int n = static_cast<int>(g.size());
  const double* zp = z.data();
  const double* gp = g.data();
  const double* dp = coupons.data();
  double* mp = min_score.data();
  int* ap = argmin.data();
#pragma omp parallel for schedule(static) if (n >= kParallelMinRows)
  for (int i = 0; i < n; ++i) {
    RowMinimum(zp + static_cast<std::ptrdiff_t>(i) * h, gp[i], dp, h,
               budget_rate, lambda, mp + i, ap + i);
  }
}

void NearestCentroidSerial(std::span<const double> points, int dim,
                           std::span<const double> centroids,
                           std::span<int> labels, std::span<double> dist2) {
  const int n = static_cast<int>(labels.size());
  const int k = static_cast<int>(centroids.size()) / dim;
  for (int i = 0; i < n; ++i) {
    Nearest(points.data() + static_cast<std::ptrdiff_t>(i) * dim, dim,
            centroids.data(), k, &labels[i], &dist2[i]);
  }
}

void NearestCentroidParallel(std::span<const double> points, int dim,
                             std::span<const double> centroids,
                             std::span<int> labels, std::span<double> dist2) {
  const int n = static_cast<int>(labels.size());
  const int k = static_cast<int>(centroids.size()) / dim;
  const double* pp = points.data();
  const double* cp = centroids.data();
  int* lp = labels.data();
  double* dp = dist2.data();
#pragma omp parallel for schedule(static) if (n >= kParallelMinRows)
  for (int i = 0; i < n; ++i) {
    Nearest(pp + static_cast<std::ptrdiff_t>(i) * dim, dim, cp, k, lp + i,
            dp + i);
  }
}

}  // namespace ridegym::kernels
