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

#include "ridegym/fca.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>

#include "ridegym/kernels.h"

namespace ridegym::fca {
namespace {

int CountDistinctRows(std::span<const double> points, int dim, int enough) {
  const size_t n = points.size() / dim;
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  auto row = [&](size_t i) { return points.subspan(i * dim, dim); };
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const auto ra = row(a), rb = row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(),
                                        rb.end());
  });
  int distinct = 0;
  for (size_t k = 0; k < n && distinct < enough; ++k) {
    if (k == 0 || !std::equal(row(order[k]).begin(), row(order[k]).end(),
                              row(order[k - 1]).begin())) {
      ++distinct;
    }
  }
  return distinct;
}

double Dist2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

// k-means++: first centre uniform, the rest with probability proportional to
// squared distance from the nearest chosen centre.
std::vector<double> SeedCentroids(std::span<const double> points, int dim,
                                  int num_clusters, Rng& rng) {
  const size_t n = points.size() / dim;
  std::vector<double> centroids;
  centroids.reserve(static_cast<size_t>(num_clusters) * dim);
  std::uniform_int_distribution<size_t> pick(0, n - 1);
  const size_t first = pick(rng);
  centroids.insert(centroids.end(), points.begin() + first * dim,
                   points.begin() + (first + 1) * dim);
  std::vector<double> nearest(n);
  for (size_t i = 0; i < n; ++i) {
    nearest[i] = Dist2(points.subspan(i * dim, dim),
                       std::span<const double>(centroids).subspan(0, dim));
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 1; c < num_clusters; ++c) {
    const double total = std::accumulate(nearest.begin(), nearest.end(), 0.0);
    const double target = unit(rng) * total;
    size_t chosen = n - 1;
    double run = 0.0;
    for (size_t i = 0; i < n; ++i) {
      run += nearest[i];
      if (run > target && nearest[i] > 0.0) {
        chosen = i;
        break;
      }
    }
    // Guard against rounding picking an existing centre.
    if (nearest[chosen] == 0.0) {
      chosen = static_cast<size_t>(
          std::max_element(nearest.begin(), nearest.end()) - nearest.begin());
    }
    const auto centre = points.subspan(chosen * dim, dim);
    centroids.insert(centroids.end(), centre.begin(), centre.end());
    for (size_t i = 0; i < n; ++i) {
      nearest[i] =
          std::min(nearest[i], Dist2(points.subspan(i * dim, dim), centre));
    }
  }
  return centroids;
}

}  // namespace

ClusterModel::ClusterModel(int dim, std::vector<double> centroids)
    : dim_(dim), centroids_(std::move(centroids)) {
  if (dim_ <= 0 || centroids_.empty() || centroids_.size() % dim_ != 0) {
    throw ArgumentError("ClusterModel: centroid matrix does not match dim");
  }
}

int ClusterModel::num_clusters() const {
  return dim_ == 0 ? 0 : static_cast<int>(centroids_.size()) / dim_;
}

int ClusterModel::Assign(std::span<const double> point) const {
  if (static_cast<int>(point.size()) != dim_) {
    throw ArgumentError("ClusterModel::Assign: point has wrong dimension");
  }
  int label = 0;
  double d2 = 0.0;
  kernels::NearestCentroidSerial(point, dim_, centroids_, {&label, 1},
                                 {&d2, 1});
  return label;
}

std::vector<int> ClusterModel::AssignBatch(
    std::span<const double> points) const {
  if (points.size() % dim_ != 0) {
    throw ArgumentError("ClusterModel::AssignBatch: ragged point matrix");
  }
  const size_t n = points.size() / dim_;
  std::vector<int> labels(n);
  std::vector<double> d2(n);
  kernels::NearestCentroidParallel(points, dim_, centroids_, labels, d2);
  return labels;
}

ClusterModel KMeansFit(std::span<const double> points, int dim,
                       int num_clusters, Rng& rng,
                       const KMeansOptions& options) {
  if (dim <= 0 || num_clusters <= 0 || points.size() % dim != 0) {
    throw ArgumentError("KMeansFit: bad dimension or cluster count");
  }
  if (CountDistinctRows(points, dim, num_clusters) < num_clusters) {
    throw ConfigError("KMeansFit: fewer distinct points than clusters (" +
                      std::to_string(num_clusters) + ")");
  }
  const size_t n = points.size() / dim;
  std::vector<double> centroids = SeedCentroids(points, dim, num_clusters, rng);
  std::vector<int> labels(n);
  std::vector<double> d2(n);
  std::vector<double> sums(centroids.size());
  std::vector<size_t> counts(num_clusters);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    kernels::NearestCentroidParallel(points, dim, centroids, labels, d2);
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), size_t{0});
    for (size_t i = 0; i < n; ++i) {
      const int c = labels[i];
      ++counts[c];
      for (int k = 0; k < dim; ++k) sums[c * dim + k] += points[i * dim + k];
    }
    double shift = 0.0;
    for (int c = 0; c < num_clusters; ++c) {
      if (counts[c] == 0) continue;  // keep the old centre
      for (int k = 0; k < dim; ++k) {
        const double updated = sums[c * dim + k] / static_cast<double>(counts[c]);
        shift = std::max(shift, std::abs(updated - centroids[c * dim + k]));
        centroids[c * dim + k] = updated;
      }
    }
    if (shift < options.tolerance) break;
  }
  return ClusterModel(dim, std::move(centroids));
}

int FeatureClusterer::Assign(const Features& x) const {
  const Features xs = standardizer.Apply(x);
  return model.Assign(xs);
}

std::vector<int> FeatureClusterer::AssignAll(
    std::span<const Opportunity> orders) const {
  std::vector<double> points;
  points.reserve(orders.size() * kNumFeatures);
  for (const Opportunity& o : orders) {
    const Features xs = standardizer.Apply(o.x);
    points.insert(points.end(), xs.begin(), xs.end());
  }
  return model.AssignBatch(points);
}

FeatureClusterer FitFeatureClusterer(std::span<const Features> features,
                                     int num_clusters, Rng& rng) {
  std::vector<est::Sample> samples(features.size());
  for (size_t i = 0; i < features.size(); ++i) samples[i].x = features[i];
  FeatureClusterer out;
  out.standardizer = est::Standardizer::Fit(samples);
  std::vector<double> points;
  points.reserve(features.size() * kNumFeatures);
  for (const Features& x : features) {
    const Features xs = out.standardizer.Apply(x);
    points.insert(points.end(), xs.begin(), xs.end());
  }
  out.model = KMeansFit(points, kNumFeatures, num_clusters, rng);
  return out;
}

std::pair<double, double> ConjugateUpdate(double alpha, double beta,
                                          int in_range, int total) {
  if (in_range < 0 || total < in_range) {
    throw ArgumentError("ConjugateUpdate: need 0 <= in_range <= total");
  }
  return {alpha + in_range, beta + (total - in_range)};
}

BetaTracker::BetaTracker(int num_clusters, int num_coupons,
                         std::vector<double> prior_alpha,
                         std::vector<double> prior_beta, int window)
    : num_clusters_(num_clusters),
      num_coupons_(num_coupons),
      window_(window),
      prior_alpha_(std::move(prior_alpha)),
      prior_beta_(std::move(prior_beta)) {
  const size_t cells = static_cast<size_t>(num_clusters) * num_coupons;
  if (num_clusters <= 0 || num_coupons <= 0 || window <= 0) {
    throw ArgumentError("BetaTracker: sizes and window must be positive");
  }
  if (prior_alpha_.size() != cells || prior_beta_.size() != cells) {
    throw ArgumentError("BetaTracker: prior table has wrong size");
  }
  for (size_t k = 0; k < cells; ++k) {
    if (!(prior_alpha_[k] > 0.0) || !(prior_beta_[k] > 0.0) ||
        !std::isfinite(prior_alpha_[k]) || !std::isfinite(prior_beta_[k])) {
      throw ArgumentError("BetaTracker: priors must be positive and finite");
    }
  }
  alpha_ = prior_alpha_;
  beta_ = prior_beta_;
  history_.resize(cells);
}

BetaTracker BetaTracker::Uniform(int num_clusters, int num_coupons,
                                 double alpha, double beta, int window) {
  const size_t cells = static_cast<size_t>(std::max(num_clusters, 0)) *
                       std::max(num_coupons, 0);
  return BetaTracker(num_clusters, num_coupons,
                     std::vector<double>(cells, alpha),
                     std::vector<double>(cells, beta), window);
}

int BetaTracker::Cell(int cluster, int coupon) const {
  if (cluster < 0 || cluster >= num_clusters_) {
    throw ArgumentError("BetaTracker: unknown cluster " +
                        std::to_string(cluster));
  }
  if (coupon < 0 || coupon >= num_coupons_) {
    throw ArgumentError("BetaTracker: unknown coupon " +
                        std::to_string(coupon));
  }
  return cluster * num_coupons_ + coupon;
}

double BetaTracker::alpha(int cluster, int coupon) const {
  return alpha_[Cell(cluster, coupon)];
}
double BetaTracker::beta(int cluster, int coupon) const {
  return beta_[Cell(cluster, coupon)];
}
double BetaTracker::mean(int cluster, int coupon) const {
  const int k = Cell(cluster, coupon);
  return alpha_[k] / (alpha_[k] + beta_[k]);
}
double BetaTracker::prior_alpha(int cluster, int coupon) const {
  return prior_alpha_[Cell(cluster, coupon)];
}
double BetaTracker::prior_beta(int cluster, int coupon) const {
  return prior_beta_[Cell(cluster, coupon)];
}

void BetaTracker::Update(std::span<const int> in_range,
                         std::span<const int> total) {
  const size_t cells = alpha_.size();
  if (in_range.size() != cells || total.size() != cells) {
    throw ArgumentError("BetaTracker::Update: tally table has wrong size");
  }
  for (size_t k = 0; k < cells; ++k) {
    if (in_range[k] < 0 || in_range[k] > total[k]) {
      throw ArgumentError("BetaTracker::Update: need 0 <= N_in <= N");
    }
  }
  for (size_t k = 0; k < cells; ++k) {
    if (total[k] == 0) continue;
    auto& h = history_[k];
    h.push_back({in_range[k], total[k]});
    if (static_cast<int>(h.size()) > window_) h.pop_front();
    double hits = 0.0, misses = 0.0;
    for (const Tally& t : h) {
      hits += t.in_range;
      misses += t.total - t.in_range;
    }
    alpha_[k] = prior_alpha_[k] + hits;
    beta_[k] = prior_beta_[k] + misses;
  }
}

std::pair<double, double> BetaTracker::Refine(int cluster, int coupon,
                                              double alpha_ori,
                                              double beta_ori) const {
  const int k = Cell(cluster, coupon);
  return {alpha_ori + alpha_[k], beta_ori + beta_[k]};
}

std::vector<double> BetaTracker::Summary() const {
  std::vector<double> out(2 * num_coupons_, 0.0);
  for (int c = 0; c < num_clusters_; ++c) {
    for (int d = 0; d < num_coupons_; ++d) {
      out[d] += alpha_[c * num_coupons_ + d];
      out[num_coupons_ + d] += beta_[c * num_coupons_ + d];
    }
  }
  for (double& v : out) v /= num_clusters_;
  return out;
}

void BetaTracker::WriteCsvHeader(std::ostream& out) {
  out << "slot,cluster,coupon,alpha,beta\n";
}

void BetaTracker::WriteCsv(std::ostream& out, int slot) const {
  char buf[128];
  for (int c = 0; c < num_clusters_; ++c) {
    for (int d = 0; d < num_coupons_; ++d) {
      const int k = c * num_coupons_ + d;
      std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.10g,%.10g\n", slot, c, d,
                    alpha_[k], beta_[k]);
      out << buf;
    }
  }
}

BetaTracker InitPriors(const FeatureClusterer& clusterer,
                       const BetaPredictor& predictor,
                       std::span<const Features> pretrain,
                       std::span<const double> coupons, int window) {
  const int s = clusterer.num_clusters();
  const int h = static_cast<int>(coupons.size());
  if (pretrain.empty() || h == 0) {
    throw ArgumentError("InitPriors: need pretrain features and coupons");
  }
  const size_t cells = static_cast<size_t>(s) * h;
  std::vector<double> alpha(cells, 0.0), beta(cells, 0.0);
  std::vector<double> global_alpha(h, 0.0), global_beta(h, 0.0);
  std::vector<size_t> count(s, 0);
  for (const Features& x : pretrain) {
    const int c = clusterer.Assign(x);
    ++count[c];
    for (int d = 0; d < h; ++d) {
      const auto [a, b] = predictor(x, coupons[d]);
      alpha[c * h + d] += a;
      beta[c * h + d] += b;
      global_alpha[d] += a;
      global_beta[d] += b;
    }
  }
  const double n = static_cast<double>(pretrain.size());
  for (int c = 0; c < s; ++c) {
    for (int d = 0; d < h; ++d) {
      const int k = c * h + d;
      if (count[c] == 0) {
        alpha[k] = global_alpha[d] / n;
        beta[k] = global_beta[d] / n;
      } else {
        alpha[k] /= static_cast<double>(count[c]);
        beta[k] /= static_cast<double>(count[c]);
      }
    }
    if (count[c] == 0) {
      LogInfo("InitPriors: cluster " + std::to_string(c) +
              " has no pretrain samples; using the global mean");
    }
  }
  return BetaTracker(s, h, std::move(alpha), std::move(beta), window);
}

BetaTracker InitPriors(const FeatureClusterer& clusterer,
                       const est::BetaParamModel& model,
                       std::span<const Features> pretrain,
                       std::span<const double> coupons, int window) {
  return InitPriors(
      clusterer,
      [&model](const Features& x, double d) { return model.Predict(x, d); },
      pretrain, coupons, window);
}

double SampleBeta(double alpha, double beta, Rng& rng) {
  std::gamma_distribution<double> ga(alpha, 1.0), gb(beta, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  constexpr double kTiny = 1e-12;
  if (!(x + y > 0.0)) return alpha / (alpha + beta);
  return std::clamp(x / (x + y), kTiny, 1.0 - kTiny);
}

}  // namespace ridegym::fca
