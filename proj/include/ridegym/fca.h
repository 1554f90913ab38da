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

// In-range-rate tracking. Orders are grouped into feature clusters, and each
// (cluster, coupon) cell carries a Beta(alpha, beta) belief about the
// in-range rate. The belief is a fixed prior plus the in-range tallies of the
// last `window` slots in which the cell saw orders.

#ifndef RIDEGYM_FCA_H_
#define RIDEGYM_FCA_H_

#include <deque>
#include <functional>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "ridegym/common.h"
#include "ridegym/estimators.h"
#include "ridegym/simulator.h"

namespace ridegym::fca {

inline constexpr int kDefaultClusters = 16;
inline constexpr int kDefaultWindow = 24;

// Nearest-centroid partition of R^dim.
class ClusterModel {
 public:
  ClusterModel() = default;
  ClusterModel(int dim, std::vector<double> centroids);

  int num_clusters() const;
  int dim() const { return dim_; }
  const std::vector<double>& centroids() const { return centroids_; }

  // Ties go to the lower cluster id.
  int Assign(std::span<const double> point) const;
  // Row-major N x dim points.
  std::vector<int> AssignBatch(std::span<const double> points) const;

 private:
  int dim_ = 0;
  std::vector<double> centroids_;
};

struct KMeansOptions {
  int max_iterations = 100;
  double tolerance = 1e-6;  // max centroid shift
};

// k-means++ seeding from `rng`, then Lloyd iterations. Throws ConfigError
// when there are fewer than `num_clusters` distinct points.
ClusterModel KMeansFit(std::span<const double> points, int dim,
                       int num_clusters, Rng& rng,
                       const KMeansOptions& options = {});

// Clusters order features after z-scoring them.
struct FeatureClusterer {
  est::Standardizer standardizer;
  ClusterModel model;

  int num_clusters() const { return model.num_clusters(); }
  int Assign(const Features& x) const;
  std::vector<int> AssignAll(std::span<const Opportunity> orders) const;
};

FeatureClusterer FitFeatureClusterer(std::span<const Features> features,
                                     int num_clusters, Rng& rng);

// Closed-form Beta-Bernoulli posterior after one tally.
std::pair<double, double> ConjugateUpdate(double alpha, double beta,
                                          int in_range, int total);

class BetaTracker {
 public:
  BetaTracker() = default;
  // Priors are row-major num_clusters x num_coupons.
  BetaTracker(int num_clusters, int num_coupons,
              std::vector<double> prior_alpha, std::vector<double> prior_beta,
              int window);
  static BetaTracker Uniform(int num_clusters, int num_coupons, double alpha,
                             double beta, int window);

  int num_clusters() const { return num_clusters_; }
  int num_coupons() const { return num_coupons_; }
  int window() const { return window_; }

  double alpha(int cluster, int coupon) const;
  double beta(int cluster, int coupon) const;
  double mean(int cluster, int coupon) const;
  double prior_alpha(int cluster, int coupon) const;
  double prior_beta(int cluster, int coupon) const;

  // Row-major num_clusters x num_coupons tallies for one slot. Cells with
  // total 0 are left as they are; the others push the tally into their
  // window and recompute alpha = prior + window sum.
  void Update(std::span<const int> in_range, std::span<const int> total);

  // (alpha_ori + alpha[c][d], beta_ori + beta[c][d]).
  std::pair<double, double> Refine(int cluster, int coupon, double alpha_ori,
                                   double beta_ori) const;

  // Mean alpha per coupon across clusters, then mean beta per coupon.
  std::vector<double> Summary() const;

  static void WriteCsvHeader(std::ostream& out);
  void WriteCsv(std::ostream& out, int slot) const;

 private:
  struct Tally {
    int in_range = 0;
    int total = 0;
  };
  int Cell(int cluster, int coupon) const;

  int num_clusters_ = 0;
  int num_coupons_ = 0;
  int window_ = 1;
  std::vector<double> prior_alpha_, prior_beta_;
  std::vector<double> alpha_, beta_;
  std::vector<std::deque<Tally>> history_;
};

using BetaPredictor =
    std::function<std::pair<double, double>(const Features&, double)>;

// Each cell's prior is the mean predicted (alpha, beta) over the pretrain
// features in that cluster at that coupon. Empty clusters take the mean over
// all features.
BetaTracker InitPriors(const FeatureClusterer& clusterer,
                       const BetaPredictor& predictor,
                       std::span<const Features> pretrain,
                       std::span<const double> coupons, int window);
BetaTracker InitPriors(const FeatureClusterer& clusterer,
                       const est::BetaParamModel& model,
                       std::span<const Features> pretrain,
                       std::span<const double> coupons, int window);

// Beta(alpha, beta) draw via two gamma variates.
double SampleBeta(double alpha, double beta, Rng& rng);

}  // namespace ridegym::fca

#endif  // RIDEGYM_FCA_H_
