// emokit/gmm.hpp

// Copyright 2026  The emokit Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EMOKIT_GMM_HPP_
#define EMOKIT_GMM_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "emokit/common.hpp"
#include "emokit/kernels.hpp"
#include "emokit/model_io.hpp"

namespace emokit {

enum class CovarianceMode { kDiagonal, kFull };

struct GmmModel {
  Vec weights;                    // M
  Mat means;                      // M x D
  CovarianceMode mode = CovarianceMode::kDiagonal;
  Mat variances;                  // M x D, diagonal mode
  std::vector<Mat> covariances;   // M of D x D, full mode
  std::string label;
  std::string provenance;         // pipeline hash of the training features

  // Derived by Prepare(): per-component log(weight) + Gaussian normaliser,
  // inverse standard deviations (diagonal) or inverse Cholesky factors (full).
  Vec log_norm;
  Mat inv_std;
  std::vector<Mat> inv_chol;

  int M() const { return static_cast<int>(weights.size()); }
  int D() const { return static_cast<int>(means.cols()); }
  void Prepare();
  // log(a_i) + log b_i(x) for each component.
  void ComponentLogDensities(const double *x, double *out) const;
  double LogDensity(const Vec &x) const;

  void Save(ModelWriter *w) const;
  static GmmModel Load(ModelReader *r);
};

struct GmmTrainConfig {
  int mixtures = 32;
  CovarianceMode mode = CovarianceMode::kDiagonal;
  double covariance_floor = 1e-6;
  int max_iter = 50;
  double tol = 1e-6;
  int kmeans_max_iter = 100;
  double kmeans_tol = 1e-6;
  double respawn_mass = 1e-8;
  Exec exec = Exec::kParallel;
};

// k-means++ seeding followed by Lloyd iterations.
GmmModel KMeansInit(const Mat &x, int m, std::uint64_t seed, const GmmTrainConfig &cfg);

struct EmResult {
  GmmModel model;
  std::vector<double> trace;  // total log-likelihood before each update and after the last
  int iterations = 0;
  int respawns = 0;
};

EmResult EmFit(GmmModel model, const Mat &x, const GmmTrainConfig &cfg);
GmmModel TrainGmm(const Mat &x, const GmmTrainConfig &cfg, std::uint64_t seed);

struct Classification {
  int label = 0;
  Vec log_densities;
};

struct EmotionClassifier {
  std::vector<std::string> labels;
  std::vector<GmmModel> models;
  std::string pipeline_hash;

  // Argmax of per-emotion log-densities, ties to the first label. The
  // features must come from the pipeline the models were trained on.
  Classification Classify(const Vec &x, const std::string &hash) const;
  Vec LogDensities(const Vec &x) const;
};

// Index of the largest entry, ties to the lowest index.
int ArgMax(const Vec &v, bool *tie = nullptr);

}  // namespace emokit

#endif  // EMOKIT_GMM_HPP_
