// emokit/reduce.hpp

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

#ifndef EMOKIT_REDUCE_HPP_
#define EMOKIT_REDUCE_HPP_

#include <optional>
#include <string>
#include <vector>

#include "emokit/common.hpp"
#include "emokit/model_io.hpp"

namespace emokit {

// kLiteral divides by the training maximum, kRange by (max - min). A zero
// divisor maps the dimension to 0.
enum class MinMaxMode { kLiteral, kRange };

struct MinMax {
  Vec alpha;  // per-dimension training minimum
  Vec beta;   // per-dimension training maximum
  MinMaxMode mode = MinMaxMode::kLiteral;

  static MinMax Fit(const Mat &x, MinMaxMode mode = MinMaxMode::kLiteral);
  Mat Apply(const Mat &x) const;
};

// Per dimension, sum over ordered class pairs of (mu_i - mu_j)^2 /
// (var_i + var_j) with unbiased class variances. A zero pooled variance
// between distinct means scores +inf.
Vec FdrScores(const Mat &x, const std::vector<int> &y, int classes);
Vec FdrWeighted(const Vec &a, const Vec &b, double w);
// Indices of the k largest scores, ties to the lower index, in rank order.
std::vector<int> SelectTop(const Vec &scores, int k);

struct Pca {
  Vec mean;
  Mat components;  // d x k, unit columns, descending eigenvalue
  Vec eigenvalues;

  static Pca Fit(const Mat &x, int k);
  Mat Apply(const Mat &x) const;
  Mat Reconstruct(const Mat &z) const;
};

// Within-class scatter with 1/N_i class covariances weighted by empirical
// priors, and between-class scatter about the global mean.
void Scatter(const Mat &x, const std::vector<int> &y, int classes, Mat *sw, Mat *sb);
// tr((U' Sw U)^-1 U' Sb U).
double TraceRatio(const Mat &u, const Mat &sw, const Mat &sb);

struct Lda {
  Mat projection;  // d x min(c-1, d)
  Vec eigenvalues;

  static Lda Fit(const Mat &x, const std::vector<int> &y, int classes);
  Mat Apply(const Mat &x) const { return x * projection; }
};

// Flips each column so its largest-magnitude entry is positive.
void FixSigns(Mat *columns);

struct PipelineConfig {
  MinMaxMode minmax = MinMaxMode::kLiteral;
  int select_k = 0;  // 0 keeps every dimension
  int pca_dim = 20;  // 0 skips PCA
  bool lda = true;
};

// minmax -> select -> PCA -> LDA, fitted on training data only.
struct ReductionPipeline {
  MinMax minmax;
  std::vector<int> selected;
  std::optional<Pca> pca;
  std::optional<Lda> lda;
  int input_dim = 0;

  static ReductionPipeline Fit(const Mat &x, const std::vector<int> &y, int classes,
                               const PipelineConfig &cfg);
  Mat Apply(const Mat &x) const;
  Vec Apply(const Vec &x) const;
  int OutputDim() const;

  void Save(ModelWriter *w) const;
  static ReductionPipeline Load(ModelReader *r);
  // FNV-1a of the serialized parameters.
  std::string Hash() const;
};

}  // namespace emokit

#endif  // EMOKIT_REDUCE_HPP_
