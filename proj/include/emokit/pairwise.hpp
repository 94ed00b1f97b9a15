// emokit/pairwise.hpp

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

#ifndef EMOKIT_PAIRWISE_HPP_
#define EMOKIT_PAIRWISE_HPP_

#include <string>
#include <utility>
#include <vector>

#include "emokit/common.hpp"
#include "emokit/gmm.hpp"
#include "emokit/model_io.hpp"
#include "emokit/reduce.hpp"

namespace emokit {

// All (i, j) with i < j in lexicographic order.
std::vector<std::pair<int, int>> LexPairs(int n);
// C(n,2) x n; row k has +1 at the pair's first class and -1 at the second.
Mat CodewordMatrix(int n);

// 2 |ln p_i - ln p_j| / |ln p_i + ln p_j| from log-densities. A zero
// denominator is replaced by 1e-12.
double PairConfidence(double log_pi, double log_pj);

struct PairOutput {
  double confidence = 0.0;
  int sign = 1;  // +1 when the pair's first class has the higher density
  double log_first = 0.0;
  double log_second = 0.0;
};

struct Decoded {
  int label = 0;
  Vec correlation;  // R = C^T I
  bool tie = false;
};

Decoded Decode(const std::vector<PairOutput> &outputs, const Mat &codewords);

// Hard pair outputs as the losing class of each pair (the argmin of the two
// densities). Set-subtraction keeps every class that never loses.
std::vector<int> PairLosers(const std::vector<PairOutput> &outputs, int n);
std::vector<int> SetSubtraction(const std::vector<int> &losers, int n);

struct PairConfig {
  GmmTrainConfig gmm;
  int pca_dim = 10;
  MinMaxMode minmax = MinMaxMode::kLiteral;
  PairConfig() { gmm.mixtures = 24; }
};

struct PairClassifier {
  int first = 0;
  int second = 1;
  ReductionPipeline pipeline;  // ends in a 1-D LDA
  GmmModel model_first;
  GmmModel model_second;

  PairOutput Evaluate(const Vec &x) const;
};

struct PairwiseClassifier {
  std::vector<std::string> labels;
  std::vector<PairClassifier> pairs;
  Mat codewords;
  int input_dim = 0;

  int classes() const { return static_cast<int>(labels.size()); }
  std::vector<PairOutput> Outputs(const Vec &x) const;
  Decoded Classify(const Vec &x) const;

  void Save(ModelWriter *w) const;
  static PairwiseClassifier Load(ModelReader *r);
};

// Each pair's pipeline and GMMs are fitted on that pair's samples only.
PairwiseClassifier TrainPairs(const Mat &x, const std::vector<int> &y, const std::vector<std::string> &labels,
                              const PairConfig &cfg, std::uint64_t seed);

}  // namespace emokit

#endif  // EMOKIT_PAIRWISE_HPP_
