// emokit/speakers.hpp

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

#ifndef EMOKIT_SPEAKERS_HPP_
#define EMOKIT_SPEAKERS_HPP_

#include <string>
#include <vector>

#include "emokit/common.hpp"
#include "emokit/model_io.hpp"
#include "emokit/reduce.hpp"

namespace emokit {

// minmax -> PCA -> LDA with speakers as the classes.
ReductionPipeline FitSpeakerSpace(const Mat &x, const std::vector<std::string> &speakers, int pca_dim);

struct FuzzyConfig {
  int clusters = 14;
  double alpha = 2.0;
  int max_iter = 300;
  double tol = 1e-6;  // largest membership change
};

struct FuzzyClustering {
  double alpha = 2.0;
  Mat centers;                     // k x ds
  Mat memberships;                 // k x n, columns sum to 1
  std::vector<double> objective;   // J after each membership update
  int iterations = 0;

  int k() const { return static_cast<int>(centers.rows()); }
  // Memberships of new samples against the frozen centers.
  Mat Memberships(const Mat &xs) const;
};

// Column i of the result is the membership vector of row i of xs. A sample
// on top of a center belongs to the first such center only.
Mat FuzzyMemberships(const Mat &centers, const Mat &xs, double alpha);
double FuzzyObjective(const Mat &centers, const Mat &memberships, const Mat &xs, double alpha);
FuzzyClustering FuzzyKMeans(const Mat &xs, const FuzzyConfig &cfg, std::uint64_t seed);

struct NormalizeConfig {
  FuzzyConfig fuzzy;
  int pca_dim = 20;
  bool literal_mean = false;  // 1/(N-1) prefactor on the cluster mean sum
};

// Per hard cluster z-scores of the original features, plus the sample's top
// membership as one extra column.
struct SpeakerNormalizer {
  ReductionPipeline space;
  Mat centers;
  double alpha = 2.0;
  Mat cluster_mean;            // k x d
  Mat cluster_std;             // k x d
  std::vector<int> usable;     // 1 when the cluster had >= 2 training members
  Vec global_mean;
  Vec global_std;

  Mat Apply(const Mat &x) const;
  // Training-time output uses the fitted memberships rather than recomputing them.
  Mat Apply(const Mat &x, const Mat &memberships) const;

  void Save(ModelWriter *w) const;
  static SpeakerNormalizer Load(ModelReader *r);
};

struct NormalizeResult {
  SpeakerNormalizer normalizer;
  FuzzyClustering clustering;
  Mat features;  // n x (d + 1)
};

NormalizeResult FitSpeakerNormalizer(const Mat &x, const std::vector<std::string> &speakers,
                                     const NormalizeConfig &cfg, std::uint64_t seed);

}  // namespace emokit

#endif  // EMOKIT_SPEAKERS_HPP_
