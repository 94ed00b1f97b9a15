// emokit/fuse.hpp

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

#ifndef EMOKIT_FUSE_HPP_
#define EMOKIT_FUSE_HPP_

#include <optional>
#include <string>
#include <vector>

#include "emokit/common.hpp"
#include "emokit/model_io.hpp"
#include "emokit/reduce.hpp"

namespace emokit {

inline constexpr int kPhysioDim = 23;
inline constexpr int kFusedDim = 10;

// sum_{m<n} |ln p_m - ln p_n| / |sum_k ln p_k| from log-densities. A zero
// denominator is replaced by 1e-12.
double ChannelWeight(const Vec &log_densities);

struct FusedDecision {
  int label = 0;
  Vec weights;  // per channel, 0 for a missing one
  Vec scores;   // ln sum_j w_j p_j(k)
};

// argmax_k sum_j w_j p_j(k), evaluated in the log domain. Missing channels
// are skipped; with one channel left this is that channel's argmax.
// standardize replaces each channel's densities by p_j(k) / sum_k p_j(k)
// first, which removes the channel's overall density scale. Off by default.
FusedDecision DecisionFuse(const std::vector<std::optional<Vec>> &channel_log_densities, bool standardize = false);

// Concatenate speech and physiological vectors, minmax, PCA to 10.
struct FeatureFusion {
  MinMax minmax;
  Pca pca;
  int speech_dim = 0;
  int physio_dim = 0;

  static FeatureFusion Fit(const Mat &speech, const Mat &physio, int dims = kFusedDim);
  Mat Apply(const Mat &speech, const Mat &physio) const;
  // Errors with kFusionUnavailable when either modality is missing.
  Vec Apply(const std::optional<Vec> &speech, const std::optional<Vec> &physio) const;

  void Save(ModelWriter *w) const;
  static FeatureFusion Load(ModelReader *r);
};

// "#physio v1" header, then id and 23 tab-separated values per line.
struct PhysioTable {
  std::vector<std::string> ids;
  Mat values;

  int IndexOf(const std::string &id) const;  // -1 when absent
};

PhysioTable ParsePhysio(const std::string &text);
PhysioTable ReadPhysio(const std::string &path);

}  // namespace emokit

#endif  // EMOKIT_FUSE_HPP_
