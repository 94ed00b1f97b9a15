// emokit/features.hpp

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

#ifndef EMOKIT_FEATURES_HPP_
#define EMOKIT_FEATURES_HPP_

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "emokit/common.hpp"
#include "emokit/corpus.hpp"
#include "emokit/dsp.hpp"

namespace emokit {

inline constexpr int kFeatureCount = 481;
inline constexpr const char *kRegistryVersion = "emokit-481.1";

struct FeatureInfo {
  int row;            // 1-based, matches the published table numbering
  std::string name;   // e.g. "pitch_mean", "f2_d1_range", "mfcc7_d2_variance"
  std::string group;  // e.g. "pitch", "pitch_d1", "hnr_400_2000"
};

const std::vector<FeatureInfo> &Registry();
// 0-based column of a registry name; throws on unknown names.
int RegistryIndex(const std::string &name);

// Percent jitter: order 1 is mean |first difference| over the mean, order 2
// uses |2x_i - x_(i+1) - x_(i-1)|.
double Jitter(const std::vector<double> &track, int order);

struct Stats6 {
  double mean = 0, max = 0, min = 0, median = 0, range = 0, variance = 0;
};
// Population variance; even-length median is the midpoint average. Empty
// input gives nullopt so callers choose the imputation.
std::optional<Stats6> ComputeStats6(const std::vector<double> &v);

std::vector<double> Diff(const std::vector<double> &v);

struct BandRatios {
  double r_0_250 = 0, r_0_650 = 0, r_above_4k = 0;
};
BandRatios BandEnergyRatios(const AudioClip &clip);

// Rows 62-71: voiced frames, unvoiced frames, unvoiced/voiced frames,
// voiced/total frames, voiced regions, unvoiced regions, voiced/unvoiced
// regions, voiced/total regions, longest voiced run, longest unvoiced run.
std::array<double, 10> VoicingStats(const std::vector<bool> &voiced);

// Voiced-region count per second of audio.
double SpeechRate(const std::vector<bool> &voiced, std::size_t clip_len, int sample_rate);

struct FeatureVector {
  Vec values;
  std::string registry_version = kRegistryVersion;
  std::vector<std::string> imputed;  // groups filled with zeros
};

FeatureVector Assemble(const TrackSet &tracks, const AudioClip &clip);
FeatureVector ExtractFeatures(const AudioClip &clip, const DspConfig &cfg);

struct FeatureMask {
  std::vector<bool> included;
  static FeatureMask All();
  // Drops pitch rows 19-36, 56-57 and the HNR rows 72-95.
  static FeatureMask Whisper();
  std::vector<int> ExcludedRows() const;  // 1-based
};
void ApplyMask(const FeatureMask &mask, Vec *values);

// Feature matrix file: "#registry <version>", optional "#masked r1,r2,..."
// (1-based rows), then one "id<TAB>v1<TAB>...<TAB>vd" row per clip.
struct FeatureTable {
  std::string registry_version = kRegistryVersion;
  std::vector<int> masked_rows;
  std::vector<std::string> ids;
  Mat values;  // n x d
  int IndexOf(const std::string &id) const;
};
std::string FormatFeatureTable(const FeatureTable &t);
FeatureTable ParseFeatureTable(const std::string &text);
FeatureTable ReadFeatureTable(const std::string &path);
void WriteFeatureTable(const std::string &path, const FeatureTable &t);

}  // namespace emokit

#endif  // EMOKIT_FEATURES_HPP_
