// emokit/corpus.hpp

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

#ifndef EMOKIT_CORPUS_HPP_
#define EMOKIT_CORPUS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "emokit/common.hpp"

namespace emokit {

struct ClipMeta {
  std::string id;
  std::optional<std::string> emotion;
  std::optional<std::string> speaker;
  std::optional<std::string> session;
  std::optional<long> order;
};

struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 0;
  ClipMeta meta;
};

// Parses a RIFF/WAVE byte buffer holding 16-bit mono PCM.
AudioClip ParseWav(const std::vector<std::uint8_t> &bytes);
AudioClip LoadWav(const std::string &path);

// Writes 16-bit mono PCM. Samples are rounded to the nearest code and
// saturated at full scale; saturation is logged.
std::vector<std::uint8_t> EncodeWav(const AudioClip &clip);
void SaveWav(const std::string &path, const AudioClip &clip);

double SignalPower(const std::vector<double> &x);

// Adds seeded white Gaussian noise (std::mt19937_64 driving
// std::normal_distribution<double>) rescaled so the realised noise power
// gives exactly the requested full-clip SNR. +inf returns the input.
AudioClip InjectNoise(const AudioClip &clip, double snr_db, std::uint64_t seed);

// ratings[i][j] is rater i's K-vector for sample j.
struct RatingMatrix {
  std::vector<std::vector<std::vector<int>>> entries;
  std::vector<int> scale{1, 3, 5, 7, 9};
  std::vector<std::string> rater_ids;
  std::vector<std::string> sample_ids;

  int raters() const { return static_cast<int>(entries.size()); }
  int samples() const { return entries.empty() ? 0 : static_cast<int>(entries[0].size()); }
  int components() const;
};

struct RaterFusion {
  Mat consistency;           // M x M, symmetric, unit diagonal
  Vec mean_consistency;      // per rater, averaged over the other raters
  Vec weights;               // sums to 1
  Mat fused;                 // N x K
  std::vector<int> labels;   // argmax component per sample, ties to lowest
};

// Per-sample similarity of two rating vectors: product of min/max ratios.
double RatingSimilarity(const std::vector<int> &p, const std::vector<int> &q);

RaterFusion RaterWeights(const RatingMatrix &ratings);

std::vector<std::vector<std::string>> SplitFolds(
    const std::vector<std::string> &ids, int k, std::uint64_t seed);

// Manifest: tab-separated id, relative_path, emotion, speaker, session,
// order. Empty or "-" fields are absent. Lines starting with '#' are skipped.
struct ManifestEntry {
  ClipMeta meta;
  std::string path;  // resolved against the manifest directory
};
std::vector<ManifestEntry> ReadManifest(const std::string &path);
std::vector<ManifestEntry> ParseManifest(const std::string &text,
                                         const std::string &base_dir);

// Rating file: tab-separated sample_id, rater_id, K intensities.
RatingMatrix ParseRatings(const std::string &text);
RatingMatrix ReadRatings(const std::string &path);

std::string ReadTextFile(const std::string &path);
void WriteTextFile(const std::string &path, const std::string &text);
std::vector<std::string> SplitTabs(const std::string &line);
std::vector<std::string> SplitLines(const std::string &text);

}  // namespace emokit

#endif  // EMOKIT_CORPUS_HPP_
