// emokit/context.hpp

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

#ifndef EMOKIT_CONTEXT_HPP_
#define EMOKIT_CONTEXT_HPP_

#include <string>
#include <vector>

#include "emokit/common.hpp"
#include "emokit/corpus.hpp"

namespace emokit {

enum class Metric { kL1, kL2 };
// kPerEdge: short-short spring sigma0, short-long springs 1.
// kUniform: every edge sigma0.
enum class CliqueMode { kPerEdge, kUniform };

struct Coord {
  double arousal = 0.0;
  double valence = 0.0;
};

struct EmotionCoords {
  std::vector<std::string> labels;
  std::vector<Coord> coords;

  static EmotionCoords Default();
  // Lines of "label<TAB>arousal<TAB>valence"; '#' starts a comment.
  static EmotionCoords Parse(const std::string &text);
  int Index(const std::string &label) const;  // unknown label -> argument error
  // Coordinates for `labels` in that order.
  std::vector<Coord> Select(const std::vector<std::string> &labels) const;
};

double LabelDistance(const Coord &a, const Coord &b, Metric metric);
double LabelDistance(const EmotionCoords &table, const std::string &a, const std::string &b, Metric metric);

// -(ln atan(p / scale) - ln(pi / 2)); +inf at p = 0.
double UnaryEnergy(double p, double scale = 10.0);
// Same from ln p, finite for every finite ln p.
double UnaryFromLog(double log_p, double scale = 10.0);

struct ChainProblem {
  Mat short_unary;  // T x L
  Mat long_unary;   // (T-1) x L, node k spans shorts k and k+1
  std::vector<Coord> coords;  // L
  double sigma0 = 0.5;
  Metric metric = Metric::kL2;
  CliqueMode mode = CliqueMode::kPerEdge;

  int T() const { return static_cast<int>(short_unary.rows()); }
  int L() const { return static_cast<int>(short_unary.cols()); }
};

double CliqueEnergy(int s1, int s2, int l, const ChainProblem &problem);

struct ChainAssignment {
  std::vector<int> shorts;
  std::vector<int> longs;
};

double TotalEnergy(const ChainAssignment &a, const ChainProblem &problem);

struct ChainSolution {
  ChainAssignment assignment;
  double energy = 0.0;
};

inline constexpr int kMaxChainLabels = 32;
inline constexpr int kMaxChainLength = 100000;

// Exact minimum by dynamic programming over the triangle chain, O(T L^3).
// Ties resolve to the lowest label indices.
ChainSolution Minimize(const ChainProblem &problem);

// Clip indices grouped into chains: same session, consecutive `order`.
// Clips without a session or order form chains of one.
std::vector<std::vector<int>> BuildChains(const std::vector<ClipMeta> &clips);

}  // namespace emokit

#endif  // EMOKIT_CONTEXT_HPP_
