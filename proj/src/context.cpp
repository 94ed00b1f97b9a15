// emokit/context.cpp

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

#include "emokit/context.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace emokit {

EmotionCoords EmotionCoords::Default() {
  EmotionCoords t;
  t.labels = {"neutral", "fidgety", "confident", "tired", "joy", "angry", "sad", "surprise", "fear"};
  t.coords = {{0.0, 0.0},  {0.8, -0.8}, {0.6, 0.6},   {-0.6, -0.5}, {0.9, 0.8},
              {0.9, -0.9}, {-0.7, -0.7}, {0.8, 0.2}, {0.7, -0.7}};
  return t;
}

EmotionCoords EmotionCoords::Parse(const std::string &text) {
  EmotionCoords t;
  int line_no = 0;
  for (const std::string &raw : SplitLines(text)) {
    ++line_no;
    std::string line = raw.substr(0, raw.find('#'));
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> f = SplitTabs(line);
    for (std::string &x : f) {
      x.erase(0, x.find_first_not_of(" \r"));
      x.erase(x.find_last_not_of(" \r") + 1);
    }
    if (f.size() != 3) Fail(ErrorKind::kFormat, "coordinate line " + std::to_string(line_no) + ": expected 3 fields");
    if (std::find(t.labels.begin(), t.labels.end(), f[0]) != t.labels.end())
      Fail(ErrorKind::kFormat, "coordinate label '" + f[0] + "' repeated");
    t.labels.push_back(f[0]);
    t.coords.push_back({ParseDouble(f[1]), ParseDouble(f[2])});
  }
  for (std::size_t i = 0; i < t.coords.size(); ++i)
    for (std::size_t j = i + 1; j < t.coords.size(); ++j)
      if (t.coords[i].arousal == t.coords[j].arousal && t.coords[i].valence == t.coords[j].valence)
        Fail(ErrorKind::kFormat, "labels '" + t.labels[i] + "' and '" + t.labels[j] + "' share coordinates");
  return t;
}

int EmotionCoords::Index(const std::string &label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) Fail(ErrorKind::kInvalidArgument, "no coordinates for label '" + label + "'");
  return static_cast<int>(it - labels.begin());
}

std::vector<Coord> EmotionCoords::Select(const std::vector<std::string> &wanted) const {
  std::vector<Coord> out;
  for (const std::string &l : wanted) out.push_back(coords[Index(l)]);
  return out;
}

double LabelDistance(const Coord &a, const Coord &b, Metric metric) {
  double da = a.arousal - b.arousal, dv = a.valence - b.valence;
  return metric == Metric::kL1 ? std::abs(da) + std::abs(dv) : std::hypot(da, dv);
}

double LabelDistance(const EmotionCoords &table, const std::string &a, const std::string &b, Metric metric) {
  return LabelDistance(table.coords[table.Index(a)], table.coords[table.Index(b)], metric);
}

double UnaryEnergy(double p, double scale) {
  if (!(p >= 0.0)) Fail(ErrorKind::kInvalidArgument, "unary energy needs a non-negative density");
  if (p == 0.0) return kInf;
  return -(std::log(std::atan(p / scale)) - std::log(kPi / 2.0));
}

double UnaryFromLog(double log_p, double scale) {
  if (std::isnan(log_p)) Fail(ErrorKind::kNumerical, "unary energy of a NaN log-density");
  // atan(x) = x (1 + O(x^2)) below this point.
  if (log_p < -30.0) return std::log(kPi / 2.0) + std::log(scale) - log_p;
  if (log_p > 700.0) return 0.0;
  return UnaryEnergy(std::exp(log_p), scale);
}

namespace {

double Sq(double x) { return x * x; }

}  // namespace

double CliqueEnergy(int s1, int s2, int l, const ChainProblem &p) {
  double d12 = Sq(LabelDistance(p.coords[s1], p.coords[s2], p.metric));
  double d1l = Sq(LabelDistance(p.coords[s1], p.coords[l], p.metric));
  double d2l = Sq(LabelDistance(p.coords[s2], p.coords[l], p.metric));
  if (p.mode == CliqueMode::kUniform) return 0.5 * p.sigma0 * (d12 + d1l + d2l);
  return 0.5 * (p.sigma0 * d12 + d1l + d2l);
}

namespace {

void Validate(const ChainProblem &p) {
  if (p.T() < 2) Fail(ErrorKind::kInvalidArgument, "a chain needs at least two short nodes");
  if (p.L() < 1 || static_cast<int>(p.coords.size()) != p.L())
    Fail(ErrorKind::kInvalidArgument, "coordinate count does not match the label count");
  if (p.long_unary.rows() != p.T() - 1 || p.long_unary.cols() != p.L())
    Fail(ErrorKind::kInvalidArgument, "long-node unary table must be (T-1) x L");
  if (!(p.sigma0 >= 0.0)) Fail(ErrorKind::kInvalidArgument, "spring stiffness must be non-negative");
}

}  // namespace

double TotalEnergy(const ChainAssignment &a, const ChainProblem &p) {
  Validate(p);
  if (static_cast<int>(a.shorts.size()) != p.T() || static_cast<int>(a.longs.size()) != p.T() - 1)
    Fail(ErrorKind::kInvalidArgument, "assignment does not cover every node");
  double v = 0.0;
  for (int t = 0; t < p.T(); ++t) v += p.short_unary(t, a.shorts[t]);
  for (int k = 0; k + 1 < p.T(); ++k)
    v += p.long_unary(k, a.longs[k]) + CliqueEnergy(a.shorts[k], a.shorts[k + 1], a.longs[k], p);
  return v;
}

ChainSolution Minimize(const ChainProblem &p) {
  Validate(p);
  if (p.L() > kMaxChainLabels || p.T() > kMaxChainLength)
    Fail(ErrorKind::kCapacity, "chain of " + std::to_string(p.T()) + " nodes over " + std::to_string(p.L()) +
                                   " labels exceeds the solver limits (" + std::to_string(kMaxChainLength) +
                                   ", " + std::to_string(kMaxChainLabels) + ")");
  const int T = p.T(), L = p.L();
  // Each triangle's long label is minimized out given its two shorts.
  auto best_long = [&](int k, int a, int b, int *arg) {
    double best = kInf;
    for (int l = 0; l < L; ++l) {
      double e = p.long_unary(k, l) + CliqueEnergy(a, b, l, p);
      if (e < best) {
        best = e;
        *arg = l;
      }
    }
    return best;
  };

  Vec cost = p.short_unary.row(0).transpose();
  std::vector<int> back(static_cast<std::size_t>(T) * L, 0);
  Mat pair(L, L);
  for (int k = 0; k + 1 < T; ++k) {
    int dummy = 0;
    for (int a = 0; a < L; ++a)
      for (int b = 0; b < L; ++b) pair(a, b) = best_long(k, a, b, &dummy);
    Vec next(L);
    for (int b = 0; b < L; ++b) {
      double best = kInf;
      int arg = 0;
      for (int a = 0; a < L; ++a) {
        double e = cost(a) + pair(a, b);
        if (e < best) {
          best = e;
          arg = a;
        }
      }
      next(b) = best + p.short_unary(k + 1, b);
      back[static_cast<std::size_t>(k + 1) * L + b] = arg;
    }
    cost = next;
  }

  ChainSolution sol;
  sol.assignment.shorts.assign(T, 0);
  sol.assignment.longs.assign(T - 1, 0);
  int last = 0;
  cost.minCoeff(&last);
  sol.assignment.shorts[T - 1] = last;
  for (int t = T - 1; t > 0; --t)
    sol.assignment.shorts[t - 1] = back[static_cast<std::size_t>(t) * L + sol.assignment.shorts[t]];
  for (int k = 0; k + 1 < T; ++k)
    best_long(k, sol.assignment.shorts[k], sol.assignment.shorts[k + 1], &sol.assignment.longs[k]);
  sol.energy = TotalEnergy(sol.assignment, p);
  return sol;
}

std::vector<std::vector<int>> BuildChains(const std::vector<ClipMeta> &clips) {
  std::map<std::string, std::vector<int>> sessions;
  std::vector<std::vector<int>> chains;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (clips[i].session && clips[i].order) sessions[*clips[i].session].push_back(static_cast<int>(i));
    else chains.push_back({static_cast<int>(i)});
  }
  for (auto &[name, idx] : sessions) {
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return *clips[a].order < *clips[b].order; });
    std::vector<int> cur{idx[0]};
    for (std::size_t k = 1; k < idx.size(); ++k) {
      if (*clips[idx[k]].order == *clips[cur.back()].order + 1) {
        cur.push_back(idx[k]);
      } else {
        chains.push_back(cur);
        cur = {idx[k]};
      }
    }
    chains.push_back(cur);
  }
  std::sort(chains.begin(), chains.end(), [](const auto &a, const auto &b) { return a[0] < b[0]; });
  return chains;
}

}  // namespace emokit
