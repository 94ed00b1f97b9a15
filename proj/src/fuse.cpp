// emokit/fuse.cpp

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

#include "emokit/fuse.hpp"

#include <cmath>

#include <spdlog/spdlog.h>

#include "emokit/corpus.hpp"
#include "emokit/gmm.hpp"

namespace emokit {

double ChannelWeight(const Vec &lp) {
  double num = 0.0;
  for (int m = 0; m < lp.size(); ++m)
    for (int n = m + 1; n < lp.size(); ++n) num += std::abs(lp(m) - lp(n));
  double den = std::abs(lp.sum());
  if (den == 0.0) {
    spdlog::info("channel weight: log-densities sum to zero, denominator guarded");
    den = 1e-12;
  }
  return num / den;
}

FusedDecision DecisionFuse(const std::vector<std::optional<Vec>> &raw, bool standardize) {
  std::vector<std::optional<Vec>> channels = raw;
  if (standardize)
    for (auto &c : channels)
      if (c) *c = (c->array() - LogSumExp(*c)).matrix();
  int classes = -1, present = 0;
  for (const auto &c : channels) {
    if (!c) continue;
    ++present;
    if (classes >= 0 && c->size() != classes)
      Fail(ErrorKind::kInvalidArgument, "fusion channels disagree on the emotion count");
    classes = static_cast<int>(c->size());
  }
  if (present == 0) Fail(ErrorKind::kNoInput, "decision fusion needs at least one channel");

  FusedDecision d;
  d.weights = Vec::Zero(static_cast<int>(channels.size()));
  if (present == 1) {
    for (std::size_t j = 0; j < channels.size(); ++j)
      if (channels[j]) {
        d.weights(static_cast<int>(j)) = 1.0;
        d.scores = *channels[j];
      }
    d.label = ArgMax(d.scores);
    return d;
  }
  for (std::size_t j = 0; j < channels.size(); ++j)
    if (channels[j]) d.weights(static_cast<int>(j)) = ChannelWeight(*channels[j]);
  d.scores = Vec::Constant(classes, -kInf);
  std::vector<double> terms;
  for (int k = 0; k < classes; ++k) {
    terms.clear();
    for (std::size_t j = 0; j < channels.size(); ++j)
      if (channels[j] && d.weights(static_cast<int>(j)) > 0.0)
        terms.push_back(std::log(d.weights(static_cast<int>(j))) + (*channels[j])(k));
    if (!terms.empty()) d.scores(k) = LogSumExp(terms.data(), static_cast<int>(terms.size()));
  }
  bool tie = false;
  d.label = ArgMax(d.scores, &tie);
  if (tie) spdlog::info("decision fusion: tie, chose emotion {}", d.label);
  return d;
}

namespace {

Mat Join(const Mat &a, const Mat &b) {
  if (a.rows() != b.rows()) Fail(ErrorKind::kInvalidArgument, "speech and physiological rows differ");
  Mat j(a.rows(), a.cols() + b.cols());
  j << a, b;
  return j;
}

}  // namespace

FeatureFusion FeatureFusion::Fit(const Mat &speech, const Mat &physio, int dims) {
  FeatureFusion f;
  f.speech_dim = static_cast<int>(speech.cols());
  f.physio_dim = static_cast<int>(physio.cols());
  Mat j = Join(speech, physio);
  f.minmax = MinMax::Fit(j);
  f.pca = Pca::Fit(f.minmax.Apply(j), dims);
  return f;
}

Mat FeatureFusion::Apply(const Mat &speech, const Mat &physio) const {
  if (speech.cols() != speech_dim || physio.cols() != physio_dim)
    Fail(ErrorKind::kInvalidArgument, "feature fusion expects " + std::to_string(speech_dim) + " + " +
                                          std::to_string(physio_dim) + " columns");
  return pca.Apply(minmax.Apply(Join(speech, physio)));
}

Vec FeatureFusion::Apply(const std::optional<Vec> &speech, const std::optional<Vec> &physio) const {
  if (!speech || !physio)
    Fail(ErrorKind::kFusionUnavailable, std::string("feature fusion needs both modalities; missing ") +
                                            (!speech ? "speech" : "physiological") + " features");
  return Apply(Mat(speech->transpose()), Mat(physio->transpose())).row(0).transpose();
}

void FeatureFusion::Save(ModelWriter *w) const {
  w->Int("fusion_speech_dim", speech_dim);
  w->Int("fusion_physio_dim", physio_dim);
  w->Int("fusion_minmax_range", minmax.mode == MinMaxMode::kRange ? 1 : 0);
  w->Vector("fusion_minmax_alpha", minmax.alpha);
  w->Vector("fusion_minmax_beta", minmax.beta);
  w->Vector("fusion_pca_mean", pca.mean);
  w->Matrix("fusion_pca_components", pca.components);
  w->Vector("fusion_pca_eigenvalues", pca.eigenvalues);
}

FeatureFusion FeatureFusion::Load(ModelReader *r) {
  FeatureFusion f;
  f.speech_dim = static_cast<int>(r->Int("fusion_speech_dim"));
  f.physio_dim = static_cast<int>(r->Int("fusion_physio_dim"));
  f.minmax.mode = r->Int("fusion_minmax_range") ? MinMaxMode::kRange : MinMaxMode::kLiteral;
  f.minmax.alpha = r->Vector("fusion_minmax_alpha");
  f.minmax.beta = r->Vector("fusion_minmax_beta");
  f.pca.mean = r->Vector("fusion_pca_mean");
  f.pca.components = r->Matrix("fusion_pca_components");
  f.pca.eigenvalues = r->Vector("fusion_pca_eigenvalues");
  return f;
}

int PhysioTable::IndexOf(const std::string &id) const {
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (ids[i] == id) return static_cast<int>(i);
  return -1;
}

PhysioTable ParsePhysio(const std::string &text) {
  std::vector<std::string> lines = SplitLines(text);
  if (lines.empty() || lines[0] != "#physio v1") Fail(ErrorKind::kFormat, "physiological file must start with '#physio v1'");
  PhysioTable t;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string> f = SplitTabs(lines[i]);
    if (static_cast<int>(f.size()) != kPhysioDim + 1)
      Fail(ErrorKind::kFormat, "physiological line " + std::to_string(i + 1) + ": expected id and " +
                                   std::to_string(kPhysioDim) + " values");
    t.ids.push_back(f[0]);
    std::vector<double> r;
    for (int k = 1; k <= kPhysioDim; ++k) r.push_back(ParseDouble(f[k]));
    rows.push_back(r);
  }
  t.values.resize(static_cast<int>(rows.size()), kPhysioDim);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int k = 0; k < kPhysioDim; ++k) t.values(static_cast<int>(i), k) = rows[i][k];
  return t;
}

PhysioTable ReadPhysio(const std::string &path) { return ParsePhysio(ReadTextFile(path)); }

}  // namespace emokit
