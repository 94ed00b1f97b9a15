// emokit/pairwise.cpp

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

#include "emokit/pairwise.hpp"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

namespace emokit {

std::vector<std::pair<int, int>> LexPairs(int n) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out.emplace_back(i, j);
  return out;
}

Mat CodewordMatrix(int n) {
  auto pairs = LexPairs(n);
  Mat c = Mat::Zero(static_cast<int>(pairs.size()), n);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    c(static_cast<int>(k), pairs[k].first) = 1.0;
    c(static_cast<int>(k), pairs[k].second) = -1.0;
  }
  return c;
}

double PairConfidence(double log_pi, double log_pj) {
  double den = std::abs(log_pi + log_pj);
  if (den == 0.0) {
    spdlog::info("pair confidence: ln p_i + ln p_j = 0, denominator guarded");
    den = 1e-12;
  }
  return 2.0 * std::abs(log_pi - log_pj) / den;
}

Decoded Decode(const std::vector<PairOutput> &outputs, const Mat &codewords) {
  if (static_cast<int>(outputs.size()) != codewords.rows())
    Fail(ErrorKind::kInvalidArgument, std::to_string(outputs.size()) + " pair outputs for " +
                                          std::to_string(codewords.rows()) + " codeword rows");
  Vec c(codewords.rows());
  for (std::size_t k = 0; k < outputs.size(); ++k)
    c(static_cast<int>(k)) = outputs[k].confidence * outputs[k].sign;
  Decoded d;
  d.correlation = codewords.transpose() * c;
  d.label = ArgMax(d.correlation, &d.tie);
  return d;
}

std::vector<int> PairLosers(const std::vector<PairOutput> &outputs, int n) {
  auto pairs = LexPairs(n);
  if (outputs.size() != pairs.size()) Fail(ErrorKind::kInvalidArgument, "pair output count mismatch");
  std::vector<int> losers;
  for (std::size_t k = 0; k < pairs.size(); ++k)
    losers.push_back(outputs[k].sign > 0 ? pairs[k].second : pairs[k].first);
  return losers;
}

std::vector<int> SetSubtraction(const std::vector<int> &losers, int n) {
  std::vector<int> out;
  for (int c = 0; c < n; ++c)
    if (std::find(losers.begin(), losers.end(), c) == losers.end()) out.push_back(c);
  return out;
}

PairOutput PairClassifier::Evaluate(const Vec &x) const {
  Vec z = pipeline.Apply(x);
  PairOutput o;
  o.log_first = model_first.LogDensity(z);
  o.log_second = model_second.LogDensity(z);
  o.sign = o.log_first >= o.log_second ? 1 : -1;
  o.confidence = PairConfidence(o.log_first, o.log_second);
  return o;
}

std::vector<PairOutput> PairwiseClassifier::Outputs(const Vec &x) const {
  if (x.size() != input_dim)
    Fail(ErrorKind::kInvalidArgument, "pairwise classifier expects " + std::to_string(input_dim) + " features");
  std::vector<PairOutput> out;
  for (const PairClassifier &p : pairs) out.push_back(p.Evaluate(x));
  return out;
}

Decoded PairwiseClassifier::Classify(const Vec &x) const {
  Decoded d = Decode(Outputs(x), codewords);
  if (d.tie) spdlog::info("pairwise decode: tie, chose '{}'", labels[d.label]);
  return d;
}

void PairwiseClassifier::Save(ModelWriter *w) const {
  w->Strings("pairwise_labels", labels);
  w->Int("pairwise_input_dim", input_dim);
  w->Matrix("pairwise_codewords", codewords);
  for (const PairClassifier &p : pairs) {
    w->Ints("pair", {p.first, p.second});
    p.pipeline.Save(w);
    p.model_first.Save(w);
    p.model_second.Save(w);
  }
}

PairwiseClassifier PairwiseClassifier::Load(ModelReader *r) {
  PairwiseClassifier c;
  c.labels = r->Strings("pairwise_labels");
  c.input_dim = static_cast<int>(r->Int("pairwise_input_dim"));
  c.codewords = r->Matrix("pairwise_codewords");
  if (c.codewords != CodewordMatrix(c.classes()))
    Fail(ErrorKind::kFormat, "pairwise codewords are not in lexicographic pair order");
  for (const auto &[i, j] : LexPairs(c.classes())) {
    std::vector<int> ij = r->Ints("pair");
    if (ij != std::vector<int>{i, j}) Fail(ErrorKind::kFormat, "pair records out of order");
    PairClassifier p;
    p.first = i;
    p.second = j;
    p.pipeline = ReductionPipeline::Load(r);
    p.model_first = GmmModel::Load(r);
    p.model_second = GmmModel::Load(r);
    c.pairs.push_back(std::move(p));
  }
  return c;
}

PairwiseClassifier TrainPairs(const Mat &x, const std::vector<int> &y, const std::vector<std::string> &labels,
                              const PairConfig &cfg, std::uint64_t seed) {
  const int n = static_cast<int>(labels.size());
  if (n < 2) Fail(ErrorKind::kInvalidArgument, "pairwise training needs at least two classes");
  if (static_cast<int>(y.size()) != x.rows()) Fail(ErrorKind::kInvalidArgument, "label count mismatch");
  PairwiseClassifier out;
  out.labels = labels;
  out.codewords = CodewordMatrix(n);
  out.input_dim = static_cast<int>(x.cols());
  const int need = std::max(2, cfg.gmm.mixtures);
  auto pairs = LexPairs(n);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [a, b] = pairs[k];
    const std::string name = "(" + labels[a] + ", " + labels[b] + ")";
    std::vector<int> rows, py;
    for (int t = 0; t < x.rows(); ++t)
      if (y[t] == a || y[t] == b) {
        rows.push_back(t);
        py.push_back(y[t] == a ? 0 : 1);
      }
    const long na = std::count(py.begin(), py.end(), 0), nb = static_cast<long>(py.size()) - na;
    if (na < need || nb < need)
      Fail(ErrorKind::kInvalidArgument, "pair " + name + " has " + std::to_string(na) + " and " +
                                            std::to_string(nb) + " samples; each class needs " +
                                            std::to_string(need));
    Mat px(static_cast<int>(rows.size()), x.cols());
    for (std::size_t t = 0; t < rows.size(); ++t) px.row(static_cast<int>(t)) = x.row(rows[t]);

    PairClassifier pc;
    pc.first = a;
    pc.second = b;
    PipelineConfig pcfg;
    pcfg.minmax = cfg.minmax;
    pcfg.pca_dim = std::min({cfg.pca_dim, static_cast<int>(x.cols()), static_cast<int>(rows.size()) - 2});
    pcfg.lda = true;
    try {
      pc.pipeline = ReductionPipeline::Fit(px, py, 2, pcfg);
    } catch (const Error &e) {
      Fail(e.kind(), "pair " + name + ": " + e.what());
    }
    Mat z = pc.pipeline.Apply(px);
    Mat za(na, z.cols()), zb(nb, z.cols());
    for (int t = 0, ia = 0, ib = 0; t < z.rows(); ++t) {
      if (py[t] == 0) za.row(ia++) = z.row(t);
      else zb.row(ib++) = z.row(t);
    }
    const std::uint64_t base = seed + 2 * k;
    pc.model_first = TrainGmm(za, cfg.gmm, base);
    pc.model_second = TrainGmm(zb, cfg.gmm, base + 1);
    pc.model_first.label = labels[a];
    pc.model_second.label = labels[b];
    pc.model_first.provenance = pc.model_second.provenance = pc.pipeline.Hash();
    out.pairs.push_back(std::move(pc));
  }
  return out;
}

}  // namespace emokit
