// emokit/speakers.cpp

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

#include "emokit/speakers.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include <spdlog/spdlog.h>

#include "emokit/kernels.hpp"

namespace emokit {

namespace {

constexpr double kStdEps = 1e-12;

// Sample mean and 1/(N-1) standard deviation of selected rows.
void Moments(const Mat &x, const std::vector<int> &rows, bool literal_mean, Vec *mean, Vec *sd) {
  const int n = static_cast<int>(rows.size());
  Vec sum = Vec::Zero(x.cols());
  for (int r : rows) sum += x.row(r).transpose();
  *mean = sum / (literal_mean ? n - 1 : n);
  Vec ss = Vec::Zero(x.cols());
  for (int r : rows) ss += (x.row(r).transpose() - *mean).array().square().matrix();
  *sd = (ss / (n - 1)).cwiseSqrt();
}

}  // namespace

ReductionPipeline FitSpeakerSpace(const Mat &x, const std::vector<std::string> &speakers, int pca_dim) {
  if (static_cast<int>(speakers.size()) != x.rows())
    Fail(ErrorKind::kInvalidArgument, "speaker label count does not match the sample count");
  std::map<std::string, int> index;
  for (const std::string &s : speakers) index.emplace(s, 0);
  if (index.size() < 2) Fail(ErrorKind::kInvalidArgument, "the speaker space needs at least two speakers");
  int next = 0;
  for (auto &[name, id] : index) id = next++;
  std::vector<int> y;
  for (const std::string &s : speakers) y.push_back(index[s]);
  const int c = static_cast<int>(index.size());
  PipelineConfig cfg;
  cfg.pca_dim = std::min({pca_dim, static_cast<int>(x.cols()), static_cast<int>(x.rows()) - c});
  if (cfg.pca_dim < 1) Fail(ErrorKind::kInvalidArgument, "too few samples per speaker for the speaker space");
  return ReductionPipeline::Fit(x, y, c, cfg);
}

Mat FuzzyMemberships(const Mat &centers, const Mat &xs, double alpha) {
  const int k = static_cast<int>(centers.rows()), n = static_cast<int>(xs.rows());
  Mat d2 = SquaredDistances(xs, centers, Exec::kParallel);  // n x k
  Mat w = Mat::Zero(k, n);
  const double e = 1.0 / (alpha - 1.0);
  for (int j = 0; j < n; ++j) {
    int hit = -1;
    for (int i = 0; i < k && hit < 0; ++i)
      if (d2(j, i) == 0.0) hit = i;
    if (hit >= 0) {
      w(hit, j) = 1.0;
      continue;
    }
    for (int i = 0; i < k; ++i) {
      double s = 0.0;
      for (int m = 0; m < k; ++m) s += std::pow(d2(j, i) / d2(j, m), e);
      w(i, j) = 1.0 / s;
    }
  }
  return w;
}

double FuzzyObjective(const Mat &centers, const Mat &w, const Mat &xs, double alpha) {
  Mat d2 = SquaredDistances(xs, centers, Exec::kParallel);
  double j = 0.0;
  for (int t = 0; t < xs.rows(); ++t)
    for (int i = 0; i < centers.rows(); ++i) j += std::pow(w(i, t), alpha) * d2(t, i);
  return j;
}

Mat FuzzyClustering::Memberships(const Mat &xs) const { return FuzzyMemberships(centers, xs, alpha); }

FuzzyClustering FuzzyKMeans(const Mat &xs, const FuzzyConfig &cfg, std::uint64_t seed) {
  const int n = static_cast<int>(xs.rows()), k = cfg.clusters;
  if (k < 1 || n < k)
    Fail(ErrorKind::kInvalidArgument, std::to_string(n) + " samples cannot form " + std::to_string(k) + " clusters");
  if (!(cfg.alpha > 1.0)) Fail(ErrorKind::kInvalidArgument, "fuzzy exponent must exceed 1");
  FuzzyClustering fc;
  fc.alpha = cfg.alpha;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Mat w(k, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < k; ++i) w(i, j) = u(rng);
  for (int j = 0; j < n; ++j) w.col(j) /= w.col(j).sum();

  for (int it = 0; it < cfg.max_iter; ++it) {
    Mat wa = w.array().pow(cfg.alpha).matrix();
    Vec mass = wa.rowwise().sum();
    fc.centers = (wa * xs).array().colwise() / mass.array();
    Mat next = FuzzyMemberships(fc.centers, xs, cfg.alpha);
    double change = (next - w).cwiseAbs().maxCoeff();
    w = next;
    fc.objective.push_back(FuzzyObjective(fc.centers, w, xs, cfg.alpha));
    ++fc.iterations;
    if (change < cfg.tol) break;
  }
  fc.memberships = w;
  return fc;
}

Mat SpeakerNormalizer::Apply(const Mat &x) const {
  return Apply(x, FuzzyMemberships(centers, space.Apply(x), alpha));
}

Mat SpeakerNormalizer::Apply(const Mat &x, const Mat &w) const {
  const int n = static_cast<int>(x.rows()), d = static_cast<int>(x.cols());
  if (d != global_mean.size()) Fail(ErrorKind::kInvalidArgument, "speaker normalizer dimension mismatch");
  Mat out(n, d + 1);
  int fallback = 0;
  for (int t = 0; t < n; ++t) {
    Eigen::Index c;
    double top = w.col(t).maxCoeff(&c);
    const bool own = usable[c] != 0;
    fallback += !own;
    for (int k = 0; k < d; ++k) {
      double mu = own ? cluster_mean(c, k) : global_mean(k);
      double sd = own ? cluster_std(c, k) : global_std(k);
      out(t, k) = sd <= kStdEps ? 0.0 : (x(t, k) - mu) / sd;
    }
    out(t, d) = top;
  }
  if (fallback) spdlog::info("speaker normalization: {} sample(s) used global statistics", fallback);
  return out;
}

void SpeakerNormalizer::Save(ModelWriter *w) const {
  space.Save(w);
  w->Real("fuzzy_alpha", alpha);
  w->Matrix("fuzzy_centers", centers);
  w->Matrix("cluster_mean", cluster_mean);
  w->Matrix("cluster_std", cluster_std);
  w->Ints("cluster_usable", usable);
  w->Vector("global_mean", global_mean);
  w->Vector("global_std", global_std);
}

SpeakerNormalizer SpeakerNormalizer::Load(ModelReader *r) {
  SpeakerNormalizer s;
  s.space = ReductionPipeline::Load(r);
  s.alpha = r->Real("fuzzy_alpha");
  s.centers = r->Matrix("fuzzy_centers");
  s.cluster_mean = r->Matrix("cluster_mean");
  s.cluster_std = r->Matrix("cluster_std");
  s.usable = r->Ints("cluster_usable");
  s.global_mean = r->Vector("global_mean");
  s.global_std = r->Vector("global_std");
  if (static_cast<int>(s.usable.size()) != s.centers.rows() || s.cluster_mean.rows() != s.centers.rows())
    Fail(ErrorKind::kFormat, "speaker normalizer records disagree on the cluster count");
  return s;
}

NormalizeResult FitSpeakerNormalizer(const Mat &x, const std::vector<std::string> &speakers,
                                     const NormalizeConfig &cfg, std::uint64_t seed) {
  NormalizeResult res;
  SpeakerNormalizer &s = res.normalizer;
  s.space = FitSpeakerSpace(x, speakers, cfg.pca_dim);
  Mat xs = s.space.Apply(x);
  res.clustering = FuzzyKMeans(xs, cfg.fuzzy, seed);
  s.centers = res.clustering.centers;
  s.alpha = cfg.fuzzy.alpha;
  const int k = res.clustering.k(), n = static_cast<int>(x.rows()), d = static_cast<int>(x.cols());

  std::vector<int> all(n);
  for (int t = 0; t < n; ++t) all[t] = t;
  Moments(x, all, false, &s.global_mean, &s.global_std);

  std::vector<std::vector<int>> members(k);
  for (int t = 0; t < n; ++t) {
    Eigen::Index c;
    res.clustering.memberships.col(t).maxCoeff(&c);
    members[c].push_back(t);
  }
  s.cluster_mean = Mat::Zero(k, d);
  s.cluster_std = Mat::Zero(k, d);
  s.usable.assign(k, 0);
  for (int c = 0; c < k; ++c) {
    if (members[c].size() < 2) {
      if (!members[c].empty())
        spdlog::info("pseudo-speaker {} has a single member; it falls back to global statistics", c);
      continue;
    }
    Vec mean, sd;
    Moments(x, members[c], cfg.literal_mean, &mean, &sd);
    s.cluster_mean.row(c) = mean.transpose();
    s.cluster_std.row(c) = sd.transpose();
    s.usable[c] = 1;
  }
  res.features = s.Apply(x, res.clustering.memberships);
  return res;
}

}  // namespace emokit
