// emokit/reduce.cpp

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

#include "emokit/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

namespace emokit {

namespace {

void CheckLabels(const Mat &x, const std::vector<int> &y, int classes, std::vector<int> *counts) {
  if (static_cast<int>(y.size()) != x.rows())
    Fail(ErrorKind::kInvalidArgument, "label count does not match sample count");
  counts->assign(classes, 0);
  for (int v : y) {
    if (v < 0 || v >= classes) Fail(ErrorKind::kInvalidArgument, "label out of range");
    ++(*counts)[v];
  }
  for (int c = 0; c < classes; ++c)
    if ((*counts)[c] < 2)
      Fail(ErrorKind::kInvalidArgument,
           "class " + std::to_string(c) + " has " + std::to_string((*counts)[c]) + " samples, need 2");
}

std::vector<int> SortedDescending(const Vec &values) {
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values(a) > values(b); });
  return order;
}

}  // namespace

MinMax MinMax::Fit(const Mat &x, MinMaxMode mode) {
  if (x.rows() < 1) Fail(ErrorKind::kInvalidArgument, "minmax needs at least one sample");
  MinMax m;
  m.mode = mode;
  m.alpha = x.colwise().minCoeff().transpose();
  m.beta = x.colwise().maxCoeff().transpose();
  return m;
}

Mat MinMax::Apply(const Mat &x) const {
  if (x.cols() != alpha.size()) Fail(ErrorKind::kInvalidArgument, "minmax dimension mismatch");
  Mat out(x.rows(), x.cols());
  for (int j = 0; j < x.cols(); ++j) {
    double div = mode == MinMaxMode::kLiteral ? beta(j) : beta(j) - alpha(j);
    if (div == 0.0) out.col(j).setZero();
    else out.col(j) = (x.col(j).array() - alpha(j)) / div;
  }
  return out;
}

Vec FdrScores(const Mat &x, const std::vector<int> &y, int classes) {
  std::vector<int> counts;
  CheckLabels(x, y, classes, &counts);
  const int d = static_cast<int>(x.cols());
  Mat mean = Mat::Zero(classes, d), var = Mat::Zero(classes, d);
  for (int i = 0; i < x.rows(); ++i) mean.row(y[i]) += x.row(i);
  for (int c = 0; c < classes; ++c) mean.row(c) /= counts[c];
  for (int i = 0; i < x.rows(); ++i) var.row(y[i]) += (x.row(i) - mean.row(y[i])).array().square().matrix();
  for (int c = 0; c < classes; ++c) var.row(c) /= (counts[c] - 1);
  Vec score = Vec::Zero(d);
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < classes; ++i)
      for (int j = 0; j < classes; ++j) {
        if (i == j) continue;
        double num = (mean(i, k) - mean(j, k)) * (mean(i, k) - mean(j, k));
        double den = var(i, k) + var(j, k);
        if (den > 0.0) score(k) += num / den;
        else if (num > 0.0) score(k) = kInf;
      }
  return score;
}

Vec FdrWeighted(const Vec &a, const Vec &b, double w) {
  if (!(w >= 0.0 && w <= 1.0)) Fail(ErrorKind::kInvalidArgument, "FDR weight must lie in [0, 1]");
  if (a.size() != b.size()) Fail(ErrorKind::kInvalidArgument, "FDR score vectors differ in length");
  return w * a + (1.0 - w) * b;
}

std::vector<int> SelectTop(const Vec &scores, int k) {
  if (k < 0 || k > scores.size()) Fail(ErrorKind::kInvalidArgument, "select_top: k out of range");
  std::vector<int> order = SortedDescending(scores);
  order.resize(k);
  return order;
}

void FixSigns(Mat *columns) {
  for (int j = 0; j < columns->cols(); ++j) {
    int at = 0;
    for (int i = 1; i < columns->rows(); ++i)
      if (std::abs((*columns)(i, j)) > std::abs((*columns)(at, j))) at = i;
    if ((*columns)(at, j) < 0.0) columns->col(j) *= -1.0;
  }
}

Pca Pca::Fit(const Mat &x, int k) {
  const int n = static_cast<int>(x.rows()), d = static_cast<int>(x.cols());
  if (n < 2) Fail(ErrorKind::kInvalidArgument, "PCA needs at least two samples");
  if (k < 1 || k > std::min(n - 1, d))
    Fail(ErrorKind::kInvalidArgument, "PCA dimension " + std::to_string(k) + " exceeds min(n-1, d) = " +
                                          std::to_string(std::min(n - 1, d)));
  Pca p;
  p.mean = x.colwise().mean().transpose();
  Mat centered = x.rowwise() - p.mean.transpose();
  Mat cov = centered.transpose() * centered / (n - 1);
  Eigen::SelfAdjointEigenSolver<Mat> es(cov);
  if (es.info() != Eigen::Success) Fail(ErrorKind::kNumerical, "PCA eigendecomposition failed");
  std::vector<int> order = SortedDescending(es.eigenvalues());
  p.components.resize(d, k);
  p.eigenvalues.resize(k);
  for (int j = 0; j < k; ++j) {
    p.components.col(j) = es.eigenvectors().col(order[j]);
    p.eigenvalues(j) = es.eigenvalues()(order[j]);
  }
  FixSigns(&p.components);
  return p;
}

Mat Pca::Apply(const Mat &x) const {
  if (x.cols() != mean.size()) Fail(ErrorKind::kInvalidArgument, "PCA dimension mismatch");
  return (x.rowwise() - mean.transpose()) * components;
}

Mat Pca::Reconstruct(const Mat &z) const {
  return (z * components.transpose()).rowwise() + mean.transpose();
}

void Scatter(const Mat &x, const std::vector<int> &y, int classes, Mat *sw, Mat *sb) {
  const int n = static_cast<int>(x.rows()), d = static_cast<int>(x.cols());
  std::vector<int> counts(classes, 0);
  for (int v : y) ++counts[v];
  Mat means = Mat::Zero(classes, d);
  for (int i = 0; i < n; ++i) means.row(y[i]) += x.row(i);
  for (int c = 0; c < classes; ++c)
    if (counts[c] > 0) means.row(c) /= counts[c];
  Eigen::RowVectorXd global = x.colwise().mean();
  *sw = Mat::Zero(d, d);
  *sb = Mat::Zero(d, d);
  std::vector<Mat> class_cov(classes, Mat::Zero(d, d));
  for (int i = 0; i < n; ++i) {
    Eigen::RowVectorXd dev = x.row(i) - means.row(y[i]);
    class_cov[y[i]] += dev.transpose() * dev;
  }
  for (int c = 0; c < classes; ++c) {
    if (counts[c] == 0) continue;
    double prior = static_cast<double>(counts[c]) / n;
    *sw += prior * class_cov[c] / counts[c];
    Eigen::RowVectorXd dm = means.row(c) - global;
    *sb += prior * dm.transpose() * dm;
  }
}

double TraceRatio(const Mat &u, const Mat &sw, const Mat &sb) {
  Mat a = u.transpose() * sw * u, b = u.transpose() * sb * u;
  return a.ldlt().solve(b).trace();
}

Lda Lda::Fit(const Mat &x, const std::vector<int> &y, int classes) {
  std::vector<int> counts;
  CheckLabels(x, y, classes, &counts);
  if (classes < 2) Fail(ErrorKind::kInvalidArgument, "LDA needs at least two classes");
  Mat sw, sb;
  Scatter(x, y, classes, &sw, &sb);
  const int d = static_cast<int>(x.cols());
  Eigen::SelfAdjointEigenSolver<Mat> check(sw, Eigen::EigenvaluesOnly);
  double top = check.eigenvalues().maxCoeff(), bottom = check.eigenvalues().minCoeff();
  Eigen::LLT<Mat> llt(sw);
  if (llt.info() != Eigen::Success || !(top > 0.0) || bottom <= 1e-10 * top)
    Fail(ErrorKind::kSingularScatter,
         "within-class scatter is singular; truncate PCA to fewer dimensions before LDA");
  // Whitening: with Sw = L L', eigenvectors of L^-1 Sb L^-T map back through L^-T.
  Mat linv_sb = llt.matrixL().solve(sb);
  Mat a = llt.matrixL().solve(linv_sb.transpose()).transpose();
  a = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  if (es.info() != Eigen::Success) Fail(ErrorKind::kNumerical, "LDA eigendecomposition failed");
  const int k = std::min(classes - 1, d);
  std::vector<int> order = SortedDescending(es.eigenvalues());
  Mat v(d, k);
  Lda lda;
  lda.eigenvalues.resize(k);
  for (int j = 0; j < k; ++j) {
    v.col(j) = es.eigenvectors().col(order[j]);
    lda.eigenvalues(j) = es.eigenvalues()(order[j]);
  }
  lda.projection = llt.matrixU().solve(v);
  FixSigns(&lda.projection);
  return lda;
}

ReductionPipeline ReductionPipeline::Fit(const Mat &x, const std::vector<int> &y, int classes,
                                         const PipelineConfig &cfg) {
  ReductionPipeline p;
  p.input_dim = static_cast<int>(x.cols());
  p.minmax = MinMax::Fit(x, cfg.minmax);
  Mat z = p.minmax.Apply(x);
  if (cfg.select_k > 0) {
    p.selected = SelectTop(FdrScores(z, y, classes), cfg.select_k);
    Mat s(z.rows(), p.selected.size());
    for (std::size_t j = 0; j < p.selected.size(); ++j) s.col(j) = z.col(p.selected[j]);
    z = s;
  }
  if (cfg.pca_dim > 0) {
    p.pca = Pca::Fit(z, cfg.pca_dim);
    if (cfg.lda) {
      // Zero-variance directions would make the within-class scatter singular.
      const Vec &ev = p.pca->eigenvalues;
      int rank = 0;
      while (rank < ev.size() && ev(rank) > 1e-10 * ev(0)) ++rank;
      if (rank == 0) Fail(ErrorKind::kSingularScatter, "training features have no variance");
      if (rank < ev.size()) {
        spdlog::info("PCA truncated from {} to {} dimensions: the rest carry no variance", ev.size(), rank);
        p.pca = Pca::Fit(z, rank);
      }
    }
    z = p.pca->Apply(z);
  }
  if (cfg.lda) p.lda = Lda::Fit(z, y, classes);
  return p;
}

Mat ReductionPipeline::Apply(const Mat &x) const {
  if (x.cols() != input_dim)
    Fail(ErrorKind::kInvalidArgument, "pipeline expects " + std::to_string(input_dim) + " inputs, got " +
                                          std::to_string(x.cols()));
  Mat z = minmax.Apply(x);
  if (!selected.empty()) {
    Mat s(z.rows(), selected.size());
    for (std::size_t j = 0; j < selected.size(); ++j) s.col(j) = z.col(selected[j]);
    z = s;
  }
  if (pca) z = pca->Apply(z);
  if (lda) z = lda->Apply(z);
  return z;
}

Vec ReductionPipeline::Apply(const Vec &x) const {
  return Apply(Mat(x.transpose())).row(0).transpose();
}

int ReductionPipeline::OutputDim() const {
  if (lda) return static_cast<int>(lda->projection.cols());
  if (pca) return static_cast<int>(pca->components.cols());
  if (!selected.empty()) return static_cast<int>(selected.size());
  return input_dim;
}

void ReductionPipeline::Save(ModelWriter *w) const {
  w->Int("pipeline_input_dim", input_dim);
  w->Text("minmax_mode", minmax.mode == MinMaxMode::kLiteral ? "literal" : "range");
  w->Vector("minmax_alpha", minmax.alpha);
  w->Vector("minmax_beta", minmax.beta);
  w->Ints("selected", selected);
  w->Int("pca", pca ? 1 : 0);
  if (pca) {
    w->Vector("pca_mean", pca->mean);
    w->Matrix("pca_components", pca->components);
    w->Vector("pca_eigenvalues", pca->eigenvalues);
  }
  w->Int("lda", lda ? 1 : 0);
  if (lda) {
    w->Matrix("lda_projection", lda->projection);
    w->Vector("lda_eigenvalues", lda->eigenvalues);
  }
}

ReductionPipeline ReductionPipeline::Load(ModelReader *r) {
  ReductionPipeline p;
  p.input_dim = static_cast<int>(r->Int("pipeline_input_dim"));
  std::string mode = r->Text("minmax_mode");
  if (mode != "literal" && mode != "range") Fail(ErrorKind::kFormat, "unknown minmax mode '" + mode + "'");
  p.minmax.mode = mode == "literal" ? MinMaxMode::kLiteral : MinMaxMode::kRange;
  p.minmax.alpha = r->Vector("minmax_alpha");
  p.minmax.beta = r->Vector("minmax_beta");
  p.selected = r->Ints("selected");
  if (r->Int("pca")) {
    Pca pca;
    pca.mean = r->Vector("pca_mean");
    pca.components = r->Matrix("pca_components");
    pca.eigenvalues = r->Vector("pca_eigenvalues");
    p.pca = pca;
  }
  if (r->Int("lda")) {
    Lda lda;
    lda.projection = r->Matrix("lda_projection");
    lda.eigenvalues = r->Vector("lda_eigenvalues");
    p.lda = lda;
  }
  return p;
}

std::string ReductionPipeline::Hash() const {
  ModelWriter w;
  Save(&w);
  return Fnv1aHex(w.str());
}

}  // namespace emokit
