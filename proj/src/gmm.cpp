// emokit/gmm.cpp

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

#include "emokit/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <spdlog/spdlog.h>

namespace emokit {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

std::string ModeName(CovarianceMode m) { return m == CovarianceMode::kDiagonal ? "diagonal" : "full"; }

Mat FloorEigenvalues(const Mat &cov, double floor) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (cov + cov.transpose()));
  Vec ev = es.eigenvalues().cwiseMax(floor);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

// Row log-likelihoods and responsibilities from weighted component densities.
double Responsibilities(const Mat &logp, Mat *gamma, Vec *row_ll) {
  const int n = static_cast<int>(logp.rows()), m = static_cast<int>(logp.cols());
  gamma->resize(n, m);
  row_ll->resize(n);
  double total = 0.0;
  for (int t = 0; t < n; ++t) {
    Eigen::RowVectorXd r = logp.row(t);
    double ll = LogSumExp(r.data(), m);
    (*row_ll)(t) = ll;
    total += ll;
    for (int i = 0; i < m; ++i) (*gamma)(t, i) = std::exp(r(i) - ll);
  }
  return total;
}

double TotalLogLikelihood(const GmmModel &model, const Mat &x, Exec exec) {
  Mat gamma;
  Vec row_ll;
  return Responsibilities(WeightedLogDensities(model, x, exec), &gamma, &row_ll);
}

GmmModel MStep(const GmmModel &prev, const Mat &x, const Mat &gamma, double floor) {
  const int n = static_cast<int>(x.rows()), d = static_cast<int>(x.cols()), m = prev.M();
  GmmModel next = prev;
  Vec mass = gamma.colwise().sum().transpose();
  for (int i = 0; i < m; ++i) {
    next.weights(i) = mass(i) / n;
    if (!(mass(i) > 0.0)) continue;
    Eigen::RowVectorXd mu = (gamma.col(i).transpose() * x) / mass(i);
    next.means.row(i) = mu;
    if (prev.mode == CovarianceMode::kDiagonal) {
      Eigen::RowVectorXd var = Eigen::RowVectorXd::Zero(d);
      for (int t = 0; t < n; ++t) var += gamma(t, i) * (x.row(t) - mu).array().square().matrix();
      next.variances.row(i) = (var / mass(i)).cwiseMax(floor);
    } else {
      Mat cov = Mat::Zero(d, d);
      for (int t = 0; t < n; ++t) {
        Eigen::RowVectorXd dev = x.row(t) - mu;
        cov += gamma(t, i) * dev.transpose() * dev;
      }
      next.covariances[i] = FloorEigenvalues(cov / mass(i), floor);
    }
  }
  next.weights /= next.weights.sum();
  next.Prepare();
  return next;
}

}  // namespace

void GmmModel::Prepare() {
  const int m = M(), d = D();
  log_norm.resize(m);
  if (mode == CovarianceMode::kDiagonal) {
    if (variances.rows() != m || variances.cols() != d)
      Fail(ErrorKind::kInvalidArgument, "variance matrix shape mismatch");
    inv_std = variances.array().rsqrt().matrix();
    for (int i = 0; i < m; ++i)
      log_norm(i) = std::log(weights(i)) - 0.5 * d * kLog2Pi - 0.5 * variances.row(i).array().log().sum();
  } else {
    if (static_cast<int>(covariances.size()) != m)
      Fail(ErrorKind::kInvalidArgument, "covariance count mismatch");
    inv_chol.resize(m);
    for (int i = 0; i < m; ++i) {
      Eigen::LLT<Mat> llt(covariances[i]);
      if (llt.info() != Eigen::Success)
        Fail(ErrorKind::kNumerical, "covariance of component " + std::to_string(i) + " is not positive definite");
      Mat l = llt.matrixL();
      inv_chol[i] = l.triangularView<Eigen::Lower>().solve(Mat::Identity(d, d));
      log_norm(i) = std::log(weights(i)) - 0.5 * d * kLog2Pi - l.diagonal().array().log().sum();
    }
  }
}

void GmmModel::ComponentLogDensities(const double *x, double *out) const {
  const int m = M(), d = D();
  Eigen::Map<const Vec> xv(x, d);
  for (int i = 0; i < m; ++i) {
    double q = 0.0;
    if (mode == CovarianceMode::kDiagonal) {
      for (int k = 0; k < d; ++k) {
        double z = (x[k] - means(i, k)) * inv_std(i, k);
        q += z * z;
      }
    } else {
      q = (inv_chol[i] * (xv - means.row(i).transpose())).squaredNorm();
    }
    out[i] = log_norm(i) - 0.5 * q;
  }
}

double GmmModel::LogDensity(const Vec &x) const {
  if (x.size() != D())
    Fail(ErrorKind::kInvalidArgument, "expected a " + std::to_string(D()) + "-vector, got " +
                                          std::to_string(x.size()));
  Vec c(M());
  ComponentLogDensities(x.data(), c.data());
  return LogSumExp(c);
}

void GmmModel::Save(ModelWriter *w) const {
  w->Text("gmm_label", label);
  w->Text("gmm_provenance", provenance.empty() ? "-" : provenance);
  w->Text("gmm_covariance", ModeName(mode));
  w->Int("gmm_components", M());
  w->Int("gmm_dim", D());
  w->Vector("gmm_weights", weights);
  w->Matrix("gmm_means", means);
  if (mode == CovarianceMode::kDiagonal) {
    w->Matrix("gmm_variances", variances);
  } else {
    for (const Mat &c : covariances) w->Matrix("gmm_covariance_matrix", c);
  }
}

GmmModel GmmModel::Load(ModelReader *r) {
  GmmModel g;
  g.label = r->Text("gmm_label");
  g.provenance = r->Text("gmm_provenance");
  if (g.provenance == "-") g.provenance.clear();
  std::string mode = r->Text("gmm_covariance");
  if (mode != "diagonal" && mode != "full") Fail(ErrorKind::kFormat, "unknown covariance mode '" + mode + "'");
  g.mode = mode == "diagonal" ? CovarianceMode::kDiagonal : CovarianceMode::kFull;
  const long m = r->Int("gmm_components"), d = r->Int("gmm_dim");
  g.weights = r->Vector("gmm_weights");
  g.means = r->Matrix("gmm_means");
  if (g.weights.size() != m || g.means.rows() != m || g.means.cols() != d)
    Fail(ErrorKind::kFormat, "GMM record sizes disagree");
  if (g.mode == CovarianceMode::kDiagonal) {
    g.variances = r->Matrix("gmm_variances");
  } else {
    for (long i = 0; i < m; ++i) g.covariances.push_back(r->Matrix("gmm_covariance_matrix"));
  }
  g.Prepare();
  return g;
}

GmmModel KMeansInit(const Mat &x, int m, std::uint64_t seed, const GmmTrainConfig &cfg) {
  const int n = static_cast<int>(x.rows()), d = static_cast<int>(x.cols());
  if (m < 1 || n < m)
    Fail(ErrorKind::kInvalidArgument, std::to_string(n) + " samples cannot seed " + std::to_string(m) +
                                          " components");
  std::mt19937_64 rng(seed);
  Mat centers(m, d);
  centers.row(0) = x.row(std::uniform_int_distribution<int>(0, n - 1)(rng));
  Vec nearest = SquaredDistances(x, centers.topRows(1), cfg.exec).col(0);
  for (int c = 1; c < m; ++c) {
    const double total = nearest.sum();
    int pick = n - 1;
    if (total > 0.0) {
      double u = std::uniform_real_distribution<double>(0.0, total)(rng), acc = 0.0;
      for (int t = 0; t < n; ++t) {
        acc += nearest(t);
        if (nearest(t) > 0.0 && u < acc) {
          pick = t;
          break;
        }
      }
      while (!(nearest(pick) > 0.0)) --pick;
    } else {
      pick = std::uniform_int_distribution<int>(0, n - 1)(rng);
    }
    centers.row(c) = x.row(pick);
    nearest = nearest.cwiseMin(SquaredDistances(x, centers.row(c), cfg.exec).col(0));
  }

  std::vector<int> assign(n, 0);
  std::vector<int> counts(m, 0);
  double prev = kInf;
  for (int it = 0; it < cfg.kmeans_max_iter; ++it) {
    Mat dist = SquaredDistances(x, centers, cfg.exec);
    double inertia = 0.0;
    std::fill(counts.begin(), counts.end(), 0);
    for (int t = 0; t < n; ++t) {
      Eigen::Index j;
      inertia += dist.row(t).minCoeff(&j);
      assign[t] = static_cast<int>(j);
      ++counts[j];
    }
    Mat next = Mat::Zero(m, d);
    for (int t = 0; t < n; ++t) next.row(assign[t]) += x.row(t);
    for (int c = 0; c < m; ++c) {
      if (counts[c] > 0) {
        next.row(c) /= counts[c];
        continue;
      }
      // Empty cluster: move it to the worst-served sample.
      int far = 0;
      for (int t = 1; t < n; ++t)
        if (dist(t, assign[t]) > dist(far, assign[far])) far = t;
      next.row(c) = x.row(far);
      dist(far, assign[far]) = 0.0;
    }
    centers = next;
    if (inertia == 0.0 || std::abs(prev - inertia) <= cfg.kmeans_tol * prev) break;
    prev = inertia;
  }

  Mat dist = SquaredDistances(x, centers, cfg.exec);
  std::fill(counts.begin(), counts.end(), 0);
  for (int t = 0; t < n; ++t) {
    Eigen::Index j;
    dist.row(t).minCoeff(&j);
    assign[t] = static_cast<int>(j);
    ++counts[j];
  }
  GmmModel g;
  g.mode = cfg.mode;
  g.weights.resize(m);
  g.means = centers;
  g.variances = Mat::Zero(m, d);
  for (int t = 0; t < n; ++t) g.variances.row(assign[t]) += (x.row(t) - centers.row(assign[t])).array().square().matrix();
  for (int c = 0; c < m; ++c) {
    g.weights(c) = static_cast<double>(counts[c]) / n;
    if (counts[c] > 0) g.variances.row(c) /= counts[c];
  }
  g.variances = g.variances.cwiseMax(cfg.covariance_floor);
  if (cfg.mode == CovarianceMode::kFull) {
    for (int c = 0; c < m; ++c) g.covariances.push_back(Mat(g.variances.row(c).asDiagonal()));
    g.variances.resize(0, 0);
  }
  g.Prepare();
  return g;
}

EmResult EmFit(GmmModel model, const Mat &x, const GmmTrainConfig &cfg) {
  const int n = static_cast<int>(x.rows());
  if (x.cols() != model.D()) Fail(ErrorKind::kInvalidArgument, "EM: data and model dimensions differ");
  model.Prepare();
  EmResult res;
  Vec global_var = ((x.rowwise() - x.colwise().mean()).array().square().colwise().sum() / n)
                       .matrix()
                       .transpose()
                       .cwiseMax(cfg.covariance_floor);
  Mat gamma;
  Vec row_ll;
  for (int it = 0;; ++it) {
    double ll = Responsibilities(WeightedLogDensities(model, x, cfg.exec), &gamma, &row_ll);
    if (std::isnan(ll) || !std::isfinite(ll))
      Fail(ErrorKind::kNumerical, "EM log-likelihood is not finite at iteration " + std::to_string(it));
    res.trace.push_back(ll);
    const std::size_t k = res.trace.size();
    if (k >= 2 && std::abs(res.trace[k - 1] - res.trace[k - 2]) <= cfg.tol * std::abs(res.trace[k - 2])) break;
    if (it == cfg.max_iter) break;

    GmmModel next = MStep(model, x, gamma, cfg.covariance_floor);
    Vec mass = gamma.colwise().sum().transpose();
    std::vector<int> dead;
    for (int i = 0; i < model.M(); ++i)
      if (mass(i) < cfg.respawn_mass * n) dead.push_back(i);
    if (!dead.empty()) {
      GmmModel cand = next;
      Eigen::Index worst;
      row_ll.minCoeff(&worst);
      for (int i : dead) {
        cand.means.row(i) = x.row(worst);
        cand.weights(i) = 1.0 / n;  // one sample's share
        if (cand.mode == CovarianceMode::kDiagonal) cand.variances.row(i) = global_var.transpose();
        else cand.covariances[i] = Mat(global_var.asDiagonal());
      }
      cand.weights /= cand.weights.sum();
      cand.Prepare();
      // Keep the respawn only if the trace stays non-decreasing.
      if (TotalLogLikelihood(cand, x, cfg.exec) >= ll) {
        next = cand;
        res.respawns += static_cast<int>(dead.size());
        spdlog::info("EM iteration {}: respawned {} component(s) at sample {}", it, dead.size(), worst);
      } else {
        spdlog::info("EM iteration {}: respawn of {} component(s) rejected, likelihood would drop", it,
                     dead.size());
      }
    }
    model = std::move(next);
    ++res.iterations;
  }
  res.model = std::move(model);
  return res;
}

GmmModel TrainGmm(const Mat &x, const GmmTrainConfig &cfg, std::uint64_t seed) {
  return EmFit(KMeansInit(x, cfg.mixtures, seed, cfg), x, cfg).model;
}

int ArgMax(const Vec &v, bool *tie) {
  int best = 0;
  bool t = false;
  for (int i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) {
      best = i;
      t = false;
    } else if (v(i) == v(best)) {
      t = true;
    }
  }
  if (tie) *tie = t;
  return best;
}

Vec EmotionClassifier::LogDensities(const Vec &x) const {
  Vec out(models.size());
  for (std::size_t k = 0; k < models.size(); ++k) out(static_cast<int>(k)) = models[k].LogDensity(x);
  return out;
}

Classification EmotionClassifier::Classify(const Vec &x, const std::string &hash) const {
  if (hash != pipeline_hash)
    Fail(ErrorKind::kProvenance, "features come from pipeline " + hash + " but the classifier expects " +
                                     pipeline_hash);
  Classification c;
  c.log_densities = LogDensities(x);
  bool tie = false;
  c.label = ArgMax(c.log_densities, &tie);
  if (tie) spdlog::info("classify: tie between emotions, chose '{}'", labels[c.label]);
  return c;
}

}  // namespace emokit
