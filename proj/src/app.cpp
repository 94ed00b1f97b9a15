// emokit/app.cpp

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

#include "emokit/app.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <map>
#include <set>

#include <spdlog/spdlog.h>

namespace emokit {

namespace {

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string Join(const std::vector<std::string> &v, const char *sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

std::string ListIds(const std::vector<std::string> &ids) {
  const std::size_t shown = std::min<std::size_t>(ids.size(), 20);
  std::string out = Join(std::vector<std::string>(ids.begin(), ids.begin() + shown), ", ");
  if (ids.size() > shown) out += " and " + std::to_string(ids.size() - shown) + " more";
  return out;
}

Mat Rows(const Mat &x, const std::vector<int> &rows) {
  Mat out(static_cast<int>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<int>(i)) = x.row(rows[i]);
  return out;
}

const char *CovName(CovarianceMode m) { return m == CovarianceMode::kFull ? "full" : "diagonal"; }

// One GMM per emotion over already reduced features. Mixture counts are
// capped at the class size.
EmotionClassifier TrainClassifier(const Mat &z, const std::vector<int> &y, const std::vector<std::string> &labels,
                                  const std::string &hash, int mixtures, const TrainConfig &cfg,
                                  std::uint64_t seed) {
  EmotionClassifier c;
  c.labels = labels;
  c.pipeline_hash = hash;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    std::vector<int> rows;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == static_cast<int>(k)) rows.push_back(static_cast<int>(i));
    if (rows.empty()) Fail(ErrorKind::kInvalidArgument, "no training samples for emotion '" + labels[k] + "'");
    GmmTrainConfig g;
    g.mixtures = std::min<int>(mixtures, static_cast<int>(rows.size()));
    if (g.mixtures < mixtures)
      spdlog::info("emotion '{}': {} samples, mixtures capped at {}", labels[k], rows.size(), g.mixtures);
    g.mode = cfg.covariance;
    g.max_iter = cfg.em_iterations;
    g.exec = cfg.exec;
    GmmModel m = TrainGmm(Rows(z, rows), g, seed + k);
    m.label = labels[k];
    m.provenance = hash;
    c.models.push_back(std::move(m));
  }
  return c;
}

// n x L log-densities through a pipeline and its classifier.
Mat ClassifierLogDensities(const ReductionPipeline &pipeline, const EmotionClassifier &c, const Mat &x, Exec exec) {
  if (c.pipeline_hash != pipeline.Hash())
    Fail(ErrorKind::kProvenance, "models were trained on a different reduction pipeline");
  Mat z = pipeline.Apply(x);
  Mat out(z.rows(), static_cast<int>(c.models.size()));
  for (std::size_t k = 0; k < c.models.size(); ++k) {
    Mat w = WeightedLogDensities(c.models[k], z, exec);
    for (int i = 0; i < w.rows(); ++i) out(i, static_cast<int>(k)) = LogSumExp(w.row(i).transpose().eval());
  }
  return out;
}

std::vector<std::string> Speakers(const Dataset &data) {
  std::vector<std::string> out, missing;
  for (const ClipMeta &m : data.meta) {
    if (!m.speaker) missing.push_back(m.id);
    out.push_back(m.speaker.value_or(""));
  }
  if (!missing.empty()) Fail(ErrorKind::kInvalidArgument, "clips without a speaker: " + ListIds(missing));
  return out;
}

int Column(const std::vector<std::string> &labels, const std::string &label) {
  auto it = std::find(labels.begin(), labels.end(), label);
  return it == labels.end() ? -1 : static_cast<int>(it - labels.begin());
}

}  // namespace

Mat ExtractClips(const std::vector<AudioClip> &clips, const DspConfig &cfg, Exec exec) {
  const int n = static_cast<int>(clips.size());
  Mat out(n, kFeatureCount);
  std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic) if (exec == Exec::kParallel)
  for (int i = 0; i < n; ++i) {
    try {
      out.row(i) = ExtractFeatures(clips[i], cfg).values.transpose();
    } catch (const std::exception &e) {
      errors[i] = e.what();
    }
  }
  for (int i = 0; i < n; ++i)
    if (!errors[i].empty()) Fail(ErrorKind::kInvalidArgument, "clip " + std::to_string(i) + ": " + errors[i]);
  return out;
}

ExtractResult ExtractManifest(const std::vector<ManifestEntry> &entries, const DspConfig &cfg,
                              const FeatureMask &mask, Exec exec) {
  const int n = static_cast<int>(entries.size());
  std::vector<FeatureVector> vectors(n);
  std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic) if (exec == Exec::kParallel)
  for (int i = 0; i < n; ++i) {
    try {
      AudioClip clip = LoadWav(entries[i].path);
      vectors[i] = ExtractFeatures(clip, cfg);
      ApplyMask(mask, &vectors[i].values);
    } catch (const std::exception &e) {
      errors[i] = e.what();
    }
  }
  ExtractResult r;
  r.table.masked_rows = mask.ExcludedRows();
  std::vector<int> ok;
  for (int i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      r.errors.emplace_back(entries[i].meta.id, errors[i]);
      continue;
    }
    ok.push_back(i);
    r.table.ids.push_back(entries[i].meta.id);
    if (!vectors[i].imputed.empty()) r.imputed.emplace_back(entries[i].meta.id, Join(vectors[i].imputed, ","));
  }
  r.table.values.resize(static_cast<int>(ok.size()), kFeatureCount);
  for (std::size_t j = 0; j < ok.size(); ++j) r.table.values.row(static_cast<int>(j)) = vectors[ok[j]].values.transpose();
  return r;
}

Dataset Dataset::Subset(const std::vector<int> &rows) const {
  Dataset d;
  d.table.registry_version = table.registry_version;
  d.table.masked_rows = table.masked_rows;
  d.table.values = Rows(table.values, rows);
  for (int r : rows) {
    d.table.ids.push_back(table.ids[r]);
    d.meta.push_back(meta[r]);
  }
  d.feature_hash = feature_hash;
  return d;
}

Dataset MakeDataset(const FeatureTable &table, const std::vector<ClipMeta> &meta) {
  std::map<std::string, const ClipMeta *> by_id;
  for (const ClipMeta &m : meta) by_id[m.id] = &m;
  Dataset d;
  d.table = table;
  std::vector<std::string> missing;
  std::set<std::string> seen;
  for (const std::string &id : table.ids) {
    if (!seen.insert(id).second) Fail(ErrorKind::kFormat, "duplicate feature id '" + id + "'");
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      missing.push_back(id);
      continue;
    }
    d.meta.push_back(*it->second);
  }
  if (!missing.empty()) Fail(ErrorKind::kInvalidArgument, "feature ids absent from the manifest: " + ListIds(missing));
  d.feature_hash = Fnv1aHex(FormatFeatureTable(table));
  return d;
}

Dataset LoadDataset(const std::string &features_path, const std::string &manifest_path) {
  std::string text = ReadTextFile(features_path);
  std::vector<ClipMeta> meta;
  for (const ManifestEntry &e : ReadManifest(manifest_path)) meta.push_back(e.meta);
  Dataset d = MakeDataset(ParseFeatureTable(text), meta);
  d.feature_hash = Fnv1aHex(text);
  return d;
}

Echo TrainConfig::Describe() const {
  return {{"labels", labels.empty() ? "-" : Join(labels, ",")},
          {"mixtures", std::to_string(mixtures)},
          {"covariance", CovName(covariance)},
          {"em_iterations", std::to_string(em_iterations)},
          {"minmax", minmax == MinMaxMode::kRange ? "range" : "literal"},
          {"select_k", std::to_string(select_k)},
          {"pca_dim", std::to_string(pca_dim)},
          {"lda", lda ? "1" : "0"},
          {"pairwise", pairwise ? "1" : "0"},
          {"pair_mixtures", std::to_string(pair_mixtures)},
          {"pair_pca", std::to_string(pair_pca)},
          {"speaker_norm", speaker_norm ? "1" : "0"},
          {"clusters", std::to_string(clusters)},
          {"speaker_pca", std::to_string(speaker_pca)},
          {"long_mixtures", std::to_string(long_mixtures)},
          {"seed", std::to_string(seed)}};
}

Echo EvalOptions::Describe() const {
  Echo e{{"reject", reject ? "1" : "0"}};
  if (reject) {
    e.emplace_back("reject_threshold", Num(policy.threshold));
    e.emplace_back("reject_k", Num(policy.k));
    e.emplace_back("reject_scale", Num(policy.scale));
  }
  e.emplace_back("context", context ? "1" : "0");
  if (context) {
    e.emplace_back("sigma0", Num(sigma0));
    e.emplace_back("metric", metric == Metric::kL1 ? "l1" : "l2");
    e.emplace_back("clique", clique == CliqueMode::kUniform ? "uniform" : "per-edge");
    e.emplace_back("unary_scale", Num(unary_scale));
    e.emplace_back("long_features", long_features ? "1" : "0");
  }
  return e;
}

std::vector<std::string> ResolveLabels(const Dataset &data, const std::vector<std::string> &declared) {
  std::vector<std::string> unlabelled, outside;
  std::set<std::string> found;
  for (const ClipMeta &m : data.meta) {
    if (!m.emotion) {
      unlabelled.push_back(m.id);
      continue;
    }
    found.insert(*m.emotion);
    if (!declared.empty() && Column(declared, *m.emotion) < 0) outside.push_back(m.id + " (" + *m.emotion + ")");
  }
  if (!unlabelled.empty()) Fail(ErrorKind::kInvalidArgument, "clips without an emotion: " + ListIds(unlabelled));
  if (!outside.empty()) Fail(ErrorKind::kInvalidArgument, "emotions outside the declared set: " + ListIds(outside));
  std::vector<std::string> labels = declared.empty() ? std::vector<std::string>(found.begin(), found.end()) : declared;
  if (labels.size() < 2) Fail(ErrorKind::kInvalidArgument, "training needs at least two emotions");
  return labels;
}

std::vector<int> LabelIndices(const Dataset &data, const std::vector<std::string> &labels) {
  std::vector<int> y;
  for (const ClipMeta &m : data.meta) y.push_back(m.emotion ? Column(labels, *m.emotion) : -1);
  return y;
}

namespace {

std::optional<LongModel> TrainLongModel(const Dataset &data, const std::vector<int> &y,
                                        const std::vector<std::string> &labels, const FeatureTable &long_features,
                                        const TrainConfig &cfg) {
  std::vector<int> rows, ly;
  for (const std::vector<int> &chain : BuildChains(data.meta))
    for (std::size_t t = 0; t + 1 < chain.size(); ++t) {
      int a = chain[t], b = chain[t + 1];
      if (y[a] != y[b]) continue;
      int r = long_features.IndexOf(data.meta[a].id + "+" + data.meta[b].id);
      if (r < 0) continue;
      rows.push_back(r);
      ly.push_back(y[a]);
    }
  std::vector<int> per(labels.size(), 0);
  for (int c : ly) ++per[c];
  for (std::size_t k = 0; k < labels.size(); ++k)
    if (per[k] < 2) {
      spdlog::info("long-node GMMs unavailable: emotion '{}' has {} same-label pairs", labels[k], per[k]);
      return std::nullopt;
    }
  Mat x = Rows(long_features.values, rows);
  PipelineConfig pc;
  pc.minmax = cfg.minmax;
  pc.pca_dim = std::min<int>({cfg.pca_dim, static_cast<int>(x.cols()), static_cast<int>(x.rows()) - 1});
  pc.lda = cfg.lda;
  LongModel lm;
  lm.pipeline = ReductionPipeline::Fit(x, ly, static_cast<int>(labels.size()), pc);
  lm.classifier = TrainClassifier(lm.pipeline.Apply(x), ly, labels, lm.pipeline.Hash(), cfg.long_mixtures, cfg,
                                  cfg.seed + 3000);
  return lm;
}

}  // namespace

EmotionModel TrainModel(const Dataset &data, const TrainConfig &cfg, const FeatureTable *long_features) {
  EmotionModel m;
  m.config = cfg;
  m.labels = ResolveLabels(data, cfg.labels);
  m.config.labels = m.labels;
  m.registry_version = data.table.registry_version;
  m.masked_rows = data.table.masked_rows;
  m.input_dim = static_cast<int>(data.table.values.cols());
  std::vector<int> y = LabelIndices(data, m.labels);
  const int classes = static_cast<int>(m.labels.size());

  Mat x = data.table.values;
  if (cfg.speaker_norm) {
    NormalizeConfig nc;
    nc.fuzzy.clusters = cfg.clusters;
    nc.pca_dim = cfg.speaker_pca;
    NormalizeResult nr = FitSpeakerNormalizer(x, Speakers(data), nc, cfg.seed + 2000);
    m.normalizer = std::move(nr.normalizer);
    x = std::move(nr.features);
  }
  PipelineConfig pc;
  pc.minmax = cfg.minmax;
  pc.select_k = cfg.select_k;
  pc.pca_dim = cfg.pca_dim > 0 ? std::min<int>({cfg.pca_dim, static_cast<int>(x.cols()), data.size() - 1}) : 0;
  pc.lda = cfg.lda;
  m.pipeline = ReductionPipeline::Fit(x, y, classes, pc);
  m.classifier = TrainClassifier(m.pipeline.Apply(x), y, m.labels, m.pipeline.Hash(), cfg.mixtures, cfg, cfg.seed);
  if (cfg.pairwise) {
    PairConfig pcfg;
    pcfg.gmm.mixtures = cfg.pair_mixtures;
    pcfg.gmm.mode = cfg.covariance;
    pcfg.gmm.max_iter = cfg.em_iterations;
    pcfg.gmm.exec = cfg.exec;
    pcfg.pca_dim = cfg.pair_pca;
    pcfg.minmax = cfg.minmax;
    m.pairwise = TrainPairs(x, y, m.labels, pcfg, cfg.seed + 1000);
  }
  if (long_features) m.long_model = TrainLongModel(data, y, m.labels, *long_features, cfg);
  return m;
}

std::string EmotionModel::Serialize() const {
  ModelWriter w;
  w.Append(std::string(kModelMagic) + "\n");
  w.Strings("labels", labels);
  w.Int("config_mixtures", config.mixtures);
  w.Text("config_covariance", CovName(config.covariance));
  w.Int("config_em_iterations", config.em_iterations);
  w.Text("config_minmax", config.minmax == MinMaxMode::kRange ? "range" : "literal");
  w.Int("config_select_k", config.select_k);
  w.Int("config_pca_dim", config.pca_dim);
  w.Int("config_lda", config.lda);
  w.Int("config_pairwise", config.pairwise);
  w.Int("config_pair_mixtures", config.pair_mixtures);
  w.Int("config_pair_pca", config.pair_pca);
  w.Int("config_speaker_norm", config.speaker_norm);
  w.Int("config_clusters", config.clusters);
  w.Int("config_speaker_pca", config.speaker_pca);
  w.Int("config_long_mixtures", config.long_mixtures);
  w.Text("config_seed", std::to_string(config.seed));
  w.Text("registry", registry_version);
  w.Ints("masked_rows", masked_rows);
  w.Int("input_dim", input_dim);
  w.Int("speaker_normalizer", normalizer.has_value());
  if (normalizer) normalizer->Save(&w);
  pipeline.Save(&w);
  w.Text("pipeline_hash", classifier.pipeline_hash);
  for (const GmmModel &g : classifier.models) g.Save(&w);
  w.Int("pairwise_models", pairwise.has_value());
  if (pairwise) pairwise->Save(&w);
  w.Int("long_models", long_model.has_value());
  if (long_model) {
    long_model->pipeline.Save(&w);
    w.Text("long_pipeline_hash", long_model->classifier.pipeline_hash);
    for (const GmmModel &g : long_model->classifier.models) g.Save(&w);
  }
  return w.str();
}

EmotionModel EmotionModel::Parse(const std::string &text) {
  const std::size_t nl = text.find('\n');
  if (text.substr(0, nl) != kModelMagic)
    Fail(ErrorKind::kFormat, std::string("model file must start with '") + kModelMagic + "'");
  ModelReader r(nl == std::string::npos ? std::string() : text.substr(nl + 1));
  EmotionModel m;
  m.labels = r.Strings("labels");
  m.config.labels = m.labels;
  m.config.mixtures = static_cast<int>(r.Int("config_mixtures"));
  m.config.covariance = r.Text("config_covariance") == "full" ? CovarianceMode::kFull : CovarianceMode::kDiagonal;
  m.config.em_iterations = static_cast<int>(r.Int("config_em_iterations"));
  m.config.minmax = r.Text("config_minmax") == "range" ? MinMaxMode::kRange : MinMaxMode::kLiteral;
  m.config.select_k = static_cast<int>(r.Int("config_select_k"));
  m.config.pca_dim = static_cast<int>(r.Int("config_pca_dim"));
  m.config.lda = r.Int("config_lda");
  m.config.pairwise = r.Int("config_pairwise");
  m.config.pair_mixtures = static_cast<int>(r.Int("config_pair_mixtures"));
  m.config.pair_pca = static_cast<int>(r.Int("config_pair_pca"));
  m.config.speaker_norm = r.Int("config_speaker_norm");
  m.config.clusters = static_cast<int>(r.Int("config_clusters"));
  m.config.speaker_pca = static_cast<int>(r.Int("config_speaker_pca"));
  m.config.long_mixtures = static_cast<int>(r.Int("config_long_mixtures"));
  m.config.seed = std::stoull(r.Text("config_seed"));
  m.registry_version = r.Text("registry");
  m.masked_rows = r.Ints("masked_rows");
  m.input_dim = static_cast<int>(r.Int("input_dim"));
  if (r.Int("speaker_normalizer")) m.normalizer = SpeakerNormalizer::Load(&r);
  m.pipeline = ReductionPipeline::Load(&r);
  m.classifier.labels = m.labels;
  m.classifier.pipeline_hash = r.Text("pipeline_hash");
  for (std::size_t k = 0; k < m.labels.size(); ++k) m.classifier.models.push_back(GmmModel::Load(&r));
  if (r.Int("pairwise_models")) m.pairwise = PairwiseClassifier::Load(&r);
  if (r.Int("long_models")) {
    LongModel lm;
    lm.pipeline = ReductionPipeline::Load(&r);
    lm.classifier.labels = m.labels;
    lm.classifier.pipeline_hash = r.Text("long_pipeline_hash");
    for (std::size_t k = 0; k < m.labels.size(); ++k) lm.classifier.models.push_back(GmmModel::Load(&r));
    m.long_model = std::move(lm);
  }
  if (!r.AtEnd()) Fail(ErrorKind::kFormat, "unexpected record '" + r.PeekKey() + "' after the model");
  return m;
}

std::string EmotionModel::Hash() const { return Fnv1aHex(Serialize()); }

Mat EmotionModel::Prepare(const Mat &x) const {
  if (x.cols() != input_dim)
    Fail(ErrorKind::kProvenance, "model expects " + std::to_string(input_dim) + " feature columns, got " +
                                     std::to_string(x.cols()));
  return normalizer ? normalizer->Apply(x) : x;
}

Mat EmotionModel::LogDensities(const Mat &prepared) const {
  return ClassifierLogDensities(pipeline, classifier, prepared, config.exec);
}

std::vector<int> EmotionModel::Predict(const Mat &prepared, const Mat &log_densities) const {
  std::vector<int> out;
  for (int i = 0; i < prepared.rows(); ++i) {
    if (pairwise) {
      out.push_back(pairwise->Classify(prepared.row(i).transpose()).label);
    } else {
      out.push_back(ArgMax(log_densities.row(i).transpose()));
    }
  }
  return out;
}

Mat ConfusionReport::Percent() const {
  Mat p = Mat::Zero(counts.rows(), counts.cols());
  for (int i = 0; i < counts.rows(); ++i) {
    const double n = counts.row(i).sum();
    if (n > 0) p.row(i) = counts.row(i).cast<double>() * (100.0 / n);
  }
  return p;
}

Vec ConfusionReport::Recall() const {
  Mat p = Percent();
  Vec r = Vec::Zero(static_cast<int>(row_labels.size()));
  for (std::size_t i = 0; i < row_labels.size(); ++i) {
    int c = Column(col_labels, row_labels[i]);
    if (c >= 0) {
      r(static_cast<int>(i)) = p(static_cast<int>(i), c);
    } else if (reject_column) {
      r(static_cast<int>(i)) = p(static_cast<int>(i), static_cast<int>(col_labels.size()));
    }
  }
  return r;
}

double ConfusionReport::AverageRecall() const {
  Vec r = Recall();
  double sum = 0.0;
  int rows = 0;
  for (int i = 0; i < counts.rows(); ++i)
    if (counts.row(i).sum() > 0) {
      sum += r(i);
      ++rows;
    }
  return rows ? sum / rows : 0.0;
}

std::string ConfusionReport::Tsv() const {
  std::string out;
  for (const auto &[k, v] : echo) out += "# " + k + "\t" + v + "\n";
  out += "true\\predicted";
  for (const std::string &c : col_labels) out += "\t" + c;
  if (reject_column) out += "\tREJECT";
  out += "\tsamples\trecall\n";
  Mat p = Percent();
  Vec r = Recall();
  char buf[32];
  for (std::size_t i = 0; i < row_labels.size(); ++i) {
    out += row_labels[i];
    for (int j = 0; j < p.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "\t%.4f", p(static_cast<int>(i), j));
      out += buf;
    }
    std::snprintf(buf, sizeof(buf), "\t%.4f\n", r(static_cast<int>(i)));
    out += "\t" + std::to_string(counts.row(static_cast<int>(i)).sum()) + buf;
  }
  std::snprintf(buf, sizeof(buf), "%.4f", AverageRecall());
  out += std::string("average_recall\t") + buf + "\n";
  return out;
}

std::string ConfusionReport::Table() const {
  std::size_t w = 8;
  for (const std::string &l : row_labels) w = std::max(w, l.size() + 1);
  for (const std::string &l : col_labels) w = std::max(w, l.size() + 1);
  auto cell = [&](const std::string &s) { return std::string(w - std::min(w, s.size()), ' ') + s; };
  std::string out;
  for (const auto &[k, v] : echo) out += k + ": " + v + "\n";
  out += "\nrecognition rates (%), rows are true emotions\n";
  out += std::string(w, ' ');
  for (const std::string &c : col_labels) out += " " + cell(c);
  if (reject_column) out += " " + cell("REJECT");
  out += " " + cell("recall") + "\n";
  Mat p = Percent();
  Vec r = Recall();
  char buf[32];
  for (std::size_t i = 0; i < row_labels.size(); ++i) {
    out += std::string(w - std::min(w, row_labels[i].size()), ' ') + row_labels[i];
    for (int j = 0; j < p.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.2f", p(static_cast<int>(i), j));
      out += " " + cell(buf);
    }
    std::snprintf(buf, sizeof(buf), "%.2f", r(static_cast<int>(i)));
    out += " " + cell(buf) + "\n";
  }
  std::snprintf(buf, sizeof(buf), "%.2f", AverageRecall());
  out += std::string("average recall: ") + buf + "\n";
  return out;
}

ConfusionReport NewReport(const std::vector<std::string> &model_labels, const Dataset &test, bool reject) {
  ConfusionReport r;
  r.col_labels = model_labels;
  r.row_labels = model_labels;
  std::set<std::string> extra;
  for (const ClipMeta &m : test.meta)
    if (m.emotion && Column(model_labels, *m.emotion) < 0) extra.insert(*m.emotion);
  r.row_labels.insert(r.row_labels.end(), extra.begin(), extra.end());
  r.reject_column = reject;
  r.counts = Eigen::MatrixXi::Zero(static_cast<int>(r.row_labels.size()),
                                   static_cast<int>(model_labels.size()) + (reject ? 1 : 0));
  return r;
}

void Score(const EmotionModel &model, const Dataset &test, const EvalOptions &opts, ConfusionReport *report) {
  if (test.table.registry_version != model.registry_version || test.table.masked_rows != model.masked_rows)
    Fail(ErrorKind::kProvenance, "features use registry '" + test.table.registry_version +
                                     "' but the model was trained on '" + model.registry_version +
                                     "' (or a different mask)");
  if (test.size() == 0) return;
  Mat prepared = model.Prepare(test.table.values);
  Mat ld = model.LogDensities(prepared);
  std::vector<int> pred = model.Predict(prepared, ld);
  const int L = static_cast<int>(model.labels.size());

  if (opts.context) {
    std::vector<Coord> coords = opts.coords.Select(model.labels);
    std::optional<Mat> long_ld;
    std::vector<std::string> pair_ids;
    int fallbacks = 0;
    for (const std::vector<int> &chain : BuildChains(test.meta)) {
      const int T = static_cast<int>(chain.size());
      if (T < 2) continue;
      ChainProblem p;
      p.short_unary.resize(T, L);
      p.long_unary.resize(T - 1, L);
      p.coords = coords;
      p.sigma0 = opts.sigma0;
      p.metric = opts.metric;
      p.mode = opts.clique;
      for (int t = 0; t < T; ++t)
        for (int k = 0; k < L; ++k) p.short_unary(t, k) = UnaryFromLog(ld(chain[t], k), opts.unary_scale);
      for (int t = 0; t + 1 < T; ++t) {
        int row = -1;
        if (model.long_model && opts.long_features)
          row = opts.long_features->IndexOf(test.meta[chain[t]].id + "+" + test.meta[chain[t + 1]].id);
        Vec lp;
        if (row >= 0) {
          lp = ClassifierLogDensities(model.long_model->pipeline, model.long_model->classifier,
                                      opts.long_features->values.row(row), model.config.exec)
                   .row(0)
                   .transpose();
        } else {
          ++fallbacks;
          lp = 0.5 * (ld.row(chain[t]) + ld.row(chain[t + 1])).transpose();
        }
        for (int k = 0; k < L; ++k) p.long_unary(t, k) = UnaryFromLog(lp(k), opts.unary_scale);
      }
      ChainSolution s = Minimize(p);
      for (int t = 0; t < T; ++t) pred[chain[t]] = s.assignment.shorts[t];
    }
    if (fallbacks) spdlog::info("context: {} long nodes scored by averaging their two short nodes", fallbacks);
  }

  int skipped = 0;
  for (int i = 0; i < test.size(); ++i) {
    if (!test.meta[i].emotion) {
      ++skipped;
      continue;
    }
    int row = Column(report->row_labels, *test.meta[i].emotion);
    if (row < 0) Fail(ErrorKind::kInvalidArgument, "report has no row for '" + *test.meta[i].emotion + "'");
    int col = pred[i];
    if (opts.reject && DecideFromLog(ld.row(i).transpose(), opts.policy).rejected) col = L;
    ++report->counts(row, col);
  }
  if (skipped) spdlog::info("{} test clips carry no emotion and were not scored", skipped);
}

ConfusionReport Evaluate(const EmotionModel &model, const Dataset &test, const EvalOptions &opts) {
  ConfusionReport r = NewReport(model.labels, test, opts.reject);
  r.echo = {{"mode", "held-out"},
            {"registry", test.table.registry_version},
            {"feature_hash", test.feature_hash},
            {"model_hash", model.Hash()}};
  for (auto &kv : model.config.Describe()) r.echo.push_back(kv);
  for (auto &kv : opts.Describe()) r.echo.push_back(kv);
  Score(model, test, opts, &r);
  return r;
}

std::vector<std::vector<int>> MakeFolds(const Dataset &data, const FoldPlan &plan, std::uint64_t seed) {
  std::vector<std::vector<int>> folds;
  if (plan.leave_one_speaker_out) {
    std::vector<std::string> spk = Speakers(data);
    std::vector<std::string> unique(spk.begin(), spk.end());
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    if (unique.size() < 2) Fail(ErrorKind::kInvalidArgument, "leave-one-speaker-out needs two speakers");
    for (const std::string &s : unique) {
      folds.emplace_back();
      for (int i = 0; i < data.size(); ++i)
        if (spk[i] == s) folds.back().push_back(i);
    }
    return folds;
  }
  std::map<std::string, int> row_of;
  for (int i = 0; i < data.size(); ++i) row_of[data.meta[i].id] = i;
  for (const auto &ids : SplitFolds(data.table.ids, plan.folds, seed)) {
    folds.emplace_back();
    for (const std::string &id : ids) folds.back().push_back(row_of.at(id));
    std::sort(folds.back().begin(), folds.back().end());
  }
  return folds;
}

ConfusionReport CrossValidate(const Dataset &data, const TrainConfig &cfg, const EvalOptions &opts,
                              const FoldPlan &plan) {
  // Labels outside the declared set are unknowns: never trained on, scored
  // against the REJECT column. Only meaningful with rejection on.
  Dataset known_only;
  std::vector<int> known_rows;
  for (int i = 0; i < data.size(); ++i)
    if (!data.meta[i].emotion || cfg.labels.empty() || Column(cfg.labels, *data.meta[i].emotion) >= 0)
      known_rows.push_back(i);
  if (static_cast<int>(known_rows.size()) < data.size() && !opts.reject)
    Fail(ErrorKind::kInvalidArgument, "emotions outside the declared set need rejection enabled");
  std::vector<std::string> labels = ResolveLabels(data.Subset(known_rows), cfg.labels);

  ConfusionReport r = NewReport(labels, data, opts.reject);
  r.echo = {{"mode", plan.leave_one_speaker_out ? "leave-one-speaker-out" : std::to_string(plan.folds) + "-fold"},
            {"registry", data.table.registry_version},
            {"feature_hash", data.feature_hash}};
  TrainConfig base = cfg;
  base.labels = labels;
  for (auto &kv : base.Describe()) r.echo.push_back(kv);
  for (auto &kv : opts.Describe()) r.echo.push_back(kv);

  std::vector<std::vector<int>> folds = MakeFolds(data, plan, cfg.seed);
  std::vector<std::string> hashes;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<bool> in_test(data.size(), false);
    for (int i : folds[f]) in_test[i] = true;
    std::vector<int> train;
    for (int i : known_rows)
      if (!in_test[i]) train.push_back(i);
    TrainConfig fc = base;
    fc.seed = cfg.seed + 7919 * (f + 1);
    EmotionModel m = TrainModel(data.Subset(train), fc, opts.long_features);
    hashes.push_back(m.Hash());
    Score(m, data.Subset(folds[f]), opts, &r);
  }
  r.echo.emplace_back("fold_models_hash", Fnv1aHex(Join(hashes, ",")));
  return r;
}

namespace {

struct Channel {
  ReductionPipeline pipeline;
  EmotionClassifier classifier;
};

Channel TrainChannel(const Mat &x, const std::vector<int> &y, const std::vector<std::string> &labels,
                     const TrainConfig &cfg, std::uint64_t seed, bool reduce) {
  PipelineConfig pc;
  pc.minmax = cfg.minmax;
  pc.pca_dim = reduce ? std::min<int>({kFusedDim, static_cast<int>(x.cols()), static_cast<int>(x.rows()) - 1}) : 0;
  pc.lda = false;
  Channel c;
  c.pipeline = ReductionPipeline::Fit(x, y, static_cast<int>(labels.size()), pc);
  c.classifier = TrainClassifier(c.pipeline.Apply(x), y, labels, c.pipeline.Hash(), cfg.mixtures, cfg, seed);
  return c;
}

}  // namespace

FusionRun CrossValidateFusion(const Dataset &speech, const PhysioTable &physio, FusionMode mode,
                              const TrainConfig &cfg, const FoldPlan &plan, bool standardize) {
  std::vector<std::string> labels = ResolveLabels(speech, cfg.labels);
  std::vector<int> y = LabelIndices(speech, labels);
  std::vector<int> prow(speech.size());
  for (int i = 0; i < speech.size(); ++i) prow[i] = physio.IndexOf(speech.meta[i].id);

  FusionRun run;
  Echo echo{{"mode", plan.leave_one_speaker_out ? "leave-one-speaker-out" : std::to_string(plan.folds) + "-fold"},
            {"fusion", mode == FusionMode::kDecision ? "decision" : "feature"},
            {"standardize", standardize ? "on" : "off"},
            {"registry", speech.table.registry_version},
            {"feature_hash", speech.feature_hash},
            {"physio_rows", std::to_string(physio.ids.size())},
            {"mixtures", std::to_string(cfg.mixtures)},
            {"reduced_dim", std::to_string(kFusedDim)},
            {"seed", std::to_string(cfg.seed)}};
  for (ConfusionReport *r : {&run.speech, &run.physio, &run.fused}) {
    *r = NewReport(labels, speech, false);
    r->echo = echo;
  }
  run.speech.echo.emplace_back("channel", "speech");
  run.physio.echo.emplace_back("channel", "physiological");
  run.fused.echo.emplace_back("channel", "fused");

  std::vector<std::vector<int>> folds = MakeFolds(speech, plan, cfg.seed);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<bool> in_test(speech.size(), false);
    for (int i : folds[f]) in_test[i] = true;
    std::vector<int> train, train_both;
    for (int i = 0; i < speech.size(); ++i)
      if (!in_test[i]) {
        train.push_back(i);
        if (prow[i] >= 0) train_both.push_back(i);
      }
    std::vector<int> y_train, y_both, phys_rows;
    for (int i : train) y_train.push_back(y[i]);
    for (int i : train_both) {
      y_both.push_back(y[i]);
      phys_rows.push_back(prow[i]);
    }
    const std::uint64_t seed = cfg.seed + 7919 * (f + 1);
    Channel sc = TrainChannel(Rows(speech.table.values, train), y_train, labels, cfg, seed, true);
    Channel pc = TrainChannel(Rows(physio.values, phys_rows), y_both, labels, cfg, seed + 100, true);
    std::optional<FeatureFusion> ff;
    std::optional<Channel> fc;
    if (mode == FusionMode::kFeature) {
      ff = FeatureFusion::Fit(Rows(speech.table.values, train_both), Rows(physio.values, phys_rows));
      fc = TrainChannel(ff->Apply(Rows(speech.table.values, train_both), Rows(physio.values, phys_rows)), y_both,
                        labels, cfg, seed + 200, false);
    }
    for (int i : folds[f]) {
      Mat s = speech.table.values.row(i);
      Vec sl = ClassifierLogDensities(sc.pipeline, sc.classifier, s, cfg.exec).row(0).transpose();
      ++run.speech.counts(y[i], ArgMax(sl));
      std::optional<Vec> pl;
      if (prow[i] >= 0) {
        pl = ClassifierLogDensities(pc.pipeline, pc.classifier, Mat(physio.values.row(prow[i])), cfg.exec)
                 .row(0)
                 .transpose();
        ++run.physio.counts(y[i], ArgMax(*pl));
      }
      if (mode == FusionMode::kDecision) {
        ++run.fused.counts(y[i], DecisionFuse({sl, pl}, standardize).label);
        continue;
      }
      if (prow[i] < 0) {
        run.unavailable.push_back(speech.meta[i].id);
        continue;
      }
      Mat z = ff->Apply(s, Mat(physio.values.row(prow[i])));
      ++run.fused.counts(y[i], ArgMax(ClassifierLogDensities(fc->pipeline, fc->classifier, z, cfg.exec).row(0).transpose()));
    }
  }
  return run;
}

std::vector<AudioClip> SynthesizeCorpus(const SynthCorpusConfig &cfg, std::uint64_t seed) {
  struct Voice {
    double f0, slope, amp, tilt;
  };
  // Cycled when more emotions are requested than listed.
  const Voice voices[] = {{120, 0, 0.25, 1.0}, {210, 40, 0.5, 0.6}, {95, -20, 0.12, 1.6}, {170, 80, 0.7, 0.4},
                          {150, -50, 0.35, 0.8}, {250, 10, 0.3, 1.2}};
  const int E = static_cast<int>(cfg.emotions.size());
  const int n = static_cast<int>(std::lround(cfg.seconds * cfg.sample_rate));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<AudioClip> clips;
  for (int s = 0; s < cfg.speakers; ++s) {
    const double pitch_scale = 0.8 + 0.4 * (cfg.speakers > 1 ? static_cast<double>(s) / (cfg.speakers - 1) : 0.5);
    // Emotion sequence in runs, each emotion clips_per_emotion times.
    std::vector<int> order;
    std::vector<int> left(E, cfg.clips_per_emotion);
    for (int e = 0; static_cast<int>(order.size()) < E * cfg.clips_per_emotion; e = (e + 1) % E)
      for (int r = 0; r < cfg.run_length && left[e] > 0; ++r, --left[e]) order.push_back(e);
    for (std::size_t t = 0; t < order.size(); ++t) {
      const int e = order[t];
      const Voice &v = voices[e % 6];
      const double f0 = v.f0 * pitch_scale * (1.0 + 0.04 * g(rng));
      const double slope = v.slope * (1.0 + 0.2 * g(rng));
      const double amp = v.amp * (1.0 + 0.1 * g(rng));
      std::vector<double> x(n, 0.0);
      double phase = 0.0;
      for (int i = 0; i < n; ++i) {
        const double f = f0 + slope * i / n;
        phase += 2.0 * kPi * f / cfg.sample_rate;
        const double env = std::sin(kPi * (i + 0.5) / n);
        for (int h = 1; h * f < 0.45 * cfg.sample_rate && h <= 30; ++h)
          x[i] += amp * env * std::pow(h, -v.tilt) * std::sin(h * phase);
      }
      const double noise_sigma = std::sqrt(SignalPower(x) / std::pow(10.0, cfg.snr_db / 10.0));
      for (double &sample : x) sample = std::clamp(sample + noise_sigma * g(rng), -1.0, 32767.0 / 32768.0);
      AudioClip c;
      c.samples = std::move(x);
      c.sample_rate = cfg.sample_rate;
      char id[64];
      std::snprintf(id, sizeof(id), "s%02d_%03zu", s, t);
      c.meta.id = id;
      c.meta.emotion = cfg.emotions[e];
      c.meta.speaker = "spk" + std::to_string(s);
      c.meta.session = "session" + std::to_string(s);
      c.meta.order = static_cast<long>(t);
      clips.push_back(std::move(c));
    }
  }
  return clips;
}

void WriteCorpus(const std::string &dir, const std::vector<AudioClip> &clips) {
  std::filesystem::create_directories(dir);
  std::string manifest = "# id\tpath\temotion\tspeaker\tsession\torder\n";
  for (const AudioClip &c : clips) {
    SaveWav((std::filesystem::path(dir) / (c.meta.id + ".wav")).string(), c);
    manifest += c.meta.id + "\t" + c.meta.id + ".wav\t" + c.meta.emotion.value_or("-") + "\t" +
                c.meta.speaker.value_or("-") + "\t" + c.meta.session.value_or("-") + "\t" +
                (c.meta.order ? std::to_string(*c.meta.order) : "-") + "\n";
  }
  WriteTextFile((std::filesystem::path(dir) / "manifest.tsv").string(), manifest);
}

}  // namespace emokit
