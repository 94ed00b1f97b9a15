// emokit/app.hpp

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

#ifndef EMOKIT_APP_HPP_
#define EMOKIT_APP_HPP_

// Orchestration behind the command-line tool: aligned datasets, model
// files, cross-validated evaluation and confusion reports.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "emokit/context.hpp"
#include "emokit/corpus.hpp"
#include "emokit/dsp.hpp"
#include "emokit/features.hpp"
#include "emokit/fuse.hpp"
#include "emokit/gmm.hpp"
#include "emokit/kernels.hpp"
#include "emokit/pairwise.hpp"
#include "emokit/reduce.hpp"
#include "emokit/reject.hpp"
#include "emokit/speakers.hpp"

namespace emokit {

using Echo = std::vector<std::pair<std::string, std::string>>;

struct ExtractResult {
  FeatureTable table;                                     // successful clips, manifest order
  std::vector<std::pair<std::string, std::string>> imputed;  // id, comma-joined groups
  std::vector<std::pair<std::string, std::string>> errors;   // id, message
};

// Loads and extracts every manifest clip. kParallel spreads clips over
// OpenMP threads; the output does not depend on scheduling.
ExtractResult ExtractManifest(const std::vector<ManifestEntry> &entries, const DspConfig &cfg,
                              const FeatureMask &mask, Exec exec);
Mat ExtractClips(const std::vector<AudioClip> &clips, const DspConfig &cfg, Exec exec);

// Feature rows joined with their manifest metadata by id.
struct Dataset {
  FeatureTable table;
  std::vector<ClipMeta> meta;  // one per table row
  std::string feature_hash;    // FNV-1a of the feature file text

  int size() const { return static_cast<int>(meta.size()); }
  Dataset Subset(const std::vector<int> &rows) const;
};

Dataset MakeDataset(const FeatureTable &table, const std::vector<ClipMeta> &meta);
// Feature ids missing from the manifest are listed in the error.
Dataset LoadDataset(const std::string &features_path, const std::string &manifest_path);

struct TrainConfig {
  std::vector<std::string> labels;  // declared emotion set; empty takes it from the data
  int mixtures = 32;
  CovarianceMode covariance = CovarianceMode::kDiagonal;
  int em_iterations = 50;
  MinMaxMode minmax = MinMaxMode::kLiteral;
  int select_k = 0;
  int pca_dim = 20;
  bool lda = true;
  bool pairwise = false;
  int pair_mixtures = 24;
  int pair_pca = 10;
  bool speaker_norm = false;
  int clusters = 14;
  int speaker_pca = 20;
  int long_mixtures = 64;
  std::uint64_t seed = 0;
  Exec exec = Exec::kParallel;

  Echo Describe() const;
};

// GMMs over concatenated pair clips, used for the long nodes of a chain.
struct LongModel {
  ReductionPipeline pipeline;
  EmotionClassifier classifier;
};

struct EmotionModel {
  TrainConfig config;
  std::string registry_version;
  std::vector<int> masked_rows;
  int input_dim = 0;
  std::vector<std::string> labels;
  std::optional<SpeakerNormalizer> normalizer;
  ReductionPipeline pipeline;
  EmotionClassifier classifier;
  std::optional<PairwiseClassifier> pairwise;
  std::optional<LongModel> long_model;

  std::string Serialize() const;
  static EmotionModel Parse(const std::string &text);
  std::string Hash() const;

  // Speaker normalisation when trained with it, otherwise the input.
  Mat Prepare(const Mat &x) const;
  // n x L per-emotion log-densities from the plain GMM classifier.
  Mat LogDensities(const Mat &prepared) const;
  // Pairwise decoding when available, otherwise the GMM argmax.
  std::vector<int> Predict(const Mat &prepared, const Mat &log_densities) const;
};

// Emotion indices of labelled rows; unlabelled rows or labels outside the set
// are errors listing the offending ids. Runs before any training compute.
std::vector<std::string> ResolveLabels(const Dataset &data, const std::vector<std::string> &declared);
std::vector<int> LabelIndices(const Dataset &data, const std::vector<std::string> &labels);

// long_features rows are named "<id_a>+<id_b>" for consecutive clips.
EmotionModel TrainModel(const Dataset &data, const TrainConfig &cfg,
                        const FeatureTable *long_features = nullptr);

struct EvalOptions {
  bool reject = false;
  RejectionPolicy policy;
  bool context = false;
  double sigma0 = 0.5;
  Metric metric = Metric::kL2;
  CliqueMode clique = CliqueMode::kPerEdge;
  double unary_scale = 10.0;
  EmotionCoords coords = EmotionCoords::Default();
  const FeatureTable *long_features = nullptr;

  Echo Describe() const;
};

// Rows are true emotions (model labels, then any other labels seen in the
// test data), columns the model labels plus REJECT when rejection is on.
struct ConfusionReport {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  bool reject_column = false;
  Eigen::MatrixXi counts;
  Echo echo;

  Mat Percent() const;  // each non-empty row sums to 100
  // Known rows: diagonal percentage. Unknown rows: REJECT percentage.
  Vec Recall() const;
  double AverageRecall() const;  // over non-empty rows
  std::string Tsv() const;
  std::string Table() const;
};

ConfusionReport NewReport(const std::vector<std::string> &model_labels, const Dataset &test, bool reject);
// Scores test into report (rows/columns already laid out).
void Score(const EmotionModel &model, const Dataset &test, const EvalOptions &opts, ConfusionReport *report);
ConfusionReport Evaluate(const EmotionModel &model, const Dataset &test, const EvalOptions &opts);

struct FoldPlan {
  int folds = 10;
  bool leave_one_speaker_out = false;
};
std::vector<std::vector<int>> MakeFolds(const Dataset &data, const FoldPlan &plan, std::uint64_t seed);
ConfusionReport CrossValidate(const Dataset &data, const TrainConfig &cfg, const EvalOptions &opts,
                              const FoldPlan &plan);

enum class FusionMode { kDecision, kFeature };

struct FusionRun {
  ConfusionReport speech, physio, fused;
  std::vector<std::string> unavailable;  // ids lacking a modality in feature mode
};

// Cross-validated speech-only, physiological-only and fused reports. Each
// channel is minmax + PCA reduced to the same dimension before its GMMs.
// standardize applies only to decision fusion (see DecisionFuse).
FusionRun CrossValidateFusion(const Dataset &speech, const PhysioTable &physio, FusionMode mode,
                              const TrainConfig &cfg, const FoldPlan &plan, bool standardize = false);

// Seeded synthetic corpus: each emotion is a voiced harmonic source with its
// own pitch level, pitch slope, loudness and spectral tilt; speakers scale
// pitch; each speaker is one session recorded in runs of equal emotion.
struct SynthCorpusConfig {
  std::vector<std::string> emotions{"neutral", "joy", "sad", "angry"};
  int speakers = 3;
  int clips_per_emotion = 6;  // per speaker
  int run_length = 3;         // consecutive clips sharing an emotion
  int sample_rate = 11025;
  double seconds = 0.5;
  double snr_db = 30.0;
};

std::vector<AudioClip> SynthesizeCorpus(const SynthCorpusConfig &cfg, std::uint64_t seed);
// Writes <id>.wav files and manifest.tsv into dir (created if needed).
void WriteCorpus(const std::string &dir, const std::vector<AudioClip> &clips);

}  // namespace emokit

#endif  // EMOKIT_APP_HPP_
