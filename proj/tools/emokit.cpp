// emokit/emokit.cpp

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

// emokit command-line driver.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "emokit/app.hpp"
#include "emokit/corpus.hpp"
#include "emokit/enhance.hpp"
#include "emokit/fuse.hpp"

using namespace emokit;

namespace {

struct Common {
  std::string log_level = "warn";
  bool serial = false;
};

std::map<std::string, CovarianceMode> kCovariance{{"diagonal", CovarianceMode::kDiagonal},
                                                  {"full", CovarianceMode::kFull}};
std::map<std::string, MinMaxMode> kMinMax{{"literal", MinMaxMode::kLiteral}, {"range", MinMaxMode::kRange}};
std::map<std::string, Metric> kMetric{{"l1", Metric::kL1}, {"l2", Metric::kL2}};
std::map<std::string, CliqueMode> kClique{{"per-edge", CliqueMode::kPerEdge}, {"uniform", CliqueMode::kUniform}};
std::map<std::string, EnhanceAlgorithm> kAlgorithm{{"specsub", EnhanceAlgorithm::kSpectralSubtraction},
                                                   {"masking", EnhanceAlgorithm::kMasking}};
std::map<std::string, FusionMode> kFusion{{"decision", FusionMode::kDecision}, {"feature", FusionMode::kFeature}};

void AddTrainOptions(CLI::App *cmd, TrainConfig *cfg, std::string *labels) {
  cmd->add_option("--labels", *labels, "Comma-separated emotion set; clips outside it are an error");
  cmd->add_option("--mixtures", cfg->mixtures, "Gaussian mixtures per emotion")->check(CLI::PositiveNumber);
  cmd->add_option("--covariance", cfg->covariance, "diagonal or full")
      ->transform(CLI::CheckedTransformer(kCovariance));
  cmd->add_option("--em-iterations", cfg->em_iterations)->check(CLI::PositiveNumber);
  cmd->add_option("--minmax", cfg->minmax, "literal (divide by max) or range")
      ->transform(CLI::CheckedTransformer(kMinMax));
  cmd->add_option("--select-k", cfg->select_k, "Keep the k best FDR dimensions, 0 keeps all");
  cmd->add_option("--pca", cfg->pca_dim, "PCA dimensions, 0 skips PCA");
  cmd->add_flag("!--no-lda", cfg->lda, "Skip the LDA projection");
  cmd->add_flag("--pairwise", cfg->pairwise, "Decode with one-vs-one pair classifiers");
  cmd->add_option("--pair-mixtures", cfg->pair_mixtures)->check(CLI::PositiveNumber);
  cmd->add_option("--pair-pca", cfg->pair_pca)->check(CLI::PositiveNumber);
  cmd->add_flag("--speaker-norm", cfg->speaker_norm, "Fuzzy speaker-cluster normalisation before reduction");
  cmd->add_option("--clusters", cfg->clusters)->check(CLI::PositiveNumber);
  cmd->add_option("--speaker-pca", cfg->speaker_pca)->check(CLI::PositiveNumber);
  cmd->add_option("--long-mixtures", cfg->long_mixtures)->check(CLI::PositiveNumber);
  cmd->add_option("--seed", cfg->seed, "PRNG seed")->required();
}

std::vector<std::string> SplitCommas(const std::string &s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

void WriteReport(const ConfusionReport &r, const std::string &prefix) {
  std::cout << r.Table();
  if (prefix.empty()) return;
  WriteTextFile(prefix + ".tsv", r.Tsv());
  WriteTextFile(prefix + ".txt", r.Table());
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Speech emotion recognition toolkit"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--log", common.log_level, "trace, debug, info, warn, error or off");
  app.add_flag("--serial", common.serial, "Run the serial reference kernels");

  // extract
  auto *extract = app.add_subcommand("extract", "Manifest of WAV clips to a 481-column feature file");
  std::string manifest, out, features;
  bool whisper = false;
  extract->add_option("--manifest", manifest)->required();
  extract->add_option("--out", out)->required();
  extract->add_flag("--whisper", whisper, "Zero the pitch and HNR rows and record them as masked");

  // train
  auto *train = app.add_subcommand("train", "Fit the reduction pipeline and emotion models");
  TrainConfig tcfg;
  std::string labels, long_features;
  train->add_option("--features", features)->required();
  train->add_option("--manifest", manifest)->required();
  train->add_option("--out", out)->required();
  train->add_option("--long-features", long_features, "Feature file of concatenated consecutive pairs, ids a+b");
  AddTrainOptions(train, &tcfg, &labels);

  // eval
  auto *eval = app.add_subcommand("eval", "Confusion report, held-out or cross-validated");
  EvalOptions eopt;
  std::string model_path, coords_path;
  FoldPlan plan;
  std::optional<int> folds;
  bool loso = false;
  bool standardize = false;
  TrainConfig ecfg;
  std::string elabels;
  eval->add_option("--features", features)->required();
  eval->add_option("--manifest", manifest)->required();
  eval->add_option("--model", model_path, "Score a trained model on held-out features");
  eval->add_option("--folds", folds, "k-fold cross-validation")->check(CLI::Range(2, 1000000));
  eval->add_flag("--loso", loso, "Leave-one-speaker-out cross-validation");
  eval->add_option("--out", out, "Report prefix; writes <out>.tsv and <out>.txt");
  eval->add_flag("--reject", eopt.reject, "Fuzzy-entropy rejection with a REJECT column");
  eval->add_option("--threshold", eopt.policy.threshold, "Rejection threshold on the average fuzzy entropy");
  eval->add_option("--density-scale", eopt.policy.scale, "Density divisor in the membership map");
  eval->add_flag("--context", eopt.context, "Markov-network smoothing over consecutive clips");
  eval->add_option("--sigma0", eopt.sigma0)->check(CLI::NonNegativeNumber);
  eval->add_option("--metric", eopt.metric)->transform(CLI::CheckedTransformer(kMetric));
  eval->add_option("--clique", eopt.clique)->transform(CLI::CheckedTransformer(kClique));
  eval->add_option("--coords", coords_path, "Emotion arousal/valence table");
  eval->add_option("--long-features", long_features);
  eval->add_option("--labels", elabels);
  eval->add_option("--mixtures", ecfg.mixtures)->check(CLI::PositiveNumber);
  eval->add_option("--covariance", ecfg.covariance)->transform(CLI::CheckedTransformer(kCovariance));
  eval->add_option("--em-iterations", ecfg.em_iterations)->check(CLI::PositiveNumber);
  eval->add_option("--minmax", ecfg.minmax)->transform(CLI::CheckedTransformer(kMinMax));
  eval->add_option("--select-k", ecfg.select_k);
  eval->add_option("--pca", ecfg.pca_dim);
  eval->add_flag("!--no-lda", ecfg.lda);
  eval->add_flag("--pairwise", ecfg.pairwise);
  eval->add_option("--pair-mixtures", ecfg.pair_mixtures)->check(CLI::PositiveNumber);
  eval->add_option("--pair-pca", ecfg.pair_pca)->check(CLI::PositiveNumber);
  eval->add_flag("--speaker-norm", ecfg.speaker_norm);
  eval->add_option("--clusters", ecfg.clusters)->check(CLI::PositiveNumber);
  eval->add_option("--speaker-pca", ecfg.speaker_pca)->check(CLI::PositiveNumber);
  eval->add_option("--long-mixtures", ecfg.long_mixtures)->check(CLI::PositiveNumber);
  std::optional<std::uint64_t> eseed;
  eval->add_option("--seed", eseed, "PRNG seed, required for cross-validation");

  // enhance
  auto *enhance = app.add_subcommand("enhance", "Denoise a WAV clip");
  std::string in;
  EnhanceAlgorithm algorithm = EnhanceAlgorithm::kMasking;
  EnhanceConfig ecf;
  enhance->add_option("--in", in)->required();
  enhance->add_option("--out", out)->required();
  enhance->add_option("--algorithm", algorithm, "specsub or masking")
      ->transform(CLI::CheckedTransformer(kAlgorithm));
  enhance->add_option("--leading-frames", ecf.leading_frames, "Frames assumed noise-only")
      ->check(CLI::PositiveNumber);

  // inject-noise
  auto *inject = app.add_subcommand("inject-noise", "Add white Gaussian noise at a full-clip SNR");
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  inject->add_option("--in", in)->required();
  inject->add_option("--out", out)->required();
  inject->add_option("--snr", snr_db, "Target SNR in dB, inf for none")->required();
  inject->add_option("--seed", seed)->required();

  // rate-fuse
  auto *rate = app.add_subcommand("rate-fuse", "Rater consistency weights and fused labels");
  std::string ratings, emotions;
  rate->add_option("--ratings", ratings)->required();
  rate->add_option("--emotions", emotions, "Comma-separated names for the rating components");
  rate->add_option("--out", out);

  // normalize-speakers
  auto *norm = app.add_subcommand("normalize-speakers", "Speaker-cluster normalised feature file");
  NormalizeConfig ncfg;
  norm->add_option("--features", features)->required();
  norm->add_option("--manifest", manifest)->required();
  norm->add_option("--out", out)->required();
  norm->add_option("--clusters", ncfg.fuzzy.clusters)->check(CLI::PositiveNumber);
  norm->add_option("--pca", ncfg.pca_dim)->check(CLI::PositiveNumber);
  norm->add_option("--alpha", ncfg.fuzzy.alpha)->check(CLI::Range(1.0001, 1e6));
  norm->add_option("--seed", seed)->required();

  // fuse-bimodal
  auto *fuse = app.add_subcommand("fuse-bimodal", "Speech plus physiological fusion, cross-validated");
  std::string physio_path;
  FusionMode fmode = FusionMode::kDecision;
  TrainConfig fcfg;
  fcfg.mixtures = 8;
  std::string flabels;
  fuse->add_option("--features", features)->required();
  fuse->add_option("--physio", physio_path)->required();
  fuse->add_option("--manifest", manifest)->required();
  fuse->add_option("--mode", fmode, "decision or feature")->transform(CLI::CheckedTransformer(kFusion));
  fuse->add_option("--folds", plan.folds)->check(CLI::Range(2, 1000000));
  fuse->add_flag("--loso", loso);
  fuse->add_flag("--standardize", standardize, "Normalize each channel's densities over emotions before weighting");
  fuse->add_option("--mixtures", fcfg.mixtures)->check(CLI::PositiveNumber);
  fuse->add_option("--labels", flabels);
  fuse->add_option("--seed", fcfg.seed)->required();
  fuse->add_option("--out", out, "Report prefix; writes <out>.{speech,physio,fused}.{tsv,txt}");

  // tracks
  auto *tracks = app.add_subcommand("tracks", "Per-frame acoustic tracks of one clip");
  tracks->add_option("--in", in)->required();
  tracks->add_option("--out", out);

  // synth
  auto *synth = app.add_subcommand("synth", "Write a seeded synthetic corpus (WAV clips and manifest)");
  SynthCorpusConfig scfg;
  std::string synth_emotions;
  synth->add_option("--out", out, "Output directory")->required();
  synth->add_option("--emotions", synth_emotions, "Comma-separated emotion names");
  synth->add_option("--speakers", scfg.speakers)->check(CLI::PositiveNumber);
  synth->add_option("--clips", scfg.clips_per_emotion, "Clips per emotion and speaker")->check(CLI::PositiveNumber);
  synth->add_option("--rate", scfg.sample_rate)->check(CLI::PositiveNumber);
  synth->add_option("--seconds", scfg.seconds)->check(CLI::PositiveNumber);
  synth->add_option("--seed", seed)->required();

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(common.log_level));
  const Exec exec = common.serial ? Exec::kSerial : Exec::kParallel;

  try {
    if (*extract) {
      ExtractResult r = ExtractManifest(ReadManifest(manifest), DspConfig{},
                                        whisper ? FeatureMask::Whisper() : FeatureMask::All(), exec);
      WriteFeatureTable(out, r.table);
      std::string side = "id\timputed_groups\n";
      for (const auto &[id, groups] : r.imputed) side += id + "\t" + groups + "\n";
      WriteTextFile(out + ".imputed", side);
      for (const auto &[id, msg] : r.errors) std::cerr << "error: " << id << ": " << msg << "\n";
      std::cout << r.table.ids.size() << " clips extracted, " << r.errors.size() << " failed\n";
      return r.errors.empty() ? 0 : 1;
    }
    if (*train) {
      tcfg.labels = SplitCommas(labels);
      tcfg.exec = exec;
      Dataset data = LoadDataset(features, manifest);
      ResolveLabels(data, tcfg.labels);
      std::optional<FeatureTable> lf;
      if (!long_features.empty()) lf = ReadFeatureTable(long_features);
      EmotionModel m = TrainModel(data, tcfg, lf ? &*lf : nullptr);
      WriteTextFile(out, m.Serialize());
      std::cout << "model " << m.Hash() << " trained on " << data.size() << " clips, features " << data.feature_hash
                << "\n";
      return 0;
    }
    if (*eval) {
      if (!coords_path.empty()) eopt.coords = EmotionCoords::Parse(ReadTextFile(coords_path));
      std::optional<FeatureTable> lf;
      if (!long_features.empty()) {
        lf = ReadFeatureTable(long_features);
        eopt.long_features = &*lf;
      }
      Dataset data = LoadDataset(features, manifest);
      const int modes = !model_path.empty() + folds.has_value() + loso;
      if (modes != 1) Fail(ErrorKind::kInvalidArgument, "choose exactly one of --model, --folds, --loso");
      ConfusionReport r;
      if (!model_path.empty()) {
        EmotionModel m = EmotionModel::Parse(ReadTextFile(model_path));
        m.config.exec = exec;
        r = Evaluate(m, data, eopt);
      } else {
        if (!eseed) Fail(ErrorKind::kInvalidArgument, "cross-validation needs --seed");
        ecfg.seed = *eseed;
        ecfg.labels = SplitCommas(elabels);
        ecfg.exec = exec;
        plan.folds = folds.value_or(10);
        plan.leave_one_speaker_out = loso;
        r = CrossValidate(data, ecfg, eopt, plan);
      }
      WriteReport(r, out);
      return 0;
    }
    if (*enhance) {
      EnhanceStats stats;
      SaveWav(out, Enhance(LoadWav(in), algorithm, ecf, &stats));
      std::printf("frames %d\n", stats.frames);
      if (algorithm == EnhanceAlgorithm::kMasking)
        std::printf("alpha %.6g..%.6g\nthreshold_margin_db %.6g\nempty_mu_intervals %ld\ngain %.6g..%.6g\n",
                    stats.alpha_min, stats.alpha_max, stats.threshold_margin, stats.empty_intervals,
                    stats.gain_min, stats.gain_max);
      return 0;
    }
    if (*inject) {
      SaveWav(out, InjectNoise(LoadWav(in), snr_db, seed));
      return 0;
    }
    if (*rate) {
      RatingMatrix rm = ReadRatings(ratings);
      RaterFusion f = RaterWeights(rm);
      std::vector<std::string> names = SplitCommas(emotions);
      if (!names.empty() && static_cast<int>(names.size()) != rm.components())
        Fail(ErrorKind::kInvalidArgument, "--emotions names " + std::to_string(names.size()) +
                                              " components, ratings have " + std::to_string(rm.components()));
      std::string text = "# rater\tweight\tmean_consistency\n";
      for (int i = 0; i < rm.raters(); ++i)
        text += "rater\t" + rm.rater_ids[i] + "\t" + FormatDouble(f.weights(i)) + "\t" +
                FormatDouble(f.mean_consistency(i)) + "\n";
      text += "# sample\tlabel\tfused components\n";
      for (int j = 0; j < rm.samples(); ++j) {
        text += "sample\t" + rm.sample_ids[j] + "\t" +
                (names.empty() ? std::to_string(f.labels[j]) : names[f.labels[j]]);
        for (int k = 0; k < f.fused.cols(); ++k) text += "\t" + FormatDouble(f.fused(j, k));
        text += "\n";
      }
      if (out.empty()) {
        std::cout << text;
      } else {
        WriteTextFile(out, text);
      }
      return 0;
    }
    if (*norm) {
      Dataset data = LoadDataset(features, manifest);
      std::vector<std::string> speakers;
      for (const ClipMeta &m : data.meta) speakers.push_back(m.speaker.value_or(""));
      NormalizeResult r = FitSpeakerNormalizer(data.table.values, speakers, ncfg, seed);
      FeatureTable t;
      t.registry_version = data.table.registry_version + "+speaker-norm";
      t.ids = data.table.ids;
      t.values = r.features;
      WriteFeatureTable(out, t);
      std::cout << r.clustering.k() << " clusters, " << r.clustering.iterations << " iterations\n";
      return 0;
    }
    if (*fuse) {
      Dataset data = LoadDataset(features, manifest);
      PhysioTable physio = ReadPhysio(physio_path);
      fcfg.labels = SplitCommas(flabels);
      fcfg.exec = exec;
      plan.leave_one_speaker_out = loso;
      FusionRun run = CrossValidateFusion(data, physio, fmode, fcfg, plan, standardize);
      for (auto [name, r] : {std::pair{"speech", &run.speech}, {"physio", &run.physio}, {"fused", &run.fused}}) {
        std::cout << "== " << name << "\n";
        WriteReport(*r, out.empty() ? "" : out + "." + name);
      }
      if (!run.unavailable.empty()) {
        std::cerr << "error: feature fusion unavailable (no physiological row) for:";
        for (const std::string &id : run.unavailable) std::cerr << " " << id;
        std::cerr << "\n";
        return 1;
      }
      return 0;
    }
    if (*synth) {
      if (!synth_emotions.empty()) scfg.emotions = SplitCommas(synth_emotions);
      std::vector<AudioClip> clips = SynthesizeCorpus(scfg, seed);
      WriteCorpus(out, clips);
      std::cout << clips.size() << " clips written to " << out << "\n";
      return 0;
    }
    if (*tracks) {
      std::string text = DumpTracks(ExtractTracks(LoadWav(in), DspConfig{}));
      if (out.empty()) {
        std::cout << text;
      } else {
        WriteTextFile(out, text);
      }
      return 0;
    }
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
