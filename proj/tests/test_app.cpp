#include <filesystem>
#include <random>

#include "doctest.h"
#include "emokit/app.hpp"

using namespace emokit;

namespace {

Dataset SynthDataset(std::uint64_t seed, SynthCorpusConfig cfg = {}) {
  std::vector<AudioClip> clips = SynthesizeCorpus(cfg, seed);
  FeatureTable t;
  std::vector<ClipMeta> meta;
  for (const AudioClip &c : clips) {
    t.ids.push_back(c.meta.id);
    meta.push_back(c.meta);
  }
  t.values = ExtractClips(clips, DspConfig{}, Exec::kParallel);
  return MakeDataset(t, meta);
}

TrainConfig SmallConfig(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.mixtures = 3;
  cfg.seed = seed;
  return cfg;
}

// Gaussian blobs, one per label, in `d` dimensions.
Dataset Blobs(const std::vector<std::string> &labels, int per, int d, double spread, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  FeatureTable t;
  t.values.resize(static_cast<int>(labels.size()) * per, d);
  std::vector<ClipMeta> meta;
  int row = 0;
  for (std::size_t k = 0; k < labels.size(); ++k)
    for (int i = 0; i < per; ++i, ++row) {
      for (int j = 0; j < d; ++j) t.values(row, j) = 10.0 + (j == static_cast<int>(k) % d ? spread : 0.0) + g(rng);
      ClipMeta m;
      m.id = labels[k] + "_" + std::to_string(i);
      m.emotion = labels[k];
      m.speaker = "spk" + std::to_string(i % 3);
      t.ids.push_back(m.id);
      meta.push_back(m);
    }
  return MakeDataset(t, meta);
}

}  // namespace

TEST_CASE("synthetic corpus shape and determinism") {
  SynthCorpusConfig cfg;
  std::vector<AudioClip> a = SynthesizeCorpus(cfg, 4), b = SynthesizeCorpus(cfg, 4);
  CHECK(a.size() == 72);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].samples == b[i].samples);
  // runs of three equal emotions inside one session
  CHECK(*a[0].meta.emotion == *a[2].meta.emotion);
  CHECK(*a[2].meta.emotion != *a[3].meta.emotion);
  CHECK(SynthesizeCorpus(cfg, 5)[0].samples != a[0].samples);
}

TEST_CASE("serial and parallel extraction agree") {
  SynthCorpusConfig cfg;
  cfg.clips_per_emotion = 2;
  cfg.speakers = 1;
  std::vector<AudioClip> clips = SynthesizeCorpus(cfg, 8);
  Mat s = ExtractClips(clips, DspConfig{}, Exec::kSerial);
  Mat p = ExtractClips(clips, DspConfig{}, Exec::kParallel);
  CHECK(s.rows() == 8);
  CHECK(s.cols() == kFeatureCount);
  CHECK((s - p).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("manifest extraction lists missing audio") {
  auto dir = std::filesystem::temp_directory_path() / "emokit_test_app";
  std::filesystem::remove_all(dir);
  SynthCorpusConfig cfg;
  cfg.clips_per_emotion = 1;
  cfg.speakers = 1;
  WriteCorpus(dir.string(), SynthesizeCorpus(cfg, 2));
  std::string manifest = ReadTextFile((dir / "manifest.tsv").string());
  manifest += "ghost\tghost.wav\tsad\tspk0\tsession0\t99\n";
  std::vector<ManifestEntry> entries = ParseManifest(manifest, dir.string());
  ExtractResult r = ExtractManifest(entries, DspConfig{}, FeatureMask::Whisper(), Exec::kParallel);
  CHECK(r.table.ids.size() == 4);
  REQUIRE(r.errors.size() == 1);
  CHECK(r.errors[0].first == "ghost");
  CHECK(r.table.masked_rows == FeatureMask::Whisper().ExcludedRows());
  ExtractResult again = ExtractManifest(entries, DspConfig{}, FeatureMask::Whisper(), Exec::kSerial);
  CHECK(FormatFeatureTable(again.table) == FormatFeatureTable(r.table));
  std::filesystem::remove_all(dir);
}

TEST_CASE("dataset alignment and label validation") {
  Dataset d = Blobs({"a", "b"}, 4, 3, 5.0, 1);
  std::vector<ClipMeta> meta = d.meta;
  meta.pop_back();
  CHECK_THROWS_AS(MakeDataset(d.table, meta), Error);

  CHECK(ResolveLabels(d, {}) == std::vector<std::string>{"a", "b"});
  CHECK(ResolveLabels(d, {"b", "a"}) == std::vector<std::string>{"b", "a"});
  try {
    ResolveLabels(d, {"a", "c"});
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::kInvalidArgument);
    CHECK(std::string(e.what()).find("b_0") != std::string::npos);
  }
}

TEST_CASE("separable data gives an identity confusion matrix") {
  Dataset d = Blobs({"a", "b", "c"}, 30, 6, 12.0, 2);
  TrainConfig cfg = SmallConfig(1);
  cfg.pca_dim = 5;
  EmotionModel m = TrainModel(d, cfg);
  ConfusionReport r = Evaluate(m, d, EvalOptions{});
  Mat p = r.Percent();
  CHECK((p - 100.0 * Mat::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.AverageRecall() == 100.0);
}

TEST_CASE("report rows sum to 100 and unknown rows score rejections") {
  Dataset d = SynthDataset(3);
  EvalOptions opts;
  opts.reject = true;
  FoldPlan plan;
  plan.folds = 4;
  ConfusionReport r = CrossValidate(d, SmallConfig(2), opts, plan);
  CHECK(r.reject_column);
  Mat p = r.Percent();
  for (int i = 0; i < p.rows(); ++i)
    if (r.counts.row(i).sum() > 0) CHECK(p.row(i).sum() == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(r.counts.sum() == d.size());

  ConfusionReport u = NewReport({"a", "b"}, Blobs({"a", "zz"}, 2, 2, 1.0, 3), true);
  CHECK(u.row_labels == std::vector<std::string>{"a", "b", "zz"});
  u.counts(2, 2) = 3;
  u.counts(2, 0) = 1;
  CHECK(u.Recall()(2) == 75.0);
}

TEST_CASE("model file round trip is exact") {
  Dataset d = SynthDataset(6);
  TrainConfig cfg = SmallConfig(5);
  cfg.pairwise = true;
  cfg.pair_mixtures = 2;
  cfg.speaker_norm = true;
  cfg.clusters = 3;
  cfg.speaker_pca = 5;
  EmotionModel m = TrainModel(d, cfg);
  std::string text = m.Serialize();
  CHECK(text.rfind("EMOKIT-MODEL v1\n", 0) == 0);
  EmotionModel back = EmotionModel::Parse(text);
  CHECK(back.Serialize() == text);
  ConfusionReport a = Evaluate(m, d, EvalOptions{}), b = Evaluate(back, d, EvalOptions{});
  CHECK(a.Tsv() == b.Tsv());
  CHECK_THROWS_AS(EmotionModel::Parse("EMOKIT-MODEL v2\n" + text.substr(16)), Error);
}

TEST_CASE("features from another registry or mask are refused") {
  Dataset d = Blobs({"a", "b"}, 10, 4, 8.0, 4);
  EmotionModel m = TrainModel(d, SmallConfig(1));
  Dataset other = d;
  other.table.registry_version = "something-else";
  try {
    Evaluate(m, other, EvalOptions{});
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::kProvenance);
  }
  other = d;
  other.table.masked_rows = {19};
  CHECK_THROWS_AS(Evaluate(m, other, EvalOptions{}), Error);
}

TEST_CASE("same seed reproduces model bytes and reports") {
  Dataset d = SynthDataset(7);
  TrainConfig cfg = SmallConfig(11);
  CHECK(TrainModel(d, cfg).Serialize() == TrainModel(d, cfg).Serialize());
  EvalOptions opts;
  opts.context = true;
  FoldPlan plan;
  plan.folds = 3;
  CHECK(CrossValidate(d, cfg, opts, plan).Tsv() == CrossValidate(d, cfg, opts, plan).Tsv());
  TrainConfig serial = cfg;
  serial.exec = Exec::kSerial;
  CHECK(TrainModel(d, serial).Serialize() == TrainModel(d, cfg).Serialize());
}

TEST_CASE("folds partition the rows") {
  Dataset d = Blobs({"a", "b"}, 9, 2, 1.0, 9);
  FoldPlan plan;
  plan.folds = 4;
  std::vector<int> seen(d.size(), 0);
  for (const auto &f : MakeFolds(d, plan, 3))
    for (int i : f) ++seen[i];
  for (int c : seen) CHECK(c == 1);
  plan.leave_one_speaker_out = true;
  auto loso = MakeFolds(d, plan, 3);
  CHECK(loso.size() == 3);
  for (const auto &f : loso)
    for (int i : f) CHECK(*d.meta[i].speaker == *d.meta[f[0]].speaker);
}

TEST_CASE("context smoothing does not hurt correct-majority chains") {
  // Heavily overlapping classes, chains of constant emotion.
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::string> labels{"neutral", "joy", "sad"};
  FeatureTable t;
  std::vector<ClipMeta> meta;
  const int chains = 60, T = 6;
  t.values.resize(chains * T, 2);
  for (int c = 0; c < chains; ++c)
    for (int k = 0; k < T; ++k) {
      const int row = c * T + k, e = c % 3;
      t.values(row, 0) = 10.0 + 1.2 * (e == 1) + g(rng);
      t.values(row, 1) = 10.0 + 1.2 * (e == 2) + g(rng);
      ClipMeta m;
      m.id = "c" + std::to_string(c) + "_" + std::to_string(k);
      m.emotion = labels[e];
      m.session = "sess" + std::to_string(c);
      m.order = k;
      t.ids.push_back(m.id);
      meta.push_back(m);
    }
  Dataset d = MakeDataset(t, meta);
  TrainConfig cfg = SmallConfig(3);
  cfg.mixtures = 1;
  cfg.pca_dim = 0;
  cfg.lda = false;
  EmotionModel m = TrainModel(d, cfg);
  EvalOptions plain, ctx;
  ctx.context = true;
  ctx.sigma0 = 2.0;
  double before = Evaluate(m, d, plain).AverageRecall();
  double after = Evaluate(m, d, ctx).AverageRecall();
  CHECK(after >= before);
}

TEST_CASE("bimodal fusion runs in both modes") {
  Dataset d = Blobs({"a", "b"}, 20, 6, 1.5, 13);
  PhysioTable physio;
  std::mt19937_64 rng(14);
  std::normal_distribution<double> g(0.0, 1.0);
  physio.values.resize(d.size() - 2, kPhysioDim);
  for (int i = 0; i + 2 < d.size(); ++i) {
    physio.ids.push_back(d.meta[i].id);
    for (int j = 0; j < kPhysioDim; ++j)
      physio.values(i, j) = 5.0 + (j == 0 && *d.meta[i].emotion == "b" ? 1.5 : 0.0) + g(rng);
  }
  TrainConfig cfg = SmallConfig(4);
  cfg.mixtures = 2;
  FoldPlan plan;
  plan.folds = 4;
  FusionRun dec = CrossValidateFusion(d, physio, FusionMode::kDecision, cfg, plan);
  CHECK(dec.speech.counts.sum() == d.size());
  CHECK(dec.physio.counts.sum() == d.size() - 2);
  CHECK(dec.fused.counts.sum() == d.size());
  CHECK(dec.unavailable.empty());
  FusionRun feat = CrossValidateFusion(d, physio, FusionMode::kFeature, cfg, plan);
  CHECK(feat.unavailable.size() == 2);
  CHECK(feat.fused.counts.sum() == d.size() - 2);
}
