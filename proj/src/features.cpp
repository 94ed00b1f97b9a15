// emokit/features.cpp

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

#include "emokit/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <spdlog/spdlog.h>
#include <unsupported/Eigen/FFT>

namespace emokit {

namespace {

const char *const kStatNames[6] = {"mean", "max", "min", "median", "range", "variance"};

void AddStats(std::vector<FeatureInfo> *reg, const std::string &group) {
  for (const char *s : kStatNames) {
    int row = static_cast<int>(reg->size()) + 1;
    reg->push_back({row, group + "_" + s, group});
  }
}

void AddSingle(std::vector<FeatureInfo> *reg, const std::string &name, const std::string &group) {
  int row = static_cast<int>(reg->size()) + 1;
  reg->push_back({row, name, group});
}

std::vector<FeatureInfo> BuildRegistry() {
  std::vector<FeatureInfo> r;
  for (const char *track : {"energy", "pitch", "zcr"}) {
    AddStats(&r, track);
    AddStats(&r, std::string(track) + "_d1");
    AddStats(&r, std::string(track) + "_d2");
  }
  AddSingle(&r, "speech_rate", "speech_rate");
  AddSingle(&r, "pitch_jitter1", "pitch_jitter");
  AddSingle(&r, "pitch_jitter2", "pitch_jitter");
  AddSingle(&r, "band_ratio_0_250", "band_ratio");
  AddSingle(&r, "band_ratio_0_650", "band_ratio");
  AddSingle(&r, "band_ratio_above_4k", "band_ratio");
  AddSingle(&r, "energy_jitter", "energy_jitter");
  for (const char *v : {"voiced_frames", "unvoiced_frames", "unvoiced_to_voiced_frames",
                        "voiced_to_total_frames", "voiced_regions", "unvoiced_regions",
                        "voiced_to_unvoiced_regions", "voiced_to_total_regions",
                        "longest_voiced", "longest_unvoiced"})
    AddSingle(&r, v, "voicing");
  for (const char *h : {"hnr", "hnr_0_400", "hnr_400_2000", "hnr_2000_5000"}) AddStats(&r, h);
  for (const char *kind : {"f", "b"}) {
    for (const char *suffix : {"", "_d1", "_d2"})
      for (int k = 1; k <= 4; ++k) AddStats(&r, kind + std::to_string(k) + suffix);
    if (std::string(kind) == "f")
      for (int order = 1; order <= 2; ++order)
        for (int k = 1; k <= 4; ++k)
          AddSingle(&r, "f" + std::to_string(k) + "_jitter" + std::to_string(order), "formant_jitter");
  }
  for (const char *suffix : {"", "_d1", "_d2"})
    for (int c = 0; c <= 12; ++c) AddStats(&r, "mfcc" + std::to_string(c) + suffix);
  return r;
}

std::vector<double> ToVector(const Vec &v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::vector<double> Present(const Vec &v) {
  std::vector<double> out;
  for (int i = 0; i < v.size(); ++i)
    if (!IsAbsent(v(i))) out.push_back(v(i));
  return out;
}

class Writer {
 public:
  explicit Writer(FeatureVector *fv) : fv_(fv) {}

  void Stats(const std::vector<double> &v, const std::string &group) {
    std::optional<Stats6> s = ComputeStats6(v);
    if (!s) {
      Impute(group, 6);
      return;
    }
    for (double x : {s->mean, s->max, s->min, s->median, s->range, s->variance}) Put(x);
  }

  void Jit(const std::vector<double> &v, int order, const std::string &group) {
    double mean = 0.0;
    for (double x : v) mean += x;
    if (static_cast<int>(v.size()) < order + 1 || !(mean > 0.0)) {
      Impute(group, 1);
      return;
    }
    Put(Jitter(v, order));
  }

  void Put(double x) { fv_->values(at_++) = std::isfinite(x) ? x : 0.0; }

  int at() const { return at_; }

 private:
  void Impute(const std::string &group, int n) {
    if (std::find(fv_->imputed.begin(), fv_->imputed.end(), group) == fv_->imputed.end())
      fv_->imputed.push_back(group);
    for (int i = 0; i < n; ++i) Put(0.0);
  }

  FeatureVector *fv_;
  int at_ = 0;
};

}  // namespace

const std::vector<FeatureInfo> &Registry() {
  static const std::vector<FeatureInfo> reg = BuildRegistry();
  return reg;
}

int RegistryIndex(const std::string &name) {
  static const std::map<std::string, int> index = [] {
    std::map<std::string, int> m;
    for (const FeatureInfo &f : Registry()) m[f.name] = f.row - 1;
    return m;
  }();
  auto it = index.find(name);
  if (it == index.end()) Fail(ErrorKind::kInvalidArgument, "unknown feature '" + name + "'");
  return it->second;
}

double Jitter(const std::vector<double> &track, int order) {
  const int n = static_cast<int>(track.size());
  if (order != 1 && order != 2) Fail(ErrorKind::kInvalidArgument, "jitter order must be 1 or 2");
  if (n < order + 1)
    Fail(ErrorKind::kInvalidArgument, "jitter order " + std::to_string(order) + " needs " +
                                          std::to_string(order + 1) + " values");
  double mean = 0.0;
  for (double v : track) mean += v;
  mean /= n;
  if (mean == 0.0) Fail(ErrorKind::kUndefinedJitter, "track mean is zero");
  double s = 0.0;
  if (order == 1) {
    for (int i = 0; i + 1 < n; ++i) s += std::abs(track[i + 1] - track[i]);
    s /= (n - 1);
  } else {
    for (int i = 1; i + 1 < n; ++i) s += std::abs(2.0 * track[i] - track[i + 1] - track[i - 1]);
    s /= (n - 2);
  }
  return s / mean * 100.0;
}

std::optional<Stats6> ComputeStats6(const std::vector<double> &v) {
  if (v.empty()) return std::nullopt;
  const std::size_t n = v.size();
  Stats6 s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / n;
  s.max = *std::max_element(v.begin(), v.end());
  s.min = *std::min_element(v.begin(), v.end());
  s.range = s.max - s.min;
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.variance = ss / n;
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  s.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return s;
}

std::vector<double> Diff(const std::vector<double> &v) {
  std::vector<double> d;
  for (std::size_t i = 1; i < v.size(); ++i) d.push_back(v[i] - v[i - 1]);
  return d;
}

BandRatios BandEnergyRatios(const AudioClip &clip) {
  const int len = static_cast<int>(clip.samples.size());
  const int nfft = NextPow2(len);
  Vec p = PowerSpectrum(clip.samples.data(), len, nfft);
  BandRatios r;
  const double total = p.sum();
  if (!(total > 0.0)) {
    spdlog::info("band energy ratios: silent clip '{}', ratios set to 0", clip.meta.id);
    return r;
  }
  for (int k = 0; k < p.size(); ++k) {
    double f = static_cast<double>(k) * clip.sample_rate / nfft;
    if (f <= 250.0) r.r_0_250 += p(k);
    if (f <= 650.0) r.r_0_650 += p(k);
    if (f > 4000.0) r.r_above_4k += p(k);
  }
  r.r_0_250 /= total;
  r.r_0_650 /= total;
  r.r_above_4k /= total;
  return r;
}

std::array<double, 10> VoicingStats(const std::vector<bool> &voiced) {
  double nv = 0, nu = 0, rv = 0, ru = 0, longest_v = 0, longest_u = 0;
  int run = 0;
  for (std::size_t i = 0; i < voiced.size(); ++i) {
    voiced[i] ? ++nv : ++nu;
    bool starts = i == 0 || voiced[i] != voiced[i - 1];
    if (starts) {
      run = 0;
      voiced[i] ? ++rv : ++ru;
    }
    ++run;
    if (voiced[i]) longest_v = std::max<double>(longest_v, run);
    else longest_u = std::max<double>(longest_u, run);
  }
  auto ratio = [](double a, double b, const char *what) {
    if (b == 0.0) {
      spdlog::debug("voicing stats: zero denominator for {}", what);
      return 0.0;
    }
    return a / b;
  };
  return {nv,
          nu,
          ratio(nu, nv, "unvoiced/voiced frames"),
          ratio(nv, nv + nu, "voiced/total frames"),
          rv,
          ru,
          ratio(rv, ru, "voiced/unvoiced regions"),
          ratio(rv, rv + ru, "voiced/total regions"),
          longest_v,
          longest_u};
}

double SpeechRate(const std::vector<bool> &voiced, std::size_t clip_len, int sample_rate) {
  if (clip_len == 0 || sample_rate <= 0) return 0.0;
  return VoicingStats(voiced)[4] / (static_cast<double>(clip_len) / sample_rate);
}

FeatureVector Assemble(const TrackSet &t, const AudioClip &clip) {
  FeatureVector fv;
  fv.values = Vec::Zero(kFeatureCount);
  Writer w(&fv);

  std::vector<double> energy = ToVector(t.energy);
  std::vector<double> zcr = ToVector(t.zcr);
  std::vector<double> pitch;
  for (int i = 0; i < t.frames(); ++i)
    if (t.voiced[i]) pitch.push_back(t.pitch(i));

  for (auto [track, name] : {std::pair{&energy, "energy"}, {&pitch, "pitch"}, {&zcr, "zcr"}}) {
    std::vector<double> d1 = Diff(*track), d2 = Diff(d1);
    w.Stats(*track, name);
    w.Stats(d1, std::string(name) + "_d1");
    w.Stats(d2, std::string(name) + "_d2");
  }
  w.Put(SpeechRate(t.voiced, clip.samples.size(), clip.sample_rate));
  w.Jit(pitch, 1, "pitch_jitter");
  w.Jit(pitch, 2, "pitch_jitter");
  BandRatios br = BandEnergyRatios(clip);
  w.Put(br.r_0_250);
  w.Put(br.r_0_650);
  w.Put(br.r_above_4k);
  w.Jit(energy, 1, "energy_jitter");
  for (double v : VoicingStats(t.voiced)) w.Put(v);

  w.Stats(Present(t.hnr), "hnr");
  const char *band_names[3] = {"hnr_0_400", "hnr_400_2000", "hnr_2000_5000"};
  for (int b = 0; b < 3; ++b) {
    std::vector<double> v;
    if (b < t.band_hnr.cols()) v = Present(t.band_hnr.col(b));
    w.Stats(v, band_names[b]);
  }

  for (const Mat *m : {&t.formants, &t.bandwidths}) {
    const char *kind = m == &t.formants ? "f" : "b";
    std::vector<std::vector<double>> base(4), d1(4), d2(4);
    for (int k = 0; k < 4; ++k) {
      base[k] = Present(m->col(k));
      d1[k] = Diff(base[k]);
      d2[k] = Diff(d1[k]);
    }
    for (auto *set : {&base, &d1, &d2})
      for (int k = 0; k < 4; ++k) {
        std::string suffix = set == &base ? "" : set == &d1 ? "_d1" : "_d2";
        w.Stats((*set)[k], kind + std::to_string(k + 1) + suffix);
      }
    if (m == &t.formants)
      for (int order = 1; order <= 2; ++order)
        for (int k = 0; k < 4; ++k) w.Jit(base[k], order, "formant_jitter");
  }

  std::vector<std::vector<double>> c(13), c1(13), c2(13);
  for (int k = 0; k < 13; ++k) {
    c[k] = ToVector(t.mfcc.col(k));
    c1[k] = Diff(c[k]);
    c2[k] = Diff(c1[k]);
  }
  for (auto *set : {&c, &c1, &c2})
    for (int k = 0; k < 13; ++k) {
      std::string suffix = set == &c ? "" : set == &c1 ? "_d1" : "_d2";
      w.Stats((*set)[k], "mfcc" + std::to_string(k) + suffix);
    }

  if (w.at() != kFeatureCount)
    Fail(ErrorKind::kNumerical, "assembled " + std::to_string(w.at()) + " features");
  return fv;
}

FeatureVector ExtractFeatures(const AudioClip &clip, const DspConfig &cfg) {
  return Assemble(ExtractTracks(clip, cfg), clip);
}

FeatureMask FeatureMask::All() { return FeatureMask{std::vector<bool>(kFeatureCount, true)}; }

FeatureMask FeatureMask::Whisper() {
  FeatureMask m = All();
  auto drop = [&m](int first, int last) {
    for (int r = first; r <= last; ++r) m.included[r - 1] = false;
  };
  drop(19, 36);
  drop(56, 57);
  drop(72, 95);
  return m;
}

std::vector<int> FeatureMask::ExcludedRows() const {
  std::vector<int> rows;
  for (std::size_t i = 0; i < included.size(); ++i)
    if (!included[i]) rows.push_back(static_cast<int>(i) + 1);
  return rows;
}

void ApplyMask(const FeatureMask &mask, Vec *values) {
  if (static_cast<int>(mask.included.size()) != values->size())
    Fail(ErrorKind::kInvalidArgument, "mask length does not match feature length");
  if (std::none_of(mask.included.begin(), mask.included.end(), [](bool b) { return b; }))
    Fail(ErrorKind::kInvalidArgument, "mask excludes every feature");
  for (int i = 0; i < values->size(); ++i)
    if (!mask.included[i]) (*values)(i) = 0.0;
}

int FeatureTable::IndexOf(const std::string &id) const {
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (ids[i] == id) return static_cast<int>(i);
  return -1;
}

std::string FormatFeatureTable(const FeatureTable &t) {
  std::ostringstream os;
  os << "#registry " << t.registry_version << '\n';
  if (!t.masked_rows.empty()) {
    os << "#masked ";
    for (std::size_t i = 0; i < t.masked_rows.size(); ++i) os << (i ? "," : "") << t.masked_rows[i];
    os << '\n';
  }
  for (std::size_t i = 0; i < t.ids.size(); ++i) {
    os << t.ids[i];
    for (int j = 0; j < t.values.cols(); ++j) os << '\t' << FormatDouble(t.values(static_cast<int>(i), j));
    os << '\n';
  }
  return os.str();
}

FeatureTable ParseFeatureTable(const std::string &text) {
  FeatureTable t;
  t.registry_version.clear();
  std::vector<std::vector<double>> rows;
  int lineno = 0;
  for (const std::string &line : SplitLines(text)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.rfind("#registry ", 0) == 0) {
      t.registry_version = line.substr(10);
      continue;
    }
    if (line.rfind("#masked ", 0) == 0) {
      std::stringstream ss(line.substr(8));
      std::string tok;
      while (std::getline(ss, tok, ',')) t.masked_rows.push_back(std::stoi(tok));
      continue;
    }
    if (line[0] == '#') continue;
    std::vector<std::string> f = SplitTabs(line);
    std::vector<double> v;
    for (std::size_t i = 1; i < f.size(); ++i) v.push_back(ParseDouble(f[i]));
    if (!rows.empty() && v.size() != rows[0].size())
      Fail(ErrorKind::kFormat, "feature line " + std::to_string(lineno) + ": column count differs");
    t.ids.push_back(f[0]);
    rows.push_back(std::move(v));
  }
  if (t.registry_version.empty()) Fail(ErrorKind::kFormat, "feature file lacks a #registry header");
  const int d = rows.empty() ? 0 : static_cast<int>(rows[0].size());
  t.values.resize(static_cast<int>(rows.size()), d);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < d; ++j) t.values(static_cast<int>(i), j) = rows[i][j];
  return t;
}

FeatureTable ReadFeatureTable(const std::string &path) { return ParseFeatureTable(ReadTextFile(path)); }

void WriteFeatureTable(const std::string &path, const FeatureTable &t) {
  WriteTextFile(path, FormatFeatureTable(t));
}

}  // namespace emokit
