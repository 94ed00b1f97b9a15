// emokit/corpus.cpp

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

#include "emokit/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <spdlog/spdlog.h>

namespace emokit {

namespace {

std::uint32_t ReadU32(const std::vector<std::uint8_t> &b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t ReadU16(const std::vector<std::uint8_t> &b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

void PutU32(std::vector<std::uint8_t> *b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b->push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void PutU16(std::vector<std::uint8_t> *b, std::uint16_t v) {
  b->push_back(static_cast<std::uint8_t>(v & 0xff));
  b->push_back(static_cast<std::uint8_t>(v >> 8));
}

std::optional<std::string> OptField(const std::vector<std::string> &f, std::size_t i) {
  if (i >= f.size() || f[i].empty() || f[i] == "-") return std::nullopt;
  return f[i];
}

}  // namespace

AudioClip ParseWav(const std::vector<std::uint8_t> &b) {
  if (b.size() < 12 || std::string(b.begin(), b.begin() + 4) != "RIFF" ||
      std::string(b.begin() + 8, b.begin() + 12) != "WAVE")
    Fail(ErrorKind::kFormat, "missing RIFF/WAVE header");
  std::size_t pos = 12;
  bool have_fmt = false;
  int rate = 0;
  AudioClip clip;
  while (pos + 8 <= b.size()) {
    std::string id(b.begin() + pos, b.begin() + pos + 4);
    std::uint32_t len = ReadU32(b, pos + 4);
    std::size_t body = pos + 8;
    if (body + len > b.size()) Fail(ErrorKind::kFormat, "chunk '" + id + "' overruns file");
    if (id == "fmt ") {
      if (len < 16) Fail(ErrorKind::kFormat, "fmt chunk too short");
      std::uint16_t format = ReadU16(b, body);
      std::uint16_t channels = ReadU16(b, body + 2);
      rate = static_cast<int>(ReadU32(b, body + 4));
      std::uint16_t bits = ReadU16(b, body + 14);
      if (format != 1)
        Fail(ErrorKind::kUnsupportedFormat, "audio format " + std::to_string(format) + " is not PCM");
      if (channels != 1)
        Fail(ErrorKind::kUnsupportedFormat, std::to_string(channels) + " channels, expected mono");
      if (bits != 16)
        Fail(ErrorKind::kUnsupportedFormat, std::to_string(bits) + "-bit samples, expected 16");
      if (rate <= 0) Fail(ErrorKind::kFormat, "non-positive sample rate");
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) Fail(ErrorKind::kFormat, "data chunk before fmt chunk");
      if (len % 2 != 0) Fail(ErrorKind::kFormat, "odd data chunk length");
      clip.samples.resize(len / 2);
      for (std::size_t i = 0; i < clip.samples.size(); ++i) {
        auto raw = static_cast<std::int16_t>(ReadU16(b, body + 2 * i));
        clip.samples[i] = raw / 32768.0;
      }
      clip.sample_rate = rate;
      if (clip.samples.empty()) Fail(ErrorKind::kFormat, "empty data chunk");
      return clip;
    }
    pos = body + len + (len & 1);
  }
  Fail(ErrorKind::kFormat, have_fmt ? "missing data chunk" : "missing fmt chunk");
}

AudioClip LoadWav(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  AudioClip clip = ParseWav(bytes);
  clip.meta.id = std::filesystem::path(path).stem().string();
  return clip;
}

std::vector<std::uint8_t> EncodeWav(const AudioClip &clip) {
  std::vector<std::uint8_t> b;
  auto n = static_cast<std::uint32_t>(clip.samples.size());
  b.insert(b.end(), {'R', 'I', 'F', 'F'});
  PutU32(&b, 36 + 2 * n);
  b.insert(b.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  PutU32(&b, 16);
  PutU16(&b, 1);
  PutU16(&b, 1);
  PutU32(&b, static_cast<std::uint32_t>(clip.sample_rate));
  PutU32(&b, static_cast<std::uint32_t>(clip.sample_rate) * 2);
  PutU16(&b, 2);
  PutU16(&b, 16);
  b.insert(b.end(), {'d', 'a', 't', 'a'});
  PutU32(&b, 2 * n);
  std::size_t clipped = 0;
  for (double s : clip.samples) {
    double code = std::nearbyint(s * 32768.0);
    if (code > 32767.0 || code < -32768.0) {
      ++clipped;
      code = std::clamp(code, -32768.0, 32767.0);
    }
    PutU16(&b, static_cast<std::uint16_t>(static_cast<std::int16_t>(code)));
  }
  if (clipped > 0) spdlog::warn("wav encode: {} samples saturated", clipped);
  return b;
}

void SaveWav(const std::string &path, const AudioClip &clip) {
  std::vector<std::uint8_t> b = EncodeWav(clip);
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path);
  out.write(reinterpret_cast<const char *>(b.data()), static_cast<std::streamsize>(b.size()));
}

double SignalPower(const std::vector<double> &x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v * v;
  return s / static_cast<double>(x.size());
}

AudioClip InjectNoise(const AudioClip &clip, double snr_db, std::uint64_t seed) {
  if (std::isinf(snr_db) && snr_db > 0) return clip;
  if (std::isnan(snr_db) || std::isinf(snr_db))
    Fail(ErrorKind::kInvalidArgument, "SNR must be finite or +inf");
  double ps = SignalPower(clip.samples);
  if (!(ps > 0.0)) Fail(ErrorKind::kUndefinedSnr, "clip '" + clip.meta.id + "' has zero power");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> noise(clip.samples.size());
  for (double &v : noise) v = gauss(rng);
  double pn = SignalPower(noise);
  double target = ps / std::pow(10.0, snr_db / 10.0);
  double g = std::sqrt(target / pn);
  AudioClip out = clip;
  for (std::size_t i = 0; i < noise.size(); ++i) out.samples[i] += g * noise[i];
  return out;
}

int RatingMatrix::components() const {
  if (entries.empty() || entries[0].empty()) return 0;
  return static_cast<int>(entries[0][0].size());
}

double RatingSimilarity(const std::vector<int> &p, const std::vector<int> &q) {
  if (p.size() != q.size()) Fail(ErrorKind::kInvalidArgument, "rating vectors differ in length");
  double r = 1.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] < 1 || q[k] < 1) Fail(ErrorKind::kInvalidArgument, "intensity below 1");
    r *= static_cast<double>(std::min(p[k], q[k])) / std::max(p[k], q[k]);
  }
  return r;
}

RaterFusion RaterWeights(const RatingMatrix &ratings) {
  const int m = ratings.raters();
  if (m < 2) Fail(ErrorKind::kDegeneratePanel, "need at least two raters, got " + std::to_string(m));
  const int n = ratings.samples();
  const int k = ratings.components();
  if (n == 0 || k == 0) Fail(ErrorKind::kInvalidArgument, "empty rating matrix");
  for (int i = 0; i < m; ++i) {
    if (static_cast<int>(ratings.entries[i].size()) != n)
      Fail(ErrorKind::kInvalidArgument, "rater " + std::to_string(i) + " has a different sample count");
    for (const auto &e : ratings.entries[i]) {
      if (static_cast<int>(e.size()) != k)
        Fail(ErrorKind::kInvalidArgument, "inconsistent emotion component count");
      for (int v : e)
        if (std::find(ratings.scale.begin(), ratings.scale.end(), v) == ratings.scale.end())
          Fail(ErrorKind::kInvalidArgument, "intensity " + std::to_string(v) + " not on the rating scale");
    }
  }

  RaterFusion out;
  out.consistency = Mat::Identity(m, m);
  for (int p = 0; p < m; ++p) {
    for (int q = p + 1; q < m; ++q) {
      double s = 0.0;
      for (int j = 0; j < n; ++j)
        s += RatingSimilarity(ratings.entries[p][j], ratings.entries[q][j]);
      out.consistency(p, q) = out.consistency(q, p) = s / n;
    }
  }
  out.mean_consistency = Vec::Zero(m);
  for (int i = 0; i < m; ++i) {
    double s = 0.0;
    for (int q = 0; q < m; ++q)
      if (q != i) s += out.consistency(i, q);
    out.mean_consistency(i) = s / (m - 1);
  }
  out.weights = out.mean_consistency / out.mean_consistency.sum();

  out.fused = Mat::Zero(n, k);
  out.labels.resize(n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i)
      for (int c = 0; c < k; ++c) out.fused(j, c) += out.weights(i) * ratings.entries[i][j][c];
    int best = 0;
    bool tie = false;
    for (int c = 1; c < k; ++c) {
      if (out.fused(j, c) > out.fused(j, best)) {
        best = c;
        tie = false;
      } else if (out.fused(j, c) == out.fused(j, best)) {
        tie = true;
      }
    }
    if (tie) spdlog::info("rater fusion: tie on sample {}, choosing component {}", j, best);
    out.labels[j] = best;
  }
  return out;
}

std::vector<std::vector<std::string>> SplitFolds(const std::vector<std::string> &ids, int k,
                                                 std::uint64_t seed) {
  const int n = static_cast<int>(ids.size());
  if (k < 2 || k > n)
    Fail(ErrorKind::kInvalidArgument,
         "cannot split " + std::to_string(n) + " ids into " + std::to_string(k) + " folds");
  std::vector<std::string> order = ids;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::string>> folds(k);
  const int base = n / k, extra = n % k;
  int at = 0;
  // The remainder goes to the last folds so 101/10 gives nine 10s then an 11.
  for (int f = 0; f < k; ++f) {
    int size = base + (f >= k - extra ? 1 : 0);
    folds[f].assign(order.begin() + at, order.begin() + at + size);
    at += size;
  }
  return folds;
}

std::vector<std::string> SplitTabs(const std::string &line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

std::vector<std::string> SplitLines(const std::string &text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::string ReadTextFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteTextFile(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path);
  out << text;
}

std::vector<ManifestEntry> ParseManifest(const std::string &text, const std::string &base_dir) {
  std::vector<ManifestEntry> out;
  int lineno = 0;
  for (const std::string &line : SplitLines(text)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f = SplitTabs(line);
    if (f.size() < 2 || f[0].empty())
      Fail(ErrorKind::kFormat, "manifest line " + std::to_string(lineno) + ": need id and path");
    ManifestEntry e;
    e.meta.id = f[0];
    e.path = (std::filesystem::path(base_dir) / f[1]).string();
    e.meta.emotion = OptField(f, 2);
    e.meta.speaker = OptField(f, 3);
    e.meta.session = OptField(f, 4);
    if (auto o = OptField(f, 5)) {
      try {
        std::size_t used = 0;
        e.meta.order = std::stol(*o, &used);
        if (used != o->size()) throw std::invalid_argument(*o);
      } catch (const std::exception &) {
        Fail(ErrorKind::kFormat, "manifest line " + std::to_string(lineno) + ": bad order '" + *o + "'");
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ManifestEntry> ReadManifest(const std::string &path) {
  return ParseManifest(ReadTextFile(path), std::filesystem::path(path).parent_path().string());
}

RatingMatrix ParseRatings(const std::string &text) {
  std::map<std::string, int> rater_at, sample_at;
  RatingMatrix rm;
  std::map<std::pair<int, int>, std::vector<int>> cells;
  int lineno = 0, k = -1;
  for (const std::string &line : SplitLines(text)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f = SplitTabs(line);
    if (f.size() < 3)
      Fail(ErrorKind::kFormat, "rating line " + std::to_string(lineno) + ": too few fields");
    if (k < 0) k = static_cast<int>(f.size()) - 2;
    if (static_cast<int>(f.size()) - 2 != k)
      Fail(ErrorKind::kFormat, "rating line " + std::to_string(lineno) + ": inconsistent K");
    auto s = sample_at.emplace(f[0], static_cast<int>(rm.sample_ids.size()));
    if (s.second) rm.sample_ids.push_back(f[0]);
    auto r = rater_at.emplace(f[1], static_cast<int>(rm.rater_ids.size()));
    if (r.second) rm.rater_ids.push_back(f[1]);
    std::vector<int> v;
    for (std::size_t i = 2; i < f.size(); ++i) {
      try {
        v.push_back(std::stoi(f[i]));
      } catch (const std::exception &) {
        Fail(ErrorKind::kFormat, "rating line " + std::to_string(lineno) + ": bad intensity");
      }
    }
    if (!cells.emplace(std::make_pair(r.first->second, s.first->second), v).second)
      Fail(ErrorKind::kFormat, "duplicate rating for " + f[0] + "/" + f[1]);
  }
  const int m = static_cast<int>(rm.rater_ids.size()), n = static_cast<int>(rm.sample_ids.size());
  rm.entries.assign(m, std::vector<std::vector<int>>(n));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      auto it = cells.find({i, j});
      if (it == cells.end())
        Fail(ErrorKind::kFormat, "rater " + rm.rater_ids[i] + " has no rating for " + rm.sample_ids[j]);
      rm.entries[i][j] = it->second;
    }
  return rm;
}

RatingMatrix ReadRatings(const std::string &path) { return ParseRatings(ReadTextFile(path)); }

}  // namespace emokit
