// emokit/enhance.cpp

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

#include "emokit/enhance.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>

#include <spdlog/spdlog.h>
#include <unsupported/Eigen/FFT>

namespace emokit {

namespace {

using Spectrum = std::vector<std::complex<double>>;
constexpr int kBands = 25;

// Frame-wise analysis and overlap-add. `modify` gets the full spectrum of
// each padded frame and its index.
std::vector<double> Process(const std::vector<double> &x, int n, const std::function<void(Spectrum &, int)> &modify) {
  const int hop = n / 2, len = static_cast<int>(x.size());
  int padded = len + 2 * hop;
  if ((padded - n) % hop) padded += hop - (padded - n) % hop;
  std::vector<double> xp(padded, 0.0), y(padded, 0.0);
  std::copy(x.begin(), x.end(), xp.begin() + hop);
  const std::vector<double> w = SqrtHann(n);
  Eigen::FFT<double> fft;
  std::vector<double> frame(n), out;
  Spectrum spec;
  for (int f = 0, start = 0; start + n <= padded; ++f, start += hop) {
    for (int i = 0; i < n; ++i) frame[i] = xp[start + i] * w[i];
    fft.fwd(spec, frame);
    modify(spec, f);
    fft.inv(out, spec);
    for (int i = 0; i < n; ++i) y[start + i] += out[i] * w[i];
  }
  return std::vector<double>(y.begin() + hop, y.begin() + hop + len);
}

void ApplyGain(Spectrum &spec, int k, double g) {
  const int n = static_cast<int>(spec.size());
  spec[k] *= g;
  if (k != 0 && 2 * k != n) spec[n - k] *= g;
}

int FrameCountFor(int len, int n) { return len < n ? 0 : (len - n) / (n / 2) + 1; }

Vec Powers(const Spectrum &spec) {
  const int half = static_cast<int>(spec.size()) / 2;
  Vec p(half + 1);
  for (int k = 0; k <= half; ++k) p(k) = std::norm(spec[k]);
  return p;
}

void CheckFinite(const Vec &p, int frame) {
  if (!p.allFinite()) Fail(ErrorKind::kNumerical, "non-finite spectrum in frame " + std::to_string(frame));
}

struct Prepared {
  int n = 0;
  Vec noise;
};

Prepared Prepare(const AudioClip &clip, const EnhanceConfig &cfg) {
  Prepared p;
  p.n = EnhanceFrameLength(clip.sample_rate, cfg);
  const int frames = FrameCountFor(static_cast<int>(clip.samples.size()), p.n);
  if (frames < cfg.leading_frames + 1)
    Fail(ErrorKind::kTooShort, "clip '" + clip.meta.id + "' has " + std::to_string(frames) +
                                   " enhancement frames; need " + std::to_string(cfg.leading_frames + 1));
  p.noise = EstimateNoise(clip.samples, p.n, cfg.leading_frames, cfg.noise_floor);
  return p;
}

}  // namespace

int EnhanceFrameLength(int sample_rate, const EnhanceConfig &cfg) {
  int hop = static_cast<int>(std::lround(cfg.frame_ms * 1e-3 * sample_rate / 2.0));
  if (hop < 1) Fail(ErrorKind::kInvalidArgument, "enhancement frame too short");
  return 2 * hop;
}

std::vector<double> SqrtHann(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = std::sqrt(0.5 - 0.5 * std::cos(2.0 * kPi * i / n));
  return w;
}

Vec EstimateNoise(const std::vector<double> &x, int n, int leading, double floor) {
  if (leading < 1) Fail(ErrorKind::kInvalidArgument, "noise estimate needs at least one leading frame");
  if (FrameCountFor(static_cast<int>(x.size()), n) < leading)
    Fail(ErrorKind::kTooShort, "signal shorter than " + std::to_string(leading) + " noise frames");
  const std::vector<double> w = SqrtHann(n);
  Eigen::FFT<double> fft;
  std::vector<double> frame(n);
  Spectrum spec;
  Vec acc = Vec::Zero(n / 2 + 1);
  for (int f = 0; f < leading; ++f) {
    for (int i = 0; i < n; ++i) frame[i] = x[f * (n / 2) + i] * w[i];
    fft.fwd(spec, frame);
    acc += Powers(spec);
  }
  return (acc / leading).cwiseMax(floor);
}

const std::array<double, 26> &BarkEdges() {
  static const std::array<double, 26> edges{0,    100,  200,  300,  400,  510,  630,   770,   920,
                                            1080, 1270, 1480, 1720, 2000, 2320, 2700,  3150,  3700,
                                            4400, 5300, 6400, 7700, 9500, 12000, 15500, 22050};
  return edges;
}

double BarkZ(double hz) {
  const double f = hz / 1000.0;
  return 13.0 * std::atan(0.76 * f) + 3.5 * std::atan((f / 7.5) * (f / 7.5));
}

std::vector<int> BinBands(int nfft, int fs) {
  const auto &e = BarkEdges();
  std::vector<int> band(nfft / 2 + 1, -1);
  for (int k = 0; k <= nfft / 2; ++k) {
    const double f = static_cast<double>(k) * fs / nfft;
    for (int b = 0; b < kBands; ++b)
      if (f >= e[b] && (f < e[b + 1] || (b == kBands - 1 && f <= e[b + 1]))) {
        band[k] = b;
        break;
      }
  }
  return band;
}

double SpreadingDb(double dz) {
  const double u = dz + 0.474;
  return 15.81 + 7.5 * u - 17.5 * std::sqrt(1.0 + u * u);
}

double AbsoluteThresholdDb(double hz, bool literal) {
  const double f = hz / 1000.0;
  const double dip = literal ? std::exp((f - 3.3) * (f - 3.3)) : std::exp(-0.6 * (f - 3.3) * (f - 3.3));
  return 3.64 * std::pow(f, -0.8) - 6.5 * dip + 1e-3 * std::pow(f, 4.0);
}

MaskingAnalysis AnalyzeMasking(const Vec &power, int fs, int nfft, double ref_power, const EnhanceConfig &cfg) {
  const auto &edges = BarkEdges();
  const std::vector<int> bands = BinBands(nfft, fs);
  MaskingAnalysis m;
  m.band_energy = Vec::Zero(kBands);
  m.band_bins.assign(kBands, 0);
  for (int k = 0; k < power.size(); ++k)
    if (bands[k] >= 0) {
      m.band_energy(bands[k]) += power(k);
      ++m.band_bins[bands[k]];
    }

  std::vector<int> live;
  for (int b = 0; b < kBands; ++b)
    if (m.band_bins[b] > 0) live.push_back(b);

  // Spread over bands, renormalized by the spreading gain.
  m.spread = Vec::Zero(kBands);
  Vec gain = Vec::Zero(kBands);
  for (int k : live)
    for (int j : live) {
      double dz = cfg.abs_spreading ? std::abs(k - j) : static_cast<double>(k - j);
      double sf = std::pow(10.0, SpreadingDb(dz) / 10.0);
      m.spread(k) += sf * m.band_energy(j);
      gain(k) += sf;
    }

  // Tonality from the flatness of the band energies.
  double log_sum = 0.0, sum = 0.0;
  bool zero = false;
  for (int b : live) {
    sum += m.band_energy(b);
    if (m.band_energy(b) > 0.0) log_sum += std::log(m.band_energy(b));
    else zero = true;
  }
  if (sum <= 0.0) {
    m.sfm_db = 0.0;
  } else if (zero) {
    m.sfm_db = -kInf;
  } else {
    const double n = static_cast<double>(live.size());
    m.sfm_db = 10.0 * (log_sum / n - std::log(sum / n)) / std::log(10.0);
  }
  m.alpha = std::clamp(m.sfm_db / -60.0, 0.0, 1.0);

  m.threshold = Vec::Zero(kBands);
  m.abs_threshold = Vec::Zero(kBands);
  for (int b : live) {
    const double offset = m.alpha * (14.5 + b) + (1.0 - m.alpha) * 5.5;
    const double t = m.spread(b) * std::pow(10.0, -offset / 10.0) / gain(b);
    const double center = 0.5 * (edges[b] + edges[b + 1]);
    const double t_abs = ref_power * std::pow(10.0, (AbsoluteThresholdDb(center, cfg.literal_abs_threshold) - 90.0) / 10.0);
    m.abs_threshold(b) = t_abs;
    m.threshold(b) = std::max(t, t_abs);
  }
  return m;
}

double PriorSnr(double prev_clean_power, double noise, double gamma, const EnhanceConfig &cfg) {
  double xi = cfg.dd_smoothing * prev_clean_power / noise + (1.0 - cfg.dd_smoothing) * std::max(gamma - 1.0, 0.0);
  return std::max(xi, cfg.xi_floor);
}

double PosteriorSnr(double xi, double gamma) {
  const double r = xi / (1.0 + xi);
  return r * (1.0 + r * gamma);
}

double WienerGain(double xi, double gamma) {
  const double r = xi / (1.0 + xi);
  return std::sqrt(r * (1.0 / gamma + r));
}

double ParametricGain(double xi, double gamma, double mu, bool literal) {
  const double m = xi / (mu + xi);
  return literal ? std::sqrt(m * (1.0 + m * gamma)) : std::sqrt(m * (m + 1.0 / gamma));
}

namespace {

// Positive root M of the distortion bound at level `b`; 0 when b <= 0.
double RootM(double b, double gamma, bool literal) {
  if (b <= 0.0) return 0.0;
  if (literal) return std::max((-1.0 + std::sqrt(4.0 * b * gamma)) / (2.0 * gamma), 0.0);
  // M^2 + M / gamma - b = 0, in the form that does not cancel.
  const double ig = 1.0 / gamma;
  return 2.0 * b / (ig + std::sqrt(ig * ig + 4.0 * b));
}

}  // namespace

MuChoice ChooseMu(double xi, double gamma, double signal, double noise, double threshold, const EnhanceConfig &cfg) {
  MuChoice c;
  if (signal <= threshold) return c;
  const double b = (signal - threshold) / (signal + noise);
  const double cc = (signal + threshold) / (signal + noise);
  const double m_lo = RootM(b, gamma, cfg.literal_root), m_hi = RootM(cc, gamma, cfg.literal_root);
  // M = xi / (mu + xi) falls as mu rises; mu >= 0 keeps M <= 1.
  c.lo = m_hi > 0.0 ? std::max(xi / m_hi - xi, 0.0) : kInf;
  c.hi = m_lo > 0.0 ? xi / m_lo - xi : kInf;
  if (c.lo > c.hi) {
    c.empty = true;
    c.mu = std::abs(c.lo - 1.0) <= std::abs(c.hi - 1.0) ? c.lo : c.hi;
  } else {
    c.mu = std::clamp(1.0, c.lo, c.hi);
  }
  return c;
}

AudioClip SpectralSubtract(const AudioClip &clip, const EnhanceConfig &cfg) {
  const Prepared p = Prepare(clip, cfg);
  AudioClip out = clip;
  out.samples = Process(clip.samples, p.n, [&](Spectrum &spec, int f) {
    Vec py = Powers(spec);
    CheckFinite(py, f);
    for (int k = 0; k < py.size(); ++k) {
      double ps = std::max(py(k) - p.noise(k), 0.0);
      ApplyGain(spec, k, py(k) > 0.0 ? std::sqrt(ps / py(k)) : 0.0);
    }
  });
  return out;
}

AudioClip EnhanceMasking(const AudioClip &clip, const EnhanceConfig &cfg, EnhanceStats *stats) {
  const Prepared p = Prepare(clip, cfg);
  const int bins = p.n / 2 + 1;
  const std::vector<int> bands = BinBands(p.n, clip.sample_rate);
  // A full-scale sine puts N * sum(w^2) / 4 = N^2 / 8 into its band.
  const double ref_power = static_cast<double>(p.n) * p.n / 8.0;
  Vec prev_clean = Vec::Zero(bins);
  EnhanceStats local;
  EnhanceStats &st = stats ? *stats : local;
  st = EnhanceStats{};
  long empty = 0;

  AudioClip out = clip;
  out.samples = Process(clip.samples, p.n, [&](Spectrum &spec, int f) {
    Vec py = Powers(spec);
    CheckFinite(py, f);
    Vec ss = (py - p.noise).cwiseMax(0.0);
    MaskingAnalysis m = AnalyzeMasking(ss, clip.sample_rate, p.n, ref_power, cfg);
    ++st.frames;
    st.alpha_min = std::min(st.alpha_min, m.alpha);
    st.alpha_max = std::max(st.alpha_max, m.alpha);
    for (int b = 0; b < kBands; ++b)
      if (m.band_bins[b] > 0) st.threshold_margin = std::min(st.threshold_margin, m.threshold(b) - m.abs_threshold(b));

    for (int k = 0; k < bins; ++k) {
      const double lambda = p.noise(k);
      const double gamma = std::max(py(k) / lambda, 1e-300);
      const double xi = PosteriorSnr(PriorSnr(prev_clean(k), lambda, gamma, cfg), gamma);
      const double t = bands[k] >= 0 ? m.threshold(bands[k]) / m.band_bins[bands[k]] : kInf;
      MuChoice mu = ChooseMu(xi, gamma, xi * lambda, lambda, t, cfg);
      empty += mu.empty;
      double g = ParametricGain(xi, gamma, mu.mu, cfg.literal_gain);
      if (!std::isfinite(g)) g = 0.0;
      g = std::clamp(g, 0.0, cfg.gain_max);
      st.gain_min = std::min(st.gain_min, g);
      st.gain_max = std::max(st.gain_max, g);
      prev_clean(k) = g * g * py(k);
      ApplyGain(spec, k, g);
    }
  });
  st.empty_intervals = empty;
  if (empty) spdlog::info("masking enhancer: {} bin(s) had an empty mu interval and were clamped", empty);
  return out;
}

AudioClip Enhance(const AudioClip &clip, EnhanceAlgorithm algorithm, const EnhanceConfig &cfg, EnhanceStats *stats) {
  return algorithm == EnhanceAlgorithm::kMasking ? EnhanceMasking(clip, cfg, stats) : SpectralSubtract(clip, cfg);
}

double SnrDb(const std::vector<double> &ref, const std::vector<double> &est) {
  if (ref.size() != est.size()) Fail(ErrorKind::kInvalidArgument, "SNR needs equal-length signals");
  double s = 0.0, e = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    s += ref[i] * ref[i];
    e += (ref[i] - est[i]) * (ref[i] - est[i]);
  }
  if (e == 0.0) return kInf;
  return 10.0 * std::log10(s / e);
}

}  // namespace emokit
