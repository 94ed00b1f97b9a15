// emokit/enhance.hpp

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

#ifndef EMOKIT_ENHANCE_HPP_
#define EMOKIT_ENHANCE_HPP_

#include <array>
#include <vector>

#include "emokit/common.hpp"
#include "emokit/corpus.hpp"

namespace emokit {

enum class EnhanceAlgorithm { kSpectralSubtraction, kMasking };

struct EnhanceConfig {
  double frame_ms = 32.0;       // 50% overlap, sqrt-Hann analysis and synthesis
  int leading_frames = 6;       // noise estimate
  double noise_floor = 1e-12;
  double dd_smoothing = 0.98;   // decision-directed prior SNR
  double xi_floor = 1e-6;
  double gain_max = 1.1;
  // Printed-formula variants, all off by default.
  bool abs_spreading = false;          // |k - j| instead of signed k - j
  bool literal_abs_threshold = false;  // exp((f - 3.3)^2) without -0.6
  bool literal_gain = false;           // sqrt(M (1 + M gamma))
  bool literal_root = false;           // (-1 + sqrt(4 B gamma)) / (2 gamma)
};

// Frame length (even) and hop for a sample rate.
int EnhanceFrameLength(int sample_rate, const EnhanceConfig &cfg);
std::vector<double> SqrtHann(int n);

// Mean per-bin power (n/2 + 1 bins) of the first `leading` frames of x.
Vec EstimateNoise(const std::vector<double> &x, int frame_len, int leading, double floor = 1e-12);

// Critical bands 0..24; band 24 is 15500-22050 Hz.
const std::array<double, 26> &BarkEdges();
double BarkZ(double hz);
// Band of each bin 0..nfft/2, -1 above the last edge.
std::vector<int> BinBands(int nfft, int sample_rate);
// Spreading function in dB for maskee - masker distance dz.
double SpreadingDb(double dz);
// Absolute hearing threshold in dB SPL, f in Hz.
double AbsoluteThresholdDb(double hz, bool literal = false);

struct MaskingAnalysis {
  Vec band_energy;    // 25 bands
  Vec spread;
  Vec threshold;      // T'(k) = max(T, T_abs), power units
  Vec abs_threshold;  // power units
  std::vector<int> band_bins;
  double sfm_db = 0.0;
  double alpha = 0.0;
};

// Thresholds for one power spectrum (bins 0..nfft/2). `ref_power` is the
// band power of a full-scale sine, which is placed at 90 dB SPL.
MaskingAnalysis AnalyzeMasking(const Vec &power, int sample_rate, int nfft, double ref_power,
                               const EnhanceConfig &cfg);

// 0.98 |X_prev|^2 / lambda + 0.02 max(gamma - 1, 0), floored.
double PriorSnr(double prev_clean_power, double noise, double gamma, const EnhanceConfig &cfg);
// xi/(1+xi) (1 + xi gamma/(1+xi)).
double PosteriorSnr(double xi_prior, double gamma);
// sqrt(xi/(1+xi) (1/gamma + xi/(1+xi))).
double WienerGain(double xi, double gamma);
// M = xi / (mu + xi); sqrt(M (M + 1/gamma)), or the printed form.
double ParametricGain(double xi, double gamma, double mu, bool literal = false);

struct MuChoice {
  double mu = 1.0;
  double lo = 0.0;
  double hi = kInf;
  bool empty = false;  // interval was empty and mu went to the nearer end
};

// mu for one bin: 1 when the clean power is under the threshold, else 1
// clamped into the interval that keeps the distortion under it.
MuChoice ChooseMu(double xi, double gamma, double signal_power, double noise_power, double threshold,
                  const EnhanceConfig &cfg);

struct EnhanceStats {
  int frames = 0;
  double alpha_min = kInf;
  double alpha_max = -kInf;
  double threshold_margin = kInf;  // min over frames and bands of T' - T_abs
  long empty_intervals = 0;
  double gain_min = kInf;
  double gain_max = -kInf;
};

AudioClip SpectralSubtract(const AudioClip &clip, const EnhanceConfig &cfg = {});
AudioClip EnhanceMasking(const AudioClip &clip, const EnhanceConfig &cfg = {}, EnhanceStats *stats = nullptr);
AudioClip Enhance(const AudioClip &clip, EnhanceAlgorithm algorithm, const EnhanceConfig &cfg = {},
                  EnhanceStats *stats = nullptr);

// 10 log10 of reference power over error power.
double SnrDb(const std::vector<double> &reference, const std::vector<double> &estimate);

}  // namespace emokit

#endif  // EMOKIT_ENHANCE_HPP_
