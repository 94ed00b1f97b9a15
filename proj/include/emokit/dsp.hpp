// emokit/dsp.hpp

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

#ifndef EMOKIT_DSP_HPP_
#define EMOKIT_DSP_HPP_

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "emokit/common.hpp"
#include "emokit/corpus.hpp"

namespace emokit {

struct DspConfig {
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  double pitch_floor = 60.0;
  double pitch_ceil = 500.0;
  double voicing_threshold = 0.3;
  double energy_gate_db = 60.0;
  int median_width = 3;
  double preemphasis = 0.97;
  double max_formant_bandwidth = 700.0;
  int mel_filters = 26;
  int mfcc_count = 13;
  double mel_log_floor = 1e-10;
  double hnr_relative_floor = 1e-12;
  std::vector<std::pair<double, double>> hnr_bands{{0.0, 400.0}, {400.0, 2000.0}, {2000.0, 5000.0}};
};

struct FrameSequence {
  Mat raw;     // T x N, untapered
  Mat frames;  // T x N, Hamming tapered
  int frame_len = 0;
  int hop = 0;
  int sample_rate = 0;
  std::string window = "hamming";
  int count() const { return static_cast<int>(raw.rows()); }
};

int FrameCount(std::size_t len, int frame_len, int hop);
FrameSequence FrameSignal(const std::vector<double> &x, int sample_rate, double frame_ms,
                          double hop_ms);
inline FrameSequence FrameSignal(const AudioClip &clip, double frame_ms, double hop_ms) {
  return FrameSignal(clip.samples, clip.sample_rate, frame_ms, hop_ms);
}

Vec HammingWindow(int n);

void EnergyZcr(const FrameSequence &fs, Vec *energy, Vec *zcr);

// Normalised-autocorrelation pitch for one untapered frame, before median
// smoothing. Returns 0 when the peak is below the voicing threshold.
double FramePitch(const double *x, int n, int sample_rate, const DspConfig &cfg);
Vec PitchTrack(const FrameSequence &fs, const DspConfig &cfg);
Vec MedianFilter(const Vec &v, int width);

// Autocorrelation LPC via Levinson-Durbin. Returns a[0..order] with
// a[0] = 1, or an empty vector when the normal equations are singular.
Vec Lpc(const double *x, int n, int order);
int LpcOrder(int sample_rate);

struct Resonance {
  double frequency;
  double bandwidth;
};
// Resonances of 1/A(z) with angle in (0, pi) and bandwidth under the limit,
// ascending in frequency.
std::vector<Resonance> LpcResonances(const Vec &a, int sample_rate, double max_bandwidth);

// T x 4 frequency and bandwidth tracks; absent slots are NaN.
void Formants(const FrameSequence &fs, const DspConfig &cfg, Mat *freqs, Mat *bandwidths);

Mat MelFilterbank(int n_filters, int nfft, int sample_rate);
Mat Mfcc(const FrameSequence &fs, const DspConfig &cfg);

// One frame. NaN when the pitch is zero or fewer than two periods fit.
double FrameHnr(const double *x, int n, int period, double relative_floor);
Vec Hnr(const FrameSequence &fs, const Vec &pitch, const DspConfig &cfg);

// Zero-phase ideal band-pass via a zero-padded FFT mask.
std::vector<double> BandPass(const std::vector<double> &x, int sample_rate, double lo, double hi);
bool BandAvailable(std::pair<double, double> band, int sample_rate);
Mat BandHnr(const std::vector<double> &x, int sample_rate, const Vec &pitch,
            const DspConfig &cfg);

// |X(k)|^2 for k = 0..nfft/2 of one (already tapered) frame.
Vec PowerSpectrum(const double *x, int n, int nfft);
int NextPow2(int n);

struct TrackSet {
  Vec energy, zcr, pitch;
  Mat formants, bandwidths;  // T x 4, NaN absent
  Mat mfcc;                  // T x 13
  Vec hnr;                   // NaN absent
  Mat band_hnr;              // T x bands, NaN absent or unavailable
  std::vector<bool> band_available;
  std::vector<bool> voiced;
  int sample_rate = 0;
  int hop = 0;
  std::size_t clip_len = 0;
  int frames() const { return static_cast<int>(energy.size()); }
};

TrackSet ExtractTracks(const AudioClip &clip, const DspConfig &cfg);

// Tab-separated per-frame rows with a named header; absent values are NA.
std::string DumpTracks(const TrackSet &t);

}  // namespace emokit

#endif  // EMOKIT_DSP_HPP_
