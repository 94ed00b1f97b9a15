// emokit/dsp.cpp

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

#include "emokit/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/FFT>

namespace emokit {

int FrameCount(std::size_t len, int frame_len, int hop) {
  if (len < static_cast<std::size_t>(frame_len)) return 0;
  return static_cast<int>((len - frame_len) / hop) + 1;
}

Vec HammingWindow(int n) {
  Vec w(n);
  if (n == 1) {
    w(0) = 1.0;
    return w;
  }
  for (int i = 0; i < n; ++i) w(i) = 0.54 - 0.46 * std::cos(2.0 * kPi * i / (n - 1));
  return w;
}

FrameSequence FrameSignal(const std::vector<double> &x, int sample_rate, double frame_ms,
                          double hop_ms) {
  if (!(hop_ms > 0.0) || frame_ms < hop_ms)
    Fail(ErrorKind::kInvalidArgument, "need frame_ms >= hop_ms > 0");
  if (sample_rate <= 0) Fail(ErrorKind::kInvalidArgument, "sample rate must be positive");
  FrameSequence fs;
  fs.sample_rate = sample_rate;
  fs.frame_len = static_cast<int>(std::lround(frame_ms * sample_rate / 1000.0));
  fs.hop = std::max(1, static_cast<int>(std::lround(hop_ms * sample_rate / 1000.0)));
  const int t = FrameCount(x.size(), fs.frame_len, fs.hop);
  if (t == 0 || fs.frame_len < 1)
    Fail(ErrorKind::kTooShort, std::to_string(x.size()) + " samples, need at least " +
                                   std::to_string(fs.frame_len));
  fs.raw.resize(t, fs.frame_len);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < fs.frame_len; ++j) fs.raw(i, j) = x[static_cast<std::size_t>(i) * fs.hop + j];
  Vec w = HammingWindow(fs.frame_len);
  fs.frames = fs.raw * w.asDiagonal();
  return fs;
}

void EnergyZcr(const FrameSequence &fs, Vec *energy, Vec *zcr) {
  const int t = fs.count(), n = fs.frame_len;
  energy->resize(t);
  zcr->resize(t);
  for (int i = 0; i < t; ++i) {
    (*energy)(i) = fs.raw.row(i).squaredNorm();
    int changes = 0;
    for (int j = 1; j < n; ++j) {
      double a = fs.raw(i, j - 1), b = fs.raw(i, j);
      if ((a >= 0.0) != (b >= 0.0) && !(a == 0.0 && b == 0.0)) ++changes;
    }
    (*zcr)(i) = n > 1 ? static_cast<double>(changes) / (n - 1) : 0.0;
  }
}

double FramePitch(const double *x, int n, int sample_rate, const DspConfig &cfg) {
  const int lag_min = std::max(2, static_cast<int>(std::floor(sample_rate / cfg.pitch_ceil)));
  const int lag_max = std::min(n - 2, static_cast<int>(std::ceil(sample_rate / cfg.pitch_floor)));
  if (lag_max <= lag_min + 1) return 0.0;
  std::vector<double> y(x, x + n);
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= n;
  for (double &v : y) v -= mean;
  // Prefix sums of squares give both window energies per lag in O(1).
  std::vector<double> cum(n + 1, 0.0);
  for (int i = 0; i < n; ++i) cum[i + 1] = cum[i] + y[i] * y[i];
  if (cum[n] <= 0.0) return 0.0;

  std::vector<double> r(lag_max + 2, 0.0);
  double best = -1.0;
  for (int tau = lag_min - 1; tau <= lag_max + 1 && tau < n; ++tau) {
    double s = 0.0;
    for (int i = 0; i + tau < n; ++i) s += y[i] * y[i + tau];
    double e1 = cum[n - tau], e2 = cum[n] - cum[tau];
    r[tau] = (e1 > 0.0 && e2 > 0.0) ? s / std::sqrt(e1 * e2) : 0.0;
    if (tau >= lag_min && tau <= lag_max) best = std::max(best, r[tau]);
  }
  if (best < cfg.voicing_threshold) return 0.0;
  // Take the first interior peak whose interpolated height is close to the
  // global maximum; later peaks are period multiples.
  for (int tau = lag_min; tau <= lag_max; ++tau) {
    if (!(r[tau] > r[tau - 1] && r[tau] >= r[tau + 1])) continue;
    double den = r[tau - 1] - 2.0 * r[tau] + r[tau + 1];
    double delta = den < 0.0 ? 0.5 * (r[tau - 1] - r[tau + 1]) / den : 0.0;
    double height = r[tau] - 0.25 * (r[tau - 1] - r[tau + 1]) * delta;
    if (height < 0.75 * best || height < cfg.voicing_threshold) continue;
    double f0 = sample_rate / (tau + delta);
    if (f0 < cfg.pitch_floor || f0 > cfg.pitch_ceil) return 0.0;
    return f0;
  }
  return 0.0;
}

Vec MedianFilter(const Vec &v, int width) {
  Vec out = v;
  const int half = width / 2;
  if (half < 1) return out;
  std::vector<double> win(width);
  for (int i = half; i + half < v.size(); ++i) {
    for (int k = 0; k < width; ++k) win[k] = v(i - half + k);
    std::nth_element(win.begin(), win.begin() + half, win.end());
    out(i) = win[half];
  }
  return out;
}

Vec PitchTrack(const FrameSequence &fs, const DspConfig &cfg) {
  if (fs.sample_rate < 2.0 * cfg.pitch_ceil)
    Fail(ErrorKind::kInvalidArgument, "sample rate below twice the pitch ceiling");
  const int t = fs.count();
  Vec energy = fs.raw.rowwise().squaredNorm();
  const double gate = (t > 0 ? energy.maxCoeff() : 0.0) * std::pow(10.0, -cfg.energy_gate_db / 10.0);
  Vec p = Vec::Zero(t);
  for (int i = 0; i < t; ++i) {
    if (!(energy(i) > 0.0) || energy(i) < gate) continue;
    Eigen::RowVectorXd row = fs.raw.row(i);
    p(i) = FramePitch(row.data(), fs.frame_len, fs.sample_rate, cfg);
  }
  return MedianFilter(p, cfg.median_width);
}

int LpcOrder(int sample_rate) {
  return static_cast<int>(std::lround(2.0 + sample_rate / 1000.0));
}

Vec Lpc(const double *x, int n, int order) {
  std::vector<double> r(order + 1, 0.0);
  for (int k = 0; k <= order; ++k)
    for (int i = 0; i + k < n; ++i) r[k] += x[i] * x[i + k];
  if (!(r[0] > 0.0)) return Vec();
  Vec a = Vec::Zero(order + 1);
  a(0) = 1.0;
  double err = r[0];
  Vec tmp(order + 1);
  for (int i = 1; i <= order; ++i) {
    double acc = r[i];
    for (int j = 1; j < i; ++j) acc += a(j) * r[i - j];
    double k = -acc / err;
    tmp = a;
    for (int j = 1; j < i; ++j) a(j) = tmp(j) + k * tmp(i - j);
    a(i) = k;
    err *= (1.0 - k * k);
    if (!(err > 0.0)) return Vec();
  }
  return a;
}

std::vector<Resonance> LpcResonances(const Vec &a, int sample_rate, double max_bandwidth) {
  std::vector<Resonance> out;
  const int p = static_cast<int>(a.size()) - 1;
  if (p < 1) return out;
  // Companion matrix of z^p + a1 z^(p-1) + ... + ap.
  Mat c = Mat::Zero(p, p);
  for (int j = 0; j < p; ++j) c(0, j) = -a(j + 1) / a(0);
  for (int i = 1; i < p; ++i) c(i, i - 1) = 1.0;
  Eigen::EigenSolver<Mat> es(c, false);
  if (es.info() != Eigen::Success) return out;
  for (int i = 0; i < p; ++i) {
    std::complex<double> z = es.eigenvalues()(i);
    double ang = std::arg(z);
    if (!(ang > 0.0 && ang < kPi)) continue;
    double bw = -(sample_rate / kPi) * std::log(std::abs(z));
    if (!(bw > 0.0) || bw >= max_bandwidth) continue;
    out.push_back({ang * sample_rate / (2.0 * kPi), bw});
  }
  std::sort(out.begin(), out.end(),
            [](const Resonance &l, const Resonance &r) { return l.frequency < r.frequency; });
  return out;
}

void Formants(const FrameSequence &fs, const DspConfig &cfg, Mat *freqs, Mat *bandwidths) {
  const int t = fs.count(), n = fs.frame_len;
  const int order = LpcOrder(fs.sample_rate);
  freqs->setConstant(t, 4, kNaN);
  bandwidths->setConstant(t, 4, kNaN);
  Vec w = HammingWindow(n);
  std::vector<double> y(n);
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < n; ++j) {
      double prev = j > 0 ? fs.raw(i, j - 1) : 0.0;
      y[j] = (fs.raw(i, j) - cfg.preemphasis * prev) * w(j);
    }
    Vec a = Lpc(y.data(), n, std::min(order, n - 1));
    if (a.size() == 0) continue;
    std::vector<Resonance> res = LpcResonances(a, fs.sample_rate, cfg.max_formant_bandwidth);
    for (int k = 0; k < 4 && k < static_cast<int>(res.size()); ++k) {
      (*freqs)(i, k) = res[k].frequency;
      (*bandwidths)(i, k) = res[k].bandwidth;
    }
  }
}

int NextPow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

Vec PowerSpectrum(const double *x, int n, int nfft) {
  std::vector<double> buf(nfft, 0.0);
  std::copy(x, x + std::min(n, nfft), buf.begin());
  std::vector<std::complex<double>> spec;
  Eigen::FFT<double> fft;
  fft.fwd(spec, buf);
  Vec p(nfft / 2 + 1);
  for (int k = 0; k <= nfft / 2; ++k) p(k) = std::norm(spec[k]);
  return p;
}

namespace {
double HzToMel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double MelToHz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }
}  // namespace

Mat MelFilterbank(int n_filters, int nfft, int sample_rate) {
  const int bins = nfft / 2 + 1;
  Mat fb = Mat::Zero(n_filters, bins);
  const double top = HzToMel(sample_rate / 2.0);
  std::vector<double> edge(n_filters + 2);
  for (int i = 0; i < n_filters + 2; ++i) edge[i] = MelToHz(top * i / (n_filters + 1));
  for (int m = 0; m < n_filters; ++m) {
    double lo = edge[m], mid = edge[m + 1], hi = edge[m + 2];
    for (int k = 0; k < bins; ++k) {
      double f = static_cast<double>(k) * sample_rate / nfft;
      if (f > lo && f < mid) fb(m, k) = (f - lo) / (mid - lo);
      else if (f >= mid && f < hi) fb(m, k) = (hi - f) / (hi - mid);
    }
  }
  return fb;
}

Mat Mfcc(const FrameSequence &fs, const DspConfig &cfg) {
  if (fs.frame_len < 64) Fail(ErrorKind::kInvalidArgument, "MFCC needs frames of at least 64 samples");
  const int t = fs.count(), nfft = NextPow2(fs.frame_len);
  const int m = cfg.mel_filters, c = cfg.mfcc_count;
  Mat fb = MelFilterbank(m, nfft, fs.sample_rate);
  // Orthonormal DCT-II basis.
  Mat dct(c, m);
  for (int k = 0; k < c; ++k)
    for (int j = 0; j < m; ++j)
      dct(k, j) = std::sqrt((k == 0 ? 1.0 : 2.0) / m) * std::cos(kPi * k * (j + 0.5) / m);
  Mat out(t, c);
  for (int i = 0; i < t; ++i) {
    Eigen::RowVectorXd row = fs.frames.row(i);
    Vec p = PowerSpectrum(row.data(), fs.frame_len, nfft);
    Vec e = fb * p;
    for (int j = 0; j < m; ++j) e(j) = std::log(std::max(e(j), cfg.mel_log_floor));
    out.row(i) = (dct * e).transpose();
  }
  return out;
}

double FrameHnr(const double *x, int n, int period, double relative_floor) {
  if (period < 1) return kNaN;
  const int periods = n / period;
  if (periods < 2) return kNaN;
  std::vector<double> avg(period, 0.0);
  for (int i = 0; i < periods; ++i)
    for (int u = 0; u < period; ++u) avg[u] += x[i * period + u];
  for (double &v : avg) v /= periods;
  double h = 0.0, noise = 0.0;
  for (int u = 0; u < period; ++u) h += avg[u] * avg[u];
  h *= periods;
  for (int i = 0; i < periods; ++i)
    for (int u = 0; u < period; ++u) {
      double d = x[i * period + u] - avg[u];
      noise += d * d;
    }
  if (!(h > 0.0)) return kNaN;
  return 10.0 * std::log10(h / (noise + relative_floor * h));
}

Vec Hnr(const FrameSequence &fs, const Vec &pitch, const DspConfig &cfg) {
  const int t = fs.count();
  Vec out = Vec::Constant(t, kNaN);
  for (int i = 0; i < t; ++i) {
    if (!(pitch(i) > 0.0)) continue;
    int period = static_cast<int>(std::lround(fs.sample_rate / pitch(i)));
    Eigen::RowVectorXd row = fs.raw.row(i);
    out(i) = FrameHnr(row.data(), fs.frame_len, period, cfg.hnr_relative_floor);
  }
  return out;
}

bool BandAvailable(std::pair<double, double> band, int sample_rate) {
  return band.second <= sample_rate / 2.0 && band.first < band.second;
}

std::vector<double> BandPass(const std::vector<double> &x, int sample_rate, double lo, double hi) {
  const int len = static_cast<int>(x.size());
  const int nfft = NextPow2(2 * len);
  std::vector<double> buf(nfft, 0.0);
  std::copy(x.begin(), x.end(), buf.begin());
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, buf);
  for (int k = 0; k < nfft; ++k) {
    int kk = k <= nfft / 2 ? k : nfft - k;
    double f = static_cast<double>(kk) * sample_rate / nfft;
    if (f < lo || f > hi) spec[k] = 0.0;
  }
  std::vector<double> out;
  fft.inv(out, spec);
  out.resize(len);
  return out;
}

Mat BandHnr(const std::vector<double> &x, int sample_rate, const Vec &pitch,
            const DspConfig &cfg) {
  const int nb = static_cast<int>(cfg.hnr_bands.size());
  const int t = static_cast<int>(pitch.size());
  Mat out = Mat::Constant(t, nb, kNaN);
  for (int b = 0; b < nb; ++b) {
    if (!BandAvailable(cfg.hnr_bands[b], sample_rate)) continue;
    if (!(pitch.array() > 0.0).any()) continue;
    std::vector<double> y = BandPass(x, sample_rate, cfg.hnr_bands[b].first, cfg.hnr_bands[b].second);
    FrameSequence fs = FrameSignal(y, sample_rate, cfg.frame_ms, cfg.hop_ms);
    out.col(b) = Hnr(fs, pitch, cfg);
  }
  return out;
}

TrackSet ExtractTracks(const AudioClip &clip, const DspConfig &cfg) {
  FrameSequence fs = FrameSignal(clip, cfg.frame_ms, cfg.hop_ms);
  TrackSet t;
  t.sample_rate = clip.sample_rate;
  t.hop = fs.hop;
  t.clip_len = clip.samples.size();
  EnergyZcr(fs, &t.energy, &t.zcr);
  t.pitch = PitchTrack(fs, cfg);
  Formants(fs, cfg, &t.formants, &t.bandwidths);
  t.mfcc = Mfcc(fs, cfg);
  t.hnr = Hnr(fs, t.pitch, cfg);
  t.band_hnr = BandHnr(clip.samples, clip.sample_rate, t.pitch, cfg);
  for (const auto &band : cfg.hnr_bands) t.band_available.push_back(BandAvailable(band, clip.sample_rate));
  t.voiced.resize(fs.count());
  for (int i = 0; i < fs.count(); ++i) t.voiced[i] = t.pitch(i) > 0.0;
  return t;
}

namespace {
void Cell(std::ostringstream &os, double v) {
  os << '\t';
  if (IsAbsent(v)) os << "NA";
  else os << FormatDouble(v);
}
}  // namespace

std::string DumpTracks(const TrackSet &t) {
  std::ostringstream os;
  os << "frame\tenergy\tzcr\tpitch\tvoiced";
  for (int k = 1; k <= 4; ++k) os << "\tF" << k;
  for (int k = 1; k <= 4; ++k) os << "\tB" << k;
  for (int k = 0; k < t.mfcc.cols(); ++k) os << "\tmfcc" << k;
  os << "\thnr";
  for (int b = 0; b < t.band_hnr.cols(); ++b) os << "\thnr_band" << b;
  os << '\n';
  for (int i = 0; i < t.frames(); ++i) {
    os << i;
    Cell(os, t.energy(i));
    Cell(os, t.zcr(i));
    Cell(os, t.pitch(i));
    os << '\t' << (t.voiced[i] ? 1 : 0);
    for (int k = 0; k < 4; ++k) Cell(os, t.formants(i, k));
    for (int k = 0; k < 4; ++k) Cell(os, t.bandwidths(i, k));
    for (int k = 0; k < t.mfcc.cols(); ++k) Cell(os, t.mfcc(i, k));
    Cell(os, t.hnr(i));
    for (int b = 0; b < t.band_hnr.cols(); ++b) Cell(os, t.band_hnr(i, b));
    os << '\n';
  }
  return os.str();
}

}  // namespace emokit
