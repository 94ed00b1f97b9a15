#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "emokit/dsp.hpp"
#include "synth.hpp"

using namespace emokit;

namespace {

DspConfig Cfg() { return DspConfig{}; }

std::vector<double> Interior(const Vec &v) {
  std::vector<double> out;
  for (int i = 2; i + 2 < v.size(); ++i) out.push_back(v(i));
  return out;
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

// Band-limited pulse train: equal-amplitude cosine harmonics up to Nyquist.
std::vector<double> BandLimitedPulses(double f0, int rate, int n) {
  std::vector<double> x(n, 0.0);
  int harmonics = static_cast<int>((rate / 2.0 - 1.0) / f0);
  for (int k = 1; k <= harmonics; ++k)
    for (int i = 0; i < n; ++i) x[i] += std::cos(synth::kTwoPi * k * f0 * i / rate);
  for (double &v : x) v *= 0.9 / harmonics;
  return x;
}

}  // namespace

TEST_CASE("framing: counts follow floor((len - N)/hop) + 1") {
  CHECK(FrameSignal(std::vector<double>(400, 0.1), 16000, 25, 10).count() == 1);
  CHECK(FrameSignal(std::vector<double>(560, 0.1), 16000, 25, 10).count() == 2);
  CHECK(FrameSignal(std::vector<double>(559, 0.1), 16000, 25, 10).count() == 1);
  for (int len = 400; len < 2000; len += 37)
    CHECK(FrameSignal(std::vector<double>(len, 0.0), 16000, 25, 10).count() == (len - 400) / 160 + 1);
  FrameSequence z = FrameSignal(std::vector<double>(1000, 0.0), 16000, 25, 10);
  CHECK(z.frames.isZero(0.0));
  CHECK_THROWS_AS(FrameSignal(std::vector<double>(399, 0.0), 16000, 25, 10), Error);
  CHECK_THROWS_AS(FrameSignal(std::vector<double>(1000, 0.0), 16000, 10, 25), Error);
}

TEST_CASE("energy and zero-crossing rate") {
  std::vector<double> x(800, 0.0);
  for (int i = 400; i < 800; ++i) x[i] = (i % 2 ? -0.3 : 0.3);
  FrameSequence fs = FrameSignal(x, 16000, 25, 25);
  Vec e, z;
  EnergyZcr(fs, &e, &z);
  CHECK(e(0) == 0.0);
  CHECK(z(0) == 0.0);
  CHECK(z(1) == 1.0);
  FrameSequence ones = FrameSignal(std::vector<double>(400, 1.0), 16000, 25, 10);
  EnergyZcr(ones, &e, &z);
  CHECK(e(0) == 400.0);
  CHECK(z(0) == 0.0);
}

TEST_CASE("pitch: 200 Hz sine at 16 kHz") {
  FrameSequence fs = FrameSignal(synth::Sine(200.0, 16000, 8000, 0.5), 16000, 25, 10);
  Vec p = PitchTrack(fs, Cfg());
  for (double v : Interior(p)) CHECK(v == doctest::Approx(200.0).epsilon(0.01));
}

TEST_CASE("pitch: sines and pulse trains across rates within 1%") {
  for (int rate : {11025, 16000, 48000}) {
    for (double f0 : {100.0, 200.0, 300.0}) {
      for (int kind = 0; kind < 2; ++kind) {
        const int n = rate / 2;
        std::vector<double> x = kind == 0 ? synth::Sine(f0, rate, n, 0.5) : BandLimitedPulses(f0, rate, n);
        Vec p = PitchTrack(FrameSignal(x, rate, 25, 10), Cfg());
        std::vector<double> in = Interior(p);
        int voiced = 0;
        for (double v : in) {
          if (v > 0.0) ++voiced;
          CHECK(std::abs(v - f0) <= 0.01 * f0);
        }
        CHECK(voiced == static_cast<int>(in.size()));
      }
    }
  }
}

TEST_CASE("pitch: white-noise frames are unvoiced") {
  int unvoiced = 0;
  for (int seed = 0; seed < 100; ++seed) {
    std::vector<double> x = synth::Noise(400, 1000 + seed, 0.3);
    if (FramePitch(x.data(), 400, 16000, Cfg()) == 0.0) ++unvoiced;
  }
  CHECK(unvoiced >= 95);
  Vec p = PitchTrack(FrameSignal(std::vector<double>(4000, 0.0), 16000, 25, 10), Cfg());
  CHECK(p.isZero(0.0));
}

TEST_CASE("pitch: values lie in {0} or the search range, and rate precondition") {
  std::vector<double> x = synth::Add(synth::Sine(150.0, 16000, 16000, 0.4), synth::Noise(16000, 4, 0.2));
  Vec p = PitchTrack(FrameSignal(x, 16000, 25, 10), Cfg());
  for (int i = 0; i < p.size(); ++i) CHECK((p(i) == 0.0 || (p(i) >= 60.0 && p(i) <= 500.0)));
  CHECK_THROWS_AS(PitchTrack(FrameSignal(std::vector<double>(800, 0.1), 800, 500, 100), Cfg()), Error);
}

TEST_CASE("median filter keeps edges and removes isolated spikes") {
  Vec v(5);
  v << 0, 120, 0, 130, 131;
  Vec m = MedianFilter(v, 3);
  CHECK(m(0) == 0);
  CHECK(m(1) == 0);
  CHECK(m(2) == 120);
  CHECK(m(3) == 130);
  CHECK(m(4) == 131);
}

TEST_CASE("formants: resonances from a known polynomial come back ascending") {
  const int rate = 10000;
  const double freqs[4] = {2500, 500, 3500, 1500};
  const double bws[4] = {120, 60, 150, 90};
  Vec a = Vec::Zero(9);
  a(0) = 1.0;
  int deg = 0;
  for (int k = 0; k < 4; ++k) {
    double r = std::exp(-kPi * bws[k] / rate), th = 2.0 * kPi * freqs[k] / rate;
    double c1 = -2.0 * r * std::cos(th), c2 = r * r;
    Vec next = Vec::Zero(9);
    for (int i = 0; i <= deg; ++i) {
      next(i) += a(i);
      next(i + 1) += c1 * a(i);
      next(i + 2) += c2 * a(i);
    }
    a = next;
    deg += 2;
  }
  std::vector<Resonance> res = LpcResonances(a, rate, 700.0);
  REQUIRE(res.size() == 4);
  const double want_f[4] = {500, 1500, 2500, 3500};
  const double want_b[4] = {60, 90, 120, 150};
  for (int k = 0; k < 4; ++k) {
    CHECK(res[k].frequency == doctest::Approx(want_f[k]).epsilon(1e-9));
    CHECK(res[k].bandwidth == doctest::Approx(want_b[k]).epsilon(1e-9));
  }
}

TEST_CASE("formants: resonator at 700 Hz / 80 Hz driven by a pulse train") {
  const int rate = 16000;
  std::vector<double> x = synth::Resonate(synth::PulseTrain(160, rate), 700.0, 80.0, rate);
  x = synth::Scale(x, 0.05);
  Mat f, b;
  Formants(FrameSignal(x, rate, 25, 10), Cfg(), &f, &b);
  std::vector<double> f1;
  for (int i = 2; i < f.rows(); ++i)
    if (!IsAbsent(f(i, 0))) f1.push_back(f(i, 0));
  REQUIRE(f1.size() > 10);
  CHECK(std::abs(Median(f1) - 700.0) <= 30.0);
}

TEST_CASE("formants: zero frames are absent and present sets are ordered") {
  Mat f, b;
  Formants(FrameSignal(std::vector<double>(1600, 0.0), 16000, 25, 10), Cfg(), &f, &b);
  CHECK(f.array().isNaN().all());
  CHECK(b.array().isNaN().all());

  std::vector<double> src = synth::Add(synth::PulseTrain(128, 32000), synth::Noise(32000, 8, 0.01));
  std::vector<double> x = synth::Resonate(src, 600, 70, 16000);
  x = synth::Add(x, synth::Resonate(src, 1700, 100, 16000));
  x = synth::Add(x, synth::Resonate(src, 2600, 150, 16000));
  x = synth::Scale(x, 0.01);
  Formants(FrameSignal(x, 16000, 25, 10), Cfg(), &f, &b);
  int full = 0;
  for (int i = 0; i < f.rows(); ++i) {
    for (int k = 0; k + 1 < 4; ++k)
      if (!IsAbsent(f(i, k + 1))) {
        CHECK(!IsAbsent(f(i, k)));
        CHECK(f(i, k) < f(i, k + 1));
      }
    if (!IsAbsent(f(i, 3))) ++full;
    for (int k = 0; k < 4; ++k)
      if (!IsAbsent(b(i, k))) CHECK(b(i, k) < 700.0);
  }
  CHECK(full > 0);
}

TEST_CASE("mfcc: silence gives a flat floored log spectrum") {
  Mat c = Mfcc(FrameSignal(std::vector<double>(1200, 0.0), 16000, 25, 10), Cfg());
  // Orthonormal DCT of a constant log(floor) over 26 filters.
  const double c0 = std::sqrt(26.0) * std::log(1e-10);
  for (int i = 0; i < c.rows(); ++i) {
    CHECK(c(i, 0) == doctest::Approx(c0).epsilon(1e-12));
    for (int k = 1; k < 13; ++k) CHECK(std::abs(c(i, k)) < 1e-9);
  }
}

TEST_CASE("mfcc: doubling amplitude shifts only c0") {
  std::vector<double> x = synth::Noise(4000, 21, 0.1);
  Mat a = Mfcc(FrameSignal(x, 16000, 25, 10), Cfg());
  Mat b = Mfcc(FrameSignal(synth::Scale(x, 2.0), 16000, 25, 10), Cfg());
  for (int i = 0; i < a.rows(); ++i) {
    CHECK(b(i, 0) - a(i, 0) == doctest::Approx(std::sqrt(26.0) * std::log(4.0)).epsilon(1e-9));
    for (int k = 1; k < 13; ++k) CHECK(std::abs(b(i, k) - a(i, k)) < 1e-6);
  }
  CHECK(Mfcc(FrameSignal(x, 16000, 25, 10), Cfg()) == a);
}

TEST_CASE("hnr: exact periodicity reaches the floor") {
  std::vector<double> x = synth::Sawtooth(100, 400);
  CHECK(FrameHnr(x.data(), 400, 100, 1e-12) >= 60.0);
  CHECK(IsAbsent(FrameHnr(x.data(), 400, 0, 1e-12)));
  CHECK(IsAbsent(FrameHnr(x.data(), 400, 201, 1e-12)));
}

TEST_CASE("hnr: equal-power noise gives about 0 dB") {
  // With n periods averaged, E[H/N] = (1 + 1/n) / (1 - 1/n): 0.87 dB at n = 10.
  const int period = 40, n = 400;
  std::vector<double> h;
  for (int seed = 0; seed < 200; ++seed) {
    std::vector<double> s = synth::Sawtooth(period, n, 1.0);
    double ps = synth::Power(s);
    std::vector<double> x = synth::Add(s, synth::Noise(n, seed, std::sqrt(ps)));
    h.push_back(FrameHnr(x.data(), n, period, 1e-12));
  }
  double mean = 0.0;
  for (double v : h) mean += v;
  mean /= h.size();
  CHECK(std::abs(mean) <= 2.0);
  CHECK(mean == doctest::Approx(10.0 * std::log10(1.1 / 0.9)).epsilon(0.25));
}

TEST_CASE("hnr: more noise never raises clip-level HNR") {
  const int rate = 16000;
  std::vector<double> s = synth::Harmonic(200.0, rate, rate, 8, 0.3);
  std::vector<double> noise = synth::Noise(rate, 77, 1.0);
  Vec pitch = Vec::Constant(FrameSignal(s, rate, 25, 10).count(), 200.0);
  double prev = kInf;
  for (double g : {0.001, 0.01, 0.03, 0.1, 0.3, 1.0}) {
    FrameSequence fs = FrameSignal(synth::Add(s, noise, g), rate, 25, 10);
    Vec h = Hnr(fs, pitch, Cfg());
    double mean = h.mean();
    CHECK(mean < prev);
    prev = mean;
  }
}

TEST_CASE("hnr: unvoiced frames are absent") {
  FrameSequence fs = FrameSignal(synth::Noise(2000, 3), 16000, 25, 10);
  Vec h = Hnr(fs, Vec::Zero(fs.count()), Cfg());
  CHECK(h.array().isNaN().all());
}

TEST_CASE("band hnr: harmonics confined to 400-2000 Hz") {
  const int rate = 16000, n = rate;
  std::vector<double> x(n, 0.0);
  for (int k = 3; k <= 9; ++k)
    x = synth::Add(x, synth::Sine(200.0 * k, rate, n, 0.1));
  x = synth::Add(x, synth::Noise(n, 12, 0.02));
  Vec pitch = Vec::Constant(FrameSignal(x, rate, 25, 10).count(), 200.0);
  Mat h = BandHnr(x, rate, pitch, Cfg());
  double lo = Interior(h.col(0)).empty() ? 0 : Median(Interior(h.col(0)));
  double mid = Median(Interior(h.col(1)));
  double hi = Median(Interior(h.col(2)));
  CHECK(mid > 20.0);
  CHECK(lo < 5.0);
  CHECK(hi < 5.0);
}

TEST_CASE("band hnr: availability and silence") {
  CHECK(BandAvailable({2000, 5000}, 11025));
  CHECK(!BandAvailable({2000, 5000}, 8000));
  std::vector<double> x = synth::Harmonic(150.0, 11025, 11025, 20, 0.2);
  Vec pitch = Vec::Constant(FrameSignal(x, 11025, 25, 10).count(), 150.0);
  Mat h = BandHnr(x, 11025, pitch, Cfg());
  CHECK(!h.col(2).array().isNaN().all());
  Mat h8 = BandHnr(std::vector<double>(8000, 0.1), 8000, Vec::Constant(98, 150.0), Cfg());
  CHECK(h8.col(2).array().isNaN().all());
  std::vector<double> silent(16000, 0.0);
  Mat hs = BandHnr(silent, 16000, Vec::Zero(FrameSignal(silent, 16000, 25, 10).count()), Cfg());
  CHECK(hs.array().isNaN().all());
}

TEST_CASE("band pass is zero phase") {
  std::vector<double> x = synth::Sine(1000.0, 16000, 4096, 0.5, 0.3);
  std::vector<double> y = BandPass(x, 16000, 400, 2000);
  double err = 0.0;
  for (int i = 500; i < 3500; ++i) err = std::max(err, std::abs(y[i] - x[i]));
  CHECK(err < 0.02);
}

TEST_CASE("tracks: aligned, deterministic, dumped with NA") {
  AudioClip clip = synth::Clip(synth::Add(synth::Harmonic(180.0, 16000, 12000, 10, 0.3),
                                          synth::Noise(12000, 2, 0.01)),
                               16000);
  clip.samples.insert(clip.samples.end(), 4000, 0.0);
  TrackSet t = ExtractTracks(clip, Cfg());
  const int n = t.frames();
  CHECK(t.zcr.size() == n);
  CHECK(t.pitch.size() == n);
  CHECK(t.formants.rows() == n);
  CHECK(t.mfcc.rows() == n);
  CHECK(t.hnr.size() == n);
  CHECK(t.band_hnr.rows() == n);
  CHECK(static_cast<int>(t.voiced.size()) == n);
  std::string dump = DumpTracks(t);
  CHECK(dump.rfind("frame\tenergy\tzcr\tpitch", 0) == 0);
  CHECK(dump.find("NA") != std::string::npos);
  CHECK(DumpTracks(ExtractTracks(clip, Cfg())) == dump);
}
