#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "mdx/metrics.hpp"
#include "mdx/oracle.hpp"
#include "mdx/stft.hpp"
#include "mdx/synthetic.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

using namespace mdx;
using testing_support::random_waveform;

namespace {

Waveform tone(std::size_t channels, std::size_t frames, double freq, int sr, double amp = 0.5) {
  Waveform w(channels, frames, sr);
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t n = 0; n < frames; ++n) w.at(c, n) = amp * std::sin(2.0 * std::numbers::pi * freq * n / sr + c);
  return w;
}

// Mono noise placed into a stereo pair with fixed gains.
Waveform panned(const std::vector<double>& mono, double gl, double gr, int sr) {
  Waveform w(2, mono.size(), sr);
  for (std::size_t n = 0; n < mono.size(); ++n) {
    w.at(0, n) = gl * mono[n];
    w.at(1, n) = gr * mono[n];
  }
  return w;
}

std::vector<double> noise(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d(0.0, 0.2);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

Waveform sum(const StemWaveforms& stems) {
  Waveform mix(stems.begin()->second.channels(), stems.begin()->second.frames(), stems.begin()->second.sample_rate());
  for (const auto& [k, w] : stems) mix += w;
  return mix;
}

// Twelve random tones inside [lo, hi] Hz with random phases per channel.
Waveform tone_cluster(std::size_t frames, int sr, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> f(lo, hi), ph(0.0, 2.0 * std::numbers::pi);
  Waveform w(2, frames, sr);
  for (int i = 0; i < 12; ++i) {
    double freq = f(rng), p0 = ph(rng), p1 = ph(rng);
    for (std::size_t n = 0; n < frames; ++n) {
      w.at(0, n) += 0.05 * std::sin(2.0 * std::numbers::pi * freq * n / sr + p0);
      w.at(1, n) += 0.05 * std::sin(2.0 * std::numbers::pi * freq * n / sr + p1);
    }
  }
  return w;
}

}  // namespace

TEST(Stft, BinCenterSinusoidConcentratesEnergy) {
  const int sr = 44100;
  const std::size_t k = 100;
  const double freq = static_cast<double>(k) * sr / 4096.0;
  Waveform w = tone(1, 8 * 4096, freq, sr);
  Spectrogram sp = stft(w);
  const std::size_t t = sp.time_frames() / 2;
  double total = 0.0, lobe = 0.0;
  std::size_t peak = 0;
  for (std::size_t f = 0; f < sp.freq_bins(); ++f) {
    double e = std::norm(sp.at(0, f, t));
    total += e;
    if (f + 1 >= k && f <= k + 1) lobe += e;
    if (e > std::norm(sp.at(0, peak, t))) peak = f;
  }
  EXPECT_EQ(peak, k);
  // The periodic Hann window spreads a bin-centred tone over bins k-1..k+1 only.
  EXPECT_GE(lobe / total, 0.99);
}

TEST(Stft, FrameMatchesNaiveDft) {
  std::mt19937_64 rng(1);
  Waveform w = random_waveform(rng, 1, 300, 1.0, 8000);
  StftConfig cfg{64, 16};
  Spectrogram sp = stft(w, cfg);
  // Frame t covers samples t*hop - N/2 .. t*hop + N/2 - 1 with zeros outside.
  for (std::size_t t : {0u, 3u, 10u}) {
    std::vector<double> frame(64);
    for (std::size_t i = 0; i < 64; ++i) {
      long n = static_cast<long>(t * 16 + i) - 32;
      double win = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / 64.0);
      frame[i] = (n >= 0 && n < 300) ? win * w.at(0, static_cast<std::size_t>(n)) : 0.0;
    }
    auto ref = oracle::naive_dft(frame);
    for (std::size_t f = 0; f <= 32; ++f) EXPECT_LT(std::abs(sp.at(0, f, t) - ref[f]), 1e-9) << t << "," << f;
  }
}

TEST(Stft, ZeroSignalGivesZeroSpectrogram) {
  Spectrogram sp = stft(Waveform(2, 10000, 44100));
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t t = 0; t < sp.time_frames(); ++t)
      for (const auto& v : sp.frame(c, t)) ASSERT_EQ(v, cplx(0.0, 0.0));
}

TEST(Stft, PerfectReconstruction) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    Waveform w = random_waveform(rng, 1 + i % 2, 4097 + 977 * i, 0.5);
    Waveform back = istft(stft(w));
    ASSERT_TRUE(back.same_shape(w));
    double worst = 0.0;
    for (std::size_t c = 0; c < w.channels(); ++c)
      for (std::size_t n = 0; n < w.frames(); ++n) worst = std::max(worst, std::abs(back.at(c, n) - w.at(c, n)));
    EXPECT_LT(worst, 1e-6);
  }
}

TEST(Stft, ReconstructionWithOtherGeometries) {
  std::mt19937_64 rng(3);
  for (StftConfig cfg : {StftConfig{512, 128}, StftConfig{1024, 512}, StftConfig{256, 64}}) {
    Waveform w = random_waveform(rng, 2, 3001, 0.5);
    Waveform back = istft(stft(w, cfg));
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t n = 0; n < w.frames(); ++n) ASSERT_NEAR(back.at(c, n), w.at(c, n), 1e-6);
  }
}

TEST(Stft, Errors) {
  EXPECT_THROW(stft(Waveform(1, 4096, 44100)), InvalidInputError);
  EXPECT_THROW(stft(Waveform(1, 9000, 44100), StftConfig{1000, 250}), InvalidInputError);
  EXPECT_THROW(stft(Waveform(1, 9000, 44100), StftConfig{1024, 2048}), InvalidInputError);
  Spectrogram empty(0, FrameLayout(StftConfig{}, 10000), 44100);
  EXPECT_THROW(istft(empty), InvalidInputError);
}

TEST(SwfMasks, SumNeverExceedsOne) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    double p[4], m[4];
    for (double& x : p) x = std::pow(10.0, 40.0 * u(rng) - 20.0);
    swf_masks(p, 1e-20, m);
    double s = 0.0;
    for (double x : m) {
      ASSERT_GE(x, 0.0);
      s += x;
    }
    ASSERT_LE(s, 1.0);
  }
}

TEST(IdealSwf, SingleSourceRecovered) {
  std::mt19937_64 rng(5);
  SyntheticSongConfig cfg;
  cfg.seconds = 3.0;
  cfg.silent_stems = {StemKind::Bass, StemKind::Drums, StemKind::Other};
  SongAudio song = make_synthetic_song(cfg);
  Waveform mix = sum(song.stems);
  auto est = ideal_swf(mix, song.stems);
  EXPECT_GE(global_sdr(song.stems.at(StemKind::Vocals), est.at(StemKind::Vocals)), 50.0);
  for (StemKind k : {StemKind::Bass, StemKind::Drums, StemKind::Other}) {
    double e = 0.0;
    for (double v : est.at(k).samples()) e += v * v;
    EXPECT_LT(e, 1e-12);
  }
}

TEST(IdealSwf, DisjointBandsSeparate) {
  std::mt19937_64 rng(6);
  const std::size_t n = 3 * 44100;
  StemWaveforms stems;
  stems.emplace(StemKind::Bass, tone_cluster(n, 44100, 60.0, 400.0, rng));
  stems.emplace(StemKind::Vocals, tone_cluster(n, 44100, 2000.0, 6000.0, rng));
  auto est = ideal_swf(sum(stems), stems);
  for (const auto& [k, w] : stems) EXPECT_GE(global_sdr(w, est.at(k)), 20.0) << stem_name(k);
}

TEST(IdealSwf, AllSilentGivesSilence) {
  StemWaveforms stems;
  for (StemKind k : kAllStems) stems.emplace(k, Waveform(2, 10000, 44100));
  auto est = ideal_swf(Waveform(2, 10000, 44100), stems);
  for (const auto& [k, w] : est)
    for (double v : w.samples()) ASSERT_EQ(v, 0.0);
}

TEST(IdealSwf, ShapeMismatch) {
  StemWaveforms stems;
  stems.emplace(StemKind::Bass, Waveform(2, 9000, 44100));
  EXPECT_THROW(ideal_swf(Waveform(2, 9001, 44100), stems), InvalidInputError);
}

TEST(IdealMwf, SingleSourceRecovered) {
  SyntheticSongConfig cfg;
  cfg.seconds = 3.0;
  cfg.silent_stems = {StemKind::Bass, StemKind::Other, StemKind::Vocals};
  SongAudio song = make_synthetic_song(cfg);
  auto est = ideal_mwf(sum(song.stems), song.stems);
  EXPECT_GE(global_sdr(song.stems.at(StemKind::Drums), est.at(StemKind::Drums)), 40.0);
}

TEST(IdealMwf, PannedSourcesBeatSwf) {
  // Two full-band sources, one held left and one held right.
  std::mt19937_64 rng(7);
  const std::size_t n = 4 * 44100;
  StemWaveforms stems;
  stems.emplace(StemKind::Vocals, panned(noise(rng, n), 1.0, 0.15, 44100));
  stems.emplace(StemKind::Other, panned(noise(rng, n), 0.15, 1.0, 44100));
  Waveform mix = sum(stems);
  auto mwf = ideal_mwf(mix, stems);
  auto swf = ideal_swf(mix, stems);
  for (const auto& [k, w] : stems) {
    double a = global_sdr(w, mwf.at(k)), b = global_sdr(w, swf.at(k));
    EXPECT_GT(a, b) << stem_name(k);
    EXPECT_GE(a, 40.0) << stem_name(k);
  }
}

TEST(IdealMwf, MonoInputRejected) {
  StemWaveforms stems;
  stems.emplace(StemKind::Bass, Waveform(1, 9000, 44100));
  EXPECT_THROW(ideal_mwf(Waveform(1, 9000, 44100), stems), InvalidInputError);
}

TEST(IdealMwf, LargeRegularizationStaysFinite) {
  SyntheticSongConfig cfg;
  cfg.seconds = 2.0;
  SongAudio song = make_synthetic_song(cfg);
  double previous = std::numeric_limits<double>::infinity();
  for (double reg : {1e-10, 1e-3, 1.0, 1e3, 1e12}) {
    OracleConfig oc;
    oc.mwf_regularization = reg;
    auto est = ideal_mwf(song.mixture, song.stems, oc);
    double mean = 0.0;
    for (const auto& [k, w] : est) {
      for (double v : w.samples()) ASSERT_TRUE(std::isfinite(v)) << reg;
      mean += global_sdr(song.stems.at(k), w) / 4.0;
    }
    EXPECT_LE(mean, previous + 1e-9) << reg;
    previous = mean;
  }
  // Heavily regularized filters shrink every estimate toward silence.
  EXPECT_NEAR(previous, 0.0, 1e-3);
}

TEST(IdealMwf, CovarianceContextStillRecoversWell) {
  SyntheticSongConfig cfg;
  cfg.seconds = 3.0;
  SongAudio song = make_synthetic_song(cfg);
  OracleConfig oc;
  oc.covariance_context = 2;
  auto est = ideal_mwf(song.mixture, song.stems, oc);
  auto base = mixture_baseline(song.mixture);
  for (const auto& [k, w] : song.stems) EXPECT_GT(global_sdr(w, est.at(k)), global_sdr(w, base.at(k)) + 3.0);
}

TEST(Oracles, DominateMixtureBaseline) {
  for (std::uint64_t seed : {1u, 2u}) {
    SyntheticSongConfig cfg;
    cfg.seconds = 4.0;
    cfg.seed = seed;
    SongAudio song = make_synthetic_song(cfg);
    auto base = mixture_baseline(song.mixture);
    auto swf = ideal_swf(song.mixture, song.stems);
    auto mwf = ideal_mwf(song.mixture, song.stems);
    for (const auto& [k, w] : song.stems) {
      double b = global_sdr(w, base.at(k));
      EXPECT_GE(global_sdr(w, swf.at(k)), b + 3.0) << stem_name(k);
      EXPECT_GE(global_sdr(w, mwf.at(k)), b + 3.0) << stem_name(k);
    }
  }
}

TEST(Oracles, BaselineIsFourCopies) {
  std::mt19937_64 rng(8);
  Waveform mix = random_waveform(rng, 2, 100);
  auto out = mixture_baseline(mix);
  ASSERT_EQ(out.size(), 4u);
  for (const auto& [k, w] : out) EXPECT_EQ(w, mix);
}
