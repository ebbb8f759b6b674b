#pragma once

// Deterministic synthetic four-stem songs: tonal bass, percussive drums,
// band-limited noise plus chords for "other", and a vibrato voice. Samples
// are rounded to float32 so stems survive a WAV round trip unchanged, and
// the mixture is the sample-wise stem sum.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mdx/manifest.hpp"
#include "mdx/song_audio.hpp"
#include "mdx/wav.hpp"

namespace mdx {

enum class Panning {
  Spread,      // each stem at a random position between 0.15 and 0.85
  HardPanned,  // stems pinned near the extremes, two per side
  Center,      // every stem centered
};

struct SyntheticSongConfig {
  double seconds = 10.0;
  int sample_rate = 44100;
  std::uint64_t seed = 0;
  Panning panning = Panning::Spread;
  std::set<StemKind> silent_stems;
};

// Small, portable RNG helpers on top of the standardized mt19937_64 stream.
class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed) : rng_(seed) {}
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }

 private:
  std::mt19937_64 rng_;
};

namespace synth_detail {

// RBJ cookbook biquad, direct form I.
class Biquad {
 public:
  // Design frequencies are capped below Nyquist so low sample rates stay stable.
  static double omega(double f, int sr) { return 2.0 * std::numbers::pi * std::min(f, 0.45 * sr) / sr; }

  static Biquad bandpass(double center, double q, int sr) {
    double w = omega(center, sr);
    double alpha = std::sin(w) / (2.0 * q);
    double a0 = 1.0 + alpha;
    return Biquad(alpha / a0, 0.0, -alpha / a0, -2.0 * std::cos(w) / a0, (1.0 - alpha) / a0);
  }
  static Biquad lowpass(double cutoff, int sr) {
    double w = omega(cutoff, sr);
    double alpha = std::sin(w) / std::numbers::sqrt2;
    double c = std::cos(w);
    double a0 = 1.0 + alpha;
    return Biquad((1.0 - c) / 2.0 / a0, (1.0 - c) / a0, (1.0 - c) / 2.0 / a0, -2.0 * c / a0, (1.0 - alpha) / a0);
  }
  static Biquad highpass(double cutoff, int sr) {
    double w = omega(cutoff, sr);
    double alpha = std::sin(w) / std::numbers::sqrt2;
    double c = std::cos(w);
    double a0 = 1.0 + alpha;
    return Biquad((1.0 + c) / 2.0 / a0, -(1.0 + c) / a0, (1.0 + c) / 2.0 / a0, -2.0 * c / a0, (1.0 - alpha) / a0);
  }

  double operator()(double x) {
    double y = b0_ * x + b1_ * x1_ + b2_ * x2_ - a1_ * y1_ - a2_ * y2_;
    x2_ = x1_;
    x1_ = x;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  Biquad(double b0, double b1, double b2, double a1, double a2) : b0_(b0), b1_(b1), b2_(b2), a1_(a1), a2_(a2) {}
  double b0_, b1_, b2_, a1_, a2_;
  double x1_ = 0, x2_ = 0, y1_ = 0, y2_ = 0;
};

inline std::vector<double> bass_line(std::size_t n, int sr, SynthRng& rng) {
  std::vector<double> out(n);
  const std::size_t note = static_cast<std::size_t>(0.5 * sr);
  double phase = 0.0, f0 = 55.0;
  Biquad lp = Biquad::lowpass(250.0, sr);
  for (std::size_t i = 0; i < n; ++i) {
    if (i % note == 0) f0 = rng.uniform(41.0, 110.0);
    phase += 2.0 * std::numbers::pi * f0 / sr;
    double env = 0.6 + 0.4 * std::exp(-static_cast<double>(i % note) / (0.15 * sr));
    double tone = std::sin(phase) + 0.5 * std::sin(2.0 * phase) + 0.25 * std::sin(3.0 * phase);
    out[i] = 0.12 * env * tone + 0.02 * lp(rng.normal());
  }
  return out;
}

inline std::vector<double> drum_loop(std::size_t n, int sr, SynthRng& rng) {
  std::vector<double> out(n);
  const std::size_t beat = static_cast<std::size_t>(sr * rng.uniform(0.22, 0.3));
  Biquad hp = Biquad::highpass(5000.0, sr);
  Biquad snare = Biquad::bandpass(1800.0, 0.8, sr);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t pos = i % beat;
    const std::size_t bar = (i / beat) % 4;
    const double t = static_cast<double>(pos) / sr;
    double v = 0.0;
    if (bar == 0 || bar == 2) v += 0.35 * std::exp(-t / 0.08) * std::sin(2.0 * std::numbers::pi * (50.0 + 60.0 * std::exp(-t / 0.02)) * t);
    double noise = rng.normal();
    double h = hp(noise);
    double s = snare(noise);
    if (bar == 1 || bar == 3) v += 0.5 * std::exp(-t / 0.06) * s;
    v += 0.08 * std::exp(-t / 0.03) * h;
    out[i] = v;
  }
  return out;
}

inline std::vector<double> other_part(std::size_t n, int sr, SynthRng& rng) {
  std::vector<double> out(n);
  const std::size_t chord_len = static_cast<std::size_t>(2.0 * sr);
  Biquad bp = Biquad::bandpass(rng.uniform(600.0, 1500.0), 0.7, sr);
  double freqs[3] = {220.0, 277.0, 330.0};
  double phases[3] = {0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    if (i % chord_len == 0) {
      double root = rng.uniform(196.0, 392.0);
      freqs[0] = root;
      freqs[1] = root * 1.26;
      freqs[2] = root * 1.5;
    }
    double v = 0.0;
    for (int k = 0; k < 3; ++k) {
      phases[k] += 2.0 * std::numbers::pi * freqs[k] / sr;
      v += std::sin(phases[k]) + 0.3 * std::sin(3.0 * phases[k]);
    }
    out[i] = 0.04 * v + 0.06 * bp(rng.normal());
  }
  return out;
}

inline std::vector<double> voice(std::size_t n, int sr, SynthRng& rng) {
  std::vector<double> out(n);
  const std::size_t syllable = static_cast<std::size_t>(0.4 * sr);
  double phase = 0.0, f0 = 300.0;
  const double vib_rate = rng.uniform(4.5, 6.5);
  bool voiced = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % syllable == 0) {
      f0 = rng.uniform(180.0, 520.0);
      voiced = rng.uniform() < 0.8;
    }
    const double t = static_cast<double>(i) / sr;
    const double f = f0 * (1.0 + 0.015 * std::sin(2.0 * std::numbers::pi * vib_rate * t));
    phase += 2.0 * std::numbers::pi * f / sr;
    const double local = static_cast<double>(i % syllable) / syllable;
    const double env = voiced ? std::sin(std::numbers::pi * local) : 0.0;
    double v = 0.0;
    for (int h = 1; h <= 8; ++h) v += std::sin(h * phase) / h;
    out[i] = 0.1 * env * v;
  }
  return out;
}

inline std::pair<double, double> pan_gains(double position) {
  return {std::cos(position * std::numbers::pi / 2.0), std::sin(position * std::numbers::pi / 2.0)};
}

inline double to_float(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace synth_detail

// Stereo song; stems in `silent_stems` are all zero.
inline SongAudio make_synthetic_song(const SyntheticSongConfig& cfg) {
  using namespace synth_detail;
  if (!(cfg.seconds > 0.0) || cfg.sample_rate <= 0) throw InvalidInputError("bad synthetic song config");
  const std::size_t n = static_cast<std::size_t>(std::llround(cfg.seconds * cfg.sample_rate));
  SynthRng rng(cfg.seed);

  static constexpr double kHardPositions[4] = {0.0, 1.0, 0.08, 0.92};
  SongAudio song;
  song.mixture = Waveform(2, n, cfg.sample_rate);
  std::size_t idx = 0;
  for (StemKind k : kAllStems) {
    std::vector<double> mono;
    switch (k) {
      case StemKind::Bass: mono = bass_line(n, cfg.sample_rate, rng); break;
      case StemKind::Drums: mono = drum_loop(n, cfg.sample_rate, rng); break;
      case StemKind::Other: mono = other_part(n, cfg.sample_rate, rng); break;
      case StemKind::Vocals: mono = voice(n, cfg.sample_rate, rng); break;
    }
    double position = 0.5;
    if (cfg.panning == Panning::Spread) position = rng.uniform(0.15, 0.85);
    if (cfg.panning == Panning::HardPanned) position = kHardPositions[idx];
    auto [gl, gr] = pan_gains(position);
    Waveform st(2, n, cfg.sample_rate);
    if (!cfg.silent_stems.count(k)) {
      for (std::size_t i = 0; i < n; ++i) {
        st.at(0, i) = to_float(gl * mono[i]);
        st.at(1, i) = to_float(gr * mono[i]);
      }
    }
    song.mixture += st;
    song.stems.emplace(k, std::move(st));
    ++idx;
  }
  for (std::size_t c = 0; c < 2; ++c)
    for (double& v : song.mixture.channel(c)) v = to_float(v);
  return song;
}

struct SyntheticDatasetConfig {
  std::size_t songs = 6;
  double seconds = 10.0;
  int sample_rate = 44100;
  std::uint64_t seed = 0;
  Panning panning = Panning::Spread;
  // The last `demo_songs` songs are flagged is_demo.
  std::size_t demo_songs = 0;
  // Song index (0-based) whose bass is silent and declared so; -1 for none.
  long silent_bass_song = -1;
};

inline std::string synthetic_song_id(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "SYN_%03zu", i + 1);
  return buf;
}

// Writes <dir>/<song_id>/{mixture,bass,drums,other,vocals}.wav and
// <dir>/manifest.json; returns the manifest.
inline DatasetManifest write_synthetic_dataset(const std::filesystem::path& dir, const SyntheticDatasetConfig& cfg) {
  if (cfg.songs == 0) throw InvalidInputError("synthetic dataset needs at least one song");
  if (cfg.demo_songs > cfg.songs) throw InvalidInputError("more demo songs than songs");
  std::filesystem::create_directories(dir);
  DatasetManifest m;
  m.name = "synthetic";
  m.sample_rate = cfg.sample_rate;
  for (std::size_t i = 0; i < cfg.songs; ++i) {
    SyntheticSongConfig sc;
    sc.seconds = cfg.seconds;
    sc.sample_rate = cfg.sample_rate;
    sc.seed = cfg.seed * 1000003ull + i;
    sc.panning = cfg.panning;
    if (static_cast<long>(i) == cfg.silent_bass_song) sc.silent_stems.insert(StemKind::Bass);
    SongAudio audio = make_synthetic_song(sc);

    SongEntry e;
    e.song_id = synthetic_song_id(i);
    e.genre = "Synthetic";
    e.language = "None";
    e.title = "Synthetic song " + std::to_string(i + 1);
    e.other_instruments = {"pad", "syn"};
    e.is_demo = i >= cfg.songs - cfg.demo_songs;
    e.silent_stems = sc.silent_stems;
    const auto song_dir = dir / e.song_id;
    std::filesystem::create_directories(song_dir);
    e.mixture_path = song_dir / "mixture.wav";
    write_wav(audio.mixture, e.mixture_path);
    for (StemKind k : kAllStems) {
      e.stem_paths[k] = song_dir / (std::string(stem_name(k)) + ".wav");
      write_wav(audio.stems.at(k), e.stem_paths[k]);
    }
    m.songs.push_back(std::move(e));
  }
  {
    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    if (!out) throw IoError((dir / "manifest.json").string() + ": cannot open for writing");
    out << dump_manifest(m, dir);
  }
  return m;
}

}  // namespace mdx
