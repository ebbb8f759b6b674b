#include <random>

#include <gtest/gtest.h>

#include "mdx/song_audio.hpp"
#include "mdx/synthetic.hpp"
#include "mdx/wav.hpp"
#include "support/helpers.hpp"

using namespace mdx;
using testing_support::TempDir;

namespace {

SongEntry entry_in(const TempDir& dir, const std::string& id = "S") {
  SongEntry e;
  e.song_id = id;
  e.mixture_path = dir / "mixture.wav";
  for (StemKind k : kAllStems) e.stem_paths[k] = dir / (std::string(stem_name(k)) + ".wav");
  return e;
}

SongAudio random_song(std::mt19937_64& rng, std::size_t frames) {
  SongAudio a;
  a.mixture = Waveform(2, frames, 44100);
  for (StemKind k : kAllStems) {
    a.stems.emplace(k, testing_support::random_waveform(rng, 2, frames, 0.1));
    a.mixture += a.stems.at(k);
  }
  return a;
}

}  // namespace

TEST(SongAudio, ExactSumPassesWithZeroDeviation) {
  TempDir dir;
  SyntheticSongConfig cfg;
  cfg.seconds = 1.0;
  SongAudio song = make_synthetic_song(cfg);
  // Make the mixture the exact float sum so it stores losslessly.
  song.mixture = Waveform(2, song.mixture.frames(), 44100);
  for (auto& [k, w] : song.stems) {
    for (std::size_t c = 0; c < 2; ++c)
      for (double& v : w.channel(c)) v = static_cast<float>(std::ldexp(std::round(std::ldexp(v, 12)), -12));
    song.mixture += w;
  }
  auto e = entry_in(dir);
  write_wav(song.mixture, e.mixture_path);
  for (const auto& [k, w] : song.stems) write_wav(w, e.stem_path(k));
  auto r = validate_song_audio(e);
  EXPECT_TRUE(r.passed()) << r.summary();
  EXPECT_EQ(r.max_deviation, 0.0);
}

TEST(SongAudio, OffByOneLengthNamesTheStem) {
  std::mt19937_64 rng(3);
  SongAudio a = random_song(rng, 1000);
  a.stems.at(StemKind::Drums) = testing_support::random_waveform(rng, 2, 999, 0.1);
  SongEntry e;
  e.song_id = "S";
  auto r = validate_song_audio(e, a);
  EXPECT_FALSE(r.passed());
  EXPECT_FALSE(r.lengths_match);
  EXPECT_EQ(r.length_mismatches, std::vector<StemKind>{StemKind::Drums});
  EXPECT_NE(r.summary().find("length mismatch in drums"), std::string::npos);
}

TEST(SongAudio, SampleRateMismatchFails) {
  std::mt19937_64 rng(4);
  SongAudio a = random_song(rng, 100);
  Waveform& v = a.stems.at(StemKind::Vocals);
  v = Waveform(2, 22050, std::vector<double>(v.samples().begin(), v.samples().end()));
  auto r = validate_song_audio(SongEntry{}, a);
  EXPECT_FALSE(r.passed());
  EXPECT_EQ(r.rate_mismatches, std::vector<StemKind>{StemKind::Vocals});
}

TEST(SongAudio, Pcm16StemsWithinQuantizationBound) {
  TempDir dir;
  std::mt19937_64 rng(5);
  SongAudio a = random_song(rng, 20000);
  auto e = entry_in(dir);
  for (const auto& [k, w] : a.stems) testing_support::write_pcm16(w, e.stem_path(k));
  write_wav(a.mixture, e.mixture_path);
  auto r = validate_song_audio(e, 1e-3);
  EXPECT_TRUE(r.passed()) << r.summary();
  // Four stems each off by at most half a step, plus float rounding of the mixture.
  EXPECT_LE(r.max_deviation, 2.0 * std::ldexp(1.0, -15) + 1e-7);
  EXPECT_GT(r.max_deviation, 0.0);
}

TEST(SongAudio, ToleranceIsMonotone) {
  std::mt19937_64 rng(6);
  SongAudio a = random_song(rng, 500);
  a.mixture.at(1, 17) += 0.01;
  SongEntry e;
  e.song_id = "S";
  bool passed_before = false;
  for (double tol : {1e-6, 1e-4, 5e-3, 0.0099, 0.0101, 0.1, 1.0}) {
    bool p = validate_song_audio(e, a, tol).passed();
    EXPECT_TRUE(!passed_before || p) << "tolerance " << tol;
    passed_before = p;
  }
  EXPECT_TRUE(passed_before);
  EXPECT_FALSE(validate_song_audio(e, a, 0.0099).passed());
}

TEST(SongAudio, SilentStemWarningsDoNotFail) {
  std::mt19937_64 rng(7);
  SongAudio a = random_song(rng, 300);
  a.mixture = Waveform(2, 300, 44100);
  a.stems.at(StemKind::Bass) = Waveform(2, 300, 44100);
  for (const auto& [k, w] : a.stems) a.mixture += w;
  SongEntry undeclared;
  auto r = validate_song_audio(undeclared, a);
  EXPECT_TRUE(r.passed());
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("bass"), std::string::npos);

  SongEntry declared;
  declared.silent_stems = {StemKind::Bass};
  EXPECT_TRUE(validate_song_audio(declared, a).warnings.empty());
}

TEST(SongAudio, UnreadableFileIsIoError) {
  TempDir dir;
  EXPECT_THROW(validate_song_audio(entry_in(dir)), IoError);
}
