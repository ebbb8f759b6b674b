#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "mdx/manifest.hpp"
#include "mdx/wav.hpp"

namespace mdx {

// Loaded audio for one song: the mixture plus the four reference stems.
struct SongAudio {
  Waveform mixture;
  StemWaveforms stems;
};

inline SongAudio load_song_audio(const SongEntry& entry) {
  SongAudio a;
  a.mixture = read_wav(entry.mixture_path);
  for (StemKind k : kAllStems) a.stems.emplace(k, read_wav(entry.stem_path(k)));
  return a;
}

inline StemWaveforms load_reference_stems(const SongEntry& entry) {
  StemWaveforms out;
  for (StemKind k : kAllStems) out.emplace(k, read_wav(entry.stem_path(k)));
  return out;
}

struct ValidationReport {
  std::string song_id;
  bool lengths_match = true;
  bool rates_match = true;
  // Stems whose frame count or channel count differs from the mixture.
  std::vector<StemKind> length_mismatches;
  std::vector<StemKind> rate_mismatches;
  // Max |mixture - sum(stems)|; only meaningful when shapes agree.
  double max_deviation = 0.0;
  double tolerance = 0.0;
  // Stems at or below the energy floor that the manifest does not declare
  // silent, and declared-silent stems that carry energy. Warnings only.
  std::vector<std::string> warnings;

  bool passed() const { return lengths_match && rates_match && max_deviation <= tolerance; }

  std::string summary() const {
    std::string s = song_id + ": " + (passed() ? "PASS" : "FAIL");
    for (StemKind k : length_mismatches) s += "; length mismatch in " + std::string(stem_name(k));
    for (StemKind k : rate_mismatches) s += "; sample-rate mismatch in " + std::string(stem_name(k));
    if (lengths_match && rates_match) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6g", max_deviation);
      s += std::string("; max deviation ") + buf;
    }
    for (const auto& w : warnings) s += "; warning: " + w;
    return s;
  }
};

inline constexpr double kDefaultMixtureTolerance = 1e-3;
inline constexpr double kSilentStemEnergyFloor = 1e-12;

inline double total_energy(const Waveform& w) {
  double e = 0.0;
  for (double v : w.samples()) e += v * v;
  return e;
}

inline ValidationReport validate_song_audio(const SongEntry& entry, const SongAudio& audio,
                                            double tolerance = kDefaultMixtureTolerance) {
  ValidationReport r;
  r.song_id = entry.song_id;
  r.tolerance = tolerance;
  const Waveform& mix = audio.mixture;
  for (StemKind k : kAllStems) {
    const Waveform& st = audio.stems.at(k);
    if (st.sample_rate() != mix.sample_rate()) {
      r.rates_match = false;
      r.rate_mismatches.push_back(k);
    }
    if (st.frames() != mix.frames() || st.channels() != mix.channels()) {
      r.lengths_match = false;
      r.length_mismatches.push_back(k);
    }
  }
  if (r.lengths_match) {
    for (std::size_t c = 0; c < mix.channels(); ++c)
      for (std::size_t n = 0; n < mix.frames(); ++n) {
        double sum = 0.0;
        for (StemKind k : kAllStems) sum += audio.stems.at(k).at(c, n);
        r.max_deviation = std::max(r.max_deviation, std::abs(mix.at(c, n) - sum));
      }
  } else {
    r.max_deviation = std::numeric_limits<double>::infinity();
  }
  for (StemKind k : kAllStems) {
    const bool quiet = total_energy(audio.stems.at(k)) <= kSilentStemEnergyFloor;
    const bool declared = entry.silent_stems.count(k) > 0;
    if (quiet && !declared)
      r.warnings.push_back(std::string(stem_name(k)) + " stem is silent but not declared in silent_stems");
    if (!quiet && declared)
      r.warnings.push_back(std::string(stem_name(k)) + " stem is declared silent but carries energy");
  }
  return r;
}

inline ValidationReport validate_song_audio(const SongEntry& entry,
                                            double tolerance = kDefaultMixtureTolerance) {
  return validate_song_audio(entry, load_song_audio(entry), tolerance);
}

}  // namespace mdx
