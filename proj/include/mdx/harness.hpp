#pragma once

// Challenge machinery: round planning, per-song scoring with the silent-stem
// and demo-song exclusions, whole-submission evaluation and leaderboards.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "mdx/error.hpp"
#include "mdx/manifest.hpp"
#include "mdx/metrics.hpp"
#include "mdx/parallel.hpp"
#include "mdx/song_audio.hpp"
#include "mdx/wav.hpp"

namespace mdx {

enum class Leaderboard { A, B };

inline constexpr std::string_view leaderboard_name(Leaderboard lb) { return lb == Leaderboard::A ? "A" : "B"; }

inline Leaderboard parse_leaderboard(std::string_view s) {
  if (s == "A" || s == "a") return Leaderboard::A;
  if (s == "B" || s == "b") return Leaderboard::B;
  throw InvalidInputError("leaderboard must be A or B, got '" + std::string(s) + "'");
}

inline constexpr std::string_view kSilentReferenceReason = "silent reference";
inline constexpr std::string_view kDemoSongReason = "demo song";

// True when every dataset named in `declaration` is MUSDB18 or MUSDB18-HQ.
// Names may be separated by '+', ',', ';', '/', '&' or the word "and".
inline bool declares_only_musdb(std::string_view declaration) {
  std::string lowered;
  for (char ch : declaration) lowered += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    auto b = cur.find_first_not_of(" \t");
    auto e = cur.find_last_not_of(" \t");
    if (b != std::string::npos) tokens.push_back(cur.substr(b, e - b + 1));
    cur.clear();
  };
  for (std::size_t i = 0; i < lowered.size(); ++i) {
    char ch = lowered[i];
    if (ch == '+' || ch == ',' || ch == ';' || ch == '/' || ch == '&') {
      flush();
    } else if (lowered.compare(i, 5, " and ") == 0) {
      flush();
      i += 4;
    } else {
      cur += ch;
    }
  }
  flush();
  if (tokens.empty()) return false;
  for (const auto& t : tokens)
    if (t != "musdb18" && t != "musdb18-hq" && t != "musdb18hq") return false;
  return true;
}

struct SubmissionDescriptor {
  std::string system_id;
  Leaderboard leaderboard = Leaderboard::B;
  std::string training_data_declaration;
  std::filesystem::path estimates_root;

  void validate() const {
    if (system_id.empty()) throw ValidationError("submission needs a system_id");
    if (leaderboard == Leaderboard::A && !declares_only_musdb(training_data_declaration))
      throw ValidationError("leaderboard A requires training data limited to MUSDB18/MUSDB18-HQ, got '" +
                            training_data_declaration + "'");
  }

  std::filesystem::path song_dir(const std::string& song_id) const { return estimates_root / song_id; }
  std::filesystem::path estimate_path(const std::string& song_id, StemKind s) const {
    return song_dir(song_id) / (std::string(stem_name(s)) + ".wav");
  }
};

struct ExcludedStem {
  std::string reason;
  double sdr = 0.0;  // still computed, just not averaged
};

struct SongScore {
  std::string system_id;
  Leaderboard leaderboard = Leaderboard::B;
  std::string song_id;
  int round = 0;  // 0: not part of any round (demo songs)
  StemScores per_stem;
  double sdr_song = 0.0;
  std::map<StemKind, ExcludedStem> excluded_stems;
  bool excluded_song = false;
  std::string excluded_song_reason;

  std::optional<double> stem_sdr(StemKind k) const {
    if (auto it = per_stem.values.find(k); it != per_stem.values.end()) return it->second;
    if (auto it = excluded_stems.find(k); it != excluded_stems.end()) return it->second.sdr;
    return std::nullopt;
  }

  friend bool operator==(const SongScore& a, const SongScore& b) {
    auto ex = [](const SongScore& s) {
      std::vector<std::tuple<StemKind, std::string, double>> v;
      for (const auto& [k, e] : s.excluded_stems) v.emplace_back(k, e.reason, e.sdr);
      return v;
    };
    return a.system_id == b.system_id && a.leaderboard == b.leaderboard && a.song_id == b.song_id &&
           a.round == b.round && a.per_stem.values == b.per_stem.values &&
           a.per_stem.evaluated == b.per_stem.evaluated && a.sdr_song == b.sdr_song && ex(a) == ex(b) &&
           a.excluded_song == b.excluded_song && a.excluded_song_reason == b.excluded_song_reason;
  }
};

struct RoundPlan {
  std::map<std::string, int> round_assignment;
  std::uint64_t seed = 0;

  int round_of(const std::string& song_id) const {
    auto it = round_assignment.find(song_id);
    return it == round_assignment.end() ? 0 : it->second;
  }

  // Song ids of round r in manifest order.
  std::vector<std::string> songs_in_round(const DatasetManifest& m, int r) const {
    std::vector<std::string> out;
    for (const auto& s : m.songs)
      if (round_of(s.song_id) == r) out.push_back(s.song_id);
    return out;
  }
};

inline constexpr int kRoundCount = 3;

// Seeded shuffle of the non-demo songs, dealt round-robin into three rounds.
// Uses the raw mt19937_64 stream so plans are identical across standard
// library implementations.
inline RoundPlan plan_rounds(const DatasetManifest& manifest, std::uint64_t seed) {
  std::vector<std::string> ids;
  for (const auto* s : manifest.eligible_songs()) ids.push_back(s->song_id);
  if (ids.size() < static_cast<std::size_t>(kRoundCount))
    throw InvalidInputError("round planning needs at least 3 non-demo songs, got " + std::to_string(ids.size()));
  std::mt19937_64 rng(seed);
  for (std::size_t i = ids.size() - 1; i > 0; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(ids[i], ids[j]);
  }
  RoundPlan plan;
  plan.seed = seed;
  for (std::size_t i = 0; i < ids.size(); ++i) plan.round_assignment[ids[i]] = static_cast<int>(i % kRoundCount) + 1;
  return plan;
}

// Scores one song against already loaded references.
inline SongScore score_song(const SongEntry& entry, const StemWaveforms& references,
                            const StemWaveforms& estimates, const MetricConfig& cfg = {}) {
  SongScore s;
  s.song_id = entry.song_id;
  std::map<StemKind, double> evaluated;
  for (StemKind k : kAllStems) {
    auto est = estimates.find(k);
    if (est == estimates.end())
      throw MissingEstimateError("song '" + entry.song_id + "': missing " + std::string(stem_name(k)) + " estimate");
    auto ref = references.find(k);
    if (ref == references.end())
      throw InvalidInputError("song '" + entry.song_id + "': missing " + std::string(stem_name(k)) + " reference");
    Waveform::require_same_shape(ref->second, est->second,
                                 "song '" + entry.song_id + "' " + std::string(stem_name(k)));
    double v = global_sdr(ref->second, est->second, cfg);
    if (entry.silent_stems.count(k))
      s.excluded_stems[k] = ExcludedStem{std::string(kSilentReferenceReason), v};
    else
      evaluated[k] = v;
  }
  s.per_stem = StemScores::from(std::move(evaluated));
  s.sdr_song = sdr_song(s.per_stem);
  return s;
}

inline SongScore score_song(const SongEntry& entry, const StemWaveforms& estimates, const MetricConfig& cfg = {}) {
  return score_song(entry, load_reference_stems(entry), estimates, cfg);
}

inline StemWaveforms load_estimates(const SubmissionDescriptor& sub, const std::string& song_id) {
  StemWaveforms out;
  for (StemKind k : kAllStems) {
    auto p = sub.estimate_path(song_id, k);
    if (!std::filesystem::exists(p))
      throw MissingEstimateError("song '" + song_id + "': missing " + std::string(stem_name(k)) +
                                 " estimate file " + p.string());
    out.emplace(k, read_wav(p));
  }
  return out;
}

struct EvaluationOptions {
  std::size_t jobs = 1;
  // Also score demo songs; they are marked excluded_song and never ranked.
  bool include_demo = false;
};

inline std::vector<SongScore> evaluate_submission(const SubmissionDescriptor& sub, const DatasetManifest& manifest,
                                                  const RoundPlan& plan, const std::set<int>& rounds,
                                                  const MetricConfig& cfg = {}, const EvaluationOptions& opts = {}) {
  sub.validate();
  for (int r : rounds)
    if (r < 1 || r > kRoundCount) throw InvalidInputError("round numbers must be 1, 2 or 3");

  std::vector<const SongEntry*> selected;
  for (const auto& s : manifest.songs) {
    if (s.is_demo ? opts.include_demo : rounds.count(plan.round_of(s.song_id)) > 0) selected.push_back(&s);
  }

  std::vector<std::string> gaps;
  for (const auto* s : selected)
    if (!std::filesystem::is_directory(sub.song_dir(s->song_id))) gaps.push_back(s->song_id);
  if (!gaps.empty()) {
    std::string msg = "submission '" + sub.system_id + "' is missing song directories:";
    for (const auto& g : gaps) msg += " " + g;
    throw MissingSubmissionError(msg);
  }

  std::vector<SongScore> results(selected.size());
  auto errors = parallel_for(selected.size(), opts.jobs, [&](std::size_t i) {
    const SongEntry& e = *selected[i];
    SongScore s = score_song(e, load_estimates(sub, e.song_id), cfg);
    s.system_id = sub.system_id;
    s.leaderboard = sub.leaderboard;
    s.round = e.is_demo ? 0 : plan.round_of(e.song_id);
    if (e.is_demo) {
      s.excluded_song = true;
      s.excluded_song_reason = std::string(kDemoSongReason);
    }
    results[i] = std::move(s);
  });

  std::string failures;
  bool all_missing = true;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const MissingEstimateError& e) {
      failures += std::string("\n  ") + e.what();
    } catch (const std::exception& e) {
      all_missing = false;
      failures += "\n  song '" + selected[i]->song_id + "': " + e.what();
    }
  }
  if (!failures.empty()) {
    std::string msg = "submission '" + sub.system_id + "' failed on:" + failures;
    if (all_missing) throw MissingEstimateError(msg);
    throw EvaluationError(msg);
  }
  return results;
}

struct LeaderboardEntry {
  int rank = 0;
  std::string system_id;
  double sdr_song_mean = 0.0;
  std::map<StemKind, double> per_stem_means;
  std::set<int> rounds_included;
  std::size_t songs = 0;
};

// Systems are ordered by mean SDR_Song over non-excluded songs; ties fall
// back to the vocals, drums, bass and other means, then to system_id.
// Leaderboard A lists only A systems; B lists every system.
inline std::vector<LeaderboardEntry> rank(const std::map<std::string, std::vector<SongScore>>& results,
                                          Leaderboard leaderboard) {
  std::vector<LeaderboardEntry> entries;
  std::optional<std::set<std::string>> reference_songs;
  std::string reference_system;
  for (const auto& [system, scores] : results) {
    if (scores.empty()) throw InvalidInputError("system '" + system + "' has no scores");
    const Leaderboard own = scores.front().leaderboard;
    for (const auto& s : scores)
      if (s.leaderboard != own) throw InvalidInputError("system '" + system + "' mixes leaderboards");
    if (leaderboard == Leaderboard::A && own != Leaderboard::A) continue;

    std::set<std::string> songs;
    LeaderboardEntry e;
    e.system_id = system;
    std::map<StemKind, std::pair<double, std::size_t>> stem_acc;
    double sum = 0.0;
    for (const auto& s : scores) {
      if (s.excluded_song) continue;
      if (!songs.insert(s.song_id).second)
        throw InvalidInputError("system '" + system + "' scored song '" + s.song_id + "' twice");
      sum += s.sdr_song;
      e.rounds_included.insert(s.round);
      for (const auto& [k, v] : s.per_stem.values) {
        stem_acc[k].first += v;
        ++stem_acc[k].second;
      }
    }
    if (songs.empty()) throw InvalidInputError("system '" + system + "' has no rankable songs");
    if (!reference_songs) {
      reference_songs = songs;
      reference_system = system;
    } else if (*reference_songs != songs) {
      throw InvalidInputError("systems '" + reference_system + "' and '" + system + "' were scored on different songs");
    }
    e.songs = songs.size();
    e.sdr_song_mean = sum / static_cast<double>(songs.size());
    for (const auto& [k, acc] : stem_acc) e.per_stem_means[k] = acc.first / static_cast<double>(acc.second);
    entries.push_back(std::move(e));
  }

  auto stem_mean = [](const LeaderboardEntry& e, StemKind k) {
    auto it = e.per_stem_means.find(k);
    return it == e.per_stem_means.end() ? -std::numeric_limits<double>::infinity() : it->second;
  };
  std::sort(entries.begin(), entries.end(), [&](const LeaderboardEntry& a, const LeaderboardEntry& b) {
    if (a.sdr_song_mean != b.sdr_song_mean) return a.sdr_song_mean > b.sdr_song_mean;
    for (StemKind k : {StemKind::Vocals, StemKind::Drums, StemKind::Bass, StemKind::Other}) {
      double x = stem_mean(a, k), y = stem_mean(b, k);
      if (x != y) return x > y;
    }
    return a.system_id < b.system_id;
  });
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i].rank = static_cast<int>(i) + 1;
  return entries;
}

}  // namespace mdx
