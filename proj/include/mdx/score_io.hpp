#pragma once

// Score records and leaderboards on disk.
//
// Score CSV columns, in order:
//   system_id, leaderboard, song_id, round,
//   sdr_bass, sdr_drums, sdr_other, sdr_vocals, sdr_song,
//   excluded_stems  ("stem=reason" pairs joined by ';'),
//   excluded_song   (empty, or the exclusion reason)
// Numbers use six significant digits. The JSON form carries the same records
// at full double precision.

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdx/harness.hpp"
#include "mdx/table_io.hpp"

namespace mdx {

inline const std::vector<std::string>& score_csv_header() {
  static const std::vector<std::string> h = {"system_id", "leaderboard", "song_id",   "round",
                                             "sdr_bass",  "sdr_drums",   "sdr_other", "sdr_vocals",
                                             "sdr_song",  "excluded_stems", "excluded_song"};
  return h;
}

inline std::string scores_to_csv(const std::vector<SongScore>& scores) {
  std::string out = csv_line(score_csv_header());
  for (const auto& s : scores) {
    std::vector<std::string> f = {s.system_id, std::string(leaderboard_name(s.leaderboard)), s.song_id,
                                  std::to_string(s.round)};
    for (StemKind k : kAllStems) {
      auto v = s.stem_sdr(k);
      f.push_back(v ? format_sig6(*v) : "");
    }
    f.push_back(format_sig6(s.sdr_song));
    std::string ex;
    for (const auto& [k, e] : s.excluded_stems) {
      if (!ex.empty()) ex += ';';
      ex += std::string(stem_name(k)) + "=" + e.reason;
    }
    f.push_back(ex);
    f.push_back(s.excluded_song ? s.excluded_song_reason : "");
    out += csv_line(f);
  }
  return out;
}

inline std::vector<SongScore> scores_from_csv(const std::string& text) {
  auto rows = parse_csv(text);
  if (rows.empty() || rows.front() != score_csv_header())
    throw InvalidInputError("score table has an unexpected header");
  std::vector<SongScore> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r];
    if (f.size() != score_csv_header().size())
      throw InvalidInputError("score table row " + std::to_string(r) + " has " + std::to_string(f.size()) + " fields");
    SongScore s;
    s.system_id = f[0];
    s.leaderboard = parse_leaderboard(f[1]);
    s.song_id = f[2];
    s.round = static_cast<int>(parse_double(f[3], "round"));
    std::map<StemKind, std::string> reasons;
    if (!f[9].empty()) {
      std::stringstream ss(f[9]);
      std::string item;
      while (std::getline(ss, item, ';')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw InvalidInputError("bad excluded_stems entry '" + item + "'");
        reasons[parse_stem_or_throw(item.substr(0, eq))] = item.substr(eq + 1);
      }
    }
    std::map<StemKind, double> evaluated;
    for (std::size_t i = 0; i < kAllStems.size(); ++i) {
      StemKind k = kAllStems[i];
      if (f[4 + i].empty()) continue;
      double v = parse_double(f[4 + i], "stem SDR");
      if (auto it = reasons.find(k); it != reasons.end())
        s.excluded_stems[k] = ExcludedStem{it->second, v};
      else
        evaluated[k] = v;
    }
    s.per_stem = StemScores::from(std::move(evaluated));
    s.sdr_song = parse_double(f[8], "sdr_song");
    s.excluded_song = !f[10].empty();
    s.excluded_song_reason = f[10];
    out.push_back(std::move(s));
  }
  return out;
}

inline std::string scores_to_json(const std::vector<SongScore>& scores) {
  nlohmann::ordered_json doc;
  doc["records"] = nlohmann::ordered_json::array();
  for (const auto& s : scores) {
    nlohmann::ordered_json j;
    j["system_id"] = s.system_id;
    j["leaderboard"] = std::string(leaderboard_name(s.leaderboard));
    j["song_id"] = s.song_id;
    j["round"] = s.round;
    nlohmann::ordered_json stems = nlohmann::ordered_json::object();
    for (StemKind k : kAllStems)
      if (auto v = s.stem_sdr(k)) stems[std::string(stem_name(k))] = *v;
    j["sdr"] = stems;
    j["sdr_song"] = s.sdr_song;
    nlohmann::ordered_json ex = nlohmann::ordered_json::object();
    for (const auto& [k, e] : s.excluded_stems) ex[std::string(stem_name(k))] = e.reason;
    j["excluded_stems"] = ex;
    j["excluded_song"] = s.excluded_song;
    j["excluded_song_reason"] = s.excluded_song_reason;
    doc["records"].push_back(j);
  }
  return doc.dump(2) + "\n";
}

inline std::vector<SongScore> scores_from_json(const std::string& text) {
  std::vector<SongScore> out;
  try {
    auto doc = nlohmann::json::parse(text);
    for (const auto& j : doc.at("records")) {
      SongScore s;
      s.system_id = j.at("system_id").get<std::string>();
      s.leaderboard = parse_leaderboard(j.at("leaderboard").get<std::string>());
      s.song_id = j.at("song_id").get<std::string>();
      s.round = j.at("round").get<int>();
      std::map<StemKind, std::string> reasons;
      for (auto it = j.at("excluded_stems").begin(); it != j.at("excluded_stems").end(); ++it)
        reasons[parse_stem_or_throw(it.key())] = it->get<std::string>();
      std::map<StemKind, double> evaluated;
      for (auto it = j.at("sdr").begin(); it != j.at("sdr").end(); ++it) {
        StemKind k = parse_stem_or_throw(it.key());
        double v = it->get<double>();
        if (auto r = reasons.find(k); r != reasons.end())
          s.excluded_stems[k] = ExcludedStem{r->second, v};
        else
          evaluated[k] = v;
      }
      s.per_stem = StemScores::from(std::move(evaluated));
      s.sdr_song = j.at("sdr_song").get<double>();
      s.excluded_song = j.at("excluded_song").get<bool>();
      s.excluded_song_reason = j.value("excluded_song_reason", std::string());
      out.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError(std::string("malformed score document: ") + e.what());
  }
  return out;
}

// Loads a .json or .csv score file (chosen by extension).
inline std::vector<SongScore> load_scores(const std::string& path) {
  std::string text = read_text_file(path);
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") return scores_from_json(text);
  return scores_from_csv(text);
}

inline std::map<std::string, std::vector<SongScore>> group_by_system(const std::vector<SongScore>& scores) {
  std::map<std::string, std::vector<SongScore>> out;
  for (const auto& s : scores) out[s.system_id].push_back(s);
  return out;
}

// Plain-text leaderboard: rank, system, SDR_Song and the per-stem means.
inline std::string format_leaderboard(const std::vector<LeaderboardEntry>& entries, int decimals = 3) {
  std::size_t width = 6;
  for (const auto& e : entries) width = std::max(width, e.system_id.size());
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  std::string out = pad("Rank", 6) + pad("System", width + 2) + pad("SDR_Song", 11) + pad("SDR_Bass", 11) +
                    pad("SDR_Drums", 11) + pad("SDR_Other", 11) + "SDR_Vocals\n";
  for (const auto& e : entries) {
    std::string line = pad(std::to_string(e.rank) + ".", 6) + pad(e.system_id, width + 2) +
                       pad(format_fixed(e.sdr_song_mean, decimals), 11);
    for (StemKind k : kAllStems) {
      auto it = e.per_stem_means.find(k);
      std::string cell = it == e.per_stem_means.end() ? "-" : format_fixed(it->second, decimals);
      line += k == StemKind::Vocals ? cell : pad(cell, 11);
    }
    out += line + "\n";
  }
  return out;
}

inline std::string leaderboard_to_csv(const std::vector<LeaderboardEntry>& entries, int decimals = 3) {
  std::string out = csv_line({"rank", "system_id", "sdr_song", "sdr_bass", "sdr_drums", "sdr_other", "sdr_vocals",
                              "songs", "rounds"});
  for (const auto& e : entries) {
    std::vector<std::string> f = {std::to_string(e.rank), e.system_id, format_fixed(e.sdr_song_mean, decimals)};
    for (StemKind k : kAllStems) {
      auto it = e.per_stem_means.find(k);
      f.push_back(it == e.per_stem_means.end() ? "" : format_fixed(it->second, decimals));
    }
    f.push_back(std::to_string(e.songs));
    std::string rounds;
    for (int r : e.rounds_included) rounds += (rounds.empty() ? "" : ";") + std::to_string(r);
    f.push_back(rounds);
    out += csv_line(f);
  }
  return out;
}

inline std::string round_plan_to_json(const RoundPlan& plan, const DatasetManifest& manifest) {
  nlohmann::ordered_json doc;
  doc["seed"] = plan.seed;
  nlohmann::ordered_json rounds = nlohmann::ordered_json::object();
  for (int r = 1; r <= kRoundCount; ++r) rounds[std::to_string(r)] = plan.songs_in_round(manifest, r);
  doc["rounds"] = rounds;
  nlohmann::ordered_json assignment = nlohmann::ordered_json::object();
  for (const auto& s : manifest.songs) assignment[s.song_id] = plan.round_of(s.song_id);
  doc["round_assignment"] = assignment;
  return doc.dump(2) + "\n";
}

}  // namespace mdx
