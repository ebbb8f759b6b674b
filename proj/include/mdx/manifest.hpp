#pragma once

// Dataset manifest: one JSON document naming the dataset, its sample rate and
// an ordered list of song records. Relative paths resolve against the
// directory holding the manifest. See README.md for the full format.

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdx/error.hpp"
#include "mdx/stem.hpp"

namespace mdx {

struct SongEntry {
  std::string song_id;
  std::string genre;
  std::string language;
  std::string title;
  std::vector<std::string> other_instruments;
  std::map<StemKind, std::filesystem::path> stem_paths;
  std::filesystem::path mixture_path;
  bool is_demo = false;
  std::set<StemKind> silent_stems;

  const std::filesystem::path& stem_path(StemKind s) const { return stem_paths.at(s); }
};

struct DatasetManifest {
  std::string name;
  int sample_rate = 0;
  std::vector<SongEntry> songs;

  std::vector<const SongEntry*> eligible_songs() const {
    std::vector<const SongEntry*> out;
    for (const auto& s : songs)
      if (!s.is_demo) out.push_back(&s);
    return out;
  }

  const SongEntry* find(const std::string& song_id) const {
    for (const auto& s : songs)
      if (s.song_id == song_id) return &s;
    return nullptr;
  }
};

// Throws ValidationError naming the first offending song.
inline void validate_manifest(const DatasetManifest& m) {
  if (m.songs.empty()) throw ValidationError("manifest lists no songs");
  if (m.sample_rate <= 0) throw ValidationError("manifest sample_rate must be positive");
  std::set<std::string> seen;
  for (const auto& s : m.songs) {
    if (s.song_id.empty()) throw ValidationError("song with empty song_id");
    if (!seen.insert(s.song_id).second)
      throw ValidationError("duplicate song_id '" + s.song_id + "'");
    for (StemKind k : kAllStems)
      if (!s.stem_paths.count(k))
        throw ValidationError("song '" + s.song_id + "' is missing the " +
                              std::string(stem_name(k)) + " stem");
    if (s.silent_stems.size() == kAllStems.size())
      throw ValidationError("song '" + s.song_id + "' declares every stem silent");
    if (s.mixture_path.empty())
      throw ValidationError("song '" + s.song_id + "' has no mixture path");
  }
}

namespace manifest_detail {

inline std::string str_field(const nlohmann::json& j, const char* key, const std::string& song,
                             bool required = true) {
  auto it = j.find(key);
  if (it == j.end()) {
    if (required) throw ValidationError("song '" + song + "': missing field '" + key + "'");
    return {};
  }
  if (!it->is_string()) throw ValidationError("song '" + song + "': field '" + key + "' must be a string");
  return it->get<std::string>();
}

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

inline SongEntry parse_song(const nlohmann::json& j, const std::filesystem::path& base, std::size_t index) {
  if (!j.is_object()) throw ValidationError("song record " + std::to_string(index) + " is not an object");
  SongEntry e;
  auto id = j.find("song_id");
  if (id == j.end() || !id->is_string())
    throw ValidationError("song record " + std::to_string(index) + " has no string song_id");
  e.song_id = id->get<std::string>();
  e.genre = str_field(j, "genre", e.song_id, false);
  e.language = str_field(j, "language", e.song_id, false);
  e.title = str_field(j, "title", e.song_id, false);
  if (auto it = j.find("other_instruments"); it != j.end()) {
    if (!it->is_array()) throw ValidationError("song '" + e.song_id + "': other_instruments must be a list");
    for (const auto& tag : *it) {
      if (!tag.is_string()) throw ValidationError("song '" + e.song_id + "': instrument tags must be strings");
      e.other_instruments.push_back(tag.get<std::string>());
    }
  }
  e.mixture_path = resolve(base, str_field(j, "mixture", e.song_id));

  auto stems = j.find("stems");
  if (stems == j.end() || !stems->is_object())
    throw ValidationError("song '" + e.song_id + "': missing stems object");
  for (auto it = stems->begin(); it != stems->end(); ++it) {
    auto kind = parse_stem(it.key());
    if (!kind) throw ValidationError("song '" + e.song_id + "': unknown stem kind '" + it.key() + "'");
    if (!it->is_string()) throw ValidationError("song '" + e.song_id + "': stem path must be a string");
    e.stem_paths[*kind] = resolve(base, it->get<std::string>());
  }

  if (auto it = j.find("is_demo"); it != j.end()) {
    if (!it->is_boolean()) throw ValidationError("song '" + e.song_id + "': is_demo must be a boolean");
    e.is_demo = it->get<bool>();
  }
  if (auto it = j.find("silent_stems"); it != j.end()) {
    if (!it->is_array()) throw ValidationError("song '" + e.song_id + "': silent_stems must be a list");
    for (const auto& name : *it) {
      if (!name.is_string()) throw ValidationError("song '" + e.song_id + "': silent_stems entries must be strings");
      auto kind = parse_stem(name.get<std::string>());
      if (!kind)
        throw ValidationError("song '" + e.song_id + "': unknown stem kind '" + name.get<std::string>() + "' in silent_stems");
      e.silent_stems.insert(*kind);
    }
  }
  return e;
}

}  // namespace manifest_detail

// `base_dir` resolves relative stem and mixture paths.
inline DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir = {}) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("manifest must be a JSON object");
  DatasetManifest m;
  if (auto it = doc.find("name"); it != doc.end() && it->is_string()) m.name = it->get<std::string>();
  auto sr = doc.find("sample_rate");
  if (sr == doc.end() || !sr->is_number_integer())
    throw ValidationError("manifest needs an integer sample_rate");
  m.sample_rate = sr->get<int>();
  auto songs = doc.find("songs");
  if (songs == doc.end() || !songs->is_array()) throw ValidationError("manifest needs a songs list");
  std::size_t i = 0;
  for (const auto& js : *songs) m.songs.push_back(manifest_detail::parse_song(js, base_dir, i++));
  validate_manifest(m);
  return m;
}

inline DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open manifest");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), path.parent_path());
}

// Serializes with paths written relative to `base_dir` when they live under it.
inline std::string dump_manifest(const DatasetManifest& m, const std::filesystem::path& base_dir = {}) {
  auto rel = [&](const std::filesystem::path& p) {
    if (base_dir.empty()) return p.generic_string();
    auto r = p.lexically_relative(base_dir);
    return (r.empty() || *r.begin() == "..") ? p.generic_string() : r.generic_string();
  };
  nlohmann::ordered_json doc;
  doc["name"] = m.name;
  doc["sample_rate"] = m.sample_rate;
  doc["songs"] = nlohmann::ordered_json::array();
  for (const auto& s : m.songs) {
    nlohmann::ordered_json js;
    js["song_id"] = s.song_id;
    js["genre"] = s.genre;
    js["language"] = s.language;
    js["title"] = s.title;
    js["other_instruments"] = s.other_instruments;
    js["mixture"] = rel(s.mixture_path);
    nlohmann::ordered_json stems;
    for (const auto& [k, p] : s.stem_paths) stems[std::string(stem_name(k))] = rel(p);
    js["stems"] = stems;
    js["is_demo"] = s.is_demo;
    js["silent_stems"] = nlohmann::ordered_json::array();
    for (StemKind k : s.silent_stems) js["silent_stems"].push_back(std::string(stem_name(k)));
    doc["songs"].push_back(js);
  }
  return doc.dump(2) + "\n";
}

}  // namespace mdx
