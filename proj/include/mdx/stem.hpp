#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "mdx/error.hpp"

namespace mdx {

// The four separation targets. Enumerator order is the canonical output
// order everywhere (tables, maps, file listings).
enum class StemKind { Bass, Drums, Other, Vocals };

inline constexpr std::array<StemKind, 4> kAllStems = {
    StemKind::Bass, StemKind::Drums, StemKind::Other, StemKind::Vocals};

inline constexpr std::string_view stem_name(StemKind s) {
  switch (s) {
    case StemKind::Bass: return "bass";
    case StemKind::Drums: return "drums";
    case StemKind::Other: return "other";
    case StemKind::Vocals: return "vocals";
  }
  return "?";
}

inline std::optional<StemKind> parse_stem(std::string_view name) {
  for (StemKind s : kAllStems)
    if (stem_name(s) == name) return s;
  return std::nullopt;
}

inline StemKind parse_stem_or_throw(std::string_view name) {
  if (auto s = parse_stem(name)) return *s;
  throw ValidationError("unknown stem kind '" + std::string(name) + "'");
}

}  // namespace mdx
