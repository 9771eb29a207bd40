#pragma once

// MIN1 minutiae text format:
//
//   MIN1
//   CORE <x> <y>            (optional, at most once)
//   <x> <y> <theta> <E|B>   (one minutia per line)
//
// Tokens are whitespace separated; lines starting with '#' and blank lines
// are ignored. Minutia order is preserved.

#include <cmath>
#include <set>
#include <string>
#include <string_view>
#include <utility>

#include "fpv/core.hpp"
#include "fpv/error.hpp"
#include "fpv/text.hpp"

namespace fpv {

inline constexpr std::string_view kMin1Magic = "MIN1";
inline constexpr int kMin1Digits = 9;

inline MinutiaeSet parse_minutiae(std::string_view bytes, std::string source_id = {}) {
  const auto lines = text::lines(bytes);
  if (lines.empty() || text::trim(lines[0]) != kMin1Magic)
    throw Error(Errc::MalformedHeader, "expected 'MIN1' on line 1", 1);

  MinutiaeSet set;
  set.source_id = std::move(source_id);
  std::set<std::pair<double, double>> seen;

  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto line = text::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto tok = text::split_ws(line);

    auto bad = [&](const std::string& why) { return Error(Errc::MalformedLine, why, line_no); };

    if (tok[0] == "CORE") {
      if (set.core) throw bad("second CORE line");
      if (!set.minutiae.empty()) throw bad("CORE must precede minutiae");
      if (tok.size() != 3) throw bad("CORE expects 2 coordinates");
      auto x = text::parse_double(tok[1]);
      auto y = text::parse_double(tok[2]);
      if (!x || !y || !std::isfinite(*x) || !std::isfinite(*y)) throw bad("bad CORE coordinate");
      set.core = CorePoint{*x, *y};
      continue;
    }

    if (tok.size() != 4) throw bad("expected '<x> <y> <theta> <E|B>'");
    auto x = text::parse_double(tok[0]);
    auto y = text::parse_double(tok[1]);
    auto theta = text::parse_double(tok[2]);
    if (!x || !y || !theta) throw bad("bad number");
    Minutia m{*x, *y, *theta, MinutiaKind::Ending};
    if (!is_finite(m)) throw bad("non-finite value");
    m.theta = normalize_angle(m.theta);
    if (tok[3] == "E") {
      m.kind = MinutiaKind::Ending;
    } else if (tok[3] == "B") {
      m.kind = MinutiaKind::Bifurcation;
    } else {
      throw bad("kind must be E or B");
    }
    if (!seen.emplace(m.x, m.y).second)
      throw Error(Errc::DuplicatePoint, "duplicate minutia position", line_no);
    set.minutiae.push_back(m);
  }

  if (set.minutiae.empty()) throw Error(Errc::EmptySet, "no minutiae in input");
  return set;
}

/// Writes `set` as MIN1. The default precision (9 significant digits) makes
/// parse(serialize(s)) exact for any set that was itself parsed from MIN1;
/// pass text::kExactDigits for bit-exact round trips of arbitrary doubles.
inline std::string serialize_minutiae(const MinutiaeSet& set, int digits = kMin1Digits) {
  std::string out{kMin1Magic};
  out += '\n';
  if (set.core) {
    out += "CORE " + text::format_double(set.core->x, digits) + ' ' + text::format_double(set.core->y, digits) + '\n';
  }
  for (const auto& m : set.minutiae) {
    out += text::format_double(m.x, digits);
    out += ' ';
    out += text::format_double(m.y, digits);
    out += ' ';
    out += text::format_double(m.theta, digits);
    out += m.kind == MinutiaKind::Ending ? " E\n" : " B\n";
  }
  return out;
}

}  // namespace fpv
