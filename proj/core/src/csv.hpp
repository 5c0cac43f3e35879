#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "mmd/state.hpp"

namespace mmd::detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

/// Non-empty, non-comment lines; a first line starting with a letter is a header.
inline std::vector<std::string_view> data_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  bool first = true;
  for (auto line : split(text, '\n')) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    if (first) {
      first = false;
      const char c = line.front();
      if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) continue;
    }
    lines.push_back(line);
  }
  return lines;
}

template <class T>
T parse_number(std::string_view s, const std::string& where) {
  s = trim(s);
  T value{};
  if constexpr (std::is_floating_point_v<T>) {
    // std::from_chars for double is available in libstdc++ 11.
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || p != s.data() + s.size())
      throw InputError(where + ": bad number \"" + std::string(s) + "\"");
  } else {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || p != s.data() + s.size())
      throw InputError(where + ": bad integer \"" + std::string(s) + "\"");
  }
  return value;
}

inline Party parse_party(std::string_view s, const std::string& where) {
  s = trim(s);
  if (s == "R" || s == "r") return Party::R;
  if (s == "D" || s == "d") return Party::D;
  throw InputError(where + ": bad party \"" + std::string(s) + "\"");
}

}  // namespace mmd::detail
