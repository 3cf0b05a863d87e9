#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "config.hpp"
#include "value_traits.hpp"

namespace sumtree::io {

class parse_error : public error {
public:
  parse_error(std::size_t line, const std::string& what)
      : error("line " + std::to_string(line) + ": " + what), line_(line) {}

  [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

namespace detail {

inline std::string_view trim(std::string_view s) noexcept {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  if (text.size() > 1 && text.front() == '+' && text[1] != '-' && text[1] != '+') {
    text.remove_prefix(1);
  }
  const char* end = text.data() + text.size();
  std::from_chars_result res;
  if constexpr (std::is_integral_v<T>) {
    res = std::from_chars(text.data(), end, out, 10);
  } else {
    res = std::from_chars(text.data(), end, out, std::chars_format::general);
  }
  if (res.ec != std::errc{} || res.ptr != end) {
    return false;
  }
  if constexpr (std::is_floating_point_v<T>) {
    return std::isfinite(out);
  }
  return true;
}

} // namespace detail

/// Reads one numeric literal per line. Blank lines and lines starting with
/// '#' are skipped; element order follows line order.
template <element_value T>
std::vector<T> read_values(std::istream& in) {
  std::vector<T> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = detail::trim(line);
    if (text.empty() || text.front() == '#') {
      continue;
    }
    T v{};
    if (!detail::parse_number(text, v)) {
      throw parse_error(line_no, "not a valid " +
                                     std::string(std::is_integral_v<T> ? "64-bit integer" : "finite number") +
                                     ": '" + std::string(text) + "'");
    }
    values.push_back(v);
  }
  return values;
}

template <element_value T>
std::vector<T> read_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw parse_error(0, "cannot open '" + path + "'");
  }
  return read_values<T>(in);
}

/// One machine-readable object per line: {"key":value,...}.
class record {
public:
  record& add(std::string_view key, std::int64_t v) { return raw(key, std::to_string(v)); }
  record& add(std::string_view key, std::uint64_t v) { return raw(key, std::to_string(v)); }
  record& add(std::string_view key, int128_t v) { return raw(key, to_decimal(v)); }
  record& add(std::string_view key, bool v) { return raw(key, v ? "true" : "false"); }

  record& add(std::string_view key, double v) {
    if (!std::isfinite(v)) {
      return raw(key, "null");
    }
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return raw(key, std::string(buf, res.ptr));
  }

  record& add(std::string_view key, std::string_view v) { return raw(key, quote(v)); }
  record& add(std::string_view key, const char* v) { return add(key, std::string_view(v)); }

  [[nodiscard]] std::string str() const { return "{" + body_ + "}"; }

private:
  static std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
      switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\u%04x", c);
            out += buf;
          } else {
            out += c;
          }
      }
    }
    return out + "\"";
  }

  record& raw(std::string_view key, const std::string& value) {
    if (!body_.empty()) {
      body_ += ',';
    }
    body_ += quote(key);
    body_ += ':';
    body_ += value;
    return *this;
  }

  std::string body_;
};

} // namespace sumtree::io
