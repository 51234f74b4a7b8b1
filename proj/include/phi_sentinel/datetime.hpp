#pragma once

#include <array>
#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

// Date/time layout recognition shared by type inference, the date screening
// pattern and the metadata extractor.
//
// A layout is a small format string:
//   %Y four-digit year      %y two-digit year (00-68 -> 20xx, 69-99 -> 19xx)
//   %m month 1-12 (1 or 2 digits)   %d day 1-31 (1 or 2 digits)
//   %H hour 00-23   %M minute 00-59   %S second 00-59
//   %B month name, full or three-letter abbreviation, case-insensitive
//   %. optional period   %, optional comma
// Any other character must match literally. Day-of-month is range checked
// (1-31) but not checked against the month, so "1970-02-31" is a date.
namespace phi_sentinel::datetime {

inline constexpr std::array<std::string_view, 10> kLayouts = {
    "%Y-%m-%d",           //
    "%Y/%m/%d",           //
    "%m/%d/%Y",           //
    "%d/%m/%Y",           //
    "%m/%d/%y",           //
    "%m-%d-%Y",           //
    "%Y-%m-%d %H:%M:%S",  //
    "%B %d%, %Y",         // MonthName DD YYYY
    "%B%. %Y",            // Mon. YYYY
    "%m/%Y",              //
};

inline constexpr std::array<std::string_view, 12> kMonthNames = {
    "january", "february", "march",     "april",   "may",      "june",
    "july",    "august",   "september", "october", "november", "december"};

struct ParsedDate {
  int year = 1970;
  int month = 1;
  int day = 1;
  int hour = 0;
  int minute = 0;
  int second = 0;
  std::size_t layout = 0;
};

// Days since 1970-01-01 in the proleptic Gregorian calendar.
constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline double epoch_seconds(const ParsedDate& p) {
  return static_cast<double>(days_from_civil(p.year, p.month, p.day)) * 86400.0 +
         p.hour * 3600.0 + p.minute * 60.0 + p.second;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

// Reads between min_digits and max_digits digits; fails on zero digits.
inline bool read_number(std::string_view& s, int min_digits, int max_digits,
                        int& out) {
  int n = 0;
  int value = 0;
  while (n < max_digits && n < static_cast<int>(s.size()) &&
         std::isdigit(static_cast<unsigned char>(s[n]))) {
    value = value * 10 + (s[n] - '0');
    ++n;
  }
  if (n < min_digits) return false;
  out = value;
  s.remove_prefix(n);
  return true;
}

inline bool read_month_name(std::string_view& s, int& month) {
  std::size_t n = 0;
  while (n < s.size() && std::isalpha(static_cast<unsigned char>(s[n]))) ++n;
  if (n < 3) return false;
  std::string word(s.substr(0, n));
  for (auto& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (std::size_t i = 0; i < kMonthNames.size(); ++i) {
    const auto full = kMonthNames[i];
    // "sept" is the one four-letter abbreviation in common use.
    if (word == full || word == full.substr(0, 3) || (i == 8 && word == "sept")) {
      month = static_cast<int>(i) + 1;
      s.remove_prefix(n);
      return true;
    }
  }
  return false;
}

inline std::optional<ParsedDate> parse_layout(std::string_view text,
                                              std::string_view layout) {
  ParsedDate out;
  std::string_view s = text;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const char c = layout[i];
    if (c != '%') {
      if (s.empty() || s.front() != c) return std::nullopt;
      s.remove_prefix(1);
      continue;
    }
    const char directive = layout[++i];
    int value = 0;
    switch (directive) {
      case 'Y':
        if (!read_number(s, 4, 4, value)) return std::nullopt;
        out.year = value;
        break;
      case 'y':
        if (!read_number(s, 2, 2, value)) return std::nullopt;
        out.year = value <= 68 ? 2000 + value : 1900 + value;
        break;
      case 'm':
        if (!read_number(s, 1, 2, value) || value < 1 || value > 12) return std::nullopt;
        out.month = value;
        break;
      case 'd':
        if (!read_number(s, 1, 2, value) || value < 1 || value > 31) return std::nullopt;
        out.day = value;
        break;
      case 'H':
        if (!read_number(s, 2, 2, value) || value > 23) return std::nullopt;
        out.hour = value;
        break;
      case 'M':
        if (!read_number(s, 2, 2, value) || value > 59) return std::nullopt;
        out.minute = value;
        break;
      case 'S':
        if (!read_number(s, 2, 2, value) || value > 59) return std::nullopt;
        out.second = value;
        break;
      case 'B':
        if (!read_month_name(s, value)) return std::nullopt;
        out.month = value;
        break;
      case '.':
        if (!s.empty() && s.front() == '.') s.remove_prefix(1);
        break;
      case ',':
        if (!s.empty() && s.front() == ',') s.remove_prefix(1);
        break;
      default:
        return std::nullopt;
    }
  }
  if (!s.empty()) return std::nullopt;
  return out;
}

}  // namespace detail

// First layout (in kLayouts order) that accepts the trimmed token.
inline std::optional<ParsedDate> parse(std::string_view token) {
  const auto text = detail::trim(token);
  if (text.empty()) return std::nullopt;
  for (std::size_t i = 0; i < kLayouts.size(); ++i) {
    if (auto parsed = detail::parse_layout(text, kLayouts[i])) {
      parsed->layout = i;
      return parsed;
    }
  }
  return std::nullopt;
}

inline bool is_datetime(std::string_view token) { return parse(token).has_value(); }

inline std::optional<double> to_epoch_seconds(std::string_view token) {
  if (auto parsed = parse(token)) return epoch_seconds(*parsed);
  return std::nullopt;
}

// ECMAScript regex equivalent of one layout, used by the date screening
// pattern so the pattern library and the type inference agree.
inline std::string layout_to_regex(std::string_view layout) {
  static const std::string month_alternation =
      "(?:jan(?:uary)?|feb(?:ruary)?|mar(?:ch)?|apr(?:il)?|may|jun(?:e)?|"
      "jul(?:y)?|aug(?:ust)?|sep(?:t|tember)?|oct(?:ober)?|nov(?:ember)?|"
      "dec(?:ember)?)";
  std::string out;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const char c = layout[i];
    if (c != '%') {
      if (std::string_view("\\^$.|?*+()[]{}").find(c) != std::string_view::npos)
        out += '\\';
      out += c;
      continue;
    }
    switch (layout[++i]) {
      case 'Y': out += "\\d{4}"; break;
      case 'y': out += "\\d{2}"; break;
      case 'm': out += "(?:0?[1-9]|1[0-2])"; break;
      case 'd': out += "(?:0?[1-9]|[12]\\d|3[01])"; break;
      case 'H': out += "(?:[01]\\d|2[0-3])"; break;
      case 'M':
      case 'S': out += "[0-5]\\d"; break;
      case 'B': out += month_alternation; break;
      case '.': out += "\\.?"; break;
      case ',': out += ",?"; break;
      default: break;
    }
  }
  return out;
}

}  // namespace phi_sentinel::datetime
