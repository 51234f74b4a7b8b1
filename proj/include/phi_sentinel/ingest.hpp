#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "phi_sentinel/datetime.hpp"
#include "phi_sentinel/error.hpp"
#include "phi_sentinel/random.hpp"

namespace phi_sentinel {

enum class DataType { kInt = 0, kFloat = 1, kString = 2, kDatetime = 3 };

inline const char* to_string(DataType t) {
  switch (t) {
    case DataType::kInt: return "int";
    case DataType::kFloat: return "float";
    case DataType::kString: return "string";
    case DataType::kDatetime: return "datetime";
  }
  return "string";
}

// HIPAA Safe Harbor identifier categories, lettered as in the regulation's
// usual (A)-(R) enumeration.
enum class PhiCategory : char {
  A = 'A', B = 'B', C = 'C', D = 'D', E = 'E', F = 'F', G = 'G', H = 'H', I = 'I',
  J = 'J', K = 'K', L = 'L', M = 'M', N = 'N', O = 'O', P = 'P', Q = 'Q', R = 'R'
};

inline std::optional<PhiCategory> parse_category(std::string_view s) {
  if (s.size() != 1) return std::nullopt;
  const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  if (c < 'A' || c > 'R') return std::nullopt;
  return static_cast<PhiCategory>(c);
}

inline std::string to_string(PhiCategory c) { return std::string(1, static_cast<char>(c)); }

using Cell = std::optional<std::string>;

struct Column {
  std::string name;
  std::vector<Cell> cells;
  std::optional<int> label;  // 0 non-sensitive, 1 sensitive
  std::optional<PhiCategory> category;

  std::size_t non_null_count() const {
    return static_cast<std::size_t>(
        std::count_if(cells.begin(), cells.end(), [](const Cell& c) { return c.has_value(); }));
  }
};

struct Dataset {
  std::string name;
  std::vector<Column> columns;
  std::size_t row_count = 0;

  std::size_t column_count() const { return columns.size(); }
};

struct ColumnSample {
  std::string column_name;
  std::vector<std::string> values;  // in original row order
  DataType inferred_type = DataType::kString;
  std::size_t total_cells = 0;
  std::size_t null_count = 0;
  std::uint64_t seed = 0;

  std::size_t size() const { return values.size(); }
};

struct CsvOptions {
  char delimiter = ',';
  bool has_header = true;
  std::vector<std::string> null_tokens = {"", "NA", "NULL", "NaN"};
};

namespace detail {

inline bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

// RFC 4180 record reader. Quoted fields may contain the delimiter, doubled
// quotes and line breaks. Returns false at end of input.
class CsvReader {
 public:
  CsvReader(std::istream& in, char delimiter) : in_(in), delimiter_(delimiter) {}

  bool next(std::vector<std::string>& fields) {
    fields.clear();
    if (in_.peek() == std::char_traits<char>::eof()) return false;
    ++line_;
    record_line_ = line_;
    std::string field;
    bool quoted = false;
    bool field_was_quoted = false;
    char c;
    while (in_.get(c)) {
      if (quoted) {
        if (c == '"') {
          if (in_.peek() == '"') {
            in_.get(c);
            field += '"';
          } else {
            quoted = false;
          }
        } else {
          if (c == '\n') ++line_;
          field += c;
        }
      } else if (c == '"' && field.empty() && !field_was_quoted) {
        quoted = true;
        field_was_quoted = true;
      } else if (c == delimiter_) {
        fields.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
      } else if (c == '\r') {
        // swallowed; CRLF line endings
      } else if (c == '\n') {
        break;
      } else {
        field += c;
      }
    }
    if (quoted) throw ParseError("unterminated quoted field", record_line_);
    fields.push_back(std::move(field));
    return true;
  }

  std::size_t line() const { return record_line_; }

 private:
  std::istream& in_;
  char delimiter_;
  std::size_t line_ = 0;
  std::size_t record_line_ = 0;
};

inline std::string quote_field(const std::string& value, char delimiter) {
  const bool needs_quotes = value.find_first_of(std::string("\"\r\n") + delimiter) !=
                                std::string::npos ||
                            (!value.empty() && (value.front() == ' ' || value.back() == ' '));
  if (!needs_quotes) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace detail

inline bool is_null_token(std::string_view token, const std::vector<std::string>& null_tokens) {
  return std::any_of(null_tokens.begin(), null_tokens.end(),
                     [&](const std::string& n) { return detail::iequals(token, n); });
}

inline Dataset read_dataset(std::istream& in, std::string name, const CsvOptions& options = {}) {
  detail::CsvReader reader(in, options.delimiter);
  std::vector<std::string> fields;
  Dataset dataset;
  dataset.name = std::move(name);
  if (!reader.next(fields)) throw EmptyDatasetError("empty dataset: " + dataset.name);
  const std::size_t width = fields.size();
  dataset.columns.resize(width);
  auto add_row = [&](std::vector<std::string>& row) {
    if (row.size() != width) {
      throw ParseError("ragged row: expected " + std::to_string(width) + " fields, got " +
                           std::to_string(row.size()),
                       reader.line());
    }
    for (std::size_t c = 0; c < width; ++c) {
      if (is_null_token(row[c], options.null_tokens)) {
        dataset.columns[c].cells.emplace_back(std::nullopt);
      } else {
        dataset.columns[c].cells.emplace_back(std::move(row[c]));
      }
    }
    ++dataset.row_count;
  };
  if (options.has_header) {
    for (std::size_t c = 0; c < width; ++c) dataset.columns[c].name = fields[c];
  } else {
    for (std::size_t c = 0; c < width; ++c) dataset.columns[c].name = "column_" + std::to_string(c);
    add_row(fields);
  }
  while (reader.next(fields)) {
    // A trailing blank line is not a row.
    if (fields.size() == 1 && fields[0].empty() && width != 1) continue;
    add_row(fields);
  }
  return dataset;
}

inline std::string stem_of(const std::string& path) {
  const auto slash = path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  const auto dot = base.find_last_of('.');
  return dot == std::string::npos ? base : base.substr(0, dot);
}

inline Dataset load_dataset(const std::string& path, const CsvOptions& options = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_dataset(in, stem_of(path), options);
}

inline void write_dataset(std::ostream& out, const Dataset& dataset, char delimiter = ',') {
  for (std::size_t c = 0; c < dataset.columns.size(); ++c) {
    if (c) out << delimiter;
    out << detail::quote_field(dataset.columns[c].name, delimiter);
  }
  out << '\n';
  for (std::size_t r = 0; r < dataset.row_count; ++r) {
    for (std::size_t c = 0; c < dataset.columns.size(); ++c) {
      if (c) out << delimiter;
      const auto& cell = dataset.columns[c].cells[r];
      if (cell) out << detail::quote_field(*cell, delimiter);
    }
    out << '\n';
  }
}

inline void save_dataset(const std::string& path, const Dataset& dataset, char delimiter = ',') {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write_dataset(out, dataset, delimiter);
}

// ---- label sidecar: column_name,label[,category] ----

struct LabelEntry {
  std::string column_name;
  int label = 0;
  std::optional<PhiCategory> category;
};

inline std::vector<LabelEntry> read_labels(std::istream& in) {
  detail::CsvReader reader(in, ',');
  std::vector<std::string> fields;
  std::vector<LabelEntry> out;
  bool first = true;
  while (reader.next(fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (first) {
      first = false;
      if (!fields.empty() && detail::iequals(fields[0], "column_name")) continue;
    }
    if (fields.size() < 2 || fields.size() > 3)
      throw ParseError("label sidecar rows need 2 or 3 fields", reader.line());
    LabelEntry entry;
    entry.column_name = fields[0];
    if (fields[1] == "0") {
      entry.label = 0;
    } else if (fields[1] == "1") {
      entry.label = 1;
    } else {
      throw ParseError("label must be 0 or 1, got '" + fields[1] + "'", reader.line());
    }
    if (fields.size() == 3 && !fields[2].empty()) {
      entry.category = parse_category(fields[2]);
      if (!entry.category) throw ParseError("bad PHI category '" + fields[2] + "'", reader.line());
      if (entry.label != 1) throw ParseError("category given for a label-0 column", reader.line());
    }
    out.push_back(std::move(entry));
  }
  return out;
}

inline std::vector<LabelEntry> load_labels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_labels(in);
}

inline void write_labels(std::ostream& out, const std::vector<LabelEntry>& labels) {
  out << "column_name,label,category\n";
  for (const auto& l : labels) {
    out << detail::quote_field(l.column_name, ',') << ',' << l.label << ',';
    if (l.category) out << static_cast<char>(*l.category);
    out << '\n';
  }
}

inline void save_labels(const std::string& path, const std::vector<LabelEntry>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write_labels(out, labels);
}

// Attaches sidecar labels by column name. Columns missing from the sidecar
// keep no label; sidecar names missing from the dataset are an error.
inline void apply_labels(Dataset& dataset, const std::vector<LabelEntry>& labels) {
  for (const auto& entry : labels) {
    auto it = std::find_if(dataset.columns.begin(), dataset.columns.end(),
                           [&](const Column& c) { return c.name == entry.column_name; });
    if (it == dataset.columns.end())
      throw Error("label sidecar names unknown column '" + entry.column_name + "'");
    it->label = entry.label;
    it->category = entry.category;
  }
}

// ---- token parsing and type inference ----

inline bool is_integer_token(std::string_view s) {
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) s.remove_prefix(1);
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// Decimal or scientific notation; "inf"/"nan" spellings are not numbers here.
inline std::optional<double> parse_number(std::string_view s) {
  s = datetime::detail::trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  bool has_digit = false;
  for (char c : s) {
    if (c >= '0' && c <= '9') {
      has_digit = true;
    } else if (c != '-' && c != '.' && c != 'e' && c != 'E' && c != '+') {
      return std::nullopt;
    }
  }
  if (!has_digit) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

inline constexpr int kTypeThresholdPercent = 95;

template <typename Range>
DataType infer_type(const Range& values) {
  std::size_t n = 0;
  std::size_t ints = 0;
  std::size_t numerics = 0;
  std::size_t dates = 0;
  for (const auto& v : values) {
    const std::string_view token(v);
    ++n;
    if (is_integer_token(datetime::detail::trim(token))) {
      ++ints;
      ++numerics;
    } else if (parse_number(token)) {
      ++numerics;
    }
  }
  if (n == 0) return DataType::kString;
  auto passes = [n](std::size_t count) {
    return count * 100 >= static_cast<std::size_t>(kTypeThresholdPercent) * n;
  };
  if (passes(ints)) return DataType::kInt;
  if (passes(numerics)) return DataType::kFloat;
  for (const auto& v : values) {
    if (datetime::is_datetime(std::string_view(v))) ++dates;
  }
  if (passes(dates)) return DataType::kDatetime;
  return DataType::kString;
}

inline constexpr std::size_t kDefaultSampleSize = 1000;

// Uniform sample without replacement from the non-null cells, returned in
// original row order. Depends only on (column, k, seed).
inline ColumnSample sample_column(const Column& column, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw Error("sample size must be positive");
  std::vector<std::size_t> rows;
  rows.reserve(column.cells.size());
  for (std::size_t r = 0; r < column.cells.size(); ++r) {
    if (column.cells[r] && !column.cells[r]->empty()) rows.push_back(r);
  }
  if (rows.empty()) throw EmptySampleError("column '" + column.name + "' has no data");

  const std::size_t take = std::min(k, rows.size());
  if (take < rows.size()) {
    random::Rng rng(seed);
    for (std::size_t i = 0; i < take; ++i) {
      const auto j = i + random::uniform_below(rng, rows.size() - i);
      std::swap(rows[i], rows[j]);
    }
    rows.resize(take);
    std::sort(rows.begin(), rows.end());
  }

  ColumnSample sample;
  sample.column_name = column.name;
  sample.total_cells = column.cells.size();
  sample.null_count = column.cells.size() - column.non_null_count();
  sample.seed = seed;
  sample.values.reserve(take);
  for (auto r : rows) sample.values.push_back(*column.cells[r]);
  sample.inferred_type = infer_type(sample.values);
  return sample;
}

}  // namespace phi_sentinel
