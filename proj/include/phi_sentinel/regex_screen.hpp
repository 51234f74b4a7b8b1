#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "phi_sentinel/datetime.hpp"
#include "phi_sentinel/error.hpp"
#include "phi_sentinel/ingest.hpp"
#include "phi_sentinel/parallel.hpp"

// Rule-based screening: every sampled value is tested against every pattern,
// and a column scores the largest per-pattern match fraction.
namespace phi_sentinel {

enum class MatchMode { kFull, kSubstring, kKeywordSet };

inline const char* to_string(MatchMode m) {
  switch (m) {
    case MatchMode::kFull: return "full";
    case MatchMode::kSubstring: return "substring";
    case MatchMode::kKeywordSet: return "keyword-set";
  }
  return "full";
}

inline MatchMode parse_match_mode(std::string_view s) {
  if (s == "full") return MatchMode::kFull;
  if (s == "substring") return MatchMode::kSubstring;
  if (s == "keyword-set") return MatchMode::kKeywordSet;
  throw PatternError("unknown match mode '" + std::string(s) + "'");
}

class PatternEntry {
 public:
  PatternEntry(std::string id, PhiCategory category, MatchMode mode, std::string expression,
               std::vector<std::string> keywords, bool icase, std::string description)
      : id_(std::move(id)),
        category_(category),
        mode_(mode),
        expression_(std::move(expression)),
        keywords_(std::move(keywords)),
        icase_(icase),
        description_(std::move(description)) {
    if (mode_ == MatchMode::kKeywordSet) {
      if (keywords_.empty()) throw PatternError("keyword-set entry '" + id_ + "' has no keywords");
      for (auto& k : keywords_) {
        if (k.empty()) throw PatternError("empty keyword in '" + id_ + "'");
        for (auto& c : k) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      }
    } else {
      auto flags = std::regex::ECMAScript | std::regex::optimize;
      if (icase_) flags |= std::regex::icase;
      try {
        compiled_ = std::make_shared<const std::regex>(expression_, flags);
      } catch (const std::regex_error& e) {
        throw PatternError("pattern '" + id_ + "' does not compile: " + e.what());
      }
    }
  }

  const std::string& id() const { return id_; }
  PhiCategory category() const { return category_; }
  MatchMode mode() const { return mode_; }
  const std::string& expression() const { return expression_; }
  const std::vector<std::string>& keywords() const { return keywords_; }
  bool icase() const { return icase_; }
  const std::string& description() const { return description_; }

  bool matches(std::string_view value) const {
    switch (mode_) {
      case MatchMode::kFull: {
        const auto t = datetime::detail::trim(value);
        return std::regex_match(t.begin(), t.end(), *compiled_);
      }
      case MatchMode::kSubstring:
        return std::regex_search(value.begin(), value.end(), *compiled_);
      case MatchMode::kKeywordSet:
        return contains_keyword(value);
    }
    return false;
  }

 private:
  static bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

  // Case-insensitive whole-word search. A keyword such as "st." ends at its
  // own period; the boundary is checked on the character after it.
  bool contains_keyword(std::string_view value) const {
    std::string lowered(value);
    for (auto& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (const auto& kw : keywords_) {
      for (auto pos = lowered.find(kw); pos != std::string::npos; pos = lowered.find(kw, pos + 1)) {
        const bool left_ok = pos == 0 || !is_word_char(lowered[pos - 1]) || !is_word_char(kw.front());
        const auto end = pos + kw.size();
        const bool right_ok =
            end == lowered.size() || !is_word_char(lowered[end]) || !is_word_char(kw.back());
        if (left_ok && right_ok) return true;
      }
    }
    return false;
  }

  std::string id_;
  PhiCategory category_;
  MatchMode mode_;
  std::string expression_;
  std::vector<std::string> keywords_;
  bool icase_ = false;
  std::string description_;
  std::shared_ptr<const std::regex> compiled_;
};

struct PatternLibrary {
  std::vector<PatternEntry> entries;
  std::string version;

  const PatternEntry* find(std::string_view id) const {
    for (const auto& e : entries)
      if (e.id() == id) return &e;
    return nullptr;
  }
};

// ---- JSON form: {version, entries:[{id, category, mode, expression|keywords,
// icase?, description}]} or a bare entries array ----

inline PatternLibrary library_from_json(const nlohmann::json& doc) {
  PatternLibrary library;
  const nlohmann::json* entries = &doc;
  if (doc.is_object()) {
    library.version = doc.value("version", std::string("unversioned"));
    if (!doc.contains("entries")) throw PatternError("library document has no 'entries'");
    entries = &doc.at("entries");
  } else {
    library.version = "unversioned";
  }
  if (!entries->is_array()) throw PatternError("library entries must be an array");
  std::set<std::string> seen;
  try {
    for (const auto& e : *entries) {
      const auto id = e.at("id").get<std::string>();
      if (!seen.insert(id).second) throw PatternError("duplicate pattern id '" + id + "'");
      const auto category = parse_category(e.at("category").get<std::string>());
      if (!category) throw PatternError("pattern '" + id + "' has an invalid category");
      const auto mode = parse_match_mode(e.at("mode").get<std::string>());
      std::string expression;
      std::vector<std::string> keywords;
      if (mode == MatchMode::kKeywordSet) {
        keywords = e.at("keywords").get<std::vector<std::string>>();
      } else {
        expression = e.at("expression").get<std::string>();
      }
      library.entries.emplace_back(id, *category, mode, std::move(expression), std::move(keywords),
                                   e.value("icase", false), e.value("description", std::string()));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw PatternError(std::string("malformed pattern library: ") + ex.what());
  }
  return library;
}

inline nlohmann::ordered_json library_to_json(const PatternLibrary& library) {
  nlohmann::ordered_json doc;
  doc["version"] = library.version;
  doc["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : library.entries) {
    nlohmann::ordered_json j;
    j["id"] = e.id();
    j["category"] = to_string(e.category());
    j["mode"] = to_string(e.mode());
    if (e.mode() == MatchMode::kKeywordSet) {
      j["keywords"] = e.keywords();
    } else {
      j["expression"] = e.expression();
    }
    if (e.icase()) j["icase"] = true;
    j["description"] = e.description();
    doc["entries"].push_back(std::move(j));
  }
  return doc;
}

inline PatternLibrary load_library(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return library_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw PatternError(std::string("pattern library is not valid JSON: ") + e.what());
  }
}

inline constexpr const char* kBuiltinLibraryVersion = "safe-harbor-2";

namespace detail {

// One capitalised name token: Smith, O'Brien, McDonald, A-Bsfsfs.
inline const std::string kNameToken = "[A-Z]['\\-]?[A-Z]?[a-z]+(?:[A-Z][a-z]+)?(?:-[A-Z][a-z]+)?";

inline std::string date_layouts_alternation() {
  std::string out = "(?:";
  for (std::size_t i = 0; i < datetime::kLayouts.size(); ++i) {
    if (i) out += '|';
    out += datetime::layout_to_regex(datetime::kLayouts[i]);
  }
  return out + ")";
}

}  // namespace detail

// The built-in Safe Harbor library, in the same JSON form load_library reads.
// Expressions are re-derived from the intent of each row of the classic
// pattern table rather than copied, since the printed sources are damaged.
inline nlohmann::ordered_json builtin_library_json() {
  using nlohmann::ordered_json;
  const std::string& name = detail::kNameToken;
  auto entry = [](std::string id, std::string category, std::string mode, std::string expression,
                  std::string description, bool icase = false) {
    ordered_json j;
    j["id"] = std::move(id);
    j["category"] = std::move(category);
    j["mode"] = std::move(mode);
    j["expression"] = std::move(expression);
    if (icase) j["icase"] = true;
    j["description"] = std::move(description);
    return j;
  };
  auto keyword_entry = [](std::string id, std::string category, std::vector<std::string> keywords,
                          std::string description) {
    ordered_json j;
    j["id"] = std::move(id);
    j["category"] = std::move(category);
    j["mode"] = "keyword-set";
    j["keywords"] = std::move(keywords);
    j["description"] = std::move(description);
    return j;
  };

  ordered_json entries = ordered_json::array();
  entries.push_back(entry("name", "A", "full", name + "(?:,? " + name + "){0,2}",
                          "capitalised given/family names, optionally 'Last, First'"));
  entries.push_back(entry("name_title", "A", "substring",
                          "\\b(?:Dr|Mr|Mrs|Ms|Prof)\\.?\\s+[A-Z]|\\b(?:Miss|Sir|Madam)\\s+[A-Z]",
                          "salutation followed by a capitalised name"));
  entries.push_back(entry("name_middle_initial", "A", "full",
                          name + "\\s+[A-Z]\\.?\\s+" + name, "First M. Last"));
  entries.push_back(entry("postal_code", "B", "full", "\\d{5}(?:-\\d{4})?", "ZIP and ZIP+4"));
  entries.push_back(keyword_entry(
      "address", "B",
      {"street",    "avenue",     "road",      "boulevard",   "drive",     "trail",
       "way",       "lane",       "ave",       "blvd",        "st",        "rd",
       "trl",       "wy",         "ln",        "court",       "ct",        "place",
       "plc",       "terrace",    "ter",       "highway",     "freeway",   "autoroute",
       "autobahn",  "expressway", "autostrasse", "autostrada", "byway",    "auto-estrada",
       "motorway",  "alley",      "bay",       "gardens",     "gate",      "grove",
       "heights",   "highlands",  "mews",      "pathway",     "vale",      "view",
       "walk",      "close",      "cove",      "circle",      "crescent",  "square",
       "loop",      "hill",       "causeway",  "canyon",      "parkway",   "esplanade",
       "approach",  "parade",     "park",      "plaza",       "promenade", "quay",
       "bypass",    "dr.",        "ave.",      "rd.",         "st.",       "blvd.",
       "pkwy.",     "city"},
      "street-address keywords"));
  entries.push_back(entry("date", "C", "full", detail::date_layouts_alternation(),
                          "calendar dates in the accepted layouts, month names included", true));
  entries.push_back(entry("date_of_birth", "C", "full",
                          "\\d{1,2}[-./ ]\\d{1,2}[-./ ]\\d{2}(?:\\d{2})?|\\d{4}[-./ ]\\d{1,2}[-./ ]\\d{1,2}",
                          "numeric X/X/XX, XX/XX/XXXX, XXXX/XX/XX with - . / or space"));
  entries.push_back(entry("date_partial", "C", "full",
                          "\\d{4}[-/](?:0?[1-9]|1[0-2])|(?:0?[1-9]|1[0-2])[-/]\\d{2}",
                          "YYYY/MM and MM/YY"));
  entries.push_back(entry("age", "C", "substring",
                          "\\b(?:ages?|aged|years?|yrs?|old|y\\.?o\\.?|y/o)(?![a-z])",
                          "age phrasing: 45 years, 45 y.o., aged 45", true));
  entries.push_back(entry("phone", "D", "full",
                          "(?:\\+?1[-. ]?)?\\(?\\d{3}\\)?[-. ]?\\d{3}[-. ]?\\d{4}",
                          "phone/fax: (123)456-7890, 123-456-7890, 123.456.7890, 1234567890"));
  entries.push_back(entry("email", "F", "full",
                          "[A-Za-z0-9_+.\\-]+@[A-Za-z0-9\\-]+(?:\\.[A-Za-z0-9\\-]+)*\\.[A-Za-z]{2,}",
                          "xxx.xxx@xxxx.xxx"));
  entries.push_back(entry("ssn", "G", "full", "\\d{3}-\\d{2}-\\d{4}|\\d{9}",
                          "social security number, dashed or bare"));
  entries.push_back(entry("digit_identifier", "H", "full", "\\(?\\d(?:[-/() ]{0,2}\\d){5,}\\)?",
                          "six or more digits with optional separators: MRN, account, plan, phone"));
  entries.push_back(entry("alnum_identifier", "H", "full",
                          "[A-Z]{1,4}[-#]?\\d{5,}[A-Z0-9]*|\\d{5,}[A-Z][A-Z0-9]*",
                          "letter-prefixed or letter-suffixed identifiers with five or more digits"));
  entries.push_back(entry(
      "url", "N", "full",
      "(?:https?://|www\\.)[a-z0-9\\-._~%]+(?::\\d+)?(?:[/?#]\\S*)?|"
      "[a-z0-9\\-]+(?:\\.[a-z0-9\\-]+)*\\.(?:com|org|net|edu|gov|io|info|us|uk|biz)(?:/\\S*)?",
      "web URLs with scheme, www prefix or a common top-level domain", true));
  entries.push_back(entry("ip_address", "O", "full",
                          "(?:(?:25[0-5]|2[0-4]\\d|[01]?\\d\\d?)\\.){3}(?:25[0-5]|2[0-4]\\d|[01]?\\d\\d?)",
                          "dotted-quad IPv4, octets 0-255"));
  entries.push_back(keyword_entry("race", "R",
                                  {"white", "caucasian", "american indian", "alaska native",
                                   "asian", "black", "african", "native hawaiian",
                                   "pacific islander"},
                                  "race literals"));
  entries.push_back(keyword_entry("gender", "R", {"male", "female"}, "gender literals"));
  entries.push_back(keyword_entry("ethnicity", "R", {"hispanic", "latino", "latina"},
                                  "ethnicity literals"));

  ordered_json doc;
  doc["version"] = kBuiltinLibraryVersion;
  doc["entries"] = std::move(entries);
  return doc;
}

inline const PatternLibrary& builtin_library() {
  static const PatternLibrary library = library_from_json(builtin_library_json());
  return library;
}

inline bool match_value(std::string_view value, const PatternEntry& entry) {
  return entry.matches(value);
}

struct RegexVerdict {
  std::string column_name;
  double prob_phi = 0.0;
  std::optional<std::string> best_pattern_id;
  std::map<std::string, double> per_pattern_fraction;
  bool no_data = false;
};

// Per-pattern match fractions over the sample; the column probability is the
// largest one. Ties go to the earlier library entry.
inline RegexVerdict screen_column(const ColumnSample& sample, const PatternLibrary& library) {
  if (sample.values.empty())
    throw EmptySampleError("column '" + sample.column_name + "' has an empty sample");
  RegexVerdict verdict;
  verdict.column_name = sample.column_name;
  const double denom = static_cast<double>(sample.values.size());
  std::size_t best_count = 0;
  for (const auto& entry : library.entries) {
    std::size_t matched = 0;
    for (const auto& v : sample.values)
      if (entry.matches(v)) ++matched;
    verdict.per_pattern_fraction[entry.id()] = static_cast<double>(matched) / denom;
    if (matched > best_count) {
      best_count = matched;
      verdict.best_pattern_id = entry.id();
    }
  }
  verdict.prob_phi = static_cast<double>(best_count) / denom;
  return verdict;
}

// Screens every column; all-null columns come back with no_data set and a
// zero probability instead of aborting the scan.
inline std::vector<RegexVerdict> screen_dataset(const Dataset& dataset, const PatternLibrary& library,
                                                std::size_t k, std::uint64_t seed,
                                                unsigned threads = 0) {
  std::vector<RegexVerdict> out(dataset.columns.size());
  parallel_for(dataset.columns.size(), threads, [&](std::size_t c) {
    const auto& column = dataset.columns[c];
    try {
      out[c] = screen_column(sample_column(column, k, seed), library);
    } catch (const EmptySampleError&) {
      out[c].column_name = column.name;
      out[c].no_data = true;
    }
  });
  return out;
}

}  // namespace phi_sentinel
