#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "phi_sentinel/datetime.hpp"
#include "phi_sentinel/error.hpp"
#include "phi_sentinel/ingest.hpp"
#include "phi_sentinel/parallel.hpp"
#include "phi_sentinel/random.hpp"

// Labeled synthetic EHR-like corpora: a handful of datasets, most columns
// clinical measurements, a small share PHI in dataset-specific formats.
namespace phi_sentinel::synthgen {

struct CorpusSpec {
  std::size_t n_datasets = 8;
  std::size_t total_columns = 889;
  std::size_t rows = 1000;
  double phi_fraction = 0.075;
  std::uint64_t seed = 42;
  // Reserve one format per generator for the last dataset only.
  bool held_out_formats = true;
};

struct ColumnInfo {
  std::string name;
  std::string generator;
  std::optional<PhiCategory> category;
  std::string format;
  std::optional<std::string> pattern_id;  // library entry the format is written for
  bool held_out = false;
  double null_rate = 0.0;
};

struct GeneratedDataset {
  Dataset dataset;  // labels and categories attached
  std::vector<ColumnInfo> manifest;
  bool is_test = false;

  std::vector<LabelEntry> labels() const {
    std::vector<LabelEntry> out;
    for (const auto& c : dataset.columns) out.push_back({c.name, c.label.value_or(0), c.category});
    return out;
  }
};

namespace detail {

using random::Rng;

// ~200 name tokens; every one is a plain capitalised word.
inline constexpr std::array<std::string_view, 100> kGivenNames = {
    "James",   "Mary",     "Robert",  "Patricia", "John",    "Jennifer", "Michael", "Linda",    "David",
    "Elizabeth", "William", "Barbara", "Richard",  "Susan",   "Joseph",   "Jessica", "Thomas",   "Sarah",
    "Charles", "Karen",    "Christopher", "Lisa", "Daniel",  "Nancy",    "Matthew", "Betty",    "Anthony",
    "Margaret", "Mark",    "Sandra",  "Donald",   "Ashley",  "Steven",   "Kimberly", "Paul",    "Emily",
    "Andrew",  "Donna",    "Joshua",  "Michelle", "Kenneth", "Carol",    "Kevin",   "Amanda",   "Brian",
    "Dorothy", "George",   "Melissa", "Timothy",  "Deborah", "Ronald",   "Stephanie", "Edward", "Rebecca",
    "Jason",   "Sharon",   "Jeffrey", "Laura",    "Ryan",    "Cynthia",  "Jacob",   "Kathleen", "Gary",
    "Amy",     "Nicholas", "Angela",  "Eric",     "Shirley", "Jonathan", "Anna",    "Stephen",  "Brenda",
    "Larry",   "Pamela",   "Justin",  "Emma",     "Scott",   "Nicole",   "Brandon", "Helen",    "Benjamin",
    "Samantha", "Samuel",  "Katherine", "Gregory", "Christine", "Alexander", "Debra", "Frank",   "Rachel",
    "Patrick", "Carolyn",  "Raymond", "Janet",    "Jack",    "Catherine", "Dennis", "Maria",    "Jerry",
    "Heather"};

inline constexpr std::array<std::string_view, 100> kSurnames = {
    "Smith",    "Johnson",  "Williams", "Brown",    "Jones",    "Garcia",   "Miller",   "Davis",    "Rodriguez",
    "Martinez", "Hernandez", "Lopez",   "Gonzalez", "Wilson",   "Anderson", "Thomas",   "Taylor",   "Moore",
    "Jackson",  "Martin",   "Lee",      "Perez",    "Thompson", "White",    "Harris",   "Sanchez",  "Clark",
    "Ramirez",  "Lewis",    "Robinson", "Walker",   "Young",    "Allen",    "King",     "Wright",   "Scott",
    "Torres",   "Nguyen",   "Hill",     "Flores",   "Green",    "Adams",    "Nelson",   "Baker",    "Hall",
    "Rivera",   "Campbell", "Mitchell", "Carter",   "Roberts",  "Gomez",    "Phillips", "Evans",    "Turner",
    "Diaz",     "Parker",   "Cruz",     "Edwards",  "Collins",  "Reyes",    "Stewart",  "Morris",   "Morales",
    "Murphy",   "Cook",     "Rogers",   "Gutierrez", "Ortiz",   "Morgan",   "Cooper",   "Peterson", "Bailey",
    "Reed",     "Kelly",    "Howard",   "Ramos",    "Kim",      "Cox",      "Ward",     "Richardson", "Watson",
    "Brooks",   "Chavez",   "Wood",     "James",    "Bennett",  "Gray",     "Mendoza",  "Ruiz",     "Hughes",
    "Price",    "Alvarez",  "Castillo", "Sanders",  "Patel",    "Myers",    "O'Brien",  "McDonald", "Long",
    "Foster"};

inline constexpr std::array<std::string_view, 40> kStreetNames = {
    "Maple",   "Oak",      "Cedar",    "Pine",     "Elm",      "Washington", "Lake",    "Hill",
    "Sunset",  "Park",     "Main",     "Church",   "Mill",     "Spring",     "River",   "Highland",
    "Lincoln", "Jefferson", "Madison", "Franklin", "Walnut",   "Chestnut",   "Willow",  "Meadow",
    "Forest",  "Ridge",    "Valley",   "Broad",    "Center",   "Union",      "Prospect", "Summit",
    "Cherry",  "Birch",    "Dogwood",  "Magnolia", "Laurel",   "Juniper",    "Aspen",   "Hickory"};

inline constexpr std::array<std::string_view, 10> kStreetSuffixes = {
    "Street", "Avenue", "Road", "Drive", "Lane", "Boulevard", "Court", "Place", "Terrace", "Way"};
inline constexpr std::array<std::string_view, 6> kStreetAbbrevs = {"St.", "Ave.", "Rd.", "Dr.", "Blvd.", "Ln"};

inline constexpr std::array<std::string_view, 8> kMailDomains = {
    "mail.com", "example.org", "inbox.net", "post.com", "webmail.us", "clinicmail.org", "fastmail.net", "home.com"};
inline constexpr std::array<std::string_view, 8> kSiteWords = {
    "stmarys-health", "riverside", "mercy", "valleycare", "northwell-clinic", "harbor-med", "lakeside", "summit-hc"};

inline constexpr std::array<std::string_view, 5> kRaceText = {
    "white", "black or african american", "asian", "american indian or alaska native",
    "native hawaiian or other pacific islander"};
inline constexpr std::array<std::string_view, 3> kEthnicityText = {"hispanic or latino", "not hispanic or latino",
                                                                  "hispanic origin unknown"};

// Lowercase vocabulary kept clear of address, age and demographic keywords.
inline constexpr std::array<std::string_view, 16> kStatusWords = {
    "stable",   "improving", "worsening", "discharged", "admitted", "pending",  "resolved", "chronic",
    "acute",    "routine",   "elective",  "urgent",     "mild",     "moderate", "severe",   "unknown"};
inline constexpr std::array<std::string_view, 12> kPhrases = {
    "no acute distress",   "follow up in clinic", "tolerating diet",    "pain controlled",
    "afebrile overnight",  "wound clean and dry", "ambulating with aid", "on room air",
    "labs within limits",  "awaiting imaging",    "consult requested",  "medication adjusted"};
inline constexpr std::array<std::string_view, 16> kMedications = {
    "metformin",  "lisinopril", "atorvastatin", "amlodipine", "metoprolol", "omeprazole",
    "simvastatin", "losartan",  "albuterol",    "gabapentin", "insulin glargine", "furosemide",
    "warfarin",   "sertraline", "prednisone",   "levothyroxine"};
inline constexpr std::array<std::string_view, 16> kIcdCodes = {
    "E11.9", "I10", "J45.909", "E78.5", "K21.9", "F32.9", "M54.5", "N18.3",
    "I25.10", "J44.9", "E66.9", "G47.33", "I48.91", "K58.9", "R51", "Z79.4"};

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

inline std::string digits(Rng& rng, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += static_cast<char>('0' + random::uniform_below(rng, 10));
  return s;
}

inline std::string pad(long long v, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*lld", width, v);
  return buf;
}

// Renders a date with the layout mini-language of the datetime parser, plus
// %p for a mandatory period.
inline std::string format_date(std::string_view layout, int y, int m, int d, int hh = 0, int mm = 0, int ss = 0) {
  static constexpr std::array<std::string_view, 12> kFull = {
      "January", "February", "March",     "April",   "May",      "June",
      "July",    "August",   "September", "October", "November", "December"};
  static constexpr std::array<std::string_view, 12> kShort = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                              "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
  std::string out;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (layout[i] != '%' || i + 1 == layout.size()) {
      out += layout[i];
      continue;
    }
    switch (layout[++i]) {
      case 'Y': out += pad(y, 4); break;
      case 'y': out += pad(y % 100, 2); break;
      case 'm': out += pad(m, 2); break;
      case 'd': out += pad(d, 2); break;
      case 'H': out += pad(hh, 2); break;
      case 'M': out += pad(mm, 2); break;
      case 'S': out += pad(ss, 2); break;
      case 'B': out += kFull[m - 1]; break;
      case 'b': out += kShort[m - 1]; break;
      case 'p': out += '.'; break;
      default: out += layout[i];
    }
  }
  return out;
}

using ValueFn = std::function<std::string(Rng&)>;

struct Format {
  std::string_view id;
  std::optional<std::string_view> pattern;
  bool held_out = false;
};

struct Generator {
  std::string_view name;
  std::optional<PhiCategory> category;
  std::vector<Format> formats;
  // Draws per-column parameters, then returns the per-value sampler.
  std::function<ValueFn(Rng&, std::string_view format)> prepare;
};

inline std::string full_name(Rng& rng, std::string_view format) {
  const std::string given(random::pick(rng, kGivenNames));
  const std::string family(random::pick(rng, kSurnames));
  if (format == "first_last") return given + " " + family;
  if (format == "last_first") return family + ", " + given;
  if (format == "first_mi_last")
    return given + " " + static_cast<char>('A' + random::uniform_below(rng, 26)) + ". " + family;
  if (format == "given") return given;
  return family;
}

inline ValueFn date_sampler(std::string_view format, int year_lo, int year_hi) {
  std::string layout;
  if (format == "iso") layout = "%Y-%m-%d";
  else if (format == "us") layout = "%m/%d/%Y";
  else if (format == "eu") layout = "%d/%m/%Y";
  else if (format == "iso_slash") layout = "%Y/%m/%d";
  else if (format == "us_dash") layout = "%m-%d-%Y";
  else if (format == "timestamp") layout = "%Y-%m-%d %H:%M:%S";
  else if (format == "long") layout = "%B %d, %Y";
  else if (format == "dotted") layout = "%d.%m.%Y";
  else if (format == "short_year") layout = "%m/%d/%y";
  else layout = "%b%p %Y";  // month_year
  return [layout, year_lo, year_hi](Rng& rng) {
    const int y = static_cast<int>(random::uniform_int(rng, year_lo, year_hi));
    const int m = static_cast<int>(random::uniform_int(rng, 1, 12));
    const int d = static_cast<int>(random::uniform_int(rng, 1, 28));
    return format_date(layout, y, m, d, static_cast<int>(random::uniform_int(rng, 0, 23)),
                       static_cast<int>(random::uniform_int(rng, 0, 59)),
                       static_cast<int>(random::uniform_int(rng, 0, 59)));
  };
}

inline std::vector<Format> date_formats() {
  return {{"iso", "date"},       {"us", "date"},         {"eu", "date"},
          {"iso_slash", "date"}, {"us_dash", "date"},    {"timestamp", "date"},
          {"long", "date"},      {"dotted", "date_of_birth"}, {"short_year", "date"},
          {"month_year", "date", true}};
}

inline std::vector<Format> phone_formats() {
  return {{"paren", "phone"}, {"paren_space", "phone"}, {"dashed", "phone"}, {"bare", "phone"},
          {"dotted", "phone", true}};
}

inline ValueFn phone_sampler(std::string_view format) {
  const std::string f(format);
  return [f](Rng& rng) {
    const auto area = std::to_string(random::uniform_int(rng, 201, 989));
    const auto ex = std::to_string(random::uniform_int(rng, 200, 999));
    const auto line = digits(rng, 4);
    if (f == "paren") return "(" + area + ")" + ex + "-" + line;
    if (f == "paren_space") return "(" + area + ") " + ex + "-" + line;
    if (f == "dashed") return area + "-" + ex + "-" + line;
    if (f == "bare") return area + ex + line;
    return area + "." + ex + "." + line;
  };
}

inline const std::vector<Generator>& phi_generators() {
  using C = PhiCategory;
  static const std::vector<Generator> gens = {
      {"name", C::A,
       {{"first_last", "name"}, {"first_mi_last", "name_middle_initial"}, {"given", "name"},
        {"family", "name"}, {"last_first", "name", true}},
       [](Rng&, std::string_view f) -> ValueFn {
         const std::string format(f);
         return [format](Rng& rng) { return full_name(rng, format); };
       }},
      {"address", C::B,
       {{"suffix_full", "address"}, {"suffix_abbrev", "address"}, {"with_unit", "address"}},
       [](Rng&, std::string_view f) -> ValueFn {
         const std::string format(f);
         return [format](Rng& rng) {
           std::string s = std::to_string(random::uniform_int(rng, 1, 9999)) + " " +
                           std::string(random::pick(rng, kStreetNames)) + " ";
           s += format == "suffix_abbrev" ? std::string(random::pick(rng, kStreetAbbrevs))
                                          : std::string(random::pick(rng, kStreetSuffixes));
           if (format == "with_unit") s += " Apt " + std::to_string(random::uniform_int(rng, 1, 40));
           return s;
         };
       }},
      {"zip", C::B, {{"zip5", "postal_code"}, {"zip9", "postal_code", true}},
       [](Rng&, std::string_view f) -> ValueFn {
         const bool plus4 = f == "zip9";
         return [plus4](Rng& rng) {
           auto s = pad(random::uniform_int(rng, 1001, 99950), 5);
           if (plus4) s += "-" + digits(rng, 4);
           return s;
         };
       }},
      {"admission_date", C::C, date_formats(),
       [](Rng&, std::string_view f) { return date_sampler(f, 2000, 2023); }},
      {"birth_date", C::C, date_formats(),
       [](Rng&, std::string_view f) { return date_sampler(f, 1925, 2015); }},
      {"age", C::C, {{"int", std::nullopt}, {"yo", "age"}, {"years", "age", true}},
       [](Rng&, std::string_view f) -> ValueFn {
         const std::string format(f);
         return [format](Rng& rng) {
           const auto age = random::bernoulli(rng, 0.05) ? random::uniform_int(rng, 90, 100)
                                                         : random::uniform_int(rng, 0, 89);
           const auto s = std::to_string(age);
           if (format == "yo") return s + " y.o.";
           if (format == "years") return s + " years";
           return s;
         };
       }},
      {"phone", C::D, phone_formats(), [](Rng&, std::string_view f) { return phone_sampler(f); }},
      {"fax", C::E, phone_formats(), [](Rng&, std::string_view f) { return phone_sampler(f); }},
      {"email", C::F, {{"dotted", "email"}, {"initial_digits", "email"}},
       [](Rng&, std::string_view f) -> ValueFn {
         const bool dotted = f == "dotted";
         return [dotted](Rng& rng) {
           std::string given(random::pick(rng, kGivenNames));
           std::string family(random::pick(rng, kSurnames));
           auto lower = [](std::string s) {
             std::string out;
             for (char c : s)
               if (std::isalpha(static_cast<unsigned char>(c)))
                 out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
             return out;
           };
           const auto local = dotted ? lower(given) + "." + lower(family)
                                     : lower(given).substr(0, 1) + lower(family) +
                                           std::to_string(random::uniform_int(rng, 1, 999));
           return local + "@" + std::string(random::pick(rng, kMailDomains));
         };
       }},
      {"ssn", C::G, {{"dashed", "ssn"}, {"bare", "ssn", true}},
       [](Rng&, std::string_view f) -> ValueFn {
         const bool dashed = f == "dashed";
         return [dashed](Rng& rng) {
           const auto a = pad(random::uniform_int(rng, 1, 899), 3);
           const auto b = pad(random::uniform_int(rng, 1, 99), 2);
           const auto c = pad(random::uniform_int(rng, 1, 9999), 4);
           return dashed ? a + "-" + b + "-" + c : a + b + c;
         };
       }},
      {"mrn", C::H, {{"digits8", "digit_identifier"}, {"alnum", "alnum_identifier", true}},
       [](Rng&, std::string_view f) -> ValueFn {
         const bool alnum = f == "alnum";
         return [alnum](Rng& rng) { return alnum ? "MRN" + digits(rng, 7) : digits(rng, 8); };
       }},
      {"health_plan", C::I, {{"prefixed", "alnum_identifier"}},
       [](Rng&, std::string_view) -> ValueFn {
         return [](Rng& rng) { return "HP" + digits(rng, 9); };
       }},
      {"account", C::J, {{"digits10", "digit_identifier"}},
       [](Rng&, std::string_view) -> ValueFn {
         return [](Rng& rng) { return std::to_string(random::uniform_int(rng, 1, 9)) + digits(rng, 9); };
       }},
      {"license", C::K, {{"letter_digits", "alnum_identifier"}},
       [](Rng&, std::string_view) -> ValueFn {
         return [](Rng& rng) {
           return std::string(1, static_cast<char>('A' + random::uniform_below(rng, 26))) + digits(rng, 7);
         };
       }},
      {"url", C::N, {{"https", "url"}, {"www", "url"}},
       [](Rng&, std::string_view f) -> ValueFn {
         const bool https = f == "https";
         return [https](Rng& rng) {
           const std::string site(random::pick(rng, kSiteWords));
           const auto id = std::to_string(random::uniform_int(rng, 1000, 999999));
           return https ? "https://www." + site + ".org/patient/" + id : "www." + site + ".com/p?id=" + id;
         };
       }},
      {"ip", C::O, {{"ipv4", "ip_address"}},
       [](Rng&, std::string_view) -> ValueFn {
         return [](Rng& rng) {
           std::string s;
           for (int i = 0; i < 4; ++i) {
             if (i) s += '.';
             s += std::to_string(random::uniform_int(rng, i == 0 ? 1 : 0, 254));
           }
           return s;
         };
       }},
      {"sex", C::R, {{"mf", std::nullopt}, {"word", "gender"}, {"coded", std::nullopt}},
       [](Rng& rng, std::string_view f) -> ValueFn {
         const double p = random::uniform(rng, 0.45, 0.55);
         const std::string format(f);
         return [p, format](Rng& rng) -> std::string {
           const bool female = random::bernoulli(rng, p);
           if (format == "mf") return female ? "F" : "M";
           if (format == "word") return female ? "Female" : "Male";
           return female ? "1" : "0";
         };
       }},
      {"race", C::R, {{"text", "race"}, {"coded", std::nullopt}},
       [](Rng& rng, std::string_view f) -> ValueFn {
         const bool coded = f == "coded";
         // Skewed toward the first level by a site-specific amount; the tail
         // keeps fixed proportions 20:12:8:5.
         const double dominant = random::uniform(rng, 0.45, 0.7);
         const double tail = (1.0 - dominant) / 0.45;
         return [coded, dominant, tail](Rng& rng) {
           const double u = random::uniform01(rng);
           const std::size_t level = u < dominant                      ? 0
                                     : u < dominant + 0.20 * tail      ? 1
                                     : u < dominant + 0.32 * tail      ? 2
                                     : u < dominant + 0.40 * tail      ? 3
                                                                       : 4;
           if (!coded) return std::string(kRaceText[level]);
           // Alphabetical code book: 1 american indian, 2 asian, 3 black,
           // 4 pacific islander, 5 white, 6 more than one race.
           static constexpr std::array<int, 4> kCodes = {5, 3, 2, 1};
           return std::to_string(level < 4 ? kCodes[level] : random::uniform_int(rng, 0, 1) == 0 ? 4 : 6);
         };
       }},
      {"ethnicity", C::R, {{"text", "ethnicity"}},
       [](Rng& rng, std::string_view) -> ValueFn {
         const double p = random::uniform(rng, 0.1, 0.3);
         const double unknown = random::uniform(rng, 0.03, 0.1);
         return [p, unknown](Rng& rng) {
           const double u = random::uniform01(rng);
           return std::string(kEthnicityText[u < unknown ? 2 : u < unknown + p ? 0 : 1]);
         };
       }},
      {"encounter", C::R, {{"digits12", "digit_identifier"}},
       [](Rng&, std::string_view) -> ValueFn {
         return [](Rng& rng) { return std::to_string(random::uniform_int(rng, 1, 9)) + digits(rng, 11); };
       }},
  };
  return gens;
}

inline const std::vector<Generator>& clinical_generators() {
  static const std::vector<Generator> gens = {
      {"lab_gaussian", std::nullopt, {{"decimal", std::nullopt}},
       [](Rng& rng, std::string_view) -> ValueFn {
         const double mean = std::exp(random::uniform(rng, 0.0, std::log(500.0)));
         const double sd = mean * random::uniform(rng, 0.05, 0.2);
         const char* f = random::bernoulli(rng, 0.5) ? "%.1f" : "%.2f";
         return [mean, sd, f](Rng& rng) { return fmt(f, std::max(0.01, random::normal(rng, mean, sd))); };
       }},
      {"lab_lognormal", std::nullopt, {{"decimal", std::nullopt}},
       [](Rng& rng, std::string_view) -> ValueFn {
         const double mu = random::uniform(rng, 0.0, 5.0);
         const double sigma = random::uniform(rng, 0.2, 0.8);
         const char* f = random::bernoulli(rng, 0.5) ? "%.1f" : "%.2f";
         return [mu, sigma, f](Rng& rng) {
           return fmt(f, std::min(9999.0, std::exp(random::normal(rng, mu, sigma))));
         };
       }},
      {"dosage", std::nullopt, {{"zero_inflated", std::nullopt}},
       [](Rng& rng, std::string_view) -> ValueFn {
         static constexpr std::array<double, 7> kDoses = {2.5, 5, 10, 20, 25, 40, 50};
         const double zero = random::uniform(rng, 0.3, 0.8);
         const double scale = random::bernoulli(rng, 0.5) ? 1.0 : 10.0;
         return [zero, scale](Rng& rng) {
           return random::bernoulli(rng, zero) ? std::string("0") : fmt("%g", random::pick(rng, kDoses) * scale);
         };
       }},
      {"flag01", std::nullopt, {{"binary", std::nullopt}},
       [](Rng& rng, std::string_view) -> ValueFn {
         const double p = random::uniform(rng, 0.02, 0.25);
         return [p](Rng& rng) { return std::string(random::bernoulli(rng, p) ? "1" : "0"); };
       }},
      {"flag_yn", std::nullopt, {{"yes_no", std::nullopt}},
       [](Rng& rng, std::string_view) -> ValueFn {
         const double p = random::uniform(rng, 0.02, 0.25);
         return [p](Rng& rng) { return std::string(random::bernoulli(rng, p) ? "Y" : "N"); };
       }},
      {"visit_count", std::nullopt, {{"count", std::nullopt}},
       [](Rng& rng, std::string_view) -> ValueFn {
         const double lambda = random::uniform(rng, 0.5, 6.0);
         return [lambda](Rng& rng) { return std::to_string(random::poisson(rng, lambda)); };
       }},
      {"vital", std::nullopt, {{"int", std::nullopt}},
       [](Rng& rng, std::string_view) -> ValueFn {
         const double mean = random::uniform(rng, 60.0, 140.0);
         const double sd = random::uniform(rng, 5.0, 15.0);
         return [mean, sd](Rng& rng) { return std::to_string(std::lround(random::normal(rng, mean, sd))); };
       }},
      {"pain_score", std::nullopt, {{"scale", std::nullopt}},
       [](Rng&, std::string_view) -> ValueFn {
         return [](Rng& rng) { return std::to_string(random::uniform_int(rng, 0, 10)); };
       }},
      {"status", std::nullopt, {{"word", std::nullopt}},
       [](Rng& rng, std::string_view) -> ValueFn {
         // Zipf weights over the first `levels` words, exponent drawn per column.
         const auto levels = static_cast<std::size_t>(random::uniform_int(rng, 7, kStatusWords.size()));
         const double exponent = random::uniform(rng, 0.3, 2.0);
         std::vector<double> cdf(levels);
         double total = 0.0;
         for (std::size_t i = 0; i < levels; ++i) cdf[i] = total += std::pow(static_cast<double>(i + 1), -exponent);
         return [cdf, total](Rng& rng) {
           const double u = random::uniform01(rng) * total;
           const auto i = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
           return std::string(kStatusWords[std::min(i, cdf.size() - 1)]);
         };
       }},
      {"note", std::nullopt, {{"phrase", std::nullopt}},
       [](Rng&, std::string_view) -> ValueFn {
         return [](Rng& rng) { return std::string(random::pick(rng, kPhrases)); };
       }},
      {"diagnosis_code", std::nullopt, {{"icd", std::nullopt}},
       [](Rng&, std::string_view) -> ValueFn {
         return [](Rng& rng) { return std::string(random::pick(rng, kIcdCodes)); };
       }},
      {"medication", std::nullopt, {{"generic", std::nullopt}},
       [](Rng&, std::string_view) -> ValueFn {
         return [](Rng& rng) { return std::string(random::pick(rng, kMedications)); };
       }},
      {"percent", std::nullopt, {{"decimal", std::nullopt}},
       [](Rng& rng, std::string_view) -> ValueFn {
         const double mean = random::uniform(rng, 20.0, 95.0);
         return [mean](Rng& rng) { return fmt("%.1f", std::clamp(random::normal(rng, mean, 4.0), 0.0, 100.0)); };
       }},
  };
  return gens;
}

inline const Generator& find_generator(std::string_view name) {
  for (const auto* list : {&phi_generators(), &clinical_generators()})
    for (const auto& g : *list)
      if (g.name == name) return g;
  throw SpecError("unknown generator '" + std::string(name) + "'");
}

struct Plan {
  std::string generator;
  std::string format;
};

// Demographic fields appear in every dataset; their format varies by site so
// that coded variants are spread through the corpus.
inline std::vector<Plan> plan_phi(std::size_t d, std::size_t n_phi, bool is_test, bool hold_out, Rng& rng) {
  static constexpr std::array<std::string_view, 2> kSexFormats = {"coded", "mf"};
  static constexpr std::array<std::string_view, 1> kRaceFormats = {"coded"};
  static constexpr std::array<std::string_view, 2> kAgeFormats = {"int", "yo"};
  // Demographics recur in the rotation as second columns (guarantor, next of
  // kin) in whatever format the site happens to use.
  static constexpr std::array<std::string_view, 26> kRotation = {
      "name",  "sex",   "race", "address", "age",       "zip",  "admission_date", "race", "birth_date",
      "sex",   "phone", "fax",  "race",    "age",       "email", "ssn",           "sex",  "mrn",
      "health_plan",    "account", "license", "url",    "ip",   "ethnicity",      "encounter", "race"};
  std::vector<Plan> plans;
  plans.push_back({"sex", std::string(kSexFormats[d % kSexFormats.size()])});
  plans.push_back({"race", std::string(kRaceFormats[d % kRaceFormats.size()])});
  plans.push_back({"age", is_test && hold_out ? "years" : std::string(kAgeFormats[d % kAgeFormats.size()])});
  for (std::size_t i = 0; plans.size() < n_phi; ++i) {
    const auto& gen = find_generator(kRotation[(d * 6 + i) % kRotation.size()]);
    std::vector<const Format*> pool;
    const Format* held = nullptr;
    for (const auto& f : gen.formats) {
      if (f.held_out && hold_out) {
        held = &f;
      } else {
        pool.push_back(&f);
      }
    }
    const Format* chosen = is_test && held ? held : random::pick(rng, pool);
    plans.push_back({std::string(gen.name), std::string(chosen->id)});
  }
  plans.resize(n_phi);
  return plans;
}

inline std::vector<std::size_t> split_evenly(std::size_t total, std::size_t parts) {
  std::vector<std::size_t> out(parts, total / parts);
  for (std::size_t i = 0; i < total % parts; ++i) ++out[i];
  return out;
}

inline void validate(const CorpusSpec& spec) {
  if (spec.n_datasets == 0) throw SpecError("corpus needs at least one dataset");
  if (spec.rows == 0) throw SpecError("datasets need at least one row");
  if (!(spec.phi_fraction >= 0.0) || spec.phi_fraction > 0.5)
    throw SpecError("phi_fraction must lie in [0, 0.5]");
  if (spec.total_columns < spec.n_datasets) throw SpecError("fewer columns than datasets");
}

}  // namespace detail

inline std::string dataset_name(std::size_t d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "site_%02zu", d + 1);
  return buf;
}

inline GeneratedDataset generate_dataset(const CorpusSpec& spec, std::size_t d, std::size_t n_columns,
                                         std::size_t n_phi) {
  random::Rng rng(random::mix_seed(spec.seed, d));
  const bool is_test = spec.held_out_formats && d + 1 == spec.n_datasets && spec.n_datasets > 1;
  auto plans = detail::plan_phi(d, std::min(n_phi, n_columns), is_test, spec.held_out_formats, rng);
  const auto& clinical = detail::clinical_generators();
  while (plans.size() < n_columns) {
    const auto& g = random::pick(rng, clinical);
    plans.push_back({std::string(g.name), std::string(g.formats.front().id)});
  }
  random::shuffle(plans.begin(), plans.end(), rng);

  GeneratedDataset out;
  out.is_test = is_test;
  out.dataset.name = dataset_name(d);
  out.dataset.row_count = spec.rows;
  for (std::size_t c = 0; c < plans.size(); ++c) {
    const auto& gen = detail::find_generator(plans[c].generator);
    const auto fmt_it = std::find_if(gen.formats.begin(), gen.formats.end(),
                                     [&](const detail::Format& f) { return f.id == plans[c].format; });
    ColumnInfo info;
    info.name = plans[c].generator + "_" + std::to_string(c + 1);
    info.generator = plans[c].generator;
    info.category = gen.category;
    info.format = plans[c].format;
    if (fmt_it->pattern) info.pattern_id = std::string(*fmt_it->pattern);
    info.held_out = fmt_it->held_out && spec.held_out_formats;
    info.null_rate = random::bernoulli(rng, 0.5) ? random::uniform(rng, 0.0, 0.1) : 0.0;

    Column column;
    column.name = info.name;
    column.label = gen.category ? 1 : 0;
    column.category = gen.category;
    const auto sampler = gen.prepare(rng, info.format);
    column.cells.reserve(spec.rows);
    for (std::size_t r = 0; r < spec.rows; ++r) {
      if (random::bernoulli(rng, info.null_rate)) {
        column.cells.emplace_back(std::nullopt);
      } else {
        column.cells.emplace_back(sampler(rng));
      }
    }
    out.dataset.columns.push_back(std::move(column));
    out.manifest.push_back(std::move(info));
  }
  return out;
}

inline std::vector<GeneratedDataset> generate_corpus(const CorpusSpec& spec = {}, unsigned threads = 0) {
  detail::validate(spec);
  const auto columns = detail::split_evenly(spec.total_columns, spec.n_datasets);
  const auto total_phi = static_cast<std::size_t>(std::llround(spec.phi_fraction * spec.total_columns));
  const auto phi = detail::split_evenly(total_phi, spec.n_datasets);
  std::vector<GeneratedDataset> out(spec.n_datasets);
  parallel_for(spec.n_datasets, threads,
               [&](std::size_t d) { out[d] = generate_dataset(spec, d, columns[d], phi[d]); });
  return out;
}

inline nlohmann::ordered_json manifest_json(const CorpusSpec& spec, const std::vector<GeneratedDataset>& corpus) {
  nlohmann::ordered_json j;
  j["seed"] = spec.seed;
  j["rows"] = spec.rows;
  j["phi_fraction"] = spec.phi_fraction;
  j["held_out_formats"] = spec.held_out_formats;
  j["datasets"] = nlohmann::ordered_json::array();
  for (const auto& g : corpus) {
    nlohmann::ordered_json d;
    d["name"] = g.dataset.name;
    d["file"] = g.dataset.name + ".csv";
    d["labels"] = g.dataset.name + ".labels.csv";
    d["test"] = g.is_test;
    d["columns"] = nlohmann::ordered_json::array();
    for (const auto& c : g.manifest) {
      nlohmann::ordered_json col;
      col["name"] = c.name;
      col["generator"] = c.generator;
      col["category"] = c.category ? nlohmann::ordered_json(to_string(*c.category)) : nullptr;
      col["format"] = c.format;
      col["pattern"] = c.pattern_id ? nlohmann::ordered_json(*c.pattern_id) : nullptr;
      col["held_out"] = c.held_out;
      col["null_rate"] = c.null_rate;
      d["columns"].push_back(std::move(col));
    }
    j["datasets"].push_back(std::move(d));
  }
  return j;
}

// Writes <dir>/manifest.json plus one CSV and one label sidecar per dataset.
inline void save_corpus(const std::string& dir, const CorpusSpec& spec, const std::vector<GeneratedDataset>& corpus) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  for (const auto& g : corpus) {
    save_dataset((fs::path(dir) / (g.dataset.name + ".csv")).string(), g.dataset);
    save_labels((fs::path(dir) / (g.dataset.name + ".labels.csv")).string(), g.labels());
  }
  std::ofstream out(fs::path(dir) / "manifest.json", std::ios::binary);
  if (!out) throw IoError("cannot write manifest in " + dir);
  out << manifest_json(spec, corpus).dump(2) << '\n';
}

// Loads every dataset listed in a corpus manifest, labels attached.
inline std::vector<Dataset> load_corpus(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream in(fs::path(dir) / "manifest.json", std::ios::binary);
  if (!in) throw IoError("no manifest.json in " + dir);
  const auto manifest = nlohmann::json::parse(in);
  std::vector<Dataset> out;
  for (const auto& d : manifest.at("datasets")) {
    auto ds = load_dataset((fs::path(dir) / d.at("file").get<std::string>()).string());
    ds.name = d.at("name").get<std::string>();
    apply_labels(ds, load_labels((fs::path(dir) / d.at("labels").get<std::string>()).string()));
    out.push_back(std::move(ds));
  }
  return out;
}

}  // namespace phi_sentinel::synthgen
