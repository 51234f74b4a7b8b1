#pragma once

#include <string>
#include <vector>

// Positive and negative examples for every built-in pattern entry.
namespace phi_sentinel::oracle {

struct PatternExamples {
  std::string id;
  std::vector<std::string> positive;
  std::vector<std::string> negative;
};

inline const std::vector<PatternExamples>& builtin_pattern_examples() {
  static const std::vector<PatternExamples> table = {
      {"name",
       {"John Smith", "Smith, John", "O'Brien", "McDonald", "Mary-Jane Watson", "Watson, Mary Ann"},
       {"john smith", "123 Main St", "JOHN", "A1C", "Smith3", "Smith, John, Paul, George"}},
      {"name_title",
       {"Dr. House", "Mr Smith", "seen by Dr. Who", "Mrs. Jones", "Prof. Xavier", "Miss Marple"},
       {"Drive", "Mr. 5", "dr. house", "Doctor Who", "Mrs"}},
      {"name_middle_initial",
       {"John Q. Public", "Mary A Smith", "Anne B. O'Neil", "Jean-Luc J. Picard", "Ted K Lasso"},
       {"John Public", "J. Q. Public", "john q. public", "John QQ Public", "John Q."}},
      {"postal_code",
       {"02139", "90210", "12345-6789", "00501", " 10001 "},
       {"1234", "123456", "12345-678", "ABCDE", "12 345"}},
      {"address",
       {"12 Main Street", "400 Elm Ave.", "77 Sunset Blvd", "5 Oak Rd", "9 Pine Ln", "1 Infinite Loop"},
       {"Stanley", "metformin", "positive", "12345", "Avenger"}},
      {"date",
       {"1970-02-31", "Feb. 1970", "March 5, 2021", "02/14/1999", "2020-01-01 12:30:45", "11/2020"},
       {"19700231", "2021-13-01", "Febtember 2020", "12345", "yesterday"}},
      {"date_of_birth",
       {"1970-02-31", "02/31/1970", "31.12.1999", "1/2/85", "1999 12 31"},
       {"1970-Feb-02", "12345", "19701231", "1/2/3", "Feb. 1970"}},
      {"date_partial",
       {"1970/02", "2021-12", "02/70", "12-99", "1999-1"},
       {"1970/13", "13/70", "1970-02-31", "197002", "Feb 1970"}},
      {"age",
       {"45 years", "45 y.o.", "aged 45", "3 yrs", "12 years old", "45 y/o"},
       {"45", "yearly", "oldest", "golden", "stage 3"}},
      {"phone",
       {"(123)456-7890", "123-456-7890", "123.456.7890", "1234567890", "(123) 456-7890", "+1 123-456-7890"},
       {"123-4567", "12345", "123-45-6789", "phone", "(123)456-789"}},
      {"email",
       {"a.b@example.com", "jdoe42@mail.org", "x_y+z@sub.domain.co", "JOHN@EXAMPLE.COM", "m-k@h-s.net"},
       {"a@b", "@example.com", "john.example.com", "a b@c.com", "a@b.c"}},
      {"ssn",
       {"123-45-6789", "123456789", "078-05-1120", " 987-65-4321 ", "000000000"},
       {"123-456-789", "12345678", "1234567890", "123 45 6789", "12-345-6789"}},
      {"digit_identifier",
       {"12345678", "123456", "1234-5678", "(123) 456-7890", "000123456789"},
       {"12345", "MRN1234567", "12.3456", "1-2-3", "abcdef"}},
      {"alnum_identifier",
       {"MRN1234567", "HP123456789", "A1234567", "AB-12345", "12345X", "MRN#123456"},
       {"A1234", "mrn1234567", "ABCDE12345", "123456", "HP 12345"}},
      {"url",
       {"https://example.org/a?b=1", "http://x.com", "www.hospital-site.org", "example.com",
        "portal.health.gov/login"},
       {"example", "http//x", "foo@bar.com", "1.2", "file.txt"}},
      {"ip_address",
       {"192.168.0.1", "10.0.0.255", "255.255.255.255", "0.0.0.0", "8.8.8.8"},
       {"256.1.1.1", "1.2.3", "1.2.3.4.5", "a.b.c.d", "192.168.01"}},
      {"race",
       {"White", "Black or African American", "Asian", "american indian or alaska native",
        "native hawaiian or other pacific islander", "Caucasian"},
       {"whitelist", "5", "Blackwell", "Other", "Unknown"}},
      {"gender",
       {"Male", "FEMALE", "female", "male", "Male "},
       {"M", "F", "0", "maleate", "Females"}},
      {"ethnicity",
       {"Hispanic or Latino", "not hispanic or latino", "Latina", "LATINO", "hispanic origin unknown"},
       {"Y", "N", "Unknown", "latin", "0"}},
  };
  return table;
}

}  // namespace phi_sentinel::oracle
