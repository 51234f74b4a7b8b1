#include <gtest/gtest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "phi_sentinel/regex_screen.hpp"
#include "phi_sentinel/synthgen.hpp"

using namespace phi_sentinel;
namespace sg = phi_sentinel::synthgen;

namespace {

const std::vector<sg::GeneratedDataset>& default_corpus() {
  static const auto corpus = sg::generate_corpus({}, 2);
  return corpus;
}

std::string csv_text(const Dataset& ds) {
  std::ostringstream out;
  write_dataset(out, ds);
  return out.str();
}

}  // namespace

TEST(Corpus, DefaultShape) {
  const auto& corpus = default_corpus();
  ASSERT_EQ(corpus.size(), 8u);
  std::size_t columns = 0, phi = 0;
  for (const auto& g : corpus) {
    EXPECT_EQ(g.dataset.row_count, 1000u);
    EXPECT_EQ(g.manifest.size(), g.dataset.columns.size());
    for (const auto& c : g.dataset.columns) {
      ++columns;
      ASSERT_TRUE(c.label);
      phi += *c.label;
      EXPECT_EQ(c.category.has_value(), *c.label == 1) << c.name;
      EXPECT_EQ(c.cells.size(), 1000u);
    }
  }
  EXPECT_EQ(columns, 889u);
  const double fraction = static_cast<double>(phi) / static_cast<double>(columns);
  EXPECT_NEAR(fraction, 0.075, 0.02);
  EXPECT_TRUE(corpus.back().is_test);
  EXPECT_FALSE(corpus.front().is_test);
}

TEST(Corpus, LabelSidecarIsComplete) {
  for (const auto& g : default_corpus()) {
    const auto labels = g.labels();
    ASSERT_EQ(labels.size(), g.dataset.columns.size());
    std::set<std::string> names;
    for (const auto& l : labels) EXPECT_TRUE(names.insert(l.column_name).second) << l.column_name;
    for (const auto& c : g.dataset.columns) EXPECT_EQ(names.count(c.name), 1u);
  }
}

TEST(Corpus, HeldOutFormatsAppearOnlyInTheTestDataset) {
  std::size_t held = 0;
  for (const auto& g : default_corpus())
    for (const auto& c : g.manifest) {
      if (!c.held_out) continue;
      ++held;
      EXPECT_TRUE(g.is_test) << g.dataset.name << "/" << c.name;
    }
  EXPECT_GT(held, 0u);
}

TEST(Corpus, CodedSexIsLabeledDemographicPhi) {
  bool found = false;
  for (const auto& g : default_corpus())
    for (std::size_t i = 0; i < g.manifest.size(); ++i) {
      const auto& info = g.manifest[i];
      if (info.generator != "sex" || info.format != "coded") continue;
      found = true;
      const auto& column = g.dataset.columns[i];
      EXPECT_EQ(column.label, 1);
      EXPECT_EQ(column.category, PhiCategory::R);
      for (const auto& cell : column.cells)
        if (cell) {
          EXPECT_TRUE(*cell == "0" || *cell == "1") << *cell;
        }
    }
  EXPECT_TRUE(found);
}

TEST(Corpus, DeterministicForFixedSeed) {
  sg::CorpusSpec spec;
  spec.n_datasets = 3;
  spec.total_columns = 90;
  spec.rows = 100;
  const auto a = sg::generate_corpus(spec, 1);
  const auto b = sg::generate_corpus(spec, 3);
  for (std::size_t d = 0; d < a.size(); ++d) EXPECT_EQ(csv_text(a[d].dataset), csv_text(b[d].dataset));
  spec.seed = 43;
  EXPECT_NE(csv_text(sg::generate_corpus(spec, 1)[0].dataset), csv_text(a[0].dataset));
}

TEST(Corpus, InfeasibleSpecsAreRejected) {
  sg::CorpusSpec spec;
  spec.phi_fraction = 0.6;
  EXPECT_THROW(sg::generate_corpus(spec), SpecError);
  spec = {};
  spec.n_datasets = 0;
  EXPECT_THROW(sg::generate_corpus(spec), SpecError);
}

TEST(Corpus, SaveAndLoadRoundTrip) {
  sg::CorpusSpec spec;
  spec.n_datasets = 2;
  spec.total_columns = 40;
  spec.rows = 50;
  spec.phi_fraction = 0.2;
  const auto corpus = sg::generate_corpus(spec, 1);
  const auto dir = (std::filesystem::temp_directory_path() / "phi_sentinel_corpus_test").string();
  std::filesystem::remove_all(dir);
  sg::save_corpus(dir, spec, corpus);
  const auto loaded = sg::load_corpus(dir);
  ASSERT_EQ(loaded.size(), 2u);
  for (std::size_t d = 0; d < 2; ++d) {
    EXPECT_EQ(loaded[d].name, corpus[d].dataset.name);
    EXPECT_EQ(csv_text(loaded[d]), csv_text(corpus[d].dataset));
    for (std::size_t c = 0; c < loaded[d].columns.size(); ++c) {
      EXPECT_EQ(loaded[d].columns[c].label, corpus[d].dataset.columns[c].label);
      EXPECT_EQ(loaded[d].columns[c].category, corpus[d].dataset.columns[c].category);
    }
  }
  std::filesystem::remove_all(dir);
}

TEST(Generators, FormatVariety) {
  const auto& admission = sg::detail::find_generator("admission_date");
  EXPECT_GE(admission.formats.size(), 6u);
  EXPECT_GE(sg::detail::find_generator("phone").formats.size(), 4u);
  std::set<std::string_view> sex;
  for (const auto& f : sg::detail::find_generator("sex").formats) sex.insert(f.id);
  EXPECT_TRUE(sex.count("coded") && sex.count("mf") && sex.count("word"));
  EXPECT_EQ(sg::detail::find_generator("ssn").formats.size(), 2u);
}

// Every non-held-out format written for a library entry matches that entry
// on at least 99% of generated values.
TEST(Generators, SelfConsistentWithThePatternLibrary) {
  const auto& library = builtin_library();
  for (const auto& gen : sg::detail::phi_generators()) {
    for (const auto& format : gen.formats) {
      if (!format.pattern || format.held_out) continue;
      const auto* entry = library.find(*format.pattern);
      ASSERT_NE(entry, nullptr) << *format.pattern;
      std::size_t hits = 0;
      const std::size_t draws = 2000;
      for (std::uint64_t column = 0; column < 10; ++column) {
        random::Rng rng(random::mix_seed(77, column));
        const auto sampler = gen.prepare(rng, format.id);
        for (std::size_t i = 0; i < draws / 10; ++i) hits += entry->matches(sampler(rng)) ? 1 : 0;
      }
      EXPECT_GE(static_cast<double>(hits) / draws, 0.99) << gen.name << "/" << format.id << " vs " << entry->id();
    }
  }
}
