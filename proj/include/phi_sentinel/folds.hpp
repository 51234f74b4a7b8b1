#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "phi_sentinel/error.hpp"
#include "phi_sentinel/random.hpp"

namespace phi_sentinel {

// Stratified k-fold assignment. Positives and negatives are shuffled
// separately, then dealt round-robin with one running counter, so each fold
// gets its share of both classes and fold sizes differ by at most one.
inline std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t folds,
                                                 std::uint64_t seed) {
  if (folds < 2) throw StratificationError("need at least two folds");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] ? pos : neg).push_back(i);
  if (pos.size() < folds || neg.size() < folds) {
    throw StratificationError("stratified " + std::to_string(folds) + "-fold split needs at least " +
                              std::to_string(folds) + " items of each class (have " +
                              std::to_string(pos.size()) + " positive, " +
                              std::to_string(neg.size()) + " negative)");
  }
  random::Rng rng(seed);
  random::shuffle(pos.begin(), pos.end(), rng);
  random::shuffle(neg.begin(), neg.end(), rng);
  std::vector<std::size_t> assignment(labels.size());
  std::size_t counter = 0;
  for (auto i : pos) assignment[i] = counter++ % folds;
  for (auto i : neg) assignment[i] = counter++ % folds;
  return assignment;
}

}  // namespace phi_sentinel
