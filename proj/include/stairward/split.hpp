#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "stairward/core.hpp"

namespace stairward {

/// Derives an independent 64-bit stream seed for repetition `index`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

/// Unbiased draw in [0, bound) by rejection; unlike std::uniform_int_distribution
/// its output is identical across standard library implementations.
inline std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v = 0;
  do {
    v = rng();
  } while (v >= limit);
  return v % bound;
}

template <typename T>
void seeded_shuffle(std::vector<T>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(bounded_draw(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

struct SplitPlan {
  std::uint64_t seed = 0;
  std::string grouping_key = "object_label";
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;

  [[nodiscard]] double test_fraction() const {
    const auto total = train_ids.size() + test_ids.size();
    return total == 0 ? 0.0 : static_cast<double>(test_ids.size()) / static_cast<double>(total);
  }
};

namespace detail {

/// Walks labels in the given order, moving each to the test side until the
/// test count first reaches `fraction * total`. The last label always stays
/// in training.
inline std::set<std::string> greedy_test_labels(const std::vector<std::string>& order,
                                                const std::map<std::string, std::size_t>& sizes,
                                                double fraction) {
  std::size_t total = 0;
  for (const auto& [label, n] : sizes) total += n;
  const double target = fraction * static_cast<double>(total);
  std::set<std::string> test;
  std::size_t count = 0;
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    if (static_cast<double>(count) >= target) break;
    test.insert(order[i]);
    count += sizes.at(order[i]);
  }
  return test;
}

}  // namespace detail

/// Random train/test split that keeps every object label on one side.
inline SplitPlan grouped_split(std::span<const AnnotatedImage> images, std::uint64_t seed,
                               double test_fraction = 0.2) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    config_error("test fraction must lie strictly between 0 and 1");
  }
  std::map<std::string, std::size_t> sizes;
  for (const auto& img : images) ++sizes[img.object_label];
  if (sizes.size() < 2) data_error("cannot split: fewer than two distinct object labels");

  std::vector<std::string> order;
  order.reserve(sizes.size());
  for (const auto& [label, n] : sizes) order.push_back(label);
  seeded_shuffle(order, seed);
  const auto test_labels = detail::greedy_test_labels(order, sizes, test_fraction);

  SplitPlan plan;
  plan.seed = seed;
  for (const auto& img : images) {
    (test_labels.contains(img.object_label) ? plan.test_ids : plan.train_ids).push_back(img.image_id);
  }
  return plan;
}

}  // namespace stairward
