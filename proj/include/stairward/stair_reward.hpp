#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stairward/core.hpp"
#include "stairward/prompt_seg.hpp"
#include "stairward/scorer.hpp"
#include "stairward/stair_crop.hpp"

namespace stairward {

/// Which StairReward component is switched off: `word` scores every stair
/// against the whole prompt, `image` scores every morpheme against the whole
/// image, `all` does both.
enum class AblationMode { none, word, image, all };

inline std::string_view to_string(AblationMode m) {
  switch (m) {
    case AblationMode::none: return "none";
    case AblationMode::word: return "word";
    case AblationMode::image: return "image";
    case AblationMode::all: return "all";
  }
  return "none";
}

inline AblationMode parse_ablation_mode(std::string_view s) {
  if (s == "none") return AblationMode::none;
  if (s == "word") return AblationMode::word;
  if (s == "image") return AblationMode::image;
  if (s == "all") return AblationMode::all;
  config_error("unknown ablation mode '" + std::string(s) + "' (expected none, word, image or all)");
}

inline constexpr AblationMode kAllAblationModes[] = {AblationMode::none, AblationMode::word,
                                                     AblationMode::image, AblationMode::all};

/// w_k = 2^-k / (1 - 2^-K), k = 1..K.
inline std::vector<double> morpheme_weights(long long morpheme_count) {
  if (morpheme_count <= 0) {
    data_error("invalid morpheme count " + std::to_string(morpheme_count));
  }
  const double norm = 1.0 - std::ldexp(1.0, static_cast<int>(-std::min(morpheme_count, 2000LL)));
  std::vector<double> weights;
  weights.reserve(static_cast<std::size_t>(morpheme_count));
  for (long long k = 1; k <= morpheme_count; ++k) {
    weights.push_back(std::ldexp(1.0, static_cast<int>(-std::min(k, 2000LL))) / norm);
  }
  return weights;
}

struct StairBreakdown {
  std::vector<std::string> morphemes;
  std::vector<double> box_lengths;
  double whole_score = 0.0;
  std::vector<double> morpheme_scores;
  std::vector<double> weights;
  double final_score = 0.0;
  std::size_t scorer_requests = 0;
};

/// Image under evaluation plus the metadata scorers may use.
struct StairInput {
  PromptText prompt;
  std::shared_ptr<const Raster> image;
  std::optional<std::filesystem::path> source_file;
  std::optional<std::string> caption;
};

/// F = A(p0, I0) + sum_k w_k A(p_k, I_k). The unique (prompt, box) pairs are
/// scored in one batch, so duplicates introduced by ablation are scored once.
inline StairBreakdown compute_stair_reward(Scorer& scorer, const StairInput& input,
                                           const SegmentationRules& rules, AblationMode mode) {
  if (!input.image) data_error("stair reward needs an image");
  const auto decomposition = split_prompt(input.prompt, rules);
  const auto K = decomposition.count();
  const auto lengths = stair_lengths(static_cast<long long>(K)).lengths;

  const bool keep_words = mode == AblationMode::none || mode == AblationMode::image;
  const bool keep_stairs = mode == AblationMode::none || mode == AblationMode::word;
  const auto& whole_prompt = input.prompt.raw();

  using Key = std::pair<std::string, double>;
  std::map<Key, std::size_t> slot_of;
  std::vector<Key> unique;
  auto slot = [&](const std::string& prompt, double length) {
    Key key{prompt, length};
    auto [it, inserted] = slot_of.emplace(key, unique.size());
    if (inserted) unique.push_back(std::move(key));
    return it->second;
  };

  const auto whole_slot = slot(whole_prompt, 1.0);
  std::vector<std::size_t> stair_slots;
  stair_slots.reserve(K);
  for (std::size_t k = 0; k < K; ++k) {
    stair_slots.push_back(slot(keep_words ? decomposition.morphemes()[k] : whole_prompt,
                               keep_stairs ? lengths[k] : 1.0));
  }

  std::map<double, std::shared_ptr<const Raster>> crops;
  std::vector<ScoreItem> items;
  items.reserve(unique.size());
  for (const auto& [prompt, length] : unique) {
    ScoreItem item{prompt, input.image, std::nullopt, input.caption};
    if (length == 1.0) {
      item.source_file = input.source_file;
    } else {
      auto& crop = crops[length];
      if (!crop) crop = std::make_shared<const Raster>(crop_center_box(*input.image, length));
      item.image = crop;
    }
    items.push_back(std::move(item));
  }

  const auto scores = batch_score(scorer, items);

  StairBreakdown out;
  out.morphemes = decomposition.morphemes();
  out.box_lengths = lengths;
  out.weights = morpheme_weights(static_cast<long long>(K));
  out.scorer_requests = items.size();
  out.whole_score = scores[whole_slot].value();
  out.final_score = out.whole_score;
  out.morpheme_scores.reserve(K);
  for (std::size_t k = 0; k < K; ++k) {
    out.morpheme_scores.push_back(scores[stair_slots[k]].value());
  }
  double weighted = 0.0;
  for (std::size_t k = 0; k < K; ++k) weighted += out.weights[k] * out.morpheme_scores[k];
  // Every stair term equals the whole score here; summing the weights would
  // drift from 2A by an ulp.
  out.final_score = mode == AblationMode::all ? 2.0 * out.whole_score : out.whole_score + weighted;
  return out;
}

}  // namespace stairward
