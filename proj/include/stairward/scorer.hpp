#pragma once

#include <cctype>
#include <cstddef>
#include <exception>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stairward/core.hpp"

namespace stairward {

/// One (prompt, image) pair to score. `source_file` is set only when the
/// pixels are exactly the decoded contents of that file, so path-mode
/// backends may read it instead of a re-encoded copy. `caption` carries the
/// dataset's reference caption for the lexical test scorer.
struct ScoreItem {
  std::string prompt;
  std::shared_ptr<const Raster> image;
  std::optional<std::filesystem::path> source_file;
  std::optional<std::string> caption;
};

/// Failure of one element of a batch; `index` is the element position.
class BatchError : public Error {
 public:
  BatchError(ErrorKind kind, std::size_t index, const std::string& what)
      : Error(kind, "item " + std::to_string(index) + ": " + what), index_(index) {}
  [[nodiscard]] std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

namespace detail {
[[noreturn]] inline void rethrow_indexed(std::size_t index, std::exception_ptr error) {
  try {
    std::rethrow_exception(error);
  } catch (const BatchError&) {
    throw;
  } catch (const Error& e) {
    throw BatchError(e.kind(), index, e.what());
  } catch (const std::exception& e) {
    throw BatchError(ErrorKind::backend, index, e.what());
  }
}
}  // namespace detail

class Scorer {
 public:
  virtual ~Scorer() = default;

  [[nodiscard]] virtual std::string name() const = 0;

  /// Raw backend output, unchecked.
  virtual double score_raw(const ScoreItem& item) = 0;

  /// Scores every item; implementations may overlap requests but must keep
  /// output order. The first failing index is reported as a BatchError.
  virtual std::vector<double> score_raw_many(std::span<const ScoreItem> items) {
    std::vector<double> out;
    out.reserve(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
      try {
        out.push_back(score_raw(items[i]));
      } catch (...) {
        detail::rethrow_indexed(i, std::current_exception());
      }
    }
    return out;
  }

  /// Whether equal inputs always produce equal outputs.
  [[nodiscard]] virtual bool deterministic() const { return true; }
};

inline AlignmentScore score(Scorer& scorer, const ScoreItem& item) {
  return AlignmentScore(scorer.score_raw(item));
}

inline std::vector<AlignmentScore> batch_score(Scorer& scorer, std::span<const ScoreItem> items) {
  const auto raw = scorer.score_raw_many(items);
  std::vector<AlignmentScore> out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    try {
      out.emplace_back(raw[i]);
    } catch (...) {
      detail::rethrow_indexed(i, std::current_exception());
    }
  }
  return out;
}

class ConstantScorer final : public Scorer {
 public:
  explicit ConstantScorer(double value) : value_(value) {
    if (!std::isfinite(value)) config_error("constant scorer value must be finite");
  }
  [[nodiscard]] std::string name() const override { return "constant:" + format_double(value_); }
  double score_raw(const ScoreItem&) override { return value_; }

 private:
  double value_;
};

/// Lowercase alphanumeric runs.
inline std::set<std::string> token_set(std::string_view text) {
  std::set<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.insert(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.insert(std::move(current));
  return tokens;
}

inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::size_t common = 0;
  for (const auto& t : a) common += b.contains(t) ? 1 : 0;
  const auto united = a.size() + b.size() - common;
  return united == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(united);
}

/// Test stand-in for a neural alignment model: Jaccard similarity between the
/// prompt's tokens and the image's reference caption. Pixels are ignored.
class LexicalOverlapScorer final : public Scorer {
 public:
  [[nodiscard]] std::string name() const override { return "lexical"; }
  double score_raw(const ScoreItem& item) override {
    if (!item.caption) config_error("lexical scorer needs a caption for every image");
    return jaccard(token_set(item.prompt), token_set(*item.caption));
  }
};

}  // namespace stairward
