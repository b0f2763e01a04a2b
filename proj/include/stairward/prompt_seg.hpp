#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "stairward/core.hpp"

namespace stairward {

struct SegmentationRules {
  std::set<std::string> preposition_lexicon;  // lowercase
  std::set<char> punctuation_separators;
  std::size_t max_morphemes = 8;

  void validate() const {
    if (preposition_lexicon.empty()) config_error("segmentation rules: preposition lexicon is empty");
    if (max_morphemes < 1) config_error("segmentation rules: max_morphemes must be at least 1");
    for (char c : punctuation_separators) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        config_error("segmentation rules: whitespace cannot be a separator");
      }
    }
  }
};

inline SegmentationRules default_rules() {
  return SegmentationRules{
      {"of", "in", "on", "with", "at", "by", "from", "under", "over", "near", "beside", "behind",
       "inside", "between", "among", "against", "through", "across", "during", "without", "within",
       "along", "around", "before", "after"},
      {',', ';', '.', '|'},
      8};
}

/// Reads rules from a sectioned text file:
///
///     [prepositions]
///     of
///     with
///     [separators]
///     ,
///     ;
///     [limits]
///     max_morphemes = 8
///
/// Lines in [separators] must hold exactly one character and are taken
/// literally. Elsewhere blank lines and lines starting with '#' are ignored.
/// Sections that are absent keep their default value.
inline SegmentationRules load_rules(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open segmentation rules file " + path.string());

  auto rules = default_rules();
  bool saw_preps = false;
  bool saw_seps = false;
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto t = trim(line);
    if (t.size() > 2 && t.front() == '[' && t.back() == ']') {
      section = to_lower(t.substr(1, t.size() - 2));
      if (section == "prepositions" && !saw_preps) {
        rules.preposition_lexicon.clear();
        saw_preps = true;
      } else if (section == "separators" && !saw_seps) {
        rules.punctuation_separators.clear();
        saw_seps = true;
      } else if (section != "prepositions" && section != "separators" && section != "limits") {
        config_error(path.string() + ":" + std::to_string(line_no) + ": unknown section [" +
                     section + "]");
      }
      continue;
    }
    if (t.empty()) continue;
    if (section == "separators") {
      if (t.size() != 1) {
        config_error(path.string() + ":" + std::to_string(line_no) +
                     ": separator lines must hold a single character");
      }
      rules.punctuation_separators.insert(t.front());
      continue;
    }
    if (t.front() == '#') continue;
    if (section == "prepositions") {
      rules.preposition_lexicon.insert(to_lower(t));
    } else if (section == "limits") {
      const auto eq = t.find('=');
      const auto key = eq == std::string_view::npos ? std::string_view{} : trim(t.substr(0, eq));
      const auto value = eq == std::string_view::npos ? std::nullopt : parse_int(t.substr(eq + 1));
      if (key != "max_morphemes" || !value || *value < 1) {
        config_error(path.string() + ":" + std::to_string(line_no) +
                     ": expected 'max_morphemes = <positive integer>'");
      }
      rules.max_morphemes = static_cast<std::size_t>(*value);
    } else {
      config_error(path.string() + ":" + std::to_string(line_no) + ": entry outside any section");
    }
  }
  rules.validate();
  return rules;
}

/// Splits a prompt into morphemes. Separator characters end a morpheme and are
/// dropped. A lexicon preposition opens a new morpheme unless it is already the
/// first word of the current one. Morphemes keep the source text's casing and
/// inner spacing; overflow past max_morphemes is folded into the last morpheme.
inline PromptDecomposition split_prompt(const PromptText& prompt, const SegmentationRules& rules) {
  rules.validate();
  const std::string_view text = prompt.raw();

  struct Span {
    std::size_t begin;
    std::size_t end;
  };
  std::vector<Span> segments;
  bool open = false;
  Span current{0, 0};

  auto close_current = [&] {
    if (open) segments.push_back(current);
    open = false;
  };

  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (rules.punctuation_separators.contains(c)) {
      close_current();
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    // A word runs until whitespace or a separator.
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) &&
           !rules.punctuation_separators.contains(text[j])) {
      ++j;
    }
    const bool preposition = rules.preposition_lexicon.contains(to_lower(text.substr(i, j - i)));
    if (preposition && open) close_current();
    if (!open) {
      current = Span{i, j};
      open = true;
    } else {
      current.end = j;
    }
    i = j;
  }
  close_current();

  if (segments.empty()) data_error("degenerate prompt: no content besides separators");

  std::vector<std::string> morphemes;
  morphemes.reserve(std::min(segments.size(), rules.max_morphemes));
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto piece = text.substr(segments[k].begin, segments[k].end - segments[k].begin);
    if (k < rules.max_morphemes) {
      morphemes.emplace_back(piece);
    } else {
      morphemes.back().append(" ").append(piece);
    }
  }
  return PromptDecomposition(prompt, std::move(morphemes));
}

}  // namespace stairward
