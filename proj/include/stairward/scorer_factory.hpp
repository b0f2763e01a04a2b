#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <string_view>

#include "json.hpp"
#include "stairward/core.hpp"
#include "stairward/external_scorer.hpp"
#include "stairward/scorer.hpp"

namespace stairward {

enum class ScorerKind { constant, lexical_overlap, external_process };

struct ScorerDescriptor {
  std::string name;
  ScorerKind kind = ScorerKind::constant;
  double constant_value = 0.0;
  ExternalScorerConfig external;
};

inline constexpr const char* kScorerCommandEnv = "STAIRWARD_SCORER_CMD";

/// Parses a JSON scorer config:
///
///     {"name": "imagereward", "kind": "external_process",
///      "command": "python -m bridge --model imagereward", "workers": 2,
///      "image_mode": "inline"}
///
/// `kind` is one of constant (with "value"), lexical_overlap, external_process.
inline ScorerDescriptor parse_scorer_config(const nlohmann::json& j) {
  ScorerDescriptor d;
  try {
    d.name = j.value("name", std::string{});
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "constant") {
      d.kind = ScorerKind::constant;
      d.constant_value = j.at("value").get<double>();
      if (!std::isfinite(d.constant_value)) config_error("constant scorer value must be finite");
    } else if (kind == "lexical_overlap" || kind == "lexical") {
      d.kind = ScorerKind::lexical_overlap;
    } else if (kind == "external_process" || kind == "external") {
      d.kind = ScorerKind::external_process;
      d.external.name = d.name;
      d.external.command = j.value("command", std::string{});
      d.external.workers = j.value("workers", std::size_t{1});
      d.external.image_mode = parse_image_mode(j.value("image_mode", std::string{"path"}));
      d.external.max_in_flight = j.value("max_in_flight", std::size_t{64});
      if (trim(d.external.command).empty()) config_error("scorer config: external scorer needs a command");
      if (d.external.workers < 1) config_error("scorer config: workers must be at least 1");
    } else {
      config_error("scorer config: unknown kind '" + kind + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("scorer config: ") + e.what());
  }
  if (d.name.empty()) {
    d.name = d.kind == ScorerKind::constant  ? "constant:" + format_double(d.constant_value)
             : d.kind == ScorerKind::lexical_overlap ? "lexical"
                                                    : "external";
  }
  if (d.kind == ScorerKind::external_process && d.external.name.empty()) d.external.name = d.name;
  return d;
}

/// Resolves a --scorer argument: `constant:<c>`, `lexical`, or a JSON config path.
inline ScorerDescriptor resolve_scorer(std::string_view spec) {
  if (spec.starts_with("constant:")) {
    const auto value = parse_double(spec.substr(9));
    if (!value || !std::isfinite(*value)) {
      config_error("invalid constant scorer '" + std::string(spec) + "'");
    }
    ScorerDescriptor d;
    d.kind = ScorerKind::constant;
    d.constant_value = *value;
    d.name = "constant:" + format_double(*value);
    return d;
  }
  if (spec == "lexical" || spec == "lexical_overlap") {
    ScorerDescriptor d;
    d.kind = ScorerKind::lexical_overlap;
    d.name = "lexical";
    return d;
  }
  const std::filesystem::path path{std::string(spec)};
  std::ifstream in(path);
  if (!in) config_error("cannot open scorer config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    config_error("scorer config " + path.string() + ": " + e.what());
  }
  return parse_scorer_config(j);
}

/// Builds a live scorer. For external scorers the command may be overridden
/// through the STAIRWARD_SCORER_CMD environment variable.
inline std::unique_ptr<Scorer> make_scorer(ScorerDescriptor descriptor) {
  switch (descriptor.kind) {
    case ScorerKind::constant: return std::make_unique<ConstantScorer>(descriptor.constant_value);
    case ScorerKind::lexical_overlap: return std::make_unique<LexicalOverlapScorer>();
    case ScorerKind::external_process: {
      if (const char* cmd = std::getenv(kScorerCommandEnv); cmd != nullptr && *cmd != '\0') {
        descriptor.external.command = cmd;
      }
      return std::make_unique<ExternalScorer>(descriptor.external);
    }
  }
  config_error("unknown scorer kind");
}

}  // namespace stairward
