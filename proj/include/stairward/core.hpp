#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

namespace stairward {

// Error categories double as process exit codes for the CLI.
enum class ErrorKind { data = 1, config = 2, backend = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void data_error(const std::string& msg) { throw Error(ErrorKind::data, msg); }
[[noreturn]] inline void config_error(const std::string& msg) {
  throw Error(ErrorKind::config, msg);
}
[[noreturn]] inline void backend_error(const std::string& msg) {
  throw Error(ErrorKind::backend, msg);
}

inline std::string_view trim(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Shortest decimal form that parses back to the identical double.
inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) return "nan";
  return {buf.data(), ptr};
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::optional<long long> parse_int(std::string_view s) {
  s = trim(s);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

/// Decoded 8-bit RGB image, row-major, three bytes per pixel.
class Raster {
 public:
  Raster(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels)
      : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width_ < 1 || height_ < 1) data_error("raster dimensions must be at least 1x1");
    if (pixels_.size() != width_ * height_ * 3) {
      data_error("raster buffer length " + std::to_string(pixels_.size()) + " does not match " +
                 std::to_string(width_) + "x" + std::to_string(height_) + "x3");
    }
  }

  [[nodiscard]] std::size_t width() const noexcept { return width_; }
  [[nodiscard]] std::size_t height() const noexcept { return height_; }
  [[nodiscard]] std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }

  [[nodiscard]] std::array<std::uint8_t, 3> at(std::size_t x, std::size_t y) const {
    const auto base = (y * width_ + x) * 3;
    return {pixels_[base], pixels_[base + 1], pixels_[base + 2]};
  }

  bool operator==(const Raster&) const = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<std::uint8_t> pixels_;
};

class PromptText {
 public:
  explicit PromptText(std::string raw) : raw_(std::move(raw)) {
    if (trim(raw_).empty()) data_error("prompt is empty");
  }
  [[nodiscard]] const std::string& raw() const noexcept { return raw_; }
  bool operator==(const PromptText&) const = default;

 private:
  std::string raw_;
};

/// A prompt p0 together with its ordered morphemes p1..pK.
class PromptDecomposition {
 public:
  PromptDecomposition(PromptText source, std::vector<std::string> morphemes)
      : source_(std::move(source)), morphemes_(std::move(morphemes)) {
    if (morphemes_.empty()) data_error("prompt decomposition needs at least one morpheme");
    for (const auto& m : morphemes_) {
      if (trim(m).empty()) data_error("prompt decomposition contains an empty morpheme");
    }
  }

  [[nodiscard]] const PromptText& source() const noexcept { return source_; }
  [[nodiscard]] const std::vector<std::string>& morphemes() const noexcept { return morphemes_; }
  [[nodiscard]] std::size_t count() const noexcept { return morphemes_.size(); }

 private:
  PromptText source_;
  std::vector<std::string> morphemes_;
};

enum class ModelTag { attngan, dalle2, glide, midjourney, sd, sdxl, other };
enum class ModelGroup { bad, medium, good };
enum class StyleClass { abstract_scifi, anime_realistic, baroque, none };
enum class ParamVariant { standard, low_cfg, high_cfg, low_step, not_applicable };

inline std::string_view to_string(ModelTag t) {
  switch (t) {
    case ModelTag::attngan: return "AttnGAN";
    case ModelTag::dalle2: return "DALLE2";
    case ModelTag::glide: return "GLIDE";
    case ModelTag::midjourney: return "Midjourney";
    case ModelTag::sd: return "SD";
    case ModelTag::sdxl: return "SDXL";
    case ModelTag::other: return "other";
  }
  return "other";
}

inline std::string_view to_string(ModelGroup g) {
  switch (g) {
    case ModelGroup::bad: return "bad";
    case ModelGroup::medium: return "medium";
    case ModelGroup::good: return "good";
  }
  return "bad";
}

inline std::string_view to_string(StyleClass s) {
  switch (s) {
    case StyleClass::abstract_scifi: return "abstract_scifi";
    case StyleClass::anime_realistic: return "anime_realistic";
    case StyleClass::baroque: return "baroque";
    case StyleClass::none: return "none";
  }
  return "none";
}

inline std::string_view to_string(ParamVariant p) {
  switch (p) {
    case ParamVariant::standard: return "default";
    case ParamVariant::low_cfg: return "low_cfg";
    case ParamVariant::high_cfg: return "high_cfg";
    case ParamVariant::low_step: return "low_step";
    case ParamVariant::not_applicable: return "n/a";
  }
  return "n/a";
}

namespace detail {
inline std::string alnum_lower(std::string_view s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}
}  // namespace detail

// Unrecognized model names map to `other`; "SD-XL", "sd_xl" and "SDXL" are the same tag.
inline ModelTag parse_model_tag(std::string_view s) {
  const auto key = detail::alnum_lower(s);
  if (key == "attngan") return ModelTag::attngan;
  if (key == "dalle2") return ModelTag::dalle2;
  if (key == "glide") return ModelTag::glide;
  if (key == "midjourney") return ModelTag::midjourney;
  if (key == "sd" || key == "stablediffusion") return ModelTag::sd;
  if (key == "sdxl") return ModelTag::sdxl;
  return ModelTag::other;
}

inline std::optional<ModelGroup> parse_model_group(std::string_view s) {
  const auto key = to_lower(trim(s));
  if (key == "bad") return ModelGroup::bad;
  if (key == "medium") return ModelGroup::medium;
  if (key == "good") return ModelGroup::good;
  return std::nullopt;
}

/// Fixed grouping of the known generators; `other` has no implied group.
inline std::optional<ModelGroup> model_group_for(ModelTag t) {
  switch (t) {
    case ModelTag::attngan:
    case ModelTag::glide: return ModelGroup::bad;
    case ModelTag::dalle2:
    case ModelTag::sd: return ModelGroup::medium;
    case ModelTag::midjourney:
    case ModelTag::sdxl: return ModelGroup::good;
    case ModelTag::other: return std::nullopt;
  }
  return std::nullopt;
}

/// Collapses a raw style string into its reporting group. Empty or "none" is
/// StyleClass::none; anything unrecognized yields nullopt.
inline std::optional<StyleClass> style_class_for(std::string_view raw) {
  const auto key = detail::alnum_lower(raw);
  if (key.empty() || key == "none" || key == "nostyle") return StyleClass::none;
  if (key == "abstract" || key == "scifi") return StyleClass::abstract_scifi;
  if (key == "anime" || key == "realistic") return StyleClass::anime_realistic;
  if (key == "baroque") return StyleClass::baroque;
  if (key == "abstractscifi") return StyleClass::abstract_scifi;
  if (key == "animerealistic") return StyleClass::anime_realistic;
  return std::nullopt;
}

inline std::optional<ParamVariant> parse_param_variant(std::string_view s) {
  const auto key = to_lower(trim(s));
  if (key == "default") return ParamVariant::standard;
  if (key == "low_cfg") return ParamVariant::low_cfg;
  if (key == "high_cfg") return ParamVariant::high_cfg;
  if (key == "low_step") return ParamVariant::low_step;
  if (key.empty() || key == "n/a" || key == "na") return ParamVariant::not_applicable;
  return std::nullopt;
}

struct AnnotatedImage {
  std::string image_id;
  std::string file_ref;
  PromptText prompt;
  ModelTag model_tag = ModelTag::other;
  ModelGroup model_group = ModelGroup::bad;
  int prompt_length_class = 0;
  StyleClass style_class = StyleClass::none;
  std::string raw_style;
  std::string object_label;
  ParamVariant param_variant = ParamVariant::not_applicable;
  std::optional<std::string> caption;
};

/// Lists every violated record invariant; an empty result means the record is valid.
inline std::vector<std::string> validate_annotated_image(const AnnotatedImage& record) {
  std::vector<std::string> violations;
  if (trim(record.image_id).empty()) violations.emplace_back("empty image id");
  if (record.prompt_length_class < 0 || record.prompt_length_class > 3) {
    violations.emplace_back("prompt_length_class out of range (" +
                            std::to_string(record.prompt_length_class) + ")");
  }
  if (trim(record.object_label).empty()) violations.emplace_back("empty grouping key (object_label)");
  if (auto implied = model_group_for(record.model_tag); implied && *implied != record.model_group) {
    violations.emplace_back("model_group " + std::string(to_string(record.model_group)) +
                            " contradicts model " + std::string(to_string(record.model_tag)));
  }
  return violations;
}

/// A finite alignment score; scale is whatever the producing scorer uses.
class AlignmentScore {
 public:
  explicit AlignmentScore(double value) : value_(value) {
    if (!std::isfinite(value)) backend_error("invalid score: backend returned a non-finite value");
  }
  [[nodiscard]] double value() const noexcept { return value_; }

 private:
  double value_;
};

struct CorrelationTriple {
  double srocc = 0.0;
  double krocc = 0.0;
  double plcc = 0.0;

  [[nodiscard]] bool in_range() const noexcept {
    auto ok = [](double v) { return std::isfinite(v) && v >= -1.0 && v <= 1.0; };
    return ok(srocc) && ok(krocc) && ok(plcc);
  }
};

}  // namespace stairward
