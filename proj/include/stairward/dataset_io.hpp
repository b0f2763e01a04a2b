#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stairward/benchmark.hpp"
#include "stairward/core.hpp"
#include "stairward/csv.hpp"
#include "stairward/mos.hpp"

namespace stairward {

struct DatasetManifest {
  std::filesystem::path root_dir;
  std::vector<AnnotatedImage> images;
  std::map<std::string, std::string> captions;

  [[nodiscard]] std::filesystem::path resolve(const AnnotatedImage& img) const {
    return root_dir / img.file_ref;
  }
};

/// Maps a foreign metadata layout onto the canonical columns. Read from
/// key=value lines:
///
///     column.image_id = name
///     column.prompt = prompt
///     default.param_variant = n/a
///
/// `column.X` names the source column holding canonical field X;
/// `default.X` supplies a constant when the source has no such column.
struct ColumnMapping {
  std::map<std::string, std::string> columns;
  std::map<std::string, std::string> defaults;
};

inline const std::vector<std::string>& canonical_columns() {
  static const std::vector<std::string> cols{"image_id",     "file",          "prompt",
                                             "model",        "style",         "prompt_length_class",
                                             "object_label", "param_variant", "model_group",
                                             "caption"};
  return cols;
}

inline ColumnMapping load_mapping(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open mapping file " + path.string());
  ColumnMapping mapping;
  std::string line;
  std::size_t line_no = 0;
  const auto& known = canonical_columns();
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    const auto where = path.string() + ":" + std::to_string(line_no);
    if (eq == std::string_view::npos) config_error(where + ": expected key=value");
    const std::string key(trim(t.substr(0, eq)));
    const std::string value(trim(t.substr(eq + 1)));
    const auto dot = key.find('.');
    const auto kind = key.substr(0, dot);
    const auto field = dot == std::string::npos ? std::string{} : key.substr(dot + 1);
    if (std::find(known.begin(), known.end(), field) == known.end()) {
      config_error(where + ": unknown canonical field '" + field + "'");
    }
    if (kind == "column") {
      mapping.columns[field] = value;
    } else if (kind == "default") {
      mapping.defaults[field] = value;
    } else {
      config_error(where + ": key must start with 'column.' or 'default.'");
    }
  }
  return mapping;
}

/// Reads the image metadata table and checks every record. Files are resolved
/// against `root_dir` and must exist.
inline DatasetManifest load_manifest(const std::filesystem::path& metadata_csv,
                                     const std::filesystem::path& root_dir,
                                     const ColumnMapping& mapping = {}) {
  const auto table = read_csv(metadata_csv);

  auto source_column = [&](const std::string& canonical) -> std::optional<std::size_t> {
    auto it = mapping.columns.find(canonical);
    return table.column(it == mapping.columns.end() ? canonical : it->second);
  };
  std::map<std::string, std::optional<std::size_t>> col;
  for (const auto& name : canonical_columns()) col[name] = source_column(name);
  for (const char* required : {"image_id", "file", "prompt", "model", "style",
                               "prompt_length_class", "object_label", "param_variant"}) {
    if (!col[required] && !mapping.defaults.contains(required)) {
      data_error(metadata_csv.string() + ": missing required column '" + required + "'");
    }
  }
  auto get = [&](const std::vector<std::string>& row, const std::string& name) -> std::string {
    if (const auto& c = col[name]) return row[*c];
    auto it = mapping.defaults.find(name);
    return it == mapping.defaults.end() ? std::string{} : it->second;
  };
  const bool has_group = col["model_group"].has_value() || mapping.defaults.contains("model_group");

  DatasetManifest manifest;
  manifest.root_dir = root_dir;
  std::set<std::string> ids;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto where = table.where(r);
    const std::string id(trim(get(row, "image_id")));
    if (id.empty()) data_error(where + ": empty image_id");
    if (!ids.insert(id).second) data_error(where + ": duplicate image_id '" + id + "'");

    const auto prompt_text = get(row, "prompt");
    if (trim(prompt_text).empty()) data_error(where + ": empty prompt for " + id);

    AnnotatedImage img{.image_id = id,
                       .file_ref = std::string(trim(get(row, "file"))),
                       .prompt = PromptText(prompt_text),
                       .raw_style = {},
                       .object_label = {},
                       .caption = std::nullopt};
    img.model_tag = parse_model_tag(get(row, "model"));
    const auto group_text = has_group ? get(row, "model_group") : std::string{};
    if (!trim(group_text).empty()) {
      auto g = parse_model_group(group_text);
      if (!g) data_error(where + ": unknown model_group '" + group_text + "'");
      img.model_group = *g;
    } else if (auto implied = model_group_for(img.model_tag)) {
      img.model_group = *implied;
    } else {
      data_error(where + ": model '" + get(row, "model") + "' needs an explicit model_group");
    }

    img.raw_style = std::string(trim(get(row, "style")));
    auto style = style_class_for(img.raw_style);
    if (!style) data_error(where + ": unknown style '" + img.raw_style + "'");
    img.style_class = *style;

    const auto length = parse_int(get(row, "prompt_length_class"));
    if (!length) data_error(where + ": prompt_length_class is not an integer");
    img.prompt_length_class = static_cast<int>(*length);
    img.object_label = std::string(trim(get(row, "object_label")));
    auto variant = parse_param_variant(get(row, "param_variant"));
    if (!variant) data_error(where + ": unknown param_variant '" + get(row, "param_variant") + "'");
    img.param_variant = *variant;
    if (col["caption"] || mapping.defaults.contains("caption")) {
      const auto caption = get(row, "caption");
      if (!caption.empty()) {
        img.caption = caption;
        manifest.captions[id] = caption;
      }
    }

    const auto violations = validate_annotated_image(img);
    if (!violations.empty()) {
      std::string msg = where + ": invalid record " + id + ":";
      for (const auto& v : violations) msg += " " + v + ";";
      data_error(msg);
    }
    if (img.file_ref.empty() || !std::filesystem::is_regular_file(root_dir / img.file_ref)) {
      data_error(where + ": image file not found: " + (root_dir / img.file_ref).string());
    }
    manifest.images.push_back(std::move(img));
  }
  return manifest;
}

inline std::string manifest_csv(const std::vector<AnnotatedImage>& images) {
  std::string out = csv_line({"image_id", "file", "prompt", "model", "style", "prompt_length_class",
                              "object_label", "param_variant", "model_group", "caption"});
  for (const auto& img : images) {
    out += csv_line({img.image_id, img.file_ref, img.prompt.raw(), std::string(to_string(img.model_tag)),
                     img.raw_style, std::to_string(img.prompt_length_class), img.object_label,
                     std::string(to_string(img.param_variant)),
                     std::string(to_string(img.model_group)), img.caption.value_or("")});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ratings and MOS

inline RatingTable load_ratings(const std::filesystem::path& path) {
  const auto table = read_csv(path);
  const auto c_image = table.require("image_id");
  const auto c_rater = table.require("rater_id");
  const auto c_session = table.require("session_id");
  const auto c_dim = table.require("dimension");
  const auto c_score = table.require("score");

  RatingTable ratings;
  std::set<std::tuple<std::string, std::string, Dimension>> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto where = table.where(r);
    Rating rating;
    rating.image_id = std::string(trim(row[c_image]));
    rating.rater_id = std::string(trim(row[c_rater]));
    if (rating.image_id.empty() || rating.rater_id.empty()) data_error(where + ": empty id");
    const auto session = parse_int(row[c_session]);
    if (!session || *session < 0) data_error(where + ": session id out of range: " + row[c_session]);
    rating.session = static_cast<int>(*session);
    const auto dim = parse_dimension(row[c_dim]);
    if (!dim) data_error(where + ": unknown dimension '" + row[c_dim] + "'");
    rating.dimension = *dim;
    const auto score = parse_double(row[c_score]);
    if (!score) data_error(where + ": score is not a number: " + row[c_score]);
    if (!std::isfinite(*score) || *score < 0.0 || *score > 5.0) {
      data_error(where + ": score out of range: " + row[c_score]);
    }
    if (std::abs(*score * 10.0 - std::round(*score * 10.0)) > 1e-8) {
      data_error(where + ": score is not a multiple of 0.1: " + row[c_score]);
    }
    rating.score = *score;
    if (!seen.emplace(rating.image_id, rating.rater_id, rating.dimension).second) {
      data_error(where + ": duplicate rating for image " + rating.image_id + " by rater " +
                 rating.rater_id);
    }
    ratings.session_count = std::max(ratings.session_count, rating.session + 1);
    ratings.entries.push_back(std::move(rating));
  }
  return ratings;
}

inline std::string ratings_csv(const RatingTable& ratings) {
  std::string out = csv_line({"image_id", "rater_id", "session_id", "dimension", "score"});
  for (const auto& r : ratings.entries) {
    out += csv_line({r.image_id, r.rater_id, std::to_string(r.session),
                     std::string(to_string(r.dimension)), format_double(r.score)});
  }
  return out;
}

inline std::string mos_csv(const MosTable& table) {
  std::string out = csv_line({"image_id", "dimension", "mos", "n_raters"});
  for (const auto& row : table) {
    out += csv_line({row.image_id, std::string(to_string(row.dimension)), format_double(row.mos),
                     std::to_string(row.n_raters)});
  }
  return out;
}

inline void write_mos(const MosTable& table, const std::filesystem::path& path) {
  write_text_file(path, mos_csv(table));
}

inline MosTable load_mos(const std::filesystem::path& path) {
  const auto table = read_csv(path);
  const auto c_image = table.require("image_id");
  const auto c_dim = table.require("dimension");
  const auto c_mos = table.require("mos");
  const auto c_n = table.column("n_raters");
  MosTable out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    MosRow m;
    m.image_id = std::string(trim(row[c_image]));
    const auto dim = parse_dimension(row[c_dim]);
    if (!dim) data_error(table.where(r) + ": unknown dimension '" + row[c_dim] + "'");
    m.dimension = *dim;
    const auto mos = parse_double(row[c_mos]);
    if (!mos || !std::isfinite(*mos)) data_error(table.where(r) + ": invalid mos '" + row[c_mos] + "'");
    m.mos = *mos;
    if (c_n) {
      const auto n = parse_int(row[*c_n]);
      if (!n || *n < 1) data_error(table.where(r) + ": invalid n_raters '" + row[*c_n] + "'");
      m.n_raters = static_cast<int>(*n);
    } else {
      m.n_raters = 1;
    }
    out.push_back(std::move(m));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Metric scores

/// Rows sorted by image id then metric name.
inline std::string scores_csv(std::vector<MetricScore> rows) {
  std::sort(rows.begin(), rows.end(), [](const MetricScore& a, const MetricScore& b) {
    return std::tie(a.image_id, a.metric) < std::tie(b.image_id, b.metric);
  });
  std::string out = csv_line({"image_id", "metric_name", "value"});
  for (const auto& r : rows) out += csv_line({r.image_id, r.metric, format_double(r.value)});
  return out;
}

inline void write_scores(std::vector<MetricScore> rows, const std::filesystem::path& path) {
  write_text_file(path, scores_csv(std::move(rows)));
}

inline std::vector<MetricScore> load_scores(const std::filesystem::path& path) {
  const auto table = read_csv(path);
  const auto c_image = table.require("image_id");
  const auto c_metric = table.require("metric_name");
  const auto c_value = table.require("value");
  std::vector<MetricScore> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    MetricScore s{std::string(trim(row[c_image])), std::string(trim(row[c_metric])), 0.0};
    const auto value = parse_double(row[c_value]);
    if (!value || !std::isfinite(*value)) {
      data_error(table.where(r) + ": invalid value '" + row[c_value] + "'");
    }
    s.value = *value;
    if (!seen.emplace(s.image_id, s.metric).second) {
      data_error(table.where(r) + ": duplicate score for " + s.image_id + " / " + s.metric);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace stairward
