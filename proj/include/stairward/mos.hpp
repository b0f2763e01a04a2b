#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "stairward/core.hpp"
#include "stairward/correlation.hpp"

namespace stairward {

enum class Dimension { perception, alignment };

inline std::string_view to_string(Dimension d) {
  return d == Dimension::perception ? "perception" : "alignment";
}

inline std::optional<Dimension> parse_dimension(std::string_view s) {
  const auto key = to_lower(trim(s));
  if (key == "perception" || key == "quality") return Dimension::perception;
  if (key == "alignment") return Dimension::alignment;
  return std::nullopt;
}

struct Rating {
  std::string image_id;
  std::string rater_id;
  int session = 0;
  Dimension dimension = Dimension::alignment;
  double score = 0.0;
};

struct RatingTable {
  std::vector<Rating> entries;
  int session_count = 0;  // 0: any non-negative session id is accepted
};

/// Checks the slider constraints: scores in [0, 5] on a 0.1 grid, valid
/// session ids, and no (image, rater, dimension) rated twice. Throws naming
/// the offending entry (0-based index).
inline void validate_ratings(const RatingTable& table) {
  std::set<std::tuple<std::string, std::string, Dimension>> seen;
  for (std::size_t i = 0; i < table.entries.size(); ++i) {
    const auto& r = table.entries[i];
    const auto where = "rating " + std::to_string(i) + " (image " + r.image_id + ", rater " +
                       r.rater_id + ")";
    if (!std::isfinite(r.score) || r.score < 0.0 || r.score > 5.0) {
      data_error(where + ": score out of range: " + format_double(r.score));
    }
    if (std::abs(r.score * 10.0 - std::round(r.score * 10.0)) > 1e-8) {
      data_error(where + ": score is not a multiple of 0.1: " + format_double(r.score));
    }
    if (r.session < 0 || (table.session_count > 0 && r.session >= table.session_count)) {
      data_error(where + ": session id out of range: " + std::to_string(r.session));
    }
    if (!seen.emplace(r.image_id, r.rater_id, r.dimension).second) {
      data_error(where + ": duplicate rating");
    }
  }
}

inline std::set<std::string> rater_ids(const RatingTable& table) {
  std::set<std::string> ids;
  for (const auto& r : table.entries) ids.insert(r.rater_id);
  return ids;
}

struct OutlierResult {
  RatingTable kept;
  std::vector<std::string> rejected;
  std::map<std::string, double> agreement;  // worst per-dimension leave-one-out SRoCC
  std::vector<std::string> warnings;
};

/// Leave-one-out screening: each rater's scores are rank-correlated with the
/// mean of all other raters on the same images, per dimension. A rater whose
/// SRoCC falls below `threshold` in any dimension, or whose scores have no
/// rank variance, is dropped entirely. Single pass.
inline OutlierResult reject_outlier_raters(const RatingTable& table, double threshold = 0.5) {
  const auto raters = rater_ids(table);
  if (raters.size() < 3) {
    data_error("insufficient raters: outlier rejection needs at least 3, got " +
               std::to_string(raters.size()));
  }

  // dimension -> image -> rater -> score
  std::map<Dimension, std::map<std::string, std::map<std::string, double>>> grid;
  for (const auto& r : table.entries) grid[r.dimension][r.image_id][r.rater_id] = r.score;

  OutlierResult result;
  std::set<std::string> rejected;
  for (const auto& rater : raters) {
    double worst = 1.0;
    bool evaluated = false;
    for (const auto& [dim, images] : grid) {
      std::vector<double> own;
      std::vector<double> others;
      for (const auto& [image, scores] : images) {
        auto it = scores.find(rater);
        if (it == scores.end() || scores.size() < 2) continue;
        double sum = 0.0;
        for (const auto& [other, s] : scores) {
          if (other != rater) sum += s;
        }
        own.push_back(it->second);
        others.push_back(sum / static_cast<double>(scores.size() - 1));
      }
      if (own.empty()) continue;
      if (own.size() < 3) {
        result.warnings.push_back("rater " + rater + " shares fewer than 3 " +
                                  std::string(to_string(dim)) + " images with others; not screened");
        continue;
      }
      double rho = -1.0;
      try {
        rho = srocc(own, others);
      } catch (const Error&) {
        rho = -1.0;  // constant scores carry no ranking information
      }
      worst = evaluated ? std::min(worst, rho) : rho;
      evaluated = true;
    }
    if (evaluated) result.agreement[rater] = worst;
    if (evaluated && worst < threshold) rejected.insert(rater);
  }

  if (raters.size() - rejected.size() < 2) {
    data_error("insufficient raters: outlier rejection would leave " +
               std::to_string(raters.size() - rejected.size()));
  }
  result.rejected.assign(rejected.begin(), rejected.end());
  result.kept.session_count = table.session_count;
  for (const auto& r : table.entries) {
    if (!rejected.contains(r.rater_id)) result.kept.entries.push_back(r);
  }
  return result;
}

struct RaterValue {
  std::string image_id;
  std::string rater_id;
  Dimension dimension = Dimension::alignment;
  double value = 0.0;
};

/// s = r - (mean of the rater's raw scores in that session and dimension) + 2.5
inline std::vector<RaterValue> session_normalize(const RatingTable& table) {
  std::map<std::tuple<std::string, int, Dimension>, std::pair<double, std::size_t>> sums;
  for (const auto& r : table.entries) {
    auto& [sum, count] = sums[{r.rater_id, r.session, r.dimension}];
    sum += r.score;
    ++count;
  }
  std::vector<RaterValue> out;
  out.reserve(table.entries.size());
  for (const auto& r : table.entries) {
    const auto& [sum, count] = sums.at({r.rater_id, r.session, r.dimension});
    out.push_back({r.image_id, r.rater_id, r.dimension,
                   r.score - sum / static_cast<double>(count) + 2.5});
  }
  return out;
}

/// Per rater and dimension: z = (s - mean) / sample standard deviation.
inline std::vector<RaterValue> zscore(const std::vector<RaterValue>& normalized) {
  struct Moments {
    double sum = 0.0;
    std::size_t count = 0;
    double mean = 0.0;
    double sq = 0.0;
  };
  std::map<std::pair<std::string, Dimension>, Moments> stats;
  for (const auto& v : normalized) {
    auto& m = stats[{v.rater_id, v.dimension}];
    m.sum += v.value;
    ++m.count;
  }
  for (auto& [key, m] : stats) m.mean = m.sum / static_cast<double>(m.count);
  for (const auto& v : normalized) {
    auto& m = stats[{v.rater_id, v.dimension}];
    m.sq += (v.value - m.mean) * (v.value - m.mean);
  }
  for (const auto& [key, m] : stats) {
    if (m.count < 2 || !(m.sq > 0.0)) {
      data_error("degenerate rater " + key.first + " (" + std::string(to_string(key.second)) +
                 "): fewer than two distinct scores");
    }
  }
  std::vector<RaterValue> out;
  out.reserve(normalized.size());
  for (const auto& v : normalized) {
    const auto& m = stats.at({v.rater_id, v.dimension});
    const double sigma = std::sqrt(m.sq / static_cast<double>(m.count - 1));
    out.push_back({v.image_id, v.rater_id, v.dimension, (v.value - m.mean) / sigma});
  }
  return out;
}

/// Maps z-scores onto the 0..5 slider scale: +-3 sigma spans the range.
inline double rescale_z(double z) { return std::clamp((z + 3.0) * 5.0 / 6.0, 0.0, 5.0); }

struct MosRow {
  std::string image_id;
  Dimension dimension = Dimension::alignment;
  double mos = 0.0;
  int n_raters = 0;
};

using MosTable = std::vector<MosRow>;

/// Mean of rescaled z-scores per (image, dimension); rows sorted by image id
/// then dimension.
inline MosTable compute_mos(const std::vector<RaterValue>& z) {
  std::map<std::pair<std::string, Dimension>, std::vector<double>> acc;
  for (const auto& v : z) acc[{v.image_id, v.dimension}].push_back(rescale_z(v.value));
  MosTable out;
  out.reserve(acc.size());
  for (auto& [key, values] : acc) {
    // Summing in sorted order makes the result independent of rater order.
    std::sort(values.begin(), values.end());
    const double sum = std::accumulate(values.begin(), values.end(), 0.0);
    const auto count = static_cast<int>(values.size());
    out.push_back({key.first, key.second, sum / static_cast<double>(count), count});
  }
  return out;
}

struct MosResult {
  MosTable table;
  std::vector<std::string> rejected_raters;
  std::vector<std::string> warnings;
};

/// Screening, session normalization, z-scoring and averaging in sequence.
/// Without a threshold the screening step is skipped.
inline MosResult run_mos_pipeline(const RatingTable& ratings,
                                  std::optional<double> outlier_threshold = 0.5) {
  MosResult result;
  RatingTable working = ratings;
  std::sort(working.entries.begin(), working.entries.end(), [](const Rating& a, const Rating& b) {
    return std::tie(a.rater_id, a.dimension, a.session, a.image_id) <
           std::tie(b.rater_id, b.dimension, b.session, b.image_id);
  });
  if (outlier_threshold) {
    auto screened = reject_outlier_raters(working, *outlier_threshold);
    working = std::move(screened.kept);
    result.rejected_raters = std::move(screened.rejected);
    result.warnings = std::move(screened.warnings);
  }
  result.table = compute_mos(zscore(session_normalize(working)));

  std::set<std::pair<std::string, Dimension>> covered;
  for (const auto& row : result.table) covered.emplace(row.image_id, row.dimension);
  std::set<std::pair<std::string, Dimension>> requested;
  for (const auto& r : ratings.entries) requested.emplace(r.image_id, r.dimension);
  for (const auto& key : requested) {
    if (!covered.contains(key)) {
      result.warnings.push_back("image " + key.first + " (" + std::string(to_string(key.second)) +
                                ") has no surviving ratings; excluded");
    }
  }
  return result;
}

}  // namespace stairward
