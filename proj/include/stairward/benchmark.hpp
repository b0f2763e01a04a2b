#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "stairward/core.hpp"
#include "stairward/correlation.hpp"
#include "stairward/csv.hpp"
#include "stairward/logistic.hpp"
#include "stairward/mos.hpp"
#include "stairward/split.hpp"

namespace stairward {

enum class SubsetCriterion { all, model_group, prompt_length_class, style_class };

inline std::string_view to_string(SubsetCriterion c) {
  switch (c) {
    case SubsetCriterion::all: return "all";
    case SubsetCriterion::model_group: return "model_group";
    case SubsetCriterion::prompt_length_class: return "prompt_length_class";
    case SubsetCriterion::style_class: return "style_class";
  }
  return "all";
}

inline SubsetCriterion parse_criterion(std::string_view s) {
  const auto key = to_lower(trim(s));
  if (key == "all") return SubsetCriterion::all;
  if (key == "model_group") return SubsetCriterion::model_group;
  if (key == "prompt_length_class" || key == "prompt_length") return SubsetCriterion::prompt_length_class;
  if (key == "style_class" || key == "style") return SubsetCriterion::style_class;
  config_error("unknown subset criterion '" + std::string(s) + "'");
}

struct Subset {
  SubsetCriterion criterion = SubsetCriterion::all;
  std::string key;    // e.g. "bad"
  std::string label;  // e.g. "Bad Model"
  std::vector<std::size_t> members;  // indices into the image list
};

/// Partitions the images by one criterion. Every subset of the criterion is
/// returned, in table order, even when empty.
inline std::vector<Subset> subset_filter(std::span<const AnnotatedImage> images,
                                         SubsetCriterion criterion) {
  std::vector<Subset> out;
  auto add = [&](std::string key, std::string label, auto pred) {
    Subset s{criterion, std::move(key), std::move(label), {}};
    for (std::size_t i = 0; i < images.size(); ++i) {
      if (pred(images[i])) s.members.push_back(i);
    }
    out.push_back(std::move(s));
  };
  switch (criterion) {
    case SubsetCriterion::all:
      add("all", "All", [](const AnnotatedImage&) { return true; });
      break;
    case SubsetCriterion::model_group:
      for (auto g : {ModelGroup::bad, ModelGroup::medium, ModelGroup::good}) {
        std::string label(to_string(g));
        label[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(label[0])));
        add(std::string(to_string(g)), label + " Model",
            [g](const AnnotatedImage& img) { return img.model_group == g; });
      }
      break;
    case SubsetCriterion::prompt_length_class:
      for (int c = 0; c <= 3; ++c) {
        add("prompt" + std::to_string(c), "Prompt " + std::to_string(c),
            [c](const AnnotatedImage& img) { return img.prompt_length_class == c; });
      }
      break;
    case SubsetCriterion::style_class: {
      const std::pair<StyleClass, const char*> styles[] = {
          {StyleClass::abstract_scifi, "Abstract & Sci-fi Style"},
          {StyleClass::anime_realistic, "Anime & Realistic Style"},
          {StyleClass::baroque, "Baroque Style"},
          {StyleClass::none, "No Style"}};
      for (const auto& [style, label] : styles) {
        add(std::string(to_string(style)), label,
            [style](const AnnotatedImage& img) { return img.style_class == style; });
      }
      break;
    }
  }
  return out;
}

/// Images with aligned per-metric predictions and MOS targets.
struct BenchmarkInputs {
  std::vector<AnnotatedImage> images;
  std::vector<double> mos;
  std::map<std::string, std::vector<double>> metrics;  // metric -> value per image
};

struct MetricScore {
  std::string image_id;
  std::string metric;
  double value = 0.0;
};

/// Aligns metric scores and MOS rows of one dimension with the manifest order.
/// Every image needs a MOS and a value for every metric that appears.
inline BenchmarkInputs join_inputs(std::vector<AnnotatedImage> images,
                                   std::span<const MetricScore> scores, const MosTable& mos,
                                   Dimension dimension) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < images.size(); ++i) index.emplace(images[i].image_id, i);

  auto describe = [](const std::vector<std::string>& ids) {
    std::string s;
    for (std::size_t i = 0; i < ids.size() && i < 10; ++i) s += (i ? ", " : "") + ids[i];
    if (ids.size() > 10) s += ", ... (" + std::to_string(ids.size()) + " total)";
    return s;
  };

  BenchmarkInputs in;
  in.mos.assign(images.size(), 0.0);
  std::vector<bool> has_mos(images.size(), false);
  for (const auto& row : mos) {
    if (row.dimension != dimension) continue;
    auto it = index.find(row.image_id);
    if (it == index.end()) continue;
    in.mos[it->second] = row.mos;
    has_mos[it->second] = true;
  }
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (!has_mos[i]) missing.push_back(images[i].image_id);
  }
  if (!missing.empty()) {
    data_error("join failed: no " + std::string(to_string(dimension)) + " MOS for " + describe(missing));
  }

  std::map<std::string, std::vector<bool>> seen;
  std::vector<std::string> unknown;
  for (const auto& s : scores) {
    auto it = index.find(s.image_id);
    if (it == index.end()) {
      unknown.push_back(s.image_id);
      continue;
    }
    auto& values = in.metrics[s.metric];
    auto& flags = seen[s.metric];
    if (values.empty()) {
      values.assign(images.size(), 0.0);
      flags.assign(images.size(), false);
    }
    values[it->second] = s.value;
    flags[it->second] = true;
  }
  if (!unknown.empty()) data_error("join failed: scores for unknown images " + describe(unknown));
  for (const auto& [metric, flags] : seen) {
    missing.clear();
    for (std::size_t i = 0; i < flags.size(); ++i) {
      if (!flags[i]) missing.push_back(images[i].image_id);
    }
    if (!missing.empty()) {
      data_error("join failed: metric " + metric + " has no value for " + describe(missing));
    }
  }
  in.images = std::move(images);
  return in;
}

struct BenchmarkOptions {
  std::vector<SubsetCriterion> criteria{SubsetCriterion::all};
  int repetitions = 10;
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  int jobs = 1;
};

struct CellKey {
  std::size_t subset = 0;  // index into the flattened subset list
  std::string metric;
  auto operator<=>(const CellKey&) const = default;
};

struct RepetitionResult {
  std::uint64_t seed = 0;
  SplitPlan split;
  std::map<CellKey, CorrelationTriple> cells;
  std::vector<std::string> warnings;
};

struct ReportRow {
  SubsetCriterion criterion = SubsetCriterion::all;
  std::string subset;
  std::string label;
  std::string metric;
  CorrelationTriple correlations;
  int repetitions = 0;
  std::optional<LogisticParams> params;  // fitted on the whole subset
  std::size_t subset_size = 0;
};

struct BenchmarkReport {
  std::vector<ReportRow> rows;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::vector<Subset> flatten_subsets(const BenchmarkInputs& in, const BenchmarkOptions& opt) {
  std::vector<Subset> all;
  for (auto c : opt.criteria) {
    for (auto& s : subset_filter(in.images, c)) all.push_back(std::move(s));
  }
  return all;
}

// Rank metrics on raw predictions; PLCC after the logistic remap (or on the
// raw predictions when there are too few samples to fit five parameters).
inline CorrelationTriple evaluate_cell(std::span<const double> x, std::span<const double> y) {
  CorrelationTriple t;
  t.srocc = srocc(x, y);
  t.krocc = krocc(x, y);
  if (x.size() >= 10) {
    const auto fit = fit_logistic(x, y);
    const auto mapped = fit.params.apply(x);
    t.plcc = plcc(mapped, y);
  } else {
    t.plcc = plcc(x, y);
  }
  return t;
}

}  // namespace detail

/// One grouped split with all subsets and metrics evaluated on its test side.
inline RepetitionResult run_repetition(const BenchmarkInputs& in, const BenchmarkOptions& opt,
                                       std::uint64_t rep_seed) {
  RepetitionResult rep;
  rep.seed = rep_seed;
  rep.split = grouped_split(in.images, rep_seed, opt.test_fraction);
  const std::set<std::string> test(rep.split.test_ids.begin(), rep.split.test_ids.end());
  const auto subsets = detail::flatten_subsets(in, opt);

  for (std::size_t s = 0; s < subsets.size(); ++s) {
    std::vector<std::size_t> members;
    for (auto i : subsets[s].members) {
      if (test.contains(in.images[i].image_id)) members.push_back(i);
    }
    const auto where = std::string(to_string(subsets[s].criterion)) + "=" + subsets[s].key;
    if (members.size() < 3) {
      rep.warnings.push_back("split seed " + std::to_string(rep_seed) + ": subset " + where +
                             " has " + std::to_string(members.size()) + " test images; skipped");
      continue;
    }
    std::vector<double> y;
    for (auto i : members) y.push_back(in.mos[i]);
    for (const auto& [metric, values] : in.metrics) {
      std::vector<double> x;
      for (auto i : members) x.push_back(values[i]);
      try {
        rep.cells[{s, metric}] = detail::evaluate_cell(x, y);
      } catch (const Error& e) {
        rep.warnings.push_back("split seed " + std::to_string(rep_seed) + ": subset " + where +
                               ", metric " + metric + ": " + e.what() + "; skipped");
      }
    }
  }
  return rep;
}

/// Repeats grouped splits and averages each (subset, metric) cell over the
/// repetitions in which it could be evaluated. Repetition r uses the stream
/// derive_seed(seed, r), so results do not depend on `jobs`.
inline BenchmarkReport run_benchmark(const BenchmarkInputs& in, const BenchmarkOptions& opt) {
  if (opt.repetitions < 1) config_error("repetitions must be at least 1");
  if (in.images.size() != in.mos.size()) data_error("benchmark inputs are not aligned");
  for (const auto& [metric, values] : in.metrics) {
    if (values.size() != in.images.size()) data_error("metric " + metric + " is not aligned");
  }

  std::vector<RepetitionResult> reps(static_cast<std::size_t>(opt.repetitions));
  const auto jobs = static_cast<std::size_t>(std::max(1, opt.jobs));
  for (std::size_t start = 0; start < reps.size(); start += jobs) {
    const auto end = std::min(reps.size(), start + jobs);
    if (jobs == 1) {
      reps[start] = run_repetition(in, opt, derive_seed(opt.seed, start));
      continue;
    }
    std::vector<std::future<RepetitionResult>> running;
    for (auto r = start; r < end; ++r) {
      running.push_back(std::async(std::launch::async, [&, r] {
        return run_repetition(in, opt, derive_seed(opt.seed, r));
      }));
    }
    for (auto r = start; r < end; ++r) reps[r] = running[r - start].get();
  }

  const auto subsets = detail::flatten_subsets(in, opt);
  BenchmarkReport report;
  for (const auto& rep : reps) {
    report.warnings.insert(report.warnings.end(), rep.warnings.begin(), rep.warnings.end());
  }
  for (std::size_t s = 0; s < subsets.size(); ++s) {
    for (const auto& [metric, values] : in.metrics) {
      CorrelationTriple sum;
      int count = 0;
      for (const auto& rep : reps) {
        auto it = rep.cells.find({s, metric});
        if (it == rep.cells.end()) continue;
        sum.srocc += it->second.srocc;
        sum.krocc += it->second.krocc;
        sum.plcc += it->second.plcc;
        ++count;
      }
      if (count == 0) continue;
      ReportRow row;
      row.criterion = subsets[s].criterion;
      row.subset = subsets[s].key;
      row.label = subsets[s].label;
      row.metric = metric;
      row.repetitions = count;
      row.subset_size = subsets[s].members.size();
      row.correlations = {sum.srocc / count, sum.krocc / count, sum.plcc / count};
      if (subsets[s].members.size() >= 10) {
        std::vector<double> x;
        std::vector<double> y;
        for (auto i : subsets[s].members) {
          x.push_back(values[i]);
          y.push_back(in.mos[i]);
        }
        try {
          row.params = fit_logistic(x, y).params;
        } catch (const Error&) {
          row.params.reset();
        }
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Report rendering

inline std::string report_csv(const BenchmarkReport& report) {
  std::string out = csv_line({"criterion", "subset", "metric", "srocc", "krocc", "plcc", "repetitions",
                              "alpha1", "alpha2", "alpha3", "alpha4", "alpha5"});
  for (const auto& r : report.rows) {
    std::vector<std::string> fields{std::string(to_string(r.criterion)), r.subset, r.metric,
                                    format_double(r.correlations.srocc),
                                    format_double(r.correlations.krocc),
                                    format_double(r.correlations.plcc), std::to_string(r.repetitions)};
    for (std::size_t k = 0; k < 5; ++k) {
      fields.push_back(r.params ? format_double(r.params->alpha[k]) : std::string{});
    }
    out += csv_line(fields);
  }
  return out;
}

/// Reads a report written by report_csv back into rows (labels restored).
inline BenchmarkReport parse_report_csv(const CsvTable& table) {
  const auto c_criterion = table.require("criterion");
  const auto c_subset = table.require("subset");
  const auto c_metric = table.require("metric");
  const auto c_s = table.require("srocc");
  const auto c_k = table.require("krocc");
  const auto c_p = table.require("plcc");
  const auto c_reps = table.require("repetitions");
  BenchmarkReport report;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    ReportRow out;
    try {
      out.criterion = parse_criterion(row[c_criterion]);
    } catch (const Error&) {
      data_error(table.where(r) + ": unknown criterion '" + row[c_criterion] + "'");
    }
    out.subset = row[c_subset];
    out.label = out.subset;
    for (const auto& s : subset_filter({}, out.criterion)) {
      if (s.key == out.subset) out.label = s.label;
    }
    out.metric = row[c_metric];
    const auto s = parse_double(row[c_s]);
    const auto k = parse_double(row[c_k]);
    const auto p = parse_double(row[c_p]);
    const auto reps = parse_int(row[c_reps]);
    if (!s || !k || !p || !reps) data_error(table.where(r) + ": malformed report row");
    out.correlations = {*s, *k, *p};
    out.repetitions = static_cast<int>(*reps);
    LogisticParams params;
    bool complete = true;
    for (std::size_t a = 0; a < 5; ++a) {
      const auto c = table.column("alpha" + std::to_string(a + 1));
      const auto v = c ? parse_double(row[*c]) : std::nullopt;
      if (v) {
        params.alpha[a] = *v;
      } else {
        complete = false;
      }
    }
    if (complete) out.params = params;
    report.rows.push_back(std::move(out));
  }
  return report;
}

namespace detail {
inline std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

inline std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}
}  // namespace detail

/// Aligned plain-text tables, one per criterion: metrics down, subsets across,
/// each subset spanning SRoCC/KRoCC/PLCC columns.
inline std::string report_text(const BenchmarkReport& report) {
  std::vector<SubsetCriterion> criteria;
  for (const auto& r : report.rows) {
    if (std::find(criteria.begin(), criteria.end(), r.criterion) == criteria.end()) {
      criteria.push_back(r.criterion);
    }
  }
  std::ostringstream out;
  for (auto c : criteria) {
    std::vector<std::string> subsets;
    std::vector<std::string> labels;
    std::vector<std::string> metrics;
    std::map<std::pair<std::string, std::string>, const ReportRow*> cell;
    for (const auto& r : report.rows) {
      if (r.criterion != c) continue;
      if (std::find(subsets.begin(), subsets.end(), r.subset) == subsets.end()) {
        subsets.push_back(r.subset);
        labels.push_back(r.label);
      }
      if (std::find(metrics.begin(), metrics.end(), r.metric) == metrics.end()) {
        metrics.push_back(r.metric);
      }
      cell[{r.subset, r.metric}] = &r;
    }
    std::size_t metric_width = 6;
    for (const auto& m : metrics) metric_width = std::max(metric_width, m.size());
    metric_width += 2;
    std::vector<std::size_t> widths;
    for (const auto& l : labels) widths.push_back(std::max<std::size_t>(l.size(), 22) + 3);

    out << "[" << to_string(c) << "]\n";
    out << detail::pad("Metric", metric_width);
    for (std::size_t s = 0; s < labels.size(); ++s) out << "| " << detail::pad(labels[s], widths[s] - 2);
    out << '\n' << detail::pad("", metric_width);
    for (std::size_t s = 0; s < labels.size(); ++s) {
      out << "| " << detail::pad("SRoCC   KRoCC   PLCC", widths[s] - 2);
    }
    out << '\n';
    for (const auto& m : metrics) {
      out << detail::pad(m, metric_width);
      for (std::size_t s = 0; s < subsets.size(); ++s) {
        std::string text = "-       -       -";
        if (auto it = cell.find({subsets[s], m}); it != cell.end()) {
          const auto& t = it->second->correlations;
          text = detail::pad(detail::fixed4(t.srocc), 8) + detail::pad(detail::fixed4(t.krocc), 8) +
                 detail::fixed4(t.plcc);
        }
        out << "| " << detail::pad(text, widths[s] - 2);
      }
      out << '\n';
    }
    out << '\n';
  }
  return out.str();
}

/// Scatter data for one row: raw prediction, remapped prediction, MOS.
inline std::string scatter_csv(const BenchmarkInputs& in, const ReportRow& row) {
  std::ostringstream out;
  out << "image_id,x,x_hat,mos\n";
  const auto& values = in.metrics.at(row.metric);
  for (const auto& s : subset_filter(in.images, row.criterion)) {
    if (s.key != row.subset) continue;
    for (auto i : s.members) {
      const double x = values[i];
      const double fitted = row.params ? (*row.params)(x) : x;
      out << in.images[i].image_id << ',' << format_double(x) << ',' << format_double(fitted) << ','
          << format_double(in.mos[i]) << '\n';
    }
  }
  return out.str();
}

}  // namespace stairward
