// stairward: MOS processing, StairReward scoring and correlation benchmarks.

#include <algorithm>
#include <filesystem>
#include <future>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stairward/stairward.hpp"

namespace fs = std::filesystem;
using namespace stairward;

namespace {

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!trim(item).empty()) out.emplace_back(trim(item));
  }
  return out;
}

struct ManifestArgs {
  std::string manifest;
  std::string root;
  std::string mapping;

  void attach(CLI::App* cmd) {
    cmd->add_option("--manifest", manifest, "Image metadata CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--root", root, "Directory image paths are relative to (default: manifest's directory)")
        ->check(CLI::ExistingDirectory);
    cmd->add_option("--mapping", mapping, "Column mapping file for foreign metadata layouts")
        ->check(CLI::ExistingFile);
  }

  [[nodiscard]] DatasetManifest load() const {
    const fs::path root_dir = root.empty() ? fs::path(manifest).parent_path() : fs::path(root);
    return load_manifest(manifest, root_dir.empty() ? fs::path(".") : root_dir,
                         mapping.empty() ? ColumnMapping{} : load_mapping(mapping));
  }
};

struct ScoringArgs {
  std::string scorer;
  std::string rules;
  int jobs = 1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--scorer", scorer,
                    "Scorer: constant:<c>, lexical, or a JSON scorer config file")
        ->required();
    cmd->add_option("--rules", rules, "Prompt segmentation rules file")->check(CLI::ExistingFile);
    cmd->add_option("--jobs", jobs, "Concurrent images / scorer requests")
        ->default_val(1)
        ->check(CLI::PositiveNumber);
  }

  [[nodiscard]] SegmentationRules segmentation() const {
    return rules.empty() ? default_rules() : load_rules(rules);
  }

  [[nodiscard]] std::unique_ptr<Scorer> make() const {
    auto descriptor = resolve_scorer(scorer);
    descriptor.external.max_in_flight = static_cast<std::size_t>(jobs);
    return make_scorer(descriptor);
  }
};

std::vector<StairInput> load_inputs(const DatasetManifest& manifest) {
  std::vector<StairInput> inputs;
  inputs.reserve(manifest.images.size());
  for (const auto& img : manifest.images) {
    const auto file = manifest.resolve(img);
    inputs.push_back({img.prompt, std::make_shared<const Raster>(decode_image(file)), file,
                      img.caption});
  }
  return inputs;
}

std::vector<StairBreakdown> score_all(Scorer& scorer, const std::vector<StairInput>& inputs,
                                      const SegmentationRules& rules, AblationMode mode, int jobs) {
  std::vector<StairBreakdown> out(inputs.size());
  const auto width = static_cast<std::size_t>(std::max(1, jobs));
  for (std::size_t start = 0; start < inputs.size(); start += width) {
    const auto end = std::min(inputs.size(), start + width);
    if (width == 1) {
      out[start] = compute_stair_reward(scorer, inputs[start], rules, mode);
      continue;
    }
    std::vector<std::future<StairBreakdown>> running;
    for (auto i = start; i < end; ++i) {
      running.push_back(std::async(std::launch::async, [&, i] {
        return compute_stair_reward(scorer, inputs[i], rules, mode);
      }));
    }
    for (auto i = start; i < end; ++i) out[i] = running[i - start].get();
  }
  return out;
}

std::string metric_name(AblationMode mode) { return "stairreward:" + std::string(to_string(mode)); }

std::string breakdown_csv(const DatasetManifest& manifest, const std::vector<StairBreakdown>& rows) {
  std::string out = csv_line({"image_id", "part", "morpheme", "box_length", "weight", "score"});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& id = manifest.images[i].image_id;
    const auto& b = rows[i];
    out += csv_line({id, "whole", manifest.images[i].prompt.raw(), "1", "1", format_double(b.whole_score)});
    for (std::size_t k = 0; k < b.morphemes.size(); ++k) {
      out += csv_line({id, std::to_string(k + 1), b.morphemes[k], format_double(b.box_lengths[k]),
                       format_double(b.weights[k]), format_double(b.morpheme_scores[k])});
    }
    out += csv_line({id, "final", "", "", "", format_double(b.final_score)});
  }
  return out;
}

int cmd_mos(const std::string& ratings_path, const std::string& out_path, double threshold) {
  const auto ratings = load_ratings(ratings_path);
  const auto result = run_mos_pipeline(ratings, threshold);
  write_mos(result.table, out_path);
  print_warnings(result.warnings);
  std::cout << "rejected raters:";
  if (result.rejected_raters.empty()) std::cout << " (none)";
  for (const auto& r : result.rejected_raters) std::cout << ' ' << r;
  std::cout << "\nwrote " << result.table.size() << " MOS rows to " << out_path << '\n';
  return 0;
}

int cmd_score(const ManifestArgs& m, const ScoringArgs& s, const std::string& mode_text,
              const std::string& out_path, const std::string& breakdown_path) {
  const auto mode = parse_ablation_mode(mode_text);
  const auto rules = s.segmentation();
  const auto manifest = m.load();
  auto scorer = s.make();
  const auto inputs = load_inputs(manifest);
  const auto results = score_all(*scorer, inputs, rules, mode, s.jobs);

  std::vector<MetricScore> rows;
  for (std::size_t i = 0; i < results.size(); ++i) {
    rows.push_back({manifest.images[i].image_id, metric_name(mode), results[i].final_score});
  }
  write_scores(rows, out_path);
  if (!breakdown_path.empty()) write_text_file(breakdown_path, breakdown_csv(manifest, results));
  std::cout << "scored " << rows.size() << " images with " << scorer->name() << " (mode "
            << to_string(mode) << ")\n";
  return 0;
}

struct BenchArgs {
  std::string mos;
  std::string dimension = "alignment";
  int reps = 10;
  std::uint64_t seed = 0;
  std::string out;
  std::string text;

  void attach(CLI::App* cmd) {
    cmd->add_option("--mos", mos, "MOS CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--dimension", dimension, "MOS dimension: alignment or perception")
        ->default_val("alignment");
    cmd->add_option("--reps", reps, "Number of grouped 80/20 splits")->default_val(10)->check(
        CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "Split seed")->default_val(0);
    cmd->add_option("--out", out, "Report CSV output")->required();
    cmd->add_option("--text", text, "Aligned text report output (default: stdout)");
  }

  [[nodiscard]] Dimension dim() const {
    auto d = parse_dimension(dimension);
    if (!d) config_error("unknown dimension '" + dimension + "'");
    return *d;
  }
};

void emit_text(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

int cmd_bench(const ManifestArgs& m, const BenchArgs& b, const std::string& scores_path,
              const std::string& subsets, const std::string& scatter_dir, int jobs) {
  BenchmarkOptions opt;
  opt.criteria.clear();
  for (const auto& c : split_list(subsets)) opt.criteria.push_back(parse_criterion(c));
  if (opt.criteria.empty()) config_error("--subsets names no criterion");
  opt.repetitions = b.reps;
  opt.seed = b.seed;
  opt.jobs = jobs;
  const auto dimension = b.dim();

  const auto manifest = m.load();
  const auto scores = load_scores(scores_path);
  const auto mos = load_mos(b.mos);
  const auto inputs = join_inputs(manifest.images, scores, mos, dimension);
  const auto report = run_benchmark(inputs, opt);
  print_warnings(report.warnings);

  write_text_file(b.out, report_csv(report));
  emit_text(report_text(report), b.text);
  if (!scatter_dir.empty()) {
    fs::create_directories(scatter_dir);
    for (const auto& row : report.rows) {
      std::string name = std::string(to_string(row.criterion)) + "-" + row.subset + "-" + row.metric;
      std::replace_if(name.begin(), name.end(), [](char c) { return !std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_'; }, '_');
      write_text_file(fs::path(scatter_dir) / (name + ".csv"), scatter_csv(inputs, row));
    }
  }
  return 0;
}

int cmd_ablate(const ManifestArgs& m, const ScoringArgs& s, const BenchArgs& b,
               const std::string& scores_out) {
  const auto rules = s.segmentation();
  const auto dimension = b.dim();
  const auto manifest = m.load();
  const auto mos = load_mos(b.mos);
  auto scorer = s.make();
  const auto inputs = load_inputs(manifest);

  std::vector<MetricScore> rows;
  for (auto mode : kAllAblationModes) {
    const auto results = score_all(*scorer, inputs, rules, mode, s.jobs);
    for (std::size_t i = 0; i < results.size(); ++i) {
      rows.push_back({manifest.images[i].image_id, metric_name(mode), results[i].final_score});
    }
  }
  if (!scores_out.empty()) write_scores(rows, scores_out);

  BenchmarkOptions opt;
  opt.criteria = {SubsetCriterion::all};
  opt.repetitions = b.reps;
  opt.seed = b.seed;
  opt.jobs = s.jobs;
  const auto bench_inputs = join_inputs(manifest.images, rows, mos, dimension);
  const auto report = run_benchmark(bench_inputs, opt);
  print_warnings(report.warnings);

  std::string csv = csv_line({"ablation", "srocc", "krocc", "plcc", "repetitions"});
  std::ostringstream text;
  text << "Ablation  SRoCC   KRoCC   PLCC\n";
  for (auto mode : kAllAblationModes) {
    const auto it = std::find_if(report.rows.begin(), report.rows.end(),
                                 [&](const ReportRow& r) { return r.metric == metric_name(mode); });
    if (it == report.rows.end()) {
      text << detail::pad(std::string(to_string(mode)), 10) << "-       -       -\n";
      continue;
    }
    const auto& t = it->correlations;
    csv += csv_line({std::string(to_string(mode)), format_double(t.srocc), format_double(t.krocc),
                     format_double(t.plcc), std::to_string(it->repetitions)});
    text << detail::pad(std::string(to_string(mode)), 10) << detail::pad(detail::fixed4(t.srocc), 8)
         << detail::pad(detail::fixed4(t.krocc), 8) << detail::fixed4(t.plcc) << '\n';
  }
  write_text_file(b.out, csv);
  emit_text(text.str(), b.text);
  return 0;
}

int cmd_report(const std::string& in_path, const std::string& out_path) {
  const auto report = parse_report_csv(read_csv(in_path));
  emit_text(report_text(report), out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stairward: MOS processing, StairReward scoring and correlation benchmarks"};
  app.require_subcommand(1);
  app.allow_extras(false);

  // mos
  auto* mos = app.add_subcommand("mos", "Turn raw ratings into per-image MOS");
  std::string ratings_path;
  std::string mos_out;
  double threshold = 0.5;
  mos->add_option("--ratings", ratings_path, "Ratings CSV")->required()->check(CLI::ExistingFile);
  mos->add_option("--out", mos_out, "MOS CSV output")->required();
  mos->add_option("--outlier-threshold", threshold,
                  "Minimum leave-one-out SRoCC a rater needs to be kept")
      ->default_val(0.5)
      ->check(CLI::Range(-1.0, 1.0));

  // score
  auto* score = app.add_subcommand("score", "Compute StairReward for every image in a manifest");
  ManifestArgs score_manifest;
  ScoringArgs score_scoring;
  std::string mode = "none";
  std::string score_out;
  std::string breakdown;
  score_manifest.attach(score);
  score_scoring.attach(score);
  score->add_option("--mode", mode, "Ablation mode: none, word, image or all")->default_val("none");
  score->add_option("--out", score_out, "Metric score CSV output")->required();
  score->add_option("--breakdown", breakdown, "Per-morpheme breakdown CSV output");

  // bench
  auto* bench = app.add_subcommand("bench", "Correlate metric scores with MOS over grouped splits");
  ManifestArgs bench_manifest;
  BenchArgs bench_args;
  std::string scores_path;
  std::string subsets = "all,model_group,prompt_length_class,style_class";
  std::string scatter_dir;
  int bench_jobs = 1;
  bench_manifest.attach(bench);
  bench_args.attach(bench);
  bench->add_option("--scores", scores_path, "Metric score CSV")->required()->check(CLI::ExistingFile);
  bench->add_option("--subsets", subsets,
                    "Comma-separated criteria: all, model_group, prompt_length_class, style_class")
      ->default_val(subsets);
  bench->add_option("--scatter-dir", scatter_dir, "Directory for per-row scatter data");
  bench->add_option("--jobs", bench_jobs, "Concurrent repetitions")->default_val(1)->check(
      CLI::PositiveNumber);

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Compare StairReward with components switched off");
  ManifestArgs ablate_manifest;
  ScoringArgs ablate_scoring;
  BenchArgs ablate_args;
  std::string ablate_scores;
  ablate_manifest.attach(ablate);
  ablate_scoring.attach(ablate);
  ablate_args.attach(ablate);
  ablate->add_option("--scores-out", ablate_scores, "Write the four score columns to this CSV");

  // report
  auto* report = app.add_subcommand("report", "Render a report CSV as aligned text tables");
  std::string report_in;
  std::string report_out;
  report->add_option("--in", report_in, "Report CSV")->required()->check(CLI::ExistingFile);
  report->add_option("--out", report_out, "Text output (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::config);
  }

  try {
    if (*mos) return cmd_mos(ratings_path, mos_out, threshold);
    if (*score) return cmd_score(score_manifest, score_scoring, mode, score_out, breakdown);
    if (*bench) return cmd_bench(bench_manifest, bench_args, scores_path, subsets, scatter_dir, bench_jobs);
    if (*ablate) return cmd_ablate(ablate_manifest, ablate_scoring, ablate_args, ablate_scores);
    if (*report) return cmd_report(report_in, report_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::data);
  }
  return 0;
}
