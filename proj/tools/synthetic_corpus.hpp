#pragma once

// Deterministic synthetic benchmark corpus: PNG images, a metadata manifest
// with captions, and a multi-session ratings file whose alignment ratings
// track the prompt/caption overlap.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "stairward/stairward.hpp"

namespace stairward::synth {

struct CorpusOptions {
  std::size_t images = 60;
  std::size_t labels = 12;
  std::size_t raters = 8;
  std::size_t sessions = 2;
  int width = 48;
  int height = 32;
  std::uint64_t seed = 7;
  // Raters listed here rate alignment in reverse and should be screened out.
  std::vector<std::size_t> reversed_raters;
};

struct Corpus {
  std::filesystem::path root;
  std::filesystem::path manifest;
  std::filesystem::path ratings;
  std::vector<AnnotatedImage> images;
  std::vector<double> latent_alignment;
  std::vector<double> latent_perception;
};

inline const std::vector<std::string>& subjects() {
  static const std::vector<std::string> v{"cat",   "dog",    "horse", "lighthouse", "teapot",
                                          "robot", "castle", "tree",  "bicycle",    "owl",
                                          "ship",  "violin", "fox",   "bridge",     "clock"};
  return v;
}

inline const std::vector<std::string>& details() {
  static const std::vector<std::string> v{
      "with a red hat",        "on a wooden table", "in a snowy forest", "under a full moon",
      "beside a quiet river",  "near an old wall",  "with golden wings", "inside a glass dome",
      "over a crowded market", "behind a blue door"};
  return v;
}

inline const std::vector<std::string>& styles() {
  static const std::vector<std::string> v{"abstract", "scifi", "anime", "realistic", "baroque"};
  return v;
}

inline const std::vector<std::string>& filler() {
  static const std::vector<std::string> v{"blurry", "strange", "shape", "smudge", "pattern", "noise"};
  return v;
}

/// Drops or replaces prompt words at rate `loss`; the result stands in for a
/// caption of the generated image.
inline std::string degrade(const std::string& prompt, double loss, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::string out;
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    const double r = u(rng);
    std::string w = word;
    if (r < loss * 0.5) {
      w.clear();
    } else if (r < loss) {
      w = filler()[bounded_draw(rng, filler().size())];
    }
    if (!w.empty()) {
      if (!out.empty()) out.push_back(' ');
      out += w;
    }
    word.clear();
  };
  for (char c : prompt) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      word.push_back(c);
    } else {
      flush();
    }
  }
  flush();
  return out.empty() ? "empty scene" : out;
}

inline Raster make_image(int w, int h, std::mt19937_64& rng) {
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * 3);
  const auto a = static_cast<int>(bounded_draw(rng, 256));
  const auto b = static_cast<int>(bounded_draw(rng, 256));
  const auto c = static_cast<int>(bounded_draw(rng, 256));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto* p = &px[(static_cast<std::size_t>(y) * w + x) * 3];
      p[0] = static_cast<std::uint8_t>((a + x * 5) % 256);
      p[1] = static_cast<std::uint8_t>((b + y * 7) % 256);
      p[2] = static_cast<std::uint8_t>((c + x * y) % 256);
    }
  }
  return Raster(w, h, std::move(px));
}

inline Corpus write_corpus(const std::filesystem::path& root, const CorpusOptions& opt) {
  namespace fs = std::filesystem;
  fs::create_directories(root / "images");
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  static constexpr ModelTag kModels[] = {ModelTag::attngan,    ModelTag::glide, ModelTag::dalle2,
                                         ModelTag::sd,         ModelTag::midjourney,
                                         ModelTag::sdxl};
  Corpus corpus;
  corpus.root = root;
  corpus.manifest = root / "manifest.csv";
  corpus.ratings = root / "ratings.csv";

  for (std::size_t i = 0; i < opt.images; ++i) {
    const auto li = i % opt.labels;
    const auto& subject = subjects()[li % subjects().size()];
    const auto label = subject + (opt.labels > subjects().size() ? std::to_string(li) : "");
    const auto n_details = static_cast<int>(bounded_draw(rng, 3));
    const bool styled = i % 3 != 0;
    std::string prompt = "a " + subject;
    for (int d = 0; d < n_details; ++d) {
      prompt += " " + details()[bounded_draw(rng, details().size())];
    }
    std::string style;
    if (styled) {
      style = styles()[bounded_draw(rng, styles().size())];
      prompt += ", " + style + " style";
    }
    const auto model = kModels[i % 6];
    const double quality = 0.15 + 0.25 * static_cast<double>(static_cast<int>(*model_group_for(model)));
    const double loss = std::clamp(0.85 - quality - 0.2 * u(rng), 0.0, 1.0);

    AnnotatedImage img{
        .image_id = "img" + std::string(i < 10 ? "00" : i < 100 ? "0" : "") + std::to_string(i),
        .file_ref = "images/img" + std::to_string(i) + ".png",
        .prompt = PromptText(prompt),
        .model_tag = model,
        .model_group = *model_group_for(model),
        .prompt_length_class = std::min(3, n_details + (styled ? 1 : 0)),
        .style_class = style_class_for(style).value_or(StyleClass::none),
        .raw_style = style,
        .object_label = label,
        .param_variant = ParamVariant::standard,
        .caption = degrade(prompt, loss, rng),
    };
    write_png(make_image(opt.width, opt.height, rng), root / img.file_ref);
    corpus.latent_alignment.push_back(1.0 - loss);
    corpus.latent_perception.push_back(1.0 + 3.0 * u(rng));
    corpus.images.push_back(std::move(img));
  }
  write_text_file(corpus.manifest, manifest_csv(corpus.images));

  std::vector<Rating> ratings;
  for (std::size_t r = 0; r < opt.raters; ++r) {
    const double gain = 0.8 + 0.4 * u(rng);
    const double bias = -0.4 + 0.8 * u(rng);
    const bool reversed =
        std::find(opt.reversed_raters.begin(), opt.reversed_raters.end(), r) != opt.reversed_raters.end();
    for (std::size_t i = 0; i < corpus.images.size(); ++i) {
      const auto session = static_cast<int>(i % opt.sessions);
      double a = corpus.latent_alignment[i];
      if (reversed) a = 1.0 - a;
      const double align = std::clamp(1.0 + 4.0 * a * gain + bias + 0.25 * noise(rng), 0.0, 5.0);
      const double percept = std::clamp(corpus.latent_perception[i] * gain + bias + 0.25 * noise(rng), 0.0, 5.0);
      const auto round1 = [](double v) { return std::round(v * 10.0) / 10.0; };
      const auto rater = "r" + std::to_string(r);
      ratings.push_back({corpus.images[i].image_id, rater, session, Dimension::alignment, round1(align)});
      ratings.push_back({corpus.images[i].image_id, rater, session, Dimension::perception, round1(percept)});
    }
  }
  write_text_file(corpus.ratings, ratings_csv(RatingTable{ratings, static_cast<int>(opt.sessions)}));
  return corpus;
}

}  // namespace stairward::synth
