// Writes a deterministic synthetic corpus (images, manifest, ratings) for demos and tests.

#include <iostream>

#include "CLI11.hpp"
#include "synthetic_corpus.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic stairward corpus"};
  std::string out;
  stairward::synth::CorpusOptions opt;
  app.add_option("--out", out, "Output directory")->required();
  app.add_option("--images", opt.images, "Number of images")->default_val(opt.images);
  app.add_option("--labels", opt.labels, "Number of object labels")->default_val(opt.labels);
  app.add_option("--raters", opt.raters, "Number of raters")->default_val(opt.raters);
  app.add_option("--seed", opt.seed, "Generator seed")->default_val(opt.seed);
  app.add_option("--reversed", opt.reversed_raters, "Indices of raters who rate in reverse");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  try {
    const auto corpus = stairward::synth::write_corpus(out, opt);
    std::cout << "wrote " << corpus.images.size() << " images to " << out << '\n';
  } catch (const stairward::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  }
  return 0;
}
