#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>

#include "stairward/external_scorer.hpp"
#include "stairward/scorer_factory.hpp"
#include "stairward/stair_reward.hpp"
#include "support.hpp"

using namespace stairward;

namespace {

std::string fake(const std::string& args = "") {
  return std::string(FAKE_SCORER_PATH) + (args.empty() ? "" : " " + args);
}

ExternalScorerConfig config(const std::string& args = "", ImageMode mode = ImageMode::path,
                            std::size_t workers = 1) {
  ExternalScorerConfig c;
  c.name = "fake";
  c.command = fake(args);
  c.image_mode = mode;
  c.workers = workers;
  return c;
}

std::vector<ScoreItem> items(std::size_t n, const std::string& tag = "p") {
  testkit::Gen g(n);
  std::vector<ScoreItem> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto w = static_cast<std::size_t>(g.integer(1, 9));
    const auto h = static_cast<std::size_t>(g.integer(1, 9));
    std::vector<std::uint8_t> px(w * h * 3);
    for (auto& b : px) b = static_cast<std::uint8_t>(g.integer(0, 255));
    out.push_back({tag + std::to_string(i), std::make_shared<const Raster>(w, h, std::move(px)), std::nullopt,
                   std::nullopt});
  }
  return out;
}

template <typename F>
Error caught(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  return Error(ErrorKind::data, "no error");
}

}  // namespace

TEST(ExternalScorer, PathAndInlineAgree) {
  const auto batch = items(25);
  ExternalScorer by_path(config());
  ExternalScorer by_value(config("", ImageMode::inline_png));
  const auto a = by_path.score_raw_many(batch);
  const auto b = by_value.score_raw_many(batch);
  ASSERT_EQ(a.size(), 25u);
  EXPECT_EQ(a, b);
  for (double v : a) {
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
  EXPECT_NE(a[0], a[1]);
  EXPECT_FALSE(by_path.deterministic());
}

TEST(ExternalScorer, SourceFileIsSentAsIs) {
  testkit::TempDir dir;
  auto batch = items(3);
  write_png(*batch[1].image, dir / "src.png");
  const auto plain = ExternalScorer(config()).score_raw_many(batch);
  batch[1].source_file = dir / "src.png";
  EXPECT_EQ(ExternalScorer(config()).score_raw_many(batch), plain);
}

TEST(ExternalScorer, OutOfOrderRepliesAreReassociated) {
  const auto batch = items(41);
  const auto ordered = ExternalScorer(config()).score_raw_many(batch);
  EXPECT_EQ(ExternalScorer(config("--reverse")).score_raw_many(batch), ordered);
  EXPECT_EQ(ExternalScorer(config("--reverse", ImageMode::inline_png, 3)).score_raw_many(batch), ordered);
  auto narrow = config("--reverse");
  narrow.max_in_flight = 1;
  EXPECT_EQ(ExternalScorer(narrow).score_raw_many(batch), ordered);
}

TEST(ExternalScorer, HundredRequestsKeepIds) {
  ExternalScorer s(config("", ImageMode::inline_png, 2));
  const auto batch = items(100, "q");
  const auto first = s.score_raw_many(batch);
  const auto again = s.score_raw_many(batch);
  EXPECT_EQ(first, again);
  std::vector<ScoreItem> one{batch[57]};
  EXPECT_EQ(s.score_raw_many(one)[0], first[57]);
}

TEST(ExternalScorer, ErrorReplyNamesItemAndProcessSurvives) {
  ExternalScorer s(config("--error-on poison"));
  auto batch = items(6);
  batch[4].prompt = "poison";
  try {
    (void)s.score_raw_many(batch);
    FAIL();
  } catch (const BatchError& e) {
    EXPECT_EQ(e.index(), 4u);
    EXPECT_EQ(e.kind(), ErrorKind::backend);
    EXPECT_NE(std::string(e.what()).find("refused prompt"), std::string::npos);
  }
  EXPECT_EQ(s.score_raw_many(items(3)).size(), 3u);
}

TEST(ExternalScorer, NullScoreIsInvalid) {
  ExternalScorer s(config("--null-on nothing"));
  auto batch = items(2);
  batch[0].prompt = "nothing here";
  const auto e = caught([&] { (void)s.score_raw_many(batch); });
  EXPECT_EQ(e.kind(), ErrorKind::backend);
  EXPECT_NE(std::string(e.what()).find("invalid score"), std::string::npos);
}

TEST(ExternalScorer, CrashFailsPendingRequests) {
  ExternalScorer s(config("--crash-after 3"));
  const auto e = caught([&] { (void)s.score_raw_many(items(10)); });
  EXPECT_EQ(e.kind(), ErrorKind::backend);
  EXPECT_NE(std::string(e.what()).find("scorer backend failure"), std::string::npos);
  // A dead process fails fast instead of hanging.
  EXPECT_EQ(caught([&] { (void)s.score_raw_many(items(2)); }).kind(), ErrorKind::backend);
}

TEST(ExternalScorer, HandshakeFailures) {
  const auto version = caught([] { ExternalScorer s(config("--version 99")); });
  EXPECT_EQ(version.kind(), ErrorKind::config);
  EXPECT_NE(std::string(version.what()).find("version mismatch"), std::string::npos);

  const auto fatal = caught([] { ExternalScorer s(config("--fatal 'weights missing'")); });
  EXPECT_EQ(fatal.kind(), ErrorKind::backend);
  EXPECT_NE(std::string(fatal.what()).find("weights missing"), std::string::npos);

  auto missing = config();
  missing.command = "/nonexistent/scorer-binary";
  EXPECT_EQ(caught([&] { ExternalScorer s(missing); }).kind(), ErrorKind::backend);
}

TEST(ExternalScorer, StairRewardMatchesAcrossTransports) {
  testkit::Gen g(3);
  std::vector<std::uint8_t> px(40 * 30 * 3);
  for (auto& b : px) b = static_cast<std::uint8_t>(g.integer(0, 255));
  const StairInput in{PromptText("a cat with a hat, baroque style"),
                      std::make_shared<const Raster>(40, 30, std::move(px)), std::nullopt, std::nullopt};
  ExternalScorer by_path(config());
  ExternalScorer by_value(config("--reverse", ImageMode::inline_png, 2));
  for (auto mode : kAllAblationModes) {
    const auto a = compute_stair_reward(by_path, in, default_rules(), mode);
    const auto b = compute_stair_reward(by_value, in, default_rules(), mode);
    EXPECT_EQ(a.final_score, b.final_score);
    EXPECT_EQ(a.morpheme_scores, b.morpheme_scores);
  }
}

TEST(ExternalScorer, EachUniqueRequestIsSentOnce) {
  testkit::TempDir dir;
  const auto log = dir / "log.txt";
  ExternalScorer s(config("--log " + log.string()));
  const StairInput in{PromptText("a cat with a hat, baroque style"),
                      std::make_shared<const Raster>(8, 8, std::vector<std::uint8_t>(192, 1)), std::nullopt,
                      std::nullopt};
  (void)compute_stair_reward(s, in, default_rules(), AblationMode::word);
  std::ifstream f(log);
  std::size_t lines = 0;
  for (std::string line; std::getline(f, line);) ++lines;
  EXPECT_EQ(lines, 3u);
}

TEST(ScorerFactory, ConfigFileAndEnvOverride) {
  testkit::TempDir dir;
  const auto cfg = dir / "scorer.json";
  std::ofstream(cfg) << R"({"kind":"external","command":"/nonexistent/bridge","workers":2,"image_mode":"inline"})";
  const auto descriptor = resolve_scorer(cfg.string());
  EXPECT_EQ(descriptor.kind, ScorerKind::external_process);
  EXPECT_THROW(make_scorer(descriptor), Error);

  ::setenv(kScorerCommandEnv, fake().c_str(), 1);
  auto scorer = make_scorer(descriptor);
  ::unsetenv(kScorerCommandEnv);
  EXPECT_EQ(scorer->score_raw_many(items(4)).size(), 4u);
}
