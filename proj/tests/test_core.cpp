#include <gtest/gtest.h>

#include "stairward/core.hpp"
#include "support.hpp"

using namespace stairward;

namespace {

AnnotatedImage record() {
  auto img = testkit::image_record("a1", "cat", "a cat");
  img.file_ref = "a1.png";
  img.model_tag = ModelTag::sd;
  img.model_group = ModelGroup::medium;
  img.prompt_length_class = 3;
  return img;
}

}  // namespace

TEST(AnnotatedImage, InRangeClassIsValid) { EXPECT_TRUE(validate_annotated_image(record()).empty()); }

TEST(AnnotatedImage, ClassOutOfRange) {
  auto img = record();
  img.prompt_length_class = 5;
  const auto v = validate_annotated_image(img);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("class out of range"), std::string::npos);
}

TEST(AnnotatedImage, EmptyGroupingKey) {
  auto img = record();
  img.object_label = "  ";
  const auto v = validate_annotated_image(img);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("empty grouping key"), std::string::npos);
}

TEST(AnnotatedImage, GroupMustAgreeWithKnownModel) {
  auto img = record();
  img.model_group = ModelGroup::good;
  EXPECT_EQ(validate_annotated_image(img).size(), 1u);
  img.model_tag = ModelTag::other;
  EXPECT_TRUE(validate_annotated_image(img).empty());
}

TEST(ModelGroups, FixedMapping) {
  EXPECT_EQ(model_group_for(ModelTag::attngan), ModelGroup::bad);
  EXPECT_EQ(model_group_for(ModelTag::glide), ModelGroup::bad);
  EXPECT_EQ(model_group_for(ModelTag::dalle2), ModelGroup::medium);
  EXPECT_EQ(model_group_for(ModelTag::sd), ModelGroup::medium);
  EXPECT_EQ(model_group_for(ModelTag::midjourney), ModelGroup::good);
  EXPECT_EQ(model_group_for(ModelTag::sdxl), ModelGroup::good);
  EXPECT_FALSE(model_group_for(ModelTag::other).has_value());
  EXPECT_EQ(parse_model_tag("Stable-Diffusion XL"), ModelTag::other);
  EXPECT_EQ(parse_model_tag("SDXL"), ModelTag::sdxl);
  EXPECT_EQ(parse_model_tag("AttnGAN"), ModelTag::attngan);
}

TEST(StyleClasses, CollapseRawStyles) {
  EXPECT_EQ(style_class_for("Abstract"), StyleClass::abstract_scifi);
  EXPECT_EQ(style_class_for("sci-fi"), StyleClass::abstract_scifi);
  EXPECT_EQ(style_class_for("anime"), StyleClass::anime_realistic);
  EXPECT_EQ(style_class_for("Realistic"), StyleClass::anime_realistic);
  EXPECT_EQ(style_class_for("baroque"), StyleClass::baroque);
  EXPECT_EQ(style_class_for(""), StyleClass::none);
  EXPECT_FALSE(style_class_for("cubist").has_value());
}

TEST(Raster, RoundTripsDimensionsAndBytes) {
  testkit::Gen g(11);
  for (int t = 0; t < 50; ++t) {
    const auto w = static_cast<std::size_t>(g.integer(1, 20));
    const auto h = static_cast<std::size_t>(g.integer(1, 20));
    std::vector<std::uint8_t> px(w * h * 3);
    for (auto& b : px) b = static_cast<std::uint8_t>(g.integer(0, 255));
    const Raster r(w, h, px);
    EXPECT_EQ(r.width(), w);
    EXPECT_EQ(r.height(), h);
    EXPECT_TRUE(std::equal(px.begin(), px.end(), r.pixels().begin(), r.pixels().end()));
  }
}

TEST(Raster, RejectsBadBuffers) {
  EXPECT_THROW(Raster(0, 1, {}), Error);
  EXPECT_THROW(Raster(2, 2, std::vector<std::uint8_t>(11)), Error);
}

TEST(PromptText, RejectsBlank) {
  EXPECT_THROW(PromptText("   "), Error);
  EXPECT_EQ(PromptText(" x ").raw(), " x ");
}

TEST(PromptDecomposition, RejectsEmptyMorphemes) {
  EXPECT_THROW(PromptDecomposition(PromptText("a"), {}), Error);
  EXPECT_THROW(PromptDecomposition(PromptText("a"), {"a", " "}), Error);
}

TEST(AlignmentScore, RejectsNonFinite) {
  try {
    AlignmentScore s(std::nan(""));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::backend);
    EXPECT_NE(std::string(e.what()).find("invalid score"), std::string::npos);
  }
}

TEST(Formatting, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(1.0), "1");
  testkit::Gen g(3);
  for (int i = 0; i < 1000; ++i) {
    const double v = g.real(-1e6, 1e6);
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_FALSE(parse_double("1.5x").has_value());
  EXPECT_FALSE(parse_int("3.0").has_value());
}
