#include <gtest/gtest.h>

#include "stairward/stair_crop.hpp"
#include "support.hpp"

using namespace stairward;

namespace {

Raster indexed(std::size_t w, std::size_t h) {
  std::vector<std::uint8_t> px(w * h * 3);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      auto* p = &px[(y * w + x) * 3];
      p[0] = static_cast<std::uint8_t>(x);
      p[1] = static_cast<std::uint8_t>(y);
      p[2] = static_cast<std::uint8_t>((x * 7 + y * 13) % 251);
    }
  }
  return Raster(w, h, std::move(px));
}

PromptDecomposition decomposition(std::size_t k) {
  std::vector<std::string> m;
  for (std::size_t i = 0; i < k; ++i) m.push_back("m" + std::to_string(i));
  return PromptDecomposition(PromptText("p"), m);
}

}  // namespace

TEST(StairLengths, Examples) {
  EXPECT_EQ(stair_lengths(3).lengths, (std::vector<double>{0.5, 0.75, 1.0}));
  EXPECT_EQ(stair_lengths(2).lengths, (std::vector<double>{0.5, 1.0}));
  EXPECT_EQ(stair_lengths(1).lengths, (std::vector<double>{1.0}));
  EXPECT_THROW(stair_lengths(0), Error);
}

TEST(StairLengths, MatchClosedForm) {
  for (long long K = 2; K <= 32; ++K) {
    const auto l = stair_lengths(K).lengths;
    ASSERT_EQ(l.size(), static_cast<std::size_t>(K));
    for (long long k = 1; k <= K; ++k) {
      const double expected = 0.5 + static_cast<double>(k - 1) / (2.0 * static_cast<double>(K - 1));
      EXPECT_NEAR(l[static_cast<std::size_t>(k - 1)], expected, 1e-12);
    }
    EXPECT_EQ(l.back(), 1.0);
  }
}

TEST(CropCenterBox, HalfOfSquare) {
  const auto img = indexed(512, 512);
  const auto c = crop_center_box(img, 0.5);
  EXPECT_EQ(c.width(), 256u);
  EXPECT_EQ(c.height(), 256u);
  EXPECT_EQ(c.at(0, 0), img.at(128, 128));
}

TEST(CropCenterBox, FullLengthIsIdentity) {
  const auto img = indexed(37, 23);
  EXPECT_EQ(crop_center_box(img, 1.0), img);
}

TEST(CropCenterBox, OddRemainderOffsets) {
  const auto box = center_box(100, 60, 0.75);
  EXPECT_EQ(box.width, 75u);
  EXPECT_EQ(box.height, 45u);
  EXPECT_EQ(box.x, 12u);
  EXPECT_EQ(box.y, 7u);

  const auto img = indexed(100, 60);
  const auto c = crop_center_box(img, 0.75);
  for (std::size_t y = 0; y < c.height(); ++y) {
    for (std::size_t x = 0; x < c.width(); ++x) ASSERT_EQ(c.at(x, y), img.at(x + 12, y + 7));
  }
}

TEST(CropCenterBox, RejectsBadLength) {
  const auto img = indexed(4, 4);
  EXPECT_THROW(crop_center_box(img, 0.0), Error);
  EXPECT_THROW(crop_center_box(img, 1.5), Error);
}

TEST(StairsFor, Sizes) {
  const auto a = stairs_for(indexed(512, 512), decomposition(3));
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a[0].width(), 256u);
  EXPECT_EQ(a[1].width(), 384u);
  EXPECT_EQ(a[2].width(), 512u);

  const auto b = stairs_for(indexed(200, 100), decomposition(2));
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[0].width(), 100u);
  EXPECT_EQ(b[0].height(), 50u);
  EXPECT_EQ(b[1].width(), 200u);
  EXPECT_EQ(b[1].height(), 100u);

  const auto img = indexed(9, 5);
  const auto one = stairs_for(img, decomposition(1));
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0], img);
}

TEST(StairsProperty, NestedGrowingExactCrops) {
  testkit::Gen g(77);
  for (int t = 0; t < 300; ++t) {
    const auto w = static_cast<std::size_t>(g.integer(16, 160));
    const auto h = static_cast<std::size_t>(g.integer(16, 160));
    const auto K = static_cast<std::size_t>(g.integer(1, 8));
    const auto img = indexed(w, h);
    const auto lengths = stair_lengths(static_cast<long long>(K)).lengths;
    const auto stairs = stairs_for(img, decomposition(K));
    ASSERT_EQ(stairs.back(), img);
    for (std::size_t k = 0; k < K; ++k) {
      const auto box = center_box(w, h, lengths[k]);
      // Every pixel comes straight from the source at the box offset.
      for (std::size_t y = 0; y < box.height; y += 3) {
        for (std::size_t x = 0; x < box.width; x += 3) {
          ASSERT_EQ(stairs[k].at(x, y), img.at(box.x + x, box.y + y));
        }
      }
      if (k + 1 < K) {
        const auto next = center_box(w, h, lengths[k + 1]);
        ASSERT_LE(next.x, box.x);
        ASSERT_LE(next.y, box.y);
        ASSERT_GE(next.x + next.width, box.x + box.width);
        ASSERT_GE(next.y + next.height, box.y + box.height);
        ASSERT_LT(box.width * box.height, next.width * next.height);
      }
    }
  }
}
