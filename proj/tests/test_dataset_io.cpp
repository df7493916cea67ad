#include <fstream>
#include <random>

#include <gtest/gtest.h>
#include <opencv2/imgcodecs.hpp>

#include "test_support.hpp"

using namespace sslg;
using sslg::fixtures::TempDir;

namespace {

DepthImage ramp_depth(int w, int h, float max_range) {
  DepthImage d(w, h, max_range);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) d.set(x, y, 0.5f + 0.001f * static_cast<float>((x + 7 * y) % 9000));
  return d;
}

RgbImage pattern_rgb(int w, int h) {
  RgbImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      img(x, y) = {static_cast<std::uint8_t>(x), static_cast<std::uint8_t>(y),
                   static_cast<std::uint8_t>(x ^ y)};
  return img;
}

}  // namespace

TEST(DepthDecode, OutOfRangeAndZeroAreInvalid) {
  Image<std::uint16_t> raw(3, 1);
  raw(0, 0) = 12000;
  raw(1, 0) = 0;
  raw(2, 0) = 5000;
  const DepthImage d = depth_from_millimeters(raw, 10.0f);
  EXPECT_FALSE(d.valid(0, 0));
  EXPECT_FALSE(d.valid(1, 0));
  ASSERT_TRUE(d.valid(2, 0));
  EXPECT_FLOAT_EQ(d(2, 0), 5.0f);
}

TEST(DepthDecode, RangeCapIsInclusive) {
  Image<std::uint16_t> raw(2, 1);
  raw(0, 0) = 10000;
  raw(1, 0) = 10001;
  const DepthImage d = depth_from_millimeters(raw, 10.0f);
  EXPECT_TRUE(d.valid(0, 0));
  EXPECT_FALSE(d.valid(1, 0));
}

TEST(RgbdPair, FullResolutionRoundTrip) {
  TempDir dir;
  const RgbImage rgb = pattern_rgb(1280, 720);
  const DepthImage depth = ramp_depth(1280, 720, 10.0f);
  write_rgb(rgb, dir / "rgb.png");
  write_depth(depth, dir / "depth.png");
  const auto [rgb2, depth2] = load_rgbd_pair(dir / "rgb.png", dir / "depth.png", 10.0f);
  EXPECT_EQ(rgb2, rgb);
  ASSERT_EQ(depth2.width(), 1280);
  ASSERT_EQ(depth2.height(), 720);
  EXPECT_EQ(depth2.valid_count(), depth.valid_count());
  for (int y = 0; y < 720; y += 37)
    for (int x = 0; x < 1280; x += 41) EXPECT_NEAR(depth2(x, y), depth(x, y), 5e-4);
}

TEST(RgbdPair, DimensionMismatchNamesBothFiles) {
  TempDir dir;
  write_rgb(pattern_rgb(32, 16), dir / "a.png");
  write_depth(ramp_depth(16, 16, 10.0f), dir / "b.png");
  try {
    load_rgbd_pair(dir / "a.png", dir / "b.png", 10.0f);
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("a.png"), std::string::npos);
    EXPECT_NE(msg.find("b.png"), std::string::npos);
  }
}

TEST(RgbdPair, EightBitDepthIsRejected) {
  TempDir dir;
  write_gray8(Image<std::uint8_t>(8, 8, 3), dir / "depth8.png");
  try {
    read_depth(dir / "depth8.png", 10.0f);
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("bit depth"), std::string::npos);
  }
}

TEST(RgbdPair, UnreadableFileThrows) {
  TempDir dir;
  std::ofstream(dir / "junk.png") << "not a png";
  EXPECT_THROW(read_rgb(dir / "junk.png"), IoError);
  EXPECT_THROW(read_depth(dir / "missing.png", 10.0f), IoError);
}

TEST(NormalizeDepth, ReferenceValues) {
  DepthImage d(4, 1, 10.0f);
  d.set(0, 0, 5.0f);
  d.set(1, 0, 10.0f);
  d.set(2, 0, 0.001f);
  const auto n = normalize_depth(d);
  EXPECT_EQ(n(0, 0), 128);
  EXPECT_EQ(n(1, 0), 255);
  EXPECT_EQ(n(2, 0), 1);
  EXPECT_EQ(n(3, 0), 0);
}

TEST(NormalizeDepth, AllInvalidGivesAllZero) {
  const DepthImage d(16, 9, 10.0f);
  const auto n = normalize_depth(d);
  EXPECT_EQ(count_nonzero(n), 0u);
}

TEST(NormalizeDepth, MonotoneAndInvalidStaysZero) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<float> dist(-1.0f, 12.0f);
  DepthImage d(200, 50, 10.0f);
  for (int y = 0; y < 50; ++y)
    for (int x = 0; x < 200; ++x) d.set(x, y, dist(rng));
  const auto n = normalize_depth(d);
  for (int i = 0; i < 2000; ++i) {
    const int x1 = rng() % 200, y1 = rng() % 50, x2 = rng() % 200, y2 = rng() % 50;
    if (!d.valid(x1, y1)) EXPECT_EQ(n(x1, y1), 0);
    if (d.valid(x1, y1) && d.valid(x2, y2) && d(x1, y1) <= d(x2, y2)) {
      EXPECT_LE(n(x1, y1), n(x2, y2));
      EXPECT_GE(n(x1, y1), 1);
    }
  }
}

TEST(NormalizeDepth, FileRoundTripPreservesZeros) {
  TempDir dir;
  DepthImage d = ramp_depth(64, 32, 10.0f);
  for (int x = 0; x < 64; x += 3) d.invalidate(x, 5);
  const auto n = normalize_depth(d);
  write_gray8(n, dir / "n.png");
  EXPECT_EQ(read_gray8(dir / "n.png"), n);
}

TEST(LabelIo, RoundTripRandomAllZeroAndCheckerboard) {
  TempDir dir;
  std::mt19937 rng(3);
  LabelImage random(97, 41), zeros(13, 7, 0), checker(16, 16);
  for (auto& v : random.pixels()) v = static_cast<std::uint8_t>(rng() % 3);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) checker(x, y) = static_cast<std::uint8_t>((x + y) % 2 ? 2 : 1);
  for (const auto* img : {&random, &zeros, &checker}) {
    write_label(*img, dir / "l.png");
    EXPECT_EQ(read_label(dir / "l.png"), *img);
  }
}

TEST(LabelIo, OutOfRangeClassValueIsRejected) {
  TempDir dir;
  write_gray8(Image<std::uint8_t>(4, 4, 3), dir / "bad.png");
  EXPECT_THROW(read_label(dir / "bad.png"), IoError);
}

TEST(LabelIo, UnwritablePathThrows) {
  TempDir dir;
  std::ofstream(dir / "file") << "x";
  EXPECT_THROW(write_label(LabelImage(2, 2), dir / "file" / "sub" / "l.png"), Error);
}

TEST(LabelIo, ColorizePalette) {
  LabelImage l(3, 1);
  l(0, 0) = 0;
  l(1, 0) = 1;
  l(2, 0) = 2;
  const auto c = colorize_label(l);
  EXPECT_EQ(c(0, 0), (Rgb{0, 0, 255}));
  EXPECT_EQ(c(1, 0), (Rgb{0, 255, 0}));
  EXPECT_EQ(c(2, 0), (Rgb{255, 0, 0}));
}

TEST(FrameListing, PairsByBasenameAndReportsOrphans) {
  TempDir dir;
  const RgbImage rgb = pattern_rgb(8, 8);
  const DepthImage depth = ramp_depth(8, 8, 10.0f);
  for (const char* n : {"b", "a", "c"}) write_rgb(rgb, dir / "rgb" / (std::string(n) + ".png"));
  for (const char* n : {"a", "b", "d"}) write_depth(depth, dir / "depth" / (std::string(n) + ".png"));
  const auto listing = list_frames(dir.path());
  ASSERT_EQ(listing.frames.size(), 2u);
  EXPECT_EQ(listing.frames[0].name, "a");
  EXPECT_EQ(listing.frames[1].name, "b");
  EXPECT_EQ(listing.orphans, (std::vector<std::string>{"c", "d"}));
}

TEST(FrameListing, MissingSubdirectoryThrows) {
  TempDir dir;
  fs::create_directories(dir / "rgb");
  EXPECT_THROW(list_frames(dir.path()), IoError);
}
