#include <gtest/gtest.h>
#include <png.h>

#include <filesystem>

#include "ans/render.hpp"

using namespace ans;

namespace {

// Decodes a PNG into 8-bit RGB with libpng's simplified reader.
Rgb8 read_png(const std::string& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) return {};
  image.format = PNG_FORMAT_RGB;
  Rgb8 out{static_cast<int>(image.width), static_cast<int>(image.height), {}};
  out.px.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.px.data(), 0, nullptr)) return {};
  return out;
}

std::array<std::uint8_t, 3> pixel(const Rgb8& img, int x, int y) {
  const std::size_t i = (static_cast<std::size_t>(y) * img.width + x) * 3;
  return {img.px[i], img.px[i + 1], img.px[i + 2]};
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("ans_render_test_" + name)).string();
}

}  // namespace

TEST(Png, RoundTripsPixels) {
  Rgb8 img{7, 5, std::vector<std::uint8_t>(7 * 5 * 3, 0)};
  img.set(0, 0, {255, 0, 0});
  img.set(6, 4, {1, 2, 3});
  img.set(3, 2, {10, 200, 30});
  img.set(9, 9, {9, 9, 9});  // ignored
  const std::string path = temp_path("roundtrip.png");
  write_png(img, path);
  const Rgb8 back = read_png(path);
  ASSERT_EQ(back.width, 7);
  ASSERT_EQ(back.height, 5);
  EXPECT_EQ(back.px, img.px);
  EXPECT_FALSE(std::filesystem::exists(path + ".tmp"));
  std::filesystem::remove(path);
}

TEST(WorldImage, FlipsRowsAndMarksStart) {
  Occupancy o(10, 12, 1);
  for (int r = 1; r < 9; ++r) {
    for (int c = 1; c < 11; ++c) o(r, c) = 0;
  }
  o(2, 3) = 1;
  GridWorld w(std::move(o));
  Rgb8 img = world_image(w);
  ASSERT_EQ(img.width, 12);
  ASSERT_EQ(img.height, 10);
  // Grid row 2 is image row 10 - 1 - 2.
  EXPECT_EQ(pixel(img, 3, 7), (std::array<std::uint8_t, 3>{40, 40, 40}));
  EXPECT_EQ(pixel(img, 4, 7), (std::array<std::uint8_t, 3>{245, 245, 245}));
  w.set_start(w.cell_center({5, 6}, 0.0));
  img = world_image(w);
  EXPECT_EQ(pixel(img, 6, 4), (std::array<std::uint8_t, 3>{220, 30, 30}));
}

TEST(CompositeImage, LayersAndGoal) {
  SpatialMap m(40);
  m.grid().at(kExploredChannel, 10, 10) = 1.0F;
  m.grid().at(kExploredChannel, 11, 10) = 1.0F;
  m.grid().at(kObstacleChannel, 11, 10) = 1.0F;
  const Rgb8 img = composite_image(m, {0, 0, 40, 40}, {{20, 20}}, Cell{30, 5});
  EXPECT_EQ(pixel(img, 10, 39 - 10), (std::array<std::uint8_t, 3>{245, 245, 245}));
  EXPECT_EQ(pixel(img, 10, 39 - 11), (std::array<std::uint8_t, 3>{40, 40, 40}));
  EXPECT_EQ(pixel(img, 0, 0), (std::array<std::uint8_t, 3>{150, 150, 150}));
  EXPECT_EQ(pixel(img, 20, 39 - 20), (std::array<std::uint8_t, 3>{30, 90, 230}));
  EXPECT_EQ(pixel(img, 5, 39 - 30), (std::array<std::uint8_t, 3>{220, 30, 30}));
}

TEST(Pgm, HeaderAndFlip) {
  ChannelGrid g(2, 2, 3);
  g.at(0, 0, 0) = 1.0F;
  const Gray8 img = channel_image(g, 0);
  const std::string bytes = pgm_bytes(img);
  EXPECT_EQ(bytes.substr(0, 11), "P5\n3 2\n255\n");
  // Row 0 of the grid is the bottom row of the picture.
  EXPECT_EQ(static_cast<unsigned char>(bytes[11 + 3]), 255);
  EXPECT_EQ(static_cast<unsigned char>(bytes[11]), 0);
}
