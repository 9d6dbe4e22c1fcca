#pragma once

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ans/errors.hpp"
#include "ans/grid.hpp"
#include "ans/io.hpp"
#include "ans/mapping.hpp"
#include "ans/planner.hpp"
#include "ans/world.hpp"

namespace ans {

/// 8-bit grayscale image; row 0 is the top of the picture.
struct Gray8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> px;
};

struct Rgb8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> px;  // RGB triples

  void set(int x, int y, std::array<std::uint8_t, 3> c) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    std::copy(c.begin(), c.end(), px.begin() + (static_cast<std::ptrdiff_t>(y) * width + x) * 3);
  }
};

/// Binary PGM (P5).
inline std::string pgm_bytes(const Gray8& img) {
  std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.px.data()), img.px.size());
  return out;
}

// Grid rows are flipped so that +y points up.
inline Gray8 channel_image(const ChannelGrid& g, int ch) {
  Gray8 img{g.cols(), g.rows(), {}};
  img.px.resize(static_cast<std::size_t>(g.rows()) * g.cols());
  for (int r = 0; r < g.rows(); ++r) {
    for (int c = 0; c < g.cols(); ++c) {
      const float v = std::clamp(g.at(ch, r, c), 0.0F, 1.0F);
      img.px[static_cast<std::size_t>(g.rows() - 1 - r) * g.cols() + c] =
          static_cast<std::uint8_t>(std::lround(v * 255.0F));
    }
  }
  return img;
}

/// Travel times scaled to 0..254; unreachable cells are 255.
inline Gray8 field_image(const DistanceField& f) {
  Gray8 img{f.T.cols(), f.T.rows(), {}};
  img.px.assign(static_cast<std::size_t>(img.width) * img.height, 255);
  double tmax = 0.0;
  for (double t : f.T.values()) {
    if (t < kInf) tmax = std::max(tmax, t);
  }
  for (int r = 0; r < f.T.rows(); ++r) {
    for (int c = 0; c < f.T.cols(); ++c) {
      const double t = f.T(r, c);
      if (!(t < kInf)) continue;
      img.px[static_cast<std::size_t>(f.T.rows() - 1 - r) * img.width + c] =
          static_cast<std::uint8_t>(tmax > 0.0 ? std::lround(254.0 * t / tmax) : 0);
    }
  }
  return img;
}

inline void write_pgm(const Gray8& img, const std::string& path) {
  write_file_atomic(path, pgm_bytes(img));
}

inline void write_png(const Rgb8& img, const std::string& path) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  const std::string tmp = path + ".tmp";
  std::FILE* fp = std::fopen(tmp.c_str(), "wb");
  if (!fp) throw Error("cannot write '" + tmp + "'");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    std::remove(tmp.c_str());
    throw Error("png encoding failed for '" + path + "'");
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height),
               8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(img.px.data() + static_cast<std::size_t>(y) * img.width * 3));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fclose(fp) != 0) throw Error("cannot finish '" + tmp + "'");
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw Error("cannot rename onto '" + path + "'");
}

/// Map render: unexplored grey, explored white, obstacles dark, the
/// estimated trajectory in blue and the goal in red. `view` selects the map
/// window; +y points up.
inline Rgb8 composite_image(const SpatialMap& map, Rect view,
                            const std::vector<Cell>& trajectory,
                            std::optional<Cell> goal = std::nullopt) {
  view = intersect(view, map.grid().bounds());
  if (view.empty()) view = map.grid().bounds();
  Rgb8 img{view.cols, view.rows, {}};
  img.px.assign(static_cast<std::size_t>(view.rows) * view.cols * 3, 0);
  auto to_xy = [&](Cell c) { return std::pair{c.col - view.col0, view.row_end() - 1 - c.row}; };
  for (int r = view.row0; r < view.row_end(); ++r) {
    for (int c = view.col0; c < view.col_end(); ++c) {
      const float o = map.obstacle(r, c);
      const float e = map.explored(r, c);
      std::uint8_t v = 150;
      if (e > 0.5F) v = 245;
      if (o >= 0.5F) v = 40;
      const auto [x, y] = to_xy({r, c});
      img.set(x, y, {v, v, v});
    }
  }
  for (const Cell& c : trajectory) {
    const auto [x, y] = to_xy(c);
    img.set(x, y, {30, 90, 230});
  }
  if (goal) {
    const auto [gx, gy] = to_xy(*goal);
    for (int dy = -2; dy <= 2; ++dy) {
      for (int dx = -2; dx <= 2; ++dx) img.set(gx + dx, gy + dy, {220, 30, 30});
    }
  }
  return img;
}

/// Ground-truth world: free cells white, obstacles dark, the start cell
/// (if any) in red. +y points up.
inline Rgb8 world_image(const GridWorld& world) {
  Rgb8 img{world.cols(), world.rows(), {}};
  img.px.assign(static_cast<std::size_t>(world.rows()) * world.cols() * 3, 0);
  for (int r = 0; r < world.rows(); ++r) {
    for (int c = 0; c < world.cols(); ++c) {
      const std::uint8_t v = world.occupancy()(r, c) ? 40 : 245;
      img.set(c, world.rows() - 1 - r, {v, v, v});
    }
  }
  if (world.start()) {
    const Cell s = world.cell_of(*world.start());
    for (int dy = -2; dy <= 2; ++dy) {
      for (int dx = -2; dx <= 2; ++dx) img.set(s.col + dx, world.rows() - 1 - s.row + dy, {220, 30, 30});
    }
  }
  return img;
}

}  // namespace ans
