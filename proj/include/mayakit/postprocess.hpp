#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "mayakit/error.hpp"
#include "mayakit/raster.hpp"

namespace mayakit {

// Quantized thresholding. Probabilities are compared at the 8-bit level the
// challenge outputs were stored at: a pixel passes iff round(255*p) >=
// round(255*t). At t = 0.50 the cut sits at level 128, i.e. a pixel needs a
// stored confidence above 127/255 ~ 49.8%.
inline BinaryMask binarize(const ProbMap& prob, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw Error(ErrorCode::invalid_argument, "threshold must lie in [0,1]");
  const int cut = static_cast<int>(std::floor(255.0 * threshold + 0.5));
  BinaryMask mask = BinaryMask::make(prob.width, prob.height);
  for (std::size_t i = 0; i < prob.values.size(); ++i) {
    const int level = static_cast<int>(std::floor(255.0 * prob.values[i] + 0.5));
    mask.bits[i] = level >= cut ? 1 : 0;
  }
  return mask;
}

struct PixelBBox {
  std::uint32_t x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // inclusive
};

struct Region {
  std::vector<std::uint32_t> pixels;  // linear indices, ascending
  std::uint64_t area = 0;
  PixelBBox bbox;
  bool touches_boundary = false;
};

// 8-connected labeling of true pixels. Regions come back ordered by their
// first pixel in row-major order.
inline std::vector<Region> connected_components(const BinaryMask& mask) {
  const std::uint32_t w = mask.width;
  const std::uint32_t h = mask.height;
  std::vector<Region> regions;
  std::vector<std::uint8_t> seen(mask.bits.size(), 0);
  std::vector<std::uint32_t> stack;
  for (std::uint32_t y = 0; y < h; ++y) {
    for (std::uint32_t x = 0; x < w; ++x) {
      const std::uint32_t start = y * w + x;
      if (mask.bits[start] == 0 || seen[start]) continue;
      Region region;
      region.bbox = {x, y, x, y};
      seen[start] = 1;
      stack.assign(1, start);
      while (!stack.empty()) {
        const std::uint32_t idx = stack.back();
        stack.pop_back();
        region.pixels.push_back(idx);
        const std::uint32_t px = idx % w;
        const std::uint32_t py = idx / w;
        region.bbox.x0 = std::min(region.bbox.x0, px);
        region.bbox.y0 = std::min(region.bbox.y0, py);
        region.bbox.x1 = std::max(region.bbox.x1, px);
        region.bbox.y1 = std::max(region.bbox.y1, py);
        if (px == 0 || py == 0 || px == w - 1 || py == h - 1) region.touches_boundary = true;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const std::int64_t nx = std::int64_t(px) + dx;
            const std::int64_t ny = std::int64_t(py) + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const std::uint32_t nidx = std::uint32_t(ny) * w + std::uint32_t(nx);
            if (mask.bits[nidx] != 0 && !seen[nidx]) {
              seen[nidx] = 1;
              stack.push_back(nidx);
            }
          }
        }
      }
      std::sort(region.pixels.begin(), region.pixels.end());
      region.area = region.pixels.size();
      regions.push_back(std::move(region));
    }
  }
  return regions;
}

// Deletes regions smaller than min_area; regions touching the image boundary
// are judged against min_area_boundary instead.
inline BinaryMask blob_filter(const BinaryMask& mask, std::uint64_t min_area,
                              std::uint64_t min_area_boundary) {
  BinaryMask out = BinaryMask::make(mask.width, mask.height);
  for (const Region& region : connected_components(mask)) {
    const std::uint64_t cut = region.touches_boundary ? min_area_boundary : min_area;
    if (region.area < cut) continue;
    for (auto idx : region.pixels) out.bits[idx] = 1;
  }
  return out;
}

// Background components (4-connected complement) not reachable from the image
// boundary become foreground.
inline BinaryMask fill_holes(const BinaryMask& mask) {
  const std::uint32_t w = mask.width;
  const std::uint32_t h = mask.height;
  std::vector<std::uint8_t> outside(mask.bits.size(), 0);
  std::vector<std::uint32_t> stack;
  auto push = [&](std::uint32_t x, std::uint32_t y) {
    const std::uint32_t idx = y * w + x;
    if (mask.bits[idx] == 0 && !outside[idx]) {
      outside[idx] = 1;
      stack.push_back(idx);
    }
  };
  for (std::uint32_t x = 0; x < w; ++x) {
    push(x, 0);
    push(x, h - 1);
  }
  for (std::uint32_t y = 0; y < h; ++y) {
    push(0, y);
    push(w - 1, y);
  }
  while (!stack.empty()) {
    const std::uint32_t idx = stack.back();
    stack.pop_back();
    const std::uint32_t x = idx % w;
    const std::uint32_t y = idx / w;
    if (x > 0) push(x - 1, y);
    if (x + 1 < w) push(x + 1, y);
    if (y > 0) push(x, y - 1);
    if (y + 1 < h) push(x, y + 1);
  }
  BinaryMask out = mask;
  for (std::size_t i = 0; i < out.bits.size(); ++i)
    if (out.bits[i] == 0 && !outside[i]) out.bits[i] = 1;
  return out;
}

struct PostprocessConfig {
  double probability_threshold = 0.5;
  std::uint64_t min_area = 0;
  std::uint64_t min_area_boundary = 0;
  bool fill_holes = false;
};

inline BinaryMask postprocess_pipeline(const ProbMap& prob, const PostprocessConfig& config) {
  BinaryMask mask = binarize(prob, config.probability_threshold);
  mask = blob_filter(mask, config.min_area, config.min_area_boundary);
  if (config.fill_holes) mask = fill_holes(mask);
  return mask;
}

}  // namespace mayakit
