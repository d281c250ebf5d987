#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mayakit/parallel.hpp"
#include "mayakit/preprocess.hpp"
#include "mayakit/raster.hpp"
#include "mayakit/rng.hpp"
#include "mayakit/scan.hpp"
#include "mayakit/tiff.hpp"

namespace mayakit {

// Synthetic desk-scale stand-in for the challenge dataset: a handful of tiles
// with lidar visualizations, per-class masks, Sentinel-1 acquisitions plus
// their derived statistics product, and a Sentinel-2 stack with synthetic
// clouds. Structures leave class-specific signatures in the lidar bands so a
// simple thresholding predictor can recover them.
struct FixtureOptions {
  std::uint32_t tiles = 32;
  std::uint32_t empty_tiles = 10;  // leading ids carry no structures
  bool with_s1 = true;
  bool with_s2 = true;
  bool with_raw_s1 = true;  // per-acquisition inputs for the statistics stage
};

struct FixtureTile {
  TileRecord record;
  std::vector<S1Acquisition> s1_acquisitions;
};

namespace fixture_detail {

inline void fill_rect(BinaryMask& mask, std::int64_t x0, std::int64_t y0, std::int64_t w,
                      std::int64_t h) {
  for (std::int64_t y = std::max<std::int64_t>(0, y0);
       y < std::min<std::int64_t>(mask.height, y0 + h); ++y)
    for (std::int64_t x = std::max<std::int64_t>(0, x0);
         x < std::min<std::int64_t>(mask.width, x0 + w); ++x)
      mask.set(std::uint32_t(x), std::uint32_t(y), true);
}

inline void fill_ellipse(BinaryMask& mask, double cx, double cy, double rx, double ry) {
  for (std::uint32_t y = 0; y < mask.height; ++y)
    for (std::uint32_t x = 0; x < mask.width; ++x) {
      const double dx = (x - cx) / rx;
      const double dy = (y - cy) / ry;
      if (dx * dx + dy * dy <= 1.0) mask.set(x, y, true);
    }
}

// Which classes a fixture tile carries, and how big its aguada is. Fractions
// are spread so the aguada fold bins {<0.05, <0.15, >=0.15} all appear.
struct TilePlan {
  bool building = false;
  bool platform = false;
  double aguada_fraction = 0.0;  // 0 = none
};

inline TilePlan plan_tile(std::uint64_t tile_id, const FixtureOptions& options) {
  TilePlan plan;
  if (tile_id < options.empty_tiles) return plan;
  plan.building = tile_id % 3 != 2;
  plan.platform = tile_id % 2 == 0;
  switch (tile_id % 32) {
    case 10: plan.aguada_fraction = 0.01; break;
    case 15: plan.aguada_fraction = 0.08; break;
    case 20: plan.aguada_fraction = 0.12; break;
    case 25: plan.aguada_fraction = 0.18; break;
    case 30: plan.aguada_fraction = 0.22; break;
    default: break;
  }
  return plan;
}

}  // namespace fixture_detail

inline FixtureTile make_fixture_tile(std::uint64_t tile_id, std::uint64_t seed,
                                     const FixtureOptions& options = {}) {
  using namespace fixture_detail;
  Rng rng = derive_rng(seed, tile_id);
  const TilePlan plan = plan_tile(tile_id, options);
  constexpr std::uint32_t side = 480;

  BinaryMask building = BinaryMask::make(side, side);
  BinaryMask platform = BinaryMask::make(side, side);
  BinaryMask aguada = BinaryMask::make(side, side);

  std::int64_t platform_x = 0, platform_y = 0, platform_w = 0, platform_h = 0;
  if (plan.platform) {
    const int count = 1 + int(rng.uniform(2));
    for (int i = 0; i < count; ++i) {
      const std::int64_t w = rng.uniform_int(70, 150);
      const std::int64_t h = rng.uniform_int(70, 150);
      const std::int64_t x = rng.uniform_int(10, side - 10 - w);
      const std::int64_t y = rng.uniform_int(10, side - 10 - h);
      fill_rect(platform, x, y, w, h);
      if (i == 0) {
        platform_x = x;
        platform_y = y;
        platform_w = w;
        platform_h = h;
      }
    }
  }
  if (plan.building) {
    const int count = 2 + int(rng.uniform(5));
    for (int i = 0; i < count; ++i) {
      const std::int64_t w = rng.uniform_int(12, 36);
      const std::int64_t h = rng.uniform_int(12, 36);
      std::int64_t x, y;
      if (plan.platform && rng.bernoulli(0.5) && platform_w > w + 8 && platform_h > h + 8) {
        // Buildings often sit on platforms.
        x = platform_x + rng.uniform_int(4, platform_w - w - 4);
        y = platform_y + rng.uniform_int(4, platform_h - h - 4);
      } else {
        x = rng.uniform_int(4, side - 4 - w);
        y = rng.uniform_int(4, side - 4 - h);
      }
      fill_rect(building, x, y, w, h);
    }
  }
  if (plan.aguada_fraction > 0.0) {
    const double r = side * std::sqrt(plan.aguada_fraction / 3.14159265358979323846);
    const double cx = rng.uniform_real(r + 4.0, side - r - 4.0);
    const double cy = rng.uniform_real(r + 4.0, side - r - 4.0);
    fill_ellipse(aguada, cx, cy, r, r);
  }

  // Lidar bands: each class depresses (or raises, for slope) one band.
  Raster als = Raster::make(side, side, 3, SampleType::u8);
  for (std::uint32_t y = 0; y < side; ++y) {
    for (std::uint32_t x = 0; x < side; ++x) {
      const bool b = building.at(x, y);
      const bool p = platform.at(x, y);
      const bool a = aguada.at(x, y);
      const double noise0 = rng.uniform_real(-6.0, 6.0);
      const double noise1 = rng.uniform_real(-6.0, 6.0);
      const double noise2 = rng.uniform_real(-6.0, 6.0);
      const double v0 = 200.0 - 90.0 * b - 35.0 * p - 15.0 * a + noise0;
      const double v1 = 185.0 - 25.0 * b - 75.0 * p - 10.0 * a + noise1;
      const double v2 = 60.0 + 15.0 * b + 30.0 * p + 110.0 * a + noise2;
      als.u8(x, y, 0) = static_cast<std::uint8_t>(std::clamp(v0, 0.0, 255.0));
      als.u8(x, y, 1) = static_cast<std::uint8_t>(std::clamp(v1, 0.0, 255.0));
      als.u8(x, y, 2) = static_cast<std::uint8_t>(std::clamp(v2, 0.0, 255.0));
    }
  }

  FixtureTile tile;
  tile.record.tile_id = tile_id;
  tile.record.rasters[ModalityKind::als] = std::move(als);
  tile.record.rasters[ModalityKind::mask_building] = mask_encode(building);
  tile.record.rasters[ModalityKind::mask_platform] = mask_encode(platform);
  tile.record.rasters[ModalityKind::mask_aguada] = mask_encode(aguada);

  // Structure density per 20x20 lidar block drives the satellite signal.
  constexpr std::uint32_t satellite_side = 24;
  std::vector<double> density(satellite_side * satellite_side, 0.0);
  for (std::uint32_t cy = 0; cy < satellite_side; ++cy)
    for (std::uint32_t cx = 0; cx < satellite_side; ++cx) {
      int cover = 0;
      for (std::uint32_t y = cy * 20; y < (cy + 1) * 20; ++y)
        for (std::uint32_t x = cx * 20; x < (cx + 1) * 20; ++x)
          if (building.at(x, y) || platform.at(x, y) || aguada.at(x, y)) ++cover;
      density[cy * satellite_side + cx] = cover / 400.0;
    }

  if (options.with_s1 || options.with_raw_s1) {
    for (int orbit = 0; orbit < 2; ++orbit) {
      for (int pol = 0; pol < 2; ++pol) {
        for (int year = S1Layout::first_year; year <= S1Layout::last_year; ++year) {
          for (int date = 0; date < 2; ++date) {
            S1Acquisition acq;
            acq.orbit = static_cast<Orbit>(orbit);
            acq.polarization = static_cast<Polarization>(pol);
            acq.year = year;
            acq.image = Raster::make(satellite_side, satellite_side, 1, SampleType::f32);
            for (std::uint32_t y = 0; y < satellite_side; ++y)
              for (std::uint32_t x = 0; x < satellite_side; ++x) {
                const double db = -16.0 + 2.0 * pol - 0.5 * orbit +
                                  5.0 * density[y * satellite_side + x] +
                                  rng.uniform_real(-1.5, 1.5);
                acq.image.set_f32(x, y, 0, static_cast<float>(std::pow(10.0, db / 10.0)));
              }
            tile.s1_acquisitions.push_back(std::move(acq));
          }
        }
      }
    }
    if (options.with_s1)
      tile.record.rasters[ModalityKind::s1] = build_s1_tile(tile.s1_acquisitions);
  }

  if (options.with_s2) {
    Raster s2 = Raster::make(satellite_side, satellite_side, S2Layout::total_bands, SampleType::f32);
    for (int d = 0; d < S2Layout::dates; ++d) {
      // One roaming cloud disc per date, absent on some dates.
      const bool has_cloud = d % 3 != 0;
      const double cloud_x = rng.uniform_real(0.0, satellite_side);
      const double cloud_y = rng.uniform_real(0.0, satellite_side);
      const double cloud_r = rng.uniform_real(3.0, 8.0);
      for (std::uint32_t y = 0; y < satellite_side; ++y)
        for (std::uint32_t x = 0; x < satellite_side; ++x) {
          const double dx = x - cloud_x, dy = y - cloud_y;
          const bool cloudy = has_cloud && dx * dx + dy * dy <= cloud_r * cloud_r;
          for (int b = 0; b < S2Layout::spectral_bands; ++b) {
            double v;
            if (cloudy) {
              v = 0.85 + rng.uniform_real(0.0, 0.1);
            } else {
              v = 0.08 + 0.015 * b + 0.25 * density[y * satellite_side + x] +
                  rng.uniform_real(-0.02, 0.02);
            }
            s2.set_f32(x, y, std::uint32_t(d * S2Layout::bands_per_date + b),
                       static_cast<float>(std::clamp(v, 0.0, 1.0)));
          }
          s2.set_f32(x, y, std::uint32_t(d * S2Layout::bands_per_date + S2Layout::cloud_slot),
                     cloudy ? 1.0f : 0.0f);
        }
    }
    tile.record.rasters[ModalityKind::s2] = std::move(s2);
  }
  return tile;
}

inline std::string s1_acquisition_filename(std::uint64_t tile_id, const S1Acquisition& acq,
                                           int sequence) {
  return "tile_" + std::to_string(tile_id) + "_s1acq_" +
         (acq.orbit == Orbit::ascending ? "asc" : "desc") + "_" +
         (acq.polarization == Polarization::vv ? "vv" : "vh") + "_" +
         std::to_string(acq.year) + "_" + std::to_string(sequence) + ".tif";
}

// Writes the whole fixture dataset into one directory using the standard
// naming convention. Raw per-acquisition Sentinel-1 files land in an s1_raw/
// subdirectory so the top level stays a clean modality layout.
inline void write_fixture_dataset(const std::filesystem::path& directory, std::uint64_t seed,
                                  const FixtureOptions& options = {}, unsigned jobs = 1) {
  std::filesystem::create_directories(directory);
  if (options.with_raw_s1) std::filesystem::create_directories(directory / "s1_raw");
  parallel_for(options.tiles, jobs, [&](std::size_t i) {
    const FixtureTile tile = make_fixture_tile(i, seed, options);
    for (const auto& [kind, raster] : tile.record.rasters)
      write_tiff_file(directory / NamingConvention::filename(tile.record.tile_id, kind), raster);
    if (options.with_raw_s1) {
      int sequence = 0;
      for (const auto& acq : tile.s1_acquisitions)
        write_tiff_file(
            directory / "s1_raw" / s1_acquisition_filename(tile.record.tile_id, acq, sequence++),
            acq.image);
    }
  });
}

}  // namespace mayakit
