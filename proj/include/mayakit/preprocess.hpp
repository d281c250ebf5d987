#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mayakit/error.hpp"
#include "mayakit/raster.hpp"

namespace mayakit {

// ---------------------------------------------------------------------------
// Sentinel-1 backscatter normalization
// ---------------------------------------------------------------------------

// Affine map from the [-30, 5] dB window onto [0, 1]; out-of-window values
// clamp to the boundaries.
inline double unit_from_db(double db) {
  const double clamped = std::clamp(db, -30.0, 5.0);
  return (clamped + 30.0) / 35.0;
}

// Linear sigma0 entry point; sigma0 = 0 maps through -inf dB to 0.
inline double sigma0_to_unit(double sigma0_linear) {
  if (sigma0_linear < 0.0)
    throw Error(ErrorCode::invalid_argument, "sigma0 must be non-negative");
  if (sigma0_linear == 0.0) return 0.0;
  return unit_from_db(10.0 * std::log10(sigma0_linear));
}

// ---------------------------------------------------------------------------
// Scalar statistics
// ---------------------------------------------------------------------------

// Inclusive linear-interpolation quantile over a sorted series:
// rank h = (n-1)*q, interpolate between floor(h) and ceil(h).
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::empty_series, "quantile of empty series");
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(h));
  if (lo == hi) return sorted[lo];
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

struct TemporalStats {
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;  // population (divide by n)
  double cv = 0.0;      // stddev/mean, 0 when mean ~ 0
  double p5 = 0.0;
  double p95 = 0.0;

  std::array<double, 6> as_array() const { return {mean, median, stddev, cv, p5, p95}; }
};

inline TemporalStats temporal_stats(std::span<const double> samples) {
  if (samples.empty()) throw Error(ErrorCode::empty_series, "temporal_stats of empty series");
  const std::size_t n = samples.size();
  TemporalStats s;
  double sum = 0.0;
  for (double v : samples) sum += v;
  s.mean = sum / static_cast<double>(n);
  double sq = 0.0;
  for (double v : samples) {
    const double d = v - s.mean;
    sq += d * d;
  }
  s.stddev = std::sqrt(sq / static_cast<double>(n));
  s.cv = s.mean < 1e-12 ? 0.0 : s.stddev / s.mean;
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  s.median = quantile_sorted(sorted, 0.5);
  s.p5 = quantile_sorted(sorted, 0.05);
  s.p95 = quantile_sorted(sorted, 0.95);
  return s;
}

// ---------------------------------------------------------------------------
// Sentinel-1 tile assembly
// ---------------------------------------------------------------------------

enum class Polarization { vv = 0, vh = 1 };
enum class Orbit { ascending = 0, descending = 1 };

// Band layout of the 120-band product. Statistics vary fastest, then
// polarization, then orbit, then period (four years plus the pooled span).
struct S1Layout {
  static constexpr int statistics = 6;  // mean, median, std, cv, p5, p95
  static constexpr int polarizations = 2;
  static constexpr int orbits = 2;
  static constexpr int periods = 5;
  static constexpr int first_year = 2017;
  static constexpr int last_year = 2020;
  static constexpr int total_bands = statistics * polarizations * orbits * periods;  // 120

  static constexpr int band_index(int period, Orbit orbit, Polarization pol, int statistic) {
    return ((period * orbits + static_cast<int>(orbit)) * polarizations +
            static_cast<int>(pol)) * statistics + statistic;
  }
};
static_assert(S1Layout::total_bands == 120);

struct S1Acquisition {
  Orbit orbit = Orbit::ascending;
  Polarization polarization = Polarization::vv;
  int year = S1Layout::first_year;
  Raster image;  // 24x24, 1 band, float32
};

enum class S1Input { sigma0_linear, unit_interval };

// Builds the 120-band statistics tile from dated acquisitions. Period indices
// 0..3 cover the individual years; period 4 pools every acquisition.
inline Raster build_s1_tile(const std::vector<S1Acquisition>& acquisitions,
                            S1Input input = S1Input::sigma0_linear) {
  if (acquisitions.empty())
    throw Error(ErrorCode::missing_group, "no acquisitions supplied");
  const std::uint32_t w = acquisitions.front().image.width;
  const std::uint32_t h = acquisitions.front().image.height;
  for (const auto& acq : acquisitions) {
    if (acq.image.bands != 1 || acq.image.sample_type != SampleType::f32 ||
        acq.image.width != w || acq.image.height != h)
      throw Error(ErrorCode::shape_mismatch, "acquisitions must be single-band float32 of equal size");
    if (acq.year < S1Layout::first_year || acq.year > S1Layout::last_year)
      throw Error(ErrorCode::invalid_argument,
                  "acquisition year " + std::to_string(acq.year) + " outside 2017-2020");
  }

  Raster out = Raster::make(w, h, S1Layout::total_bands, SampleType::f32);
  std::vector<double> series;
  for (int period = 0; period < S1Layout::periods; ++period) {
    for (int orbit = 0; orbit < S1Layout::orbits; ++orbit) {
      for (int pol = 0; pol < S1Layout::polarizations; ++pol) {
        std::vector<const Raster*> group;
        for (const auto& acq : acquisitions) {
          if (static_cast<int>(acq.orbit) != orbit ||
              static_cast<int>(acq.polarization) != pol)
            continue;
          if (period < 4 && acq.year != S1Layout::first_year + period) continue;
          group.push_back(&acq.image);
        }
        if (group.empty())
          throw Error(ErrorCode::missing_group,
                      "no acquisitions for period " + std::to_string(period) + ", orbit " +
                          std::to_string(orbit) + ", polarization " + std::to_string(pol));
        const int base = S1Layout::band_index(period, static_cast<Orbit>(orbit),
                                              static_cast<Polarization>(pol), 0);
        for (std::uint32_t y = 0; y < h; ++y) {
          for (std::uint32_t x = 0; x < w; ++x) {
            series.clear();
            for (const Raster* img : group) {
              const double v = img->f32(x, y);
              series.push_back(input == S1Input::sigma0_linear ? sigma0_to_unit(v) : v);
            }
            const auto stats = temporal_stats(series).as_array();
            for (int s = 0; s < S1Layout::statistics; ++s)
              out.set_f32(x, y, static_cast<std::uint32_t>(base + s),
                          static_cast<float>(stats[s]));
          }
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sentinel-2 composites
// ---------------------------------------------------------------------------

// Per-date band order of the 221-band stack: twelve spectral bands followed
// by the cloud mask (nonzero = cloudy).
struct S2Layout {
  static constexpr int dates = 17;
  static constexpr int spectral_bands = 12;
  static constexpr int bands_per_date = 13;
  static constexpr int cloud_slot = 12;
  static constexpr int total_bands = dates * bands_per_date;  // 221

  static constexpr std::array<const char*, 12> band_names = {
      "B01", "B02", "B03", "B04", "B05", "B06", "B07", "B08", "B8A", "B09", "B11", "B12"};

  static int band_index_by_name(const std::string& name) {
    for (int i = 0; i < spectral_bands; ++i)
      if (name == band_names[i]) return i;
    throw Error(ErrorCode::no_channels, "unknown Sentinel-2 band " + name);
  }
};
static_assert(S2Layout::total_bands == 221);

inline const std::vector<int>& s2_default_channels() {
  static const std::vector<int> channels = {1, 2, 3, 7};  // B02, B03, B04, B08
  return channels;
}

// Cloud-free median composite. Pixels cloudy on every date receive the
// per-channel median of all clear pixels in the tile; a channel with no clear
// pixel anywhere composites to zero. Any number of 13-band date groups is
// accepted (the challenge product carries 17), so duplicated dates are a
// no-op.
inline Raster s2_median_composite(const Raster& stack,
                                  std::span<const int> channels) {
  if (stack.bands % S2Layout::bands_per_date != 0 || stack.sample_type != SampleType::f32)
    throw Error(ErrorCode::shape_mismatch,
                "expected a float32 stack of 13-band date groups (221 bands standard)");
  const int dates = static_cast<int>(stack.bands) / S2Layout::bands_per_date;
  if (channels.empty()) throw Error(ErrorCode::no_channels, "no channels requested");
  for (int c : channels)
    if (c < 0 || c >= S2Layout::spectral_bands)
      throw Error(ErrorCode::no_channels, "channel index outside the spectral bands");

  const std::uint32_t w = stack.width;
  const std::uint32_t h = stack.height;
  Raster out = Raster::make(w, h, static_cast<std::uint32_t>(channels.size()), SampleType::f32);
  std::vector<double> series;
  std::vector<double> tile_clear;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> unfilled;
  for (std::size_t ci = 0; ci < channels.size(); ++ci) {
    const int channel = channels[ci];
    tile_clear.clear();
    unfilled.clear();
    for (std::uint32_t y = 0; y < h; ++y) {
      for (std::uint32_t x = 0; x < w; ++x) {
        series.clear();
        for (int d = 0; d < dates; ++d) {
          const float cloud = stack.f32(x, y, d * S2Layout::bands_per_date + S2Layout::cloud_slot);
          if (cloud != 0.0f) continue;
          series.push_back(stack.f32(x, y, d * S2Layout::bands_per_date + channel));
        }
        if (series.empty()) {
          unfilled.emplace_back(x, y);
          continue;
        }
        std::sort(series.begin(), series.end());
        const double med = quantile_sorted(series, 0.5);
        out.set_f32(x, y, static_cast<std::uint32_t>(ci), static_cast<float>(med));
        tile_clear.insert(tile_clear.end(), series.begin(), series.end());
      }
    }
    double fill = 0.0;
    if (!tile_clear.empty()) {
      std::sort(tile_clear.begin(), tile_clear.end());
      fill = quantile_sorted(tile_clear, 0.5);
    }
    for (auto [x, y] : unfilled)
      out.set_f32(x, y, static_cast<std::uint32_t>(ci), static_cast<float>(fill));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Robust min-max scaling
// ---------------------------------------------------------------------------

// Per band: map [min, quantile(upper_quantile)] onto [0, 1] and clamp, so a
// few bright outliers cannot crush the scale. A constant band maps to zeros.
inline Raster robust_minmax(const Raster& raster, double upper_quantile = 0.90) {
  if (!raster.valid()) throw Error(ErrorCode::invalid_argument, "invalid raster");
  if (!(upper_quantile >= 0.0 && upper_quantile <= 1.0))
    throw Error(ErrorCode::invalid_argument, "quantile must lie in [0,1]");
  const std::uint32_t w = raster.width;
  const std::uint32_t h = raster.height;
  Raster out = Raster::make(w, h, raster.bands, SampleType::f32);
  std::vector<double> values(static_cast<std::size_t>(w) * h);
  for (std::uint32_t b = 0; b < raster.bands; ++b) {
    for (std::uint32_t y = 0; y < h; ++y)
      for (std::uint32_t x = 0; x < w; ++x)
        values[static_cast<std::size_t>(y) * w + x] = raster.value(x, y, b);
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front();
    const double hi = quantile_sorted(sorted, upper_quantile);
    for (std::uint32_t y = 0; y < h; ++y) {
      for (std::uint32_t x = 0; x < w; ++x) {
        double v = 0.0;
        if (hi > lo) {
          v = (values[static_cast<std::size_t>(y) * w + x] - lo) / (hi - lo);
          v = std::clamp(v, 0.0, 1.0);
        }
        out.set_f32(x, y, b, static_cast<float>(v));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mask file encoding
// ---------------------------------------------------------------------------

// File encoding is inverted: sample 0 marks a structure pixel, 255 background.
inline BinaryMask mask_decode(const Raster& raster, bool lenient = false) {
  if (raster.bands != 1 || raster.sample_type != SampleType::u8)
    throw Error(ErrorCode::shape_mismatch, "masks are single-band uint8");
  BinaryMask mask = BinaryMask::make(raster.width, raster.height);
  for (std::size_t i = 0; i < raster.data.size(); ++i) {
    const std::uint8_t v = raster.data[i];
    if (lenient) {
      mask.bits[i] = v < 128 ? 1 : 0;
    } else {
      if (v != 0 && v != 255)
        throw Error(ErrorCode::invalid_mask_value,
                    "mask sample " + std::to_string(int(v)) + " is neither 0 nor 255");
      mask.bits[i] = v == 0 ? 1 : 0;
    }
  }
  return mask;
}

inline Raster mask_encode(const BinaryMask& mask) {
  Raster out = Raster::make(mask.width, mask.height, 1, SampleType::u8);
  for (std::size_t i = 0; i < mask.bits.size(); ++i) out.data[i] = mask.bits[i] ? 0 : 255;
  return out;
}

}  // namespace mayakit
