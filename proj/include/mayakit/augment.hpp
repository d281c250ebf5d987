#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mayakit/error.hpp"
#include "mayakit/raster.hpp"
#include "mayakit/rng.hpp"

namespace mayakit {

// ---------------------------------------------------------------------------
// Dihedral group of the square
// ---------------------------------------------------------------------------

// The eight symmetries, encoded as (horizontal flip first, then k clockwise
// quarter turns). Index = rotation + 4 * flip.
enum class Dihedral : int {
  r0 = 0,
  r90 = 1,
  r180 = 2,
  r270 = 3,
  fh = 4,
  fh_r90 = 5,
  fh_r180 = 6,
  fh_r270 = 7,
};

inline constexpr std::array<Dihedral, 8> all_dihedral = {
    Dihedral::r0,  Dihedral::r90,    Dihedral::r180,    Dihedral::r270,
    Dihedral::fh,  Dihedral::fh_r90, Dihedral::fh_r180, Dihedral::fh_r270};

inline constexpr int dihedral_rotation(Dihedral e) { return static_cast<int>(e) & 3; }
inline constexpr bool dihedral_flipped(Dihedral e) { return static_cast<int>(e) >= 4; }

inline constexpr Dihedral make_dihedral(int rotation, bool flip) {
  return static_cast<Dihedral>(((rotation % 4 + 4) % 4) + (flip ? 4 : 0));
}

// compose(a, b) applies b first, then a.
inline constexpr Dihedral dihedral_compose(Dihedral a, Dihedral b) {
  const int ka = dihedral_rotation(a), kb = dihedral_rotation(b);
  const bool fa = dihedral_flipped(a), fb = dihedral_flipped(b);
  return fa ? make_dihedral(ka - kb, !fb) : make_dihedral(ka + kb, fb);
}

inline constexpr Dihedral dihedral_inverse(Dihedral e) {
  return dihedral_flipped(e) ? e : make_dihedral(-dihedral_rotation(e), false);
}

inline constexpr const char* dihedral_name(Dihedral e) {
  constexpr const char* names[8] = {"r0",    "r90",    "r180",    "r270",
                                    "fh_r0", "fh_r90", "fh_r180", "fh_r270"};
  return names[static_cast<int>(e)];
}

// Source pixel feeding output position (x, y) on an n x n grid.
inline std::pair<std::uint32_t, std::uint32_t> dihedral_source(Dihedral e, std::uint32_t n,
                                                               std::uint32_t x, std::uint32_t y) {
  // Undo the k clockwise quarter turns (out(x,y) = in(y, n-1-x) per turn)...
  for (int k = dihedral_rotation(e); k > 0; --k) {
    const std::uint32_t sx = y;
    const std::uint32_t sy = n - 1 - x;
    x = sx;
    y = sy;
  }
  // ...then undo the horizontal mirror.
  if (dihedral_flipped(e)) x = n - 1 - x;
  return {x, y};
}

inline Raster dihedral_apply(const Raster& raster, Dihedral e) {
  if (raster.width != raster.height)
    throw Error(ErrorCode::invalid_argument, "dihedral transform of a non-square raster");
  const std::uint32_t n = raster.width;
  Raster out = raster;
  const std::size_t pixel_bytes = raster.bands * sample_size(raster.sample_type);
  for (std::uint32_t y = 0; y < n; ++y) {
    for (std::uint32_t x = 0; x < n; ++x) {
      const auto [sx, sy] = dihedral_source(e, n, x, y);
      std::memcpy(out.data.data() + (static_cast<std::size_t>(y) * n + x) * pixel_bytes,
                  raster.data.data() + (static_cast<std::size_t>(sy) * n + sx) * pixel_bytes,
                  pixel_bytes);
    }
  }
  return out;
}

inline BinaryMask dihedral_apply(const BinaryMask& mask, Dihedral e) {
  if (mask.width != mask.height)
    throw Error(ErrorCode::invalid_argument, "dihedral transform of a non-square mask");
  const std::uint32_t n = mask.width;
  BinaryMask out = BinaryMask::make(n, n);
  for (std::uint32_t y = 0; y < n; ++y)
    for (std::uint32_t x = 0; x < n; ++x) {
      const auto [sx, sy] = dihedral_source(e, n, x, y);
      out.bits[static_cast<std::size_t>(y) * n + x] = mask.bits[static_cast<std::size_t>(sy) * n + sx];
    }
  return out;
}

inline ProbMap dihedral_apply(const ProbMap& map, Dihedral e) {
  if (map.width != map.height)
    throw Error(ErrorCode::invalid_argument, "dihedral transform of a non-square map");
  const std::uint32_t n = map.width;
  ProbMap out = ProbMap::make(n, n);
  for (std::uint32_t y = 0; y < n; ++y)
    for (std::uint32_t x = 0; x < n; ++x) {
      const auto [sx, sy] = dihedral_source(e, n, x, y);
      out.values[static_cast<std::size_t>(y) * n + x] =
          map.values[static_cast<std::size_t>(sy) * n + sx];
    }
  return out;
}

// ---------------------------------------------------------------------------
// Probabilistic augmentation pipelines
// ---------------------------------------------------------------------------

// Probabilities and parameter ranges for one augmentation scheme. The three
// presets keep the published schemes separate instead of merging them.
struct AugmentConfig {
  double hflip_p = 0.0;
  double vflip_p = 0.0;

  double rotation_p = 0.0;
  double rotation_min_deg = 0.0;
  double rotation_max_deg = 0.0;

  double translation_p = 0.0;
  double translation_max_frac = 0.0;  // of image size, per axis

  double scale_p = 0.0;
  double scale_min = 1.0;
  double scale_max = 1.0;

  double dihedral_p = 0.0;  // uniformly random square symmetry

  std::uint32_t crop_min_side = 0;  // 0 disables cropping
  std::uint32_t crop_max_side = 0;

  double blur_p = 0.0;  // images only
  int blur_kernel = 11;
  double blur_sigma_min = 0.1;
  double blur_sigma_max = 2.0;

  double noise_p = 0.0;
  double noise_uniform_max = 0.1;
  double noise_normal_sigma = 0.03;

  static AugmentConfig ch1() {
    AugmentConfig c;
    c.hflip_p = 0.5;
    c.vflip_p = 0.5;
    c.rotation_p = 0.5;
    c.rotation_min_deg = -90.0;
    c.rotation_max_deg = 90.0;
    c.translation_p = 0.5;
    c.translation_max_frac = 0.15;
    c.scale_p = 0.5;
    c.scale_min = 0.5;
    c.scale_max = 1.5;
    return c;
  }

  static AugmentConfig ch3() {
    AugmentConfig c;
    c.crop_min_side = 256;
    c.crop_max_side = 400;
    c.vflip_p = 0.5;
    c.hflip_p = 0.5;
    c.rotation_p = 0.25;
    c.rotation_min_deg = 0.0;
    c.rotation_max_deg = 359.0;
    c.blur_p = 0.25;
    c.noise_p = 0.25;
    return c;
  }

  static AugmentConfig dihedral_only() {
    AugmentConfig c;
    c.dihedral_p = 1.0;
    return c;
  }

  static AugmentConfig preset(const std::string& name) {
    if (name == "ch1") return ch1();
    if (name == "ch3") return ch3();
    if (name == "dihedral-only") return dihedral_only();
    throw Error(ErrorCode::config_invalid, "unknown augment preset " + name);
  }
};

namespace augment_detail {

// Exact values at the quarter turns keep those rotations interpolation-free.
inline double cos_deg(double deg) {
  const double m = std::fmod(deg, 360.0);
  if (m == 0.0) return 1.0;
  if (m == 90.0 || m == -270.0) return 0.0;
  if (m == 180.0 || m == -180.0) return -1.0;
  if (m == 270.0 || m == -90.0) return 0.0;
  return std::cos(deg * 3.14159265358979323846 / 180.0);
}
inline double sin_deg(double deg) {
  const double m = std::fmod(deg, 360.0);
  if (m == 0.0 || m == 180.0 || m == -180.0) return 0.0;
  if (m == 90.0 || m == -270.0) return 1.0;
  if (m == 270.0 || m == -90.0) return -1.0;
  return std::sin(deg * 3.14159265358979323846 / 180.0);
}

struct Affine {
  // Maps output pixel coordinates to source coordinates.
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;
  double tx = 0.0, ty = 0.0;

  std::pair<double, double> source(double x, double y) const {
    return {a * x + b * y + tx, c * x + d * y + ty};
  }
  bool identity() const {
    return a == 1.0 && b == 0.0 && c == 0.0 && d == 1.0 && tx == 0.0 && ty == 0.0;
  }
};

}  // namespace augment_detail

struct GeometricSample {
  bool hflip = false;
  bool vflip = false;
  double rotation_deg = 0.0;
  double translate_x = 0.0;  // pixels
  double translate_y = 0.0;
  double scale = 1.0;
  Dihedral dihedral = Dihedral::r0;
};

inline GeometricSample sample_geometric(const AugmentConfig& config, std::uint32_t width,
                                        std::uint32_t height, Rng& rng) {
  GeometricSample s;
  if (config.hflip_p > 0.0 && rng.bernoulli(config.hflip_p)) s.hflip = true;
  if (config.vflip_p > 0.0 && rng.bernoulli(config.vflip_p)) s.vflip = true;
  if (config.rotation_p > 0.0 && rng.bernoulli(config.rotation_p))
    s.rotation_deg = rng.uniform_real(config.rotation_min_deg, config.rotation_max_deg);
  if (config.translation_p > 0.0 && rng.bernoulli(config.translation_p)) {
    s.translate_x = rng.uniform_real(-config.translation_max_frac, config.translation_max_frac) *
                    static_cast<double>(width);
    s.translate_y = rng.uniform_real(-config.translation_max_frac, config.translation_max_frac) *
                    static_cast<double>(height);
  }
  if (config.scale_p > 0.0 && rng.bernoulli(config.scale_p))
    s.scale = rng.uniform_real(config.scale_min, config.scale_max);
  if (config.dihedral_p > 0.0 && rng.bernoulli(config.dihedral_p))
    s.dihedral = all_dihedral[rng.uniform(8)];
  return s;
}

namespace augment_detail {

inline Affine inverse_affine(const GeometricSample& s, std::uint32_t width, std::uint32_t height) {
  // Forward map: p_out = R(theta) * S * F * (p_in - c) + c + t. Inverted here:
  // p_in = F * S^-1 * R(-theta) * (p_out - c - t) + c.
  const double cx = (static_cast<double>(width) - 1.0) / 2.0;
  const double cy = (static_cast<double>(height) - 1.0) / 2.0;
  const double cosv = cos_deg(-s.rotation_deg);
  const double sinv = sin_deg(-s.rotation_deg);
  const double inv_scale = 1.0 / s.scale;
  const double fx = s.hflip ? -1.0 : 1.0;
  const double fy = s.vflip ? -1.0 : 1.0;

  Affine m;
  m.a = fx * inv_scale * cosv;
  m.b = fx * inv_scale * -sinv;
  m.c = fy * inv_scale * sinv;
  m.d = fy * inv_scale * cosv;
  const double ox = -cx - s.translate_x;
  const double oy = -cy - s.translate_y;
  m.tx = m.a * ox + m.b * oy + cx;
  m.ty = m.c * ox + m.d * oy + cy;
  return m;
}

inline float bilinear_sample(const Raster& img, std::uint32_t band, double x, double y) {
  if (x < 0.0 || y < 0.0 || x > img.width - 1.0 || y > img.height - 1.0) return 0.0f;
  const std::uint32_t x0 = static_cast<std::uint32_t>(x);
  const std::uint32_t y0 = static_cast<std::uint32_t>(y);
  const std::uint32_t x1 = std::min(x0 + 1, img.width - 1);
  const std::uint32_t y1 = std::min(y0 + 1, img.height - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double v00 = img.value(x0, y0, band);
  const double v10 = img.value(x1, y0, band);
  const double v01 = img.value(x0, y1, band);
  const double v11 = img.value(x1, y1, band);
  const double v = (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) +
                   fy * ((1.0 - fx) * v01 + fx * v11);
  return static_cast<float>(v);
}

}  // namespace augment_detail

// Applies one sampled geometric transform jointly: the image is resampled
// bilinearly, every mask nearest-neighbor, and out-of-domain pixels fill with
// 0 / false. Quarter-turn rotations resolve to exact pixel permutations.
inline std::pair<Raster, std::vector<BinaryMask>> apply_geometric(
    const Raster& image, const std::vector<BinaryMask>& masks, const GeometricSample& sample) {
  using namespace augment_detail;
  for (const auto& m : masks)
    if (m.width != image.width || m.height != image.height)
      throw Error(ErrorCode::shape_mismatch, "mask and image dimensions differ");

  Raster img = sample.dihedral == Dihedral::r0 ? image : dihedral_apply(image, sample.dihedral);
  std::vector<BinaryMask> out_masks;
  out_masks.reserve(masks.size());
  for (const auto& m : masks)
    out_masks.push_back(sample.dihedral == Dihedral::r0 ? m : dihedral_apply(m, sample.dihedral));

  const Affine affine = inverse_affine(sample, image.width, image.height);
  if (affine.identity()) return {std::move(img), std::move(out_masks)};

  Raster warped = Raster::make(img.width, img.height, img.bands, img.sample_type);
  for (std::uint32_t y = 0; y < img.height; ++y) {
    for (std::uint32_t x = 0; x < img.width; ++x) {
      const auto [sx, sy] = affine.source(x, y);
      for (std::uint32_t b = 0; b < img.bands; ++b) {
        const float v = bilinear_sample(img, b, sx, sy);
        if (img.sample_type == SampleType::u8) {
          warped.u8(x, y, b) =
              static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        } else {
          warped.set_f32(x, y, b, v);
        }
      }
    }
  }
  std::vector<BinaryMask> warped_masks;
  warped_masks.reserve(out_masks.size());
  for (const auto& m : out_masks) {
    BinaryMask wm = BinaryMask::make(m.width, m.height);
    for (std::uint32_t y = 0; y < m.height; ++y) {
      for (std::uint32_t x = 0; x < m.width; ++x) {
        const auto [sx, sy] = affine.source(x, y);
        const long nx = std::lround(sx);
        const long ny = std::lround(sy);
        if (nx < 0 || ny < 0 || nx >= long(m.width) || ny >= long(m.height)) continue;
        wm.set(x, y, m.at(std::uint32_t(nx), std::uint32_t(ny)));
      }
    }
    warped_masks.push_back(std::move(wm));
  }
  return {std::move(warped), std::move(warped_masks)};
}

inline std::pair<Raster, std::vector<BinaryMask>> geometric_augment(
    const Raster& image, const std::vector<BinaryMask>& masks, const AugmentConfig& config,
    Rng& rng) {
  return apply_geometric(image, masks, sample_geometric(config, image.width, image.height, rng));
}

// Gaussian blur (reflected borders) and additive noise; both clamp back to
// [0,1] and leave masks untouched.
inline Raster photometric_augment(const Raster& image, const AugmentConfig& config, Rng& rng) {
  if (image.sample_type != SampleType::f32)
    throw Error(ErrorCode::invalid_argument, "photometric augmentation expects float images");
  Raster out = image;

  if (config.blur_p > 0.0 && rng.bernoulli(config.blur_p)) {
    const double sigma = rng.uniform_real(config.blur_sigma_min, config.blur_sigma_max);
    const int k = config.blur_kernel;
    const int half = k / 2;
    std::vector<double> kernel(k);
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
      const double d = i - half;
      kernel[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
      sum += kernel[i];
    }
    for (auto& v : kernel) v /= sum;

    auto reflect = [](long i, long n) {
      while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - i - 1;
      }
      return i;
    };
    const long w = image.width, h = image.height;
    Raster tmp = out;
    for (std::uint32_t b = 0; b < image.bands; ++b) {
      for (long y = 0; y < h; ++y)
        for (long x = 0; x < w; ++x) {
          double acc = 0.0;
          for (int i = 0; i < k; ++i)
            acc += kernel[i] * out.f32(std::uint32_t(reflect(x + i - half, w)), std::uint32_t(y), b);
          tmp.set_f32(std::uint32_t(x), std::uint32_t(y), b, static_cast<float>(acc));
        }
      for (long y = 0; y < h; ++y)
        for (long x = 0; x < w; ++x) {
          double acc = 0.0;
          for (int i = 0; i < k; ++i)
            acc += kernel[i] * tmp.f32(std::uint32_t(x), std::uint32_t(reflect(y + i - half, h)), b);
          out.set_f32(std::uint32_t(x), std::uint32_t(y), b, static_cast<float>(acc));
        }
    }
  }

  if (config.noise_p > 0.0 && rng.bernoulli(config.noise_p)) {
    const bool use_uniform = rng.bernoulli(0.5);
    for (float& v : out.f32_samples()) {
      const double noise = use_uniform ? rng.uniform_real(0.0, config.noise_uniform_max)
                                       : rng.normal(0.0, config.noise_normal_sigma);
      v = static_cast<float>(std::clamp(static_cast<double>(v) + noise, 0.0, 1.0));
    }
  }
  return out;
}

// Square crop of a side drawn uniformly from [min_side, max_side], placed
// uniformly in bounds; image and masks are cropped identically.
inline std::pair<Raster, std::vector<BinaryMask>> random_crop(
    const Raster& image, const std::vector<BinaryMask>& masks, std::uint32_t min_side,
    std::uint32_t max_side, Rng& rng) {
  if (min_side < 1 || max_side < min_side)
    throw Error(ErrorCode::invalid_argument, "bad crop side range");
  if (max_side > image.width || max_side > image.height)
    throw Error(ErrorCode::crop_too_large, "crop range exceeds image size");
  for (const auto& m : masks)
    if (m.width != image.width || m.height != image.height)
      throw Error(ErrorCode::shape_mismatch, "mask and image dimensions differ");

  const std::uint32_t side =
      static_cast<std::uint32_t>(rng.uniform_int(min_side, max_side));
  const std::uint32_t x0 = static_cast<std::uint32_t>(rng.uniform(image.width - side + 1));
  const std::uint32_t y0 = static_cast<std::uint32_t>(rng.uniform(image.height - side + 1));

  Raster img = Raster::make(side, side, image.bands, image.sample_type);
  const std::size_t pixel_bytes = image.bands * sample_size(image.sample_type);
  for (std::uint32_t y = 0; y < side; ++y)
    std::memcpy(img.data.data() + static_cast<std::size_t>(y) * side * pixel_bytes,
                image.data.data() +
                    ((static_cast<std::size_t>(y0 + y) * image.width) + x0) * pixel_bytes,
                static_cast<std::size_t>(side) * pixel_bytes);

  std::vector<BinaryMask> out_masks;
  out_masks.reserve(masks.size());
  for (const auto& m : masks) {
    BinaryMask cm = BinaryMask::make(side, side);
    for (std::uint32_t y = 0; y < side; ++y)
      std::memcpy(cm.bits.data() + static_cast<std::size_t>(y) * side,
                  m.bits.data() + static_cast<std::size_t>(y0 + y) * m.width + x0, side);
    out_masks.push_back(std::move(cm));
  }
  return {std::move(img), std::move(out_masks)};
}

}  // namespace mayakit
