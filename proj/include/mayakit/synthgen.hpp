#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "mayakit/error.hpp"
#include "mayakit/parallel.hpp"
#include "mayakit/postprocess.hpp"
#include "mayakit/raster.hpp"
#include "mayakit/rng.hpp"

namespace mayakit {

// The three instance-cutting styles: the full bounding box, the exact pixel
// set, or the pixel set grown by a transition ring copied from the source.
struct CropStyle {
  enum class Kind { rectangular, pixel_precise, padded };
  Kind kind = Kind::rectangular;
  int pad = 0;

  static CropStyle rectangular() { return {Kind::rectangular, 0}; }
  static CropStyle pixel_precise() { return {Kind::pixel_precise, 0}; }
  static CropStyle padded(int n) {
    if (n < 1 || n > 64) throw Error(ErrorCode::invalid_argument, "padding must lie in 1..64");
    return {Kind::padded, n};
  }

  const char* name() const {
    switch (kind) {
      case Kind::rectangular: return "rectangular-cropped";
      case Kind::pixel_precise: return "pixel-precise-cropped";
      case Kind::padded: return "padded";
    }
    return "?";
  }

  static CropStyle from_name(const std::string& name, int pad) {
    if (name == "rectangular-cropped" || name == "rect") return rectangular();
    if (name == "pixel-precise-cropped" || name == "precise") return pixel_precise();
    if (name == "padded") return padded(pad);
    throw Error(ErrorCode::config_invalid, "unknown crop style " + name);
  }
};

// One cut instance. footprint marks the class pixels (what the generated mask
// will contain); paste_set marks the pixels that overwrite the background,
// which for the padded style includes the transition ring.
struct Patch {
  Raster pixels;
  BinaryMask footprint;
  BinaryMask paste_set;
  std::uint64_t source_tile = 0;
  CropStyle style;
  std::uint32_t anchor_x = 0;  // bbox top-left of the chosen component in the source
  std::uint32_t anchor_y = 0;
};

// Cuts one 8-connected component, chosen uniformly at random, in the given
// style.
inline Patch extract_instance(const Raster& image, const BinaryMask& mask, CropStyle style,
                              Rng& rng, std::uint64_t source_tile = 0) {
  if (image.width != mask.width || image.height != mask.height)
    throw Error(ErrorCode::shape_mismatch, "image and mask dimensions differ");
  const auto components = connected_components(mask);
  if (components.empty()) throw Error(ErrorCode::empty_mask, "mask has no true pixels");
  const Region& component = components[rng.uniform(components.size())];

  // Patch extent: the component bbox, grown by the pad radius (clipped to the
  // source) for the padded style.
  const int pad = style.kind == CropStyle::Kind::padded ? style.pad : 0;
  const std::uint32_t x0 =
      component.bbox.x0 >= std::uint32_t(pad) ? component.bbox.x0 - pad : 0;
  const std::uint32_t y0 =
      component.bbox.y0 >= std::uint32_t(pad) ? component.bbox.y0 - pad : 0;
  const std::uint32_t x1 = std::min(component.bbox.x1 + std::uint32_t(pad), image.width - 1);
  const std::uint32_t y1 = std::min(component.bbox.y1 + std::uint32_t(pad), image.height - 1);
  const std::uint32_t pw = x1 - x0 + 1;
  const std::uint32_t ph = y1 - y0 + 1;

  Patch patch;
  patch.style = style;
  patch.source_tile = source_tile;
  patch.anchor_x = component.bbox.x0;
  patch.anchor_y = component.bbox.y0;
  patch.pixels = Raster::make(pw, ph, image.bands, image.sample_type);
  const std::size_t pixel_bytes = image.bands * sample_size(image.sample_type);
  for (std::uint32_t y = 0; y < ph; ++y)
    std::memcpy(patch.pixels.data.data() + static_cast<std::size_t>(y) * pw * pixel_bytes,
                image.data.data() +
                    ((static_cast<std::size_t>(y0 + y) * image.width) + x0) * pixel_bytes,
                static_cast<std::size_t>(pw) * pixel_bytes);

  patch.footprint = BinaryMask::make(pw, ph);
  patch.paste_set = BinaryMask::make(pw, ph);
  if (style.kind == CropStyle::Kind::rectangular) {
    std::fill(patch.footprint.bits.begin(), patch.footprint.bits.end(), 1);
    std::fill(patch.paste_set.bits.begin(), patch.paste_set.bits.end(), 1);
    return patch;
  }
  for (auto idx : component.pixels) {
    const std::uint32_t px = idx % mask.width - x0;
    const std::uint32_t py = idx / mask.width - y0;
    patch.footprint.set(px, py, true);
    if (style.kind == CropStyle::Kind::pixel_precise) {
      patch.paste_set.set(px, py, true);
    } else {
      // Chebyshev dilation: the pad ring around every class pixel.
      for (int dy = -pad; dy <= pad; ++dy) {
        for (int dx = -pad; dx <= pad; ++dx) {
          const std::int64_t nx = std::int64_t(px) + dx;
          const std::int64_t ny = std::int64_t(py) + dy;
          if (nx < 0 || ny < 0 || nx >= pw || ny >= ph) continue;
          patch.paste_set.set(std::uint32_t(nx), std::uint32_t(ny), true);
        }
      }
    }
  }
  return patch;
}

struct PasteResult {
  Raster image;
  BinaryMask mask;
  std::uint32_t x = 0;  // paste position (patch top-left in the background)
  std::uint32_t y = 0;
};

namespace synth_detail {

// Stamps a patch at a drawn position; image pixels under paste_set are
// overwritten, footprint pixels are added to the mask.
inline std::pair<std::uint32_t, std::uint32_t> stamp(Raster& image, BinaryMask& mask,
                                                     const Patch& patch, Rng& rng) {
  if (patch.pixels.bands != image.bands || patch.pixels.sample_type != image.sample_type)
    throw Error(ErrorCode::shape_mismatch, "patch and background band layout differ");
  if (patch.pixels.width > image.width || patch.pixels.height > image.height)
    throw Error(ErrorCode::patch_too_large, "patch exceeds background dimensions");
  const std::uint32_t at_x =
      static_cast<std::uint32_t>(rng.uniform(image.width - patch.pixels.width + 1));
  const std::uint32_t at_y =
      static_cast<std::uint32_t>(rng.uniform(image.height - patch.pixels.height + 1));
  const std::size_t pixel_bytes = image.bands * sample_size(image.sample_type);
  for (std::uint32_t py = 0; py < patch.pixels.height; ++py) {
    for (std::uint32_t px = 0; px < patch.pixels.width; ++px) {
      if (!patch.paste_set.at(px, py)) continue;
      const std::uint32_t bx = at_x + px;
      const std::uint32_t by = at_y + py;
      std::memcpy(
          image.data.data() + (static_cast<std::size_t>(by) * image.width + bx) * pixel_bytes,
          patch.pixels.data.data() +
              (static_cast<std::size_t>(py) * patch.pixels.width + px) * pixel_bytes,
          pixel_bytes);
      if (patch.footprint.at(px, py)) mask.set(bx, by, true);
    }
  }
  return {at_x, at_y};
}

}  // namespace synth_detail

// Pastes a patch at a position drawn uniformly over fully in-bounds
// placements. Only paste_set pixels overwrite the background; the generated
// mask is the footprint translated to the chosen position.
inline PasteResult paste(const Raster& background, const BinaryMask& bg_mask, const Patch& patch,
                         Rng& rng) {
  if (background.width != bg_mask.width || background.height != bg_mask.height)
    throw Error(ErrorCode::shape_mismatch, "background and mask dimensions differ");
  if (bg_mask.count_true() != 0)
    throw Error(ErrorCode::invalid_argument, "background tile is not empty");
  PasteResult result;
  result.image = background;
  result.mask = BinaryMask::make(background.width, background.height);
  const auto [x, y] = synth_detail::stamp(result.image, result.mask, patch, rng);
  result.x = x;
  result.y = y;
  return result;
}

struct SynthSource {
  std::uint64_t tile_id = 0;
  Raster image;
  BinaryMask mask;  // class mask; all false for background tiles
};

struct SynthSample {
  std::uint64_t tile_id = 0;  // id assigned to the generated tile
  Raster image;
  BinaryMask mask;
};

struct SynthManifestEntry {
  std::uint64_t index = 0;
  std::uint32_t instance = 0;  // paste index within the sample
  std::uint64_t tile_id = 0;
  std::uint64_t background_id = 0;
  std::uint64_t donor_id = 0;
  std::string style;
  int pad = 0;
  std::uint32_t component_x = 0;
  std::uint32_t component_y = 0;
  std::uint32_t paste_x = 0;
  std::uint32_t paste_y = 0;
  std::uint64_t footprint_pixels = 0;
};

struct SynthDataset {
  std::vector<SynthSample> samples;
  std::vector<SynthManifestEntry> manifest;  // one entry per pasted instance
};

// Generates `count` synthetic tiles: backgrounds are consumed in cyclic
// order, donors drawn uniformly per paste. Each sample's randomness comes
// from its own (seed, index) stream, so output is a pure function of the
// inputs regardless of job count. instances_per_tile pastes several donors
// into one background; the generated mask is their union.
inline SynthDataset generate_dataset(const std::vector<SynthSource>& backgrounds,
                                     const std::vector<SynthSource>& donors, CropStyle style,
                                     std::uint64_t count, std::uint64_t seed,
                                     std::uint64_t first_tile_id = 100000, unsigned jobs = 1,
                                     std::uint32_t instances_per_tile = 1) {
  if (backgrounds.empty()) throw Error(ErrorCode::no_backgrounds, "no empty background tiles");
  if (donors.empty()) throw Error(ErrorCode::no_donors, "no donor tiles for the class");
  if (instances_per_tile < 1)
    throw Error(ErrorCode::invalid_argument, "instances_per_tile must be >= 1");
  for (const auto& donor : donors)
    if (donor.mask.count_true() == 0)
      throw Error(ErrorCode::no_donors,
                  "donor tile " + std::to_string(donor.tile_id) + " has an empty class mask");

  SynthDataset out;
  out.samples.resize(count);
  out.manifest.resize(count * instances_per_tile);
  parallel_for(count, jobs, [&](std::size_t i) {
    Rng rng = derive_rng(seed, i);
    const SynthSource& background = backgrounds[i % backgrounds.size()];

    SynthSample& sample = out.samples[i];
    sample.tile_id = first_tile_id + i;
    sample.image = background.image;
    sample.mask = BinaryMask::make(background.image.width, background.image.height);
    for (std::uint32_t k = 0; k < instances_per_tile; ++k) {
      const SynthSource& donor = donors[rng.uniform(donors.size())];
      const Patch patch = extract_instance(donor.image, donor.mask, style, rng, donor.tile_id);
      const auto [x, y] = synth_detail::stamp(sample.image, sample.mask, patch, rng);

      SynthManifestEntry& entry = out.manifest[i * instances_per_tile + k];
      entry.index = i;
      entry.instance = k;
      entry.tile_id = sample.tile_id;
      entry.background_id = background.tile_id;
      entry.donor_id = donor.tile_id;
      entry.style = style.name();
      entry.pad = style.kind == CropStyle::Kind::padded ? style.pad : 0;
      entry.component_x = patch.anchor_x;
      entry.component_y = patch.anchor_y;
      entry.paste_x = x;
      entry.paste_y = y;
      entry.footprint_pixels = patch.footprint.count_true();
    }
  });
  return out;
}

}  // namespace mayakit
