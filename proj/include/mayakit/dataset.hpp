#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mayakit/error.hpp"
#include "mayakit/postprocess.hpp"
#include "mayakit/preprocess.hpp"
#include "mayakit/raster.hpp"
#include "mayakit/rng.hpp"

namespace mayakit {

// Per-tile pixel accounting, the currency of the sampling and splitting
// operations. Classes may overlap (buildings sit on platforms), so the union
// is tracked separately.
struct TileClassSummary {
  std::uint64_t tile_id = 0;
  std::array<std::uint64_t, 3> class_pixels{};  // indexed by StructureClass
  std::uint64_t union_pixels = 0;
  std::uint64_t total_pixels = 0;
  bool pseudo = false;

  bool has_class(StructureClass c) const { return class_pixels[static_cast<int>(c)] > 0; }
  bool background_only() const { return union_pixels == 0; }
  double fraction(StructureClass c) const {
    return total_pixels == 0
               ? 0.0
               : static_cast<double>(class_pixels[static_cast<int>(c)]) /
                     static_cast<double>(total_pixels);
  }
};

inline TileClassSummary summarize_tile(const TileRecord& record, bool lenient_masks = false) {
  TileClassSummary s;
  s.tile_id = record.tile_id;
  std::array<std::optional<BinaryMask>, 3> masks;
  for (auto cls : all_classes) {
    const Raster* raster = record.find(mask_kind_of(cls));
    if (raster) masks[static_cast<int>(cls)] = mask_decode(*raster, lenient_masks);
  }
  for (auto cls : all_classes) {
    const auto& mask = masks[static_cast<int>(cls)];
    if (!mask) continue;
    s.class_pixels[static_cast<int>(cls)] = mask->count_true();
    s.total_pixels = std::max<std::uint64_t>(s.total_pixels, mask->bits.size());
  }
  if (s.total_pixels > 0) {
    for (std::size_t i = 0; i < s.total_pixels; ++i) {
      for (auto cls : all_classes) {
        const auto& mask = masks[static_cast<int>(cls)];
        if (mask && mask->bits[i]) {
          ++s.union_pixels;
          break;
        }
      }
    }
  }
  return s;
}

inline std::vector<TileClassSummary> summarize_tiles(const std::vector<TileRecord>& records,
                                                     bool lenient_masks = false) {
  std::vector<TileClassSummary> out;
  out.reserve(records.size());
  for (const auto& record : records) out.push_back(summarize_tile(record, lenient_masks));
  return out;
}

struct ClassShare {
  double pixel_fraction = 0.0;
  std::uint64_t tile_count = 0;
};

struct ClassDistribution {
  ClassShare background;
  std::array<ClassShare, 3> classes{};  // indexed by StructureClass
  std::uint64_t tiles = 0;
};

inline ClassDistribution measure_distribution(const std::vector<TileClassSummary>& summaries) {
  ClassDistribution d;
  d.tiles = summaries.size();
  std::uint64_t total = 0, union_pixels = 0;
  std::array<std::uint64_t, 3> class_pixels{};
  for (const auto& s : summaries) {
    total += s.total_pixels;
    union_pixels += s.union_pixels;
    for (int c = 0; c < 3; ++c) class_pixels[c] += s.class_pixels[c];
    for (auto cls : all_classes)
      if (s.has_class(cls)) ++d.classes[static_cast<int>(cls)].tile_count;
    if (s.background_only()) ++d.background.tile_count;
  }
  if (total > 0) {
    for (int c = 0; c < 3; ++c)
      d.classes[c].pixel_fraction = static_cast<double>(class_pixels[c]) / static_cast<double>(total);
    d.background.pixel_fraction =
        static_cast<double>(total - union_pixels) / static_cast<double>(total);
  } else {
    d.background.pixel_fraction = 1.0;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Weighted sampling and oversampling
// ---------------------------------------------------------------------------

// Draw weights over {background, aguada, building, platform}.
struct SamplerWeights {
  std::array<double, 4> weights{};

  static SamplerWeights equal() { return {{1.0, 1.0, 1.0, 1.0}}; }
  static SamplerWeights custom(double background, double aguada, double building,
                               double platform) {
    return {{background, aguada, building, platform}};
  }
};

struct SampleDraw {
  int class_index = 0;  // 0 = background, 1 + StructureClass otherwise
  std::uint64_t tile_id = 0;
};

// Each draw picks a class proportionally to its weight, then a tile
// containing that class uniformly. Background draws come from tiles with no
// structures at all.
inline std::vector<SampleDraw> weighted_sample(const std::vector<TileClassSummary>& summaries,
                                               const SamplerWeights& weights, std::uint64_t n,
                                               std::uint64_t seed) {
  std::array<std::vector<std::uint64_t>, 4> members;
  for (const auto& s : summaries) {
    if (s.background_only()) members[0].push_back(s.tile_id);
    for (auto cls : all_classes)
      if (s.has_class(cls)) members[1 + static_cast<int>(cls)].push_back(s.tile_id);
  }
  double total_weight = 0.0;
  for (int c = 0; c < 4; ++c) {
    if (weights.weights[c] < 0.0)
      throw Error(ErrorCode::invalid_argument, "negative sampler weight");
    if (weights.weights[c] > 0.0 && members[c].empty())
      throw Error(ErrorCode::unsatisfiable_weight,
                  std::string("no tile contains class index ") + std::to_string(c));
    total_weight += weights.weights[c];
  }
  if (total_weight <= 0.0)
    throw Error(ErrorCode::unsatisfiable_weight, "all sampler weights are zero");

  Rng rng(seed);
  std::vector<SampleDraw> draws;
  draws.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const double u = rng.uniform_real() * total_weight;
    double acc = 0.0;
    int picked = 3;
    for (int c = 0; c < 4; ++c) {
      acc += weights.weights[c];
      if (u < acc && weights.weights[c] > 0.0) {
        picked = c;
        break;
      }
    }
    while (weights.weights[picked] == 0.0) picked = (picked + 3) % 4;
    const auto& pool = members[picked];
    draws.push_back({picked, pool[rng.uniform(pool.size())]});
  }
  return draws;
}

// Tiles containing the class appear `factor` times (duplicates adjacent);
// everything else once, in the original order.
template <typename T, typename ContainsClass>
std::vector<T> oversample(const std::vector<T>& tiles, ContainsClass&& contains, int factor) {
  if (factor < 1) throw Error(ErrorCode::invalid_argument, "oversample factor must be >= 1");
  std::vector<T> out;
  out.reserve(tiles.size());
  for (const auto& tile : tiles) {
    const int copies = contains(tile) ? factor : 1;
    for (int i = 0; i < copies; ++i) out.push_back(tile);
  }
  return out;
}

inline std::vector<TileClassSummary> oversample(const std::vector<TileClassSummary>& tiles,
                                                StructureClass cls, int factor) {
  return oversample(tiles, [cls](const TileClassSummary& s) { return s.has_class(cls); }, factor);
}

// ---------------------------------------------------------------------------
// Stratified k-fold splitting
// ---------------------------------------------------------------------------

// Annotated-fraction bin for the aguada split: [0, t1) -> 0, [t1, t2) -> 1,
// [t2, 1] -> 2.
inline int fraction_bin(double fraction, double t1 = 0.05, double t2 = 0.15) {
  if (fraction < t1) return 0;
  if (fraction < t2) return 1;
  return 2;
}

struct FoldStrategy {
  enum class Kind { presence, fraction_bins };
  Kind kind = Kind::presence;
  StructureClass cls = StructureClass::building;
  double t1 = 0.05;
  double t2 = 0.15;

  static FoldStrategy presence(StructureClass cls) { return {Kind::presence, cls, 0, 0}; }
  static FoldStrategy aguada_bins(double t1 = 0.05, double t2 = 0.15) {
    return {Kind::fraction_bins, StructureClass::aguada, t1, t2};
  }

  int stratum_of(const TileClassSummary& s) const {
    if (kind == Kind::presence) return s.has_class(cls) ? 1 : 0;
    return fraction_bin(s.fraction(cls), t1, t2);
  }
};

struct FoldAssignment {
  int k = 0;
  std::vector<std::pair<std::uint64_t, int>> assignment;  // (tile_id, fold), sorted by id

  int fold_of(std::uint64_t tile_id) const {
    auto it = std::lower_bound(assignment.begin(), assignment.end(), tile_id,
                               [](const auto& p, std::uint64_t id) { return p.first < id; });
    if (it == assignment.end() || it->first != tile_id)
      throw Error(ErrorCode::invalid_argument, "tile not in fold assignment");
    return it->second;
  }
};

// Within each stratum: shuffle by seed, deal round-robin. Per-stratum fold
// sizes then differ by at most one.
inline FoldAssignment stratified_kfold(const std::vector<TileClassSummary>& summaries, int k,
                                       const FoldStrategy& strategy, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::invalid_argument, "k must be >= 2");
  if (summaries.size() < static_cast<std::size_t>(k))
    throw Error(ErrorCode::too_few_tiles, "fewer tiles than folds");

  std::map<int, std::vector<std::uint64_t>> strata;
  for (const auto& s : summaries) strata[strategy.stratum_of(s)].push_back(s.tile_id);

  FoldAssignment folds;
  folds.k = k;
  Rng rng(seed);
  for (auto& [stratum, ids] : strata) {
    std::sort(ids.begin(), ids.end());
    for (std::size_t i = ids.size(); i > 1; --i)
      std::swap(ids[i - 1], ids[rng.uniform(i)]);
    for (std::size_t i = 0; i < ids.size(); ++i)
      folds.assignment.emplace_back(ids[i], static_cast<int>(i % k));
  }
  std::sort(folds.assignment.begin(), folds.assignment.end());
  return folds;
}

// ---------------------------------------------------------------------------
// Crop position sampling
// ---------------------------------------------------------------------------

// Precomputes every in-bounds crop window whose annotated fraction exceeds
// min_fraction; sampling is uniform over those positions.
class CropPositionSampler {
 public:
  CropPositionSampler(const BinaryMask& mask, std::uint32_t crop, double min_fraction) {
    if (crop < 1 || crop > mask.width || crop > mask.height)
      throw Error(ErrorCode::crop_too_large, "crop window exceeds the tile");
    const std::uint64_t window = static_cast<std::uint64_t>(crop) * crop;
    const std::uint32_t w = mask.width, h = mask.height;
    // Integral image with a zero top row and left column.
    std::vector<std::uint64_t> integral((w + 1) * (h + 1), 0);
    for (std::uint32_t y = 0; y < h; ++y)
      for (std::uint32_t x = 0; x < w; ++x)
        integral[(y + 1) * (w + 1) + (x + 1)] = (mask.bits[y * w + x] ? 1u : 0u) +
                                                integral[y * (w + 1) + (x + 1)] +
                                                integral[(y + 1) * (w + 1) + x] -
                                                integral[y * (w + 1) + x];
    for (std::uint32_t y = 0; y + crop <= h; ++y) {
      for (std::uint32_t x = 0; x + crop <= w; ++x) {
        const std::uint64_t count = integral[(y + crop) * (w + 1) + (x + crop)] -
                                    integral[y * (w + 1) + (x + crop)] -
                                    integral[(y + crop) * (w + 1) + x] + integral[y * (w + 1) + x];
        if (static_cast<double>(count) > min_fraction * static_cast<double>(window))
          positions_.emplace_back(x, y);
      }
    }
  }

  const std::vector<std::pair<std::uint32_t, std::uint32_t>>& positions() const {
    return positions_;
  }

  std::pair<std::uint32_t, std::uint32_t> sample(Rng& rng) const {
    if (positions_.empty())
      throw Error(ErrorCode::no_valid_position, "no crop window clears the annotation threshold");
    return positions_[rng.uniform(positions_.size())];
  }

 private:
  std::vector<std::pair<std::uint32_t, std::uint32_t>> positions_;
};

inline std::pair<std::uint32_t, std::uint32_t> sample_crop_position(const BinaryMask& mask,
                                                                    std::uint32_t crop,
                                                                    double min_fraction,
                                                                    Rng& rng) {
  return CropPositionSampler(mask, crop, min_fraction).sample(rng);
}

// ---------------------------------------------------------------------------
// Pseudo-label merging
// ---------------------------------------------------------------------------

struct TrainSample {
  TileRecord tile;
  bool pseudo = false;
};

// Binarizes each probability map (same quantized semantics as the
// post-processing threshold), attaches the results as masks, and appends the
// tiles flagged pseudo.
inline std::vector<TrainSample> pseudo_label_merge(
    std::vector<TrainSample> train, const std::vector<TileRecord>& unlabeled,
    const std::map<std::uint64_t, std::array<ProbMap, 3>>& prob_maps, double threshold) {
  for (const TileRecord& tile : unlabeled) {
    auto it = prob_maps.find(tile.tile_id);
    if (it == prob_maps.end())
      throw Error(ErrorCode::missing_prob_map,
                  "no probability maps for tile " + std::to_string(tile.tile_id));
    TrainSample sample;
    sample.tile = tile;
    sample.pseudo = true;
    for (auto cls : all_classes) {
      const ProbMap& prob = it->second[static_cast<int>(cls)];
      if (prob.values.empty())
        throw Error(ErrorCode::missing_prob_map,
                    std::string("no ") + class_name(cls) + " probability map for tile " +
                        std::to_string(tile.tile_id));
      sample.tile.rasters[mask_kind_of(cls)] = mask_encode(binarize(prob, threshold));
    }
    train.push_back(std::move(sample));
  }
  return train;
}

}  // namespace mayakit
