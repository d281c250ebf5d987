#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mayakit/augment.hpp"
#include "mayakit/error.hpp"
#include "mayakit/raster.hpp"
#include "mayakit/scan.hpp"
#include "mayakit/tiff.hpp"

namespace mayakit {

inline Raster prob_to_raster(const ProbMap& map) {
  Raster raster = Raster::make(map.width, map.height, 1, SampleType::f32);
  auto samples = raster.f32_samples();
  std::copy(map.values.begin(), map.values.end(), samples.begin());
  return raster;
}

inline ProbMap prob_from_raster(const Raster& raster) {
  if (raster.bands != 1 || raster.sample_type != SampleType::f32)
    throw Error(ErrorCode::shape_mismatch, "probability maps are single-band float32");
  ProbMap map = ProbMap::make(raster.width, raster.height);
  const auto samples = raster.f32_samples();
  std::copy(samples.begin(), samples.end(), map.values.begin());
  return map;
}

// Stand-in for the trained segmentation networks: anything that maps a tile
// to a per-class probability map. Implementations must be deterministic and
// safe to call concurrently on distinct tiles.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual ProbMap predict(const TileRecord& tile, StructureClass cls) const = 0;
  virtual std::string name() const = 0;
};

class ConstantPredictor final : public Predictor {
 public:
  explicit ConstantPredictor(float value, std::uint32_t side = 480)
      : value_(value), side_(side) {}

  ProbMap predict(const TileRecord&, StructureClass) const override {
    return ProbMap::make(side_, side_, value_);
  }
  std::string name() const override { return "constant"; }

 private:
  float value_;
  std::uint32_t side_;
};

// Reads probability maps some earlier stage wrote as
// tile_<id>_prob_<class>_<model>.tif.
class FileBackedPredictor final : public Predictor {
 public:
  FileBackedPredictor(std::filesystem::path directory, std::string model)
      : directory_(std::move(directory)), model_(std::move(model)) {}

  ProbMap predict(const TileRecord& tile, StructureClass cls) const override {
    const auto path = directory_ / NamingConvention::prob_filename(tile.tile_id, cls, model_);
    return prob_from_raster(read_tiff_file(path, prob_kind_of(cls)));
  }
  std::string name() const override { return model_; }

 private:
  std::filesystem::path directory_;
  std::string model_;
};

// Thresholds the lidar visualization bands directly; exists so the pipeline
// can run end to end without any learned model. The horizontal smear makes it
// deliberately non-equivariant, which gives test-time augmentation something
// to average out. Variants jitter gain and bias to act as ensemble members.
class HeuristicBaselinePredictor final : public Predictor {
 public:
  explicit HeuristicBaselinePredictor(int variant = 0) : variant_(variant) {}

  ProbMap predict(const TileRecord& tile, StructureClass cls) const override {
    const Raster& als = tile.require(ModalityKind::als);
    const std::uint32_t w = als.width, h = als.height;
    ProbMap map = ProbMap::make(w, h);

    // Fixture signature: structures darken one lidar band each.
    int band = 0;
    double base = 200.0, depth = 90.0;
    switch (cls) {
      case StructureClass::building: band = 0; base = 200.0; depth = 90.0; break;
      case StructureClass::platform: band = 1; base = 185.0; depth = 75.0; break;
      case StructureClass::aguada: band = 2; base = 60.0; depth = -110.0; break;
    }
    const double gain = 1.0 + 0.1 * variant_;
    const double bias = 0.03 * variant_;
    for (std::uint32_t y = 0; y < h; ++y)
      for (std::uint32_t x = 0; x < w; ++x) {
        const double v = als.value(x, y, std::uint32_t(band));
        const double score = gain * (base - v) / depth - bias;
        map.set(x, y, static_cast<float>(std::clamp(score, 0.0, 1.0)));
      }

    // 1x7 horizontal box smear.
    ProbMap smeared = ProbMap::make(w, h);
    for (std::uint32_t y = 0; y < h; ++y)
      for (std::uint32_t x = 0; x < w; ++x) {
        double acc = 0.0;
        int n = 0;
        for (int dx = -3; dx <= 3; ++dx) {
          const std::int64_t nx = std::int64_t(x) + dx;
          if (nx < 0 || nx >= w) continue;
          acc += map.at(std::uint32_t(nx), y);
          ++n;
        }
        smeared.set(x, y, static_cast<float>(acc / n));
      }
    return smeared;
  }
  std::string name() const override { return "baseline_v" + std::to_string(variant_); }

 private:
  int variant_;
};

// Test-time augmentation over the full dihedral group: transform the tile's
// rasters, predict, undo the transform on the output, and average the eight
// maps in a fixed order.
inline ProbMap tta_predict(const Predictor& predictor, const TileRecord& tile,
                           StructureClass cls) {
  ProbMap accumulated;
  std::vector<double> sums;
  for (Dihedral e : all_dihedral) {
    TileRecord transformed;
    transformed.tile_id = tile.tile_id;
    for (const auto& [kind, raster] : tile.rasters)
      transformed.rasters.emplace(kind, dihedral_apply(raster, e));
    const ProbMap predicted = predictor.predict(transformed, cls);
    const ProbMap restored = dihedral_apply(predicted, dihedral_inverse(e));
    if (sums.empty()) {
      accumulated = restored;
      sums.assign(restored.values.size(), 0.0);
    } else if (restored.values.size() != sums.size()) {
      throw Error(ErrorCode::shape_mismatch, "predictor output shape varies across transforms");
    }
    for (std::size_t i = 0; i < sums.size(); ++i) sums[i] += restored.values[i];
  }
  for (std::size_t i = 0; i < sums.size(); ++i)
    accumulated.values[i] = static_cast<float>(sums[i] / 8.0);
  return accumulated;
}

// Unweighted per-pixel mean of the member maps.
inline ProbMap soft_vote(std::span<const ProbMap> members) {
  if (members.empty()) throw Error(ErrorCode::empty_ensemble, "no ensemble members");
  const ProbMap& first = members.front();
  for (const auto& m : members)
    if (m.width != first.width || m.height != first.height)
      throw Error(ErrorCode::shape_mismatch, "ensemble members differ in shape");
  ProbMap out = ProbMap::make(first.width, first.height);
  std::vector<double> sums(out.values.size(), 0.0);
  for (const auto& m : members)
    for (std::size_t i = 0; i < sums.size(); ++i) sums[i] += m.values[i];
  for (std::size_t i = 0; i < sums.size(); ++i)
    out.values[i] = static_cast<float>(sums[i] / static_cast<double>(members.size()));
  return out;
}

// Pixel is true iff strictly more than half the members agree; exact ties
// stay false.
inline BinaryMask hard_vote(std::span<const BinaryMask> members) {
  if (members.empty()) throw Error(ErrorCode::empty_ensemble, "no ensemble members");
  const BinaryMask& first = members.front();
  for (const auto& m : members)
    if (m.width != first.width || m.height != first.height)
      throw Error(ErrorCode::shape_mismatch, "ensemble members differ in shape");
  BinaryMask out = BinaryMask::make(first.width, first.height);
  for (std::size_t i = 0; i < out.bits.size(); ++i) {
    std::size_t votes = 0;
    for (const auto& m : members) votes += m.bits[i] != 0;
    out.bits[i] = 2 * votes > members.size() ? 1 : 0;
  }
  return out;
}

}  // namespace mayakit
