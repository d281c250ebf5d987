#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mayakit/error.hpp"

namespace mayakit {

enum class SampleType { u8, f32 };

inline std::size_t sample_size(SampleType t) { return t == SampleType::u8 ? 1 : 4; }

// Row-major, band-interleaved-by-pixel sample grid. The one pixel container
// shared by every modality (radar statistics, spectral stacks, lidar
// visualizations, masks, probability maps).
struct Raster {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t bands = 0;
  SampleType sample_type = SampleType::u8;
  std::vector<std::uint8_t> data;

  static Raster make(std::uint32_t w, std::uint32_t h, std::uint32_t b, SampleType t) {
    if (w < 1 || h < 1 || b < 1)
      throw Error(ErrorCode::invalid_argument, "raster dimensions must be >= 1");
    Raster r;
    r.width = w;
    r.height = h;
    r.bands = b;
    r.sample_type = t;
    r.data.assign(static_cast<std::size_t>(w) * h * b * sample_size(t), 0);
    return r;
  }

  std::size_t sample_count() const { return static_cast<std::size_t>(width) * height * bands; }

  bool valid() const {
    return width >= 1 && height >= 1 && bands >= 1 &&
           data.size() == sample_count() * sample_size(sample_type);
  }

  std::size_t index(std::uint32_t x, std::uint32_t y, std::uint32_t band) const {
    return (static_cast<std::size_t>(y) * width + x) * bands + band;
  }

  std::uint8_t& u8(std::uint32_t x, std::uint32_t y, std::uint32_t band = 0) {
    return data[index(x, y, band)];
  }
  std::uint8_t u8(std::uint32_t x, std::uint32_t y, std::uint32_t band = 0) const {
    return data[index(x, y, band)];
  }

  float f32(std::uint32_t x, std::uint32_t y, std::uint32_t band = 0) const {
    float v;
    std::memcpy(&v, data.data() + index(x, y, band) * 4, 4);
    return v;
  }
  void set_f32(std::uint32_t x, std::uint32_t y, std::uint32_t band, float v) {
    std::memcpy(data.data() + index(x, y, band) * 4, &v, 4);
  }

  std::span<const float> f32_samples() const {
    return {reinterpret_cast<const float*>(data.data()), sample_count()};
  }
  std::span<float> f32_samples() {
    return {reinterpret_cast<float*>(data.data()), sample_count()};
  }

  // Value of a sample as double regardless of storage type.
  double value(std::uint32_t x, std::uint32_t y, std::uint32_t band = 0) const {
    return sample_type == SampleType::u8 ? static_cast<double>(u8(x, y, band))
                                         : static_cast<double>(f32(x, y, band));
  }

  bool operator==(const Raster& other) const = default;
};

// Boolean grid; true marks a structure pixel. The 0/255 file encoding lives in
// mask_decode/mask_encode, not here.
struct BinaryMask {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> bits;  // one byte per pixel, 0 or 1

  static BinaryMask make(std::uint32_t w, std::uint32_t h, bool value = false) {
    BinaryMask m;
    m.width = w;
    m.height = h;
    m.bits.assign(static_cast<std::size_t>(w) * h, value ? 1 : 0);
    return m;
  }

  bool at(std::uint32_t x, std::uint32_t y) const {
    return bits[static_cast<std::size_t>(y) * width + x] != 0;
  }
  void set(std::uint32_t x, std::uint32_t y, bool v) {
    bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
  }

  std::size_t count_true() const {
    std::size_t n = 0;
    for (auto b : bits) n += b != 0;
    return n;
  }

  bool operator==(const BinaryMask& other) const = default;
};

// Per-pixel class probability in [0, 1].
struct ProbMap {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<float> values;

  static ProbMap make(std::uint32_t w, std::uint32_t h, float v = 0.0f) {
    ProbMap p;
    p.width = w;
    p.height = h;
    p.values.assign(static_cast<std::size_t>(w) * h, v);
    return p;
  }

  float at(std::uint32_t x, std::uint32_t y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  void set(std::uint32_t x, std::uint32_t y, float v) {
    values[static_cast<std::size_t>(y) * width + x] = v;
  }

  bool operator==(const ProbMap& other) const = default;
};

enum class StructureClass { aguada = 0, building = 1, platform = 2 };

inline constexpr std::array<StructureClass, 3> all_classes = {
    StructureClass::aguada, StructureClass::building, StructureClass::platform};

inline constexpr const char* class_name(StructureClass c) {
  switch (c) {
    case StructureClass::aguada: return "aguada";
    case StructureClass::building: return "building";
    case StructureClass::platform: return "platform";
  }
  return "?";
}

inline std::optional<StructureClass> class_from_name(std::string_view name) {
  for (auto c : all_classes)
    if (name == class_name(c)) return c;
  return std::nullopt;
}

enum class ModalityKind {
  s1,
  s2,
  als,
  mask_building,
  mask_platform,
  mask_aguada,
  prob_building,
  prob_platform,
  prob_aguada,
};

inline constexpr ModalityKind mask_kind_of(StructureClass c) {
  switch (c) {
    case StructureClass::aguada: return ModalityKind::mask_aguada;
    case StructureClass::building: return ModalityKind::mask_building;
    case StructureClass::platform: return ModalityKind::mask_platform;
  }
  return ModalityKind::mask_building;
}

inline constexpr ModalityKind prob_kind_of(StructureClass c) {
  switch (c) {
    case StructureClass::aguada: return ModalityKind::prob_aguada;
    case StructureClass::building: return ModalityKind::prob_building;
    case StructureClass::platform: return ModalityKind::prob_platform;
  }
  return ModalityKind::prob_building;
}

struct ModalityShape {
  std::uint32_t width;
  std::uint32_t height;
  std::uint32_t bands;
  SampleType sample_type;
};

inline constexpr ModalityShape modality_shape(ModalityKind kind) {
  switch (kind) {
    case ModalityKind::s1: return {24, 24, 120, SampleType::f32};
    case ModalityKind::s2: return {24, 24, 221, SampleType::f32};
    case ModalityKind::als: return {480, 480, 3, SampleType::u8};
    case ModalityKind::mask_building:
    case ModalityKind::mask_platform:
    case ModalityKind::mask_aguada: return {480, 480, 1, SampleType::u8};
    case ModalityKind::prob_building:
    case ModalityKind::prob_platform:
    case ModalityKind::prob_aguada: return {480, 480, 1, SampleType::f32};
  }
  return {0, 0, 0, SampleType::u8};
}

inline constexpr const char* modality_name(ModalityKind kind) {
  switch (kind) {
    case ModalityKind::s1: return "s1";
    case ModalityKind::s2: return "s2";
    case ModalityKind::als: return "lidar";
    case ModalityKind::mask_building: return "mask_building";
    case ModalityKind::mask_platform: return "mask_platform";
    case ModalityKind::mask_aguada: return "mask_aguada";
    case ModalityKind::prob_building: return "prob_building";
    case ModalityKind::prob_platform: return "prob_platform";
    case ModalityKind::prob_aguada: return "prob_aguada";
  }
  return "?";
}

inline bool modality_is_mask(ModalityKind kind) {
  return kind == ModalityKind::mask_building || kind == ModalityKind::mask_platform ||
         kind == ModalityKind::mask_aguada;
}

inline bool modality_is_prob(ModalityKind kind) {
  return kind == ModalityKind::prob_building || kind == ModalityKind::prob_platform ||
         kind == ModalityKind::prob_aguada;
}

// Checks a raster against the expected shape of its modality. Strict mode
// additionally requires mask samples to be exactly 0 or 255 and probability
// samples to be finite and inside [0, 1].
inline void validate_modality(const Raster& raster, ModalityKind kind, bool strict = true) {
  const ModalityShape want = modality_shape(kind);
  if (raster.width != want.width || raster.height != want.height ||
      raster.bands != want.bands || raster.sample_type != want.sample_type)
    throw Error(ErrorCode::shape_mismatch,
                std::string(modality_name(kind)) + " expects " + std::to_string(want.width) +
                    "x" + std::to_string(want.height) + "x" + std::to_string(want.bands) +
                    (want.sample_type == SampleType::u8 ? " uint8" : " float32"));
  if (modality_is_mask(kind) && strict) {
    for (auto v : raster.data)
      if (v != 0 && v != 255)
        throw Error(ErrorCode::invalid_mask_value,
                    "mask sample " + std::to_string(int(v)) + " is neither 0 nor 255");
  }
  if (modality_is_prob(kind)) {
    for (float v : raster.f32_samples())
      if (!(v >= 0.0f && v <= 1.0f))
        throw Error(ErrorCode::malformed, "probability sample outside [0,1]");
  } else if (raster.sample_type == SampleType::f32 && strict) {
    for (float v : raster.f32_samples())
      if (!std::isfinite(v))
        throw Error(ErrorCode::malformed, "non-finite float sample");
  }
}

// One tile with whatever modalities were found on disk for it.
struct TileRecord {
  std::uint64_t tile_id = 0;
  std::map<ModalityKind, Raster> rasters;

  const Raster* find(ModalityKind kind) const {
    auto it = rasters.find(kind);
    return it == rasters.end() ? nullptr : &it->second;
  }
  const Raster& require(ModalityKind kind) const {
    const Raster* r = find(kind);
    if (!r)
      throw Error(ErrorCode::input_missing, "tile " + std::to_string(tile_id) + " has no " +
                                                modality_name(kind) + " raster");
    return *r;
  }
};

}  // namespace mayakit
