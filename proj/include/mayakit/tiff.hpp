#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mayakit/error.hpp"
#include "mayakit/raster.hpp"

namespace mayakit {

// Reader/writer for the raster container used throughout: little-endian
// baseline TIFF, one IFD, uncompressed strips, pixel-interleaved samples,
// uint8 or float32. Everything else (compression, tiling, big-endian files,
// multi-IFD stacks) is rejected explicitly rather than half-supported, so a
// round trip is bit-exact by construction.
namespace tiff_detail {

enum : std::uint16_t {
  tag_image_width = 256,
  tag_image_length = 257,
  tag_bits_per_sample = 258,
  tag_compression = 259,
  tag_photometric = 262,
  tag_strip_offsets = 273,
  tag_samples_per_pixel = 277,
  tag_rows_per_strip = 278,
  tag_strip_byte_counts = 279,
  tag_planar_configuration = 284,
  tag_tile_width = 322,
  tag_tile_length = 323,
  tag_tile_offsets = 324,
  tag_tile_byte_counts = 325,
  tag_sample_format = 339,
};

enum : std::uint16_t {
  type_byte = 1,
  type_short = 3,
  type_long = 4,
};

inline std::uint16_t load_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0]) | static_cast<std::uint16_t>(p[1]) << 8;
}
inline std::uint32_t load_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}
inline void store_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
inline void store_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

struct Reader {
  std::span<const std::uint8_t> bytes;

  void require(std::size_t offset, std::size_t count, const char* what) const {
    if (offset + count > bytes.size() || offset + count < offset)
      throw Error(ErrorCode::malformed, std::string("file truncated reading ") + what);
  }
  std::uint16_t u16(std::size_t offset, const char* what) const {
    require(offset, 2, what);
    return load_u16(bytes.data() + offset);
  }
  std::uint32_t u32(std::size_t offset, const char* what) const {
    require(offset, 4, what);
    return load_u32(bytes.data() + offset);
  }
};

inline std::size_t type_size(std::uint16_t type) {
  switch (type) {
    case type_byte: return 1;
    case type_short: return 2;
    case type_long: return 4;
    default: return 0;
  }
}

// Entry values for the tags this subset understands (BYTE/SHORT/LONG only).
inline std::vector<std::uint64_t> entry_values(const Reader& reader, std::size_t entry_offset) {
  const std::uint16_t type = reader.u16(entry_offset + 2, "entry type");
  const std::uint32_t count = reader.u32(entry_offset + 4, "entry count");
  const std::size_t elem = type_size(type);
  if (elem == 0)
    throw Error(ErrorCode::unsupported_feature, "unsupported entry type for a required tag");
  const std::size_t total = elem * count;
  std::size_t at;
  if (total <= 4) {
    at = entry_offset + 8;
  } else {
    at = reader.u32(entry_offset + 8, "entry value offset");
  }
  reader.require(at, total, "entry values");
  std::vector<std::uint64_t> values(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint8_t* p = reader.bytes.data() + at + i * elem;
    values[i] = elem == 1 ? *p : elem == 2 ? load_u16(p) : load_u32(p);
  }
  return values;
}

}  // namespace tiff_detail

inline Raster read_tiff(std::span<const std::uint8_t> bytes,
                        std::optional<ModalityKind> expected = std::nullopt) {
  using namespace tiff_detail;
  Reader reader{bytes};
  reader.require(0, 8, "header");
  if (bytes[0] == 'M' && bytes[1] == 'M')
    throw Error(ErrorCode::unsupported_feature, "big-endian TIFF");
  if (bytes[0] != 'I' || bytes[1] != 'I' || load_u16(bytes.data() + 2) != 42)
    throw Error(ErrorCode::malformed, "not a TIFF header");

  const std::uint32_t ifd_offset = reader.u32(4, "IFD offset");
  const std::uint16_t entry_count = reader.u16(ifd_offset, "IFD entry count");
  if (entry_count == 0) throw Error(ErrorCode::malformed, "empty IFD");

  std::map<std::uint16_t, std::size_t> entries;  // tag -> entry offset
  for (std::uint16_t i = 0; i < entry_count; ++i) {
    const std::size_t at = ifd_offset + 2 + std::size_t(i) * 12;
    reader.require(at, 12, "IFD entry");
    entries[load_u16(bytes.data() + at)] = at;
  }
  const std::uint32_t next_ifd = reader.u32(ifd_offset + 2 + std::size_t(entry_count) * 12,
                                            "next IFD offset");
  if (next_ifd != 0) throw Error(ErrorCode::unsupported_feature, "multiple IFDs");

  if (entries.count(tag_tile_width) || entries.count(tag_tile_length) ||
      entries.count(tag_tile_offsets) || entries.count(tag_tile_byte_counts))
    throw Error(ErrorCode::unsupported_feature, "tiled organization");

  auto values_of = [&](std::uint16_t tag) { return entry_values(reader, entries.at(tag)); };
  auto scalar = [&](std::uint16_t tag, std::uint64_t fallback,
                    bool required = false) -> std::uint64_t {
    auto it = entries.find(tag);
    if (it == entries.end()) {
      if (required) throw Error(ErrorCode::malformed, "missing required tag");
      return fallback;
    }
    const auto values = entry_values(reader, it->second);
    if (values.empty()) throw Error(ErrorCode::malformed, "tag with no values");
    return values[0];
  };

  const std::uint64_t width = scalar(tag_image_width, 0, true);
  const std::uint64_t height = scalar(tag_image_length, 0, true);
  const std::uint64_t spp = scalar(tag_samples_per_pixel, 1);
  if (width < 1 || height < 1 || spp < 1)
    throw Error(ErrorCode::malformed, "degenerate image dimensions");
  if (width * height * spp > (std::uint64_t(1) << 31))
    throw Error(ErrorCode::malformed, "image implausibly large");

  if (scalar(tag_compression, 1) != 1)
    throw Error(ErrorCode::unsupported_feature, "compressed data");
  if (scalar(tag_planar_configuration, 1) != 1)
    throw Error(ErrorCode::unsupported_feature, "planar (band-sequential) configuration");

  if (!entries.count(tag_bits_per_sample))
    throw Error(ErrorCode::malformed, "missing BitsPerSample");
  const auto bits = values_of(tag_bits_per_sample);
  if (bits.size() != 1 && bits.size() != spp)
    throw Error(ErrorCode::malformed, "BitsPerSample count disagrees with SamplesPerPixel");
  for (auto b : bits)
    if (b != bits[0]) throw Error(ErrorCode::unsupported_feature, "mixed sample widths");

  std::vector<std::uint64_t> formats{1};
  if (entries.count(tag_sample_format)) {
    formats = values_of(tag_sample_format);
    for (auto f : formats)
      if (f != formats[0]) throw Error(ErrorCode::unsupported_feature, "mixed sample formats");
  }

  SampleType sample_type;
  if (bits[0] == 8 && formats[0] == 1) {
    sample_type = SampleType::u8;
  } else if (bits[0] == 32 && formats[0] == 3) {
    sample_type = SampleType::f32;
  } else {
    throw Error(ErrorCode::unsupported_feature,
                "sample layout " + std::to_string(bits[0]) + "-bit format " +
                    std::to_string(formats[0]) + " (only uint8 and float32 supported)");
  }

  if (!entries.count(tag_strip_offsets) || !entries.count(tag_strip_byte_counts))
    throw Error(ErrorCode::malformed, "missing strip layout tags");
  const auto offsets = values_of(tag_strip_offsets);
  const auto counts = values_of(tag_strip_byte_counts);
  if (offsets.size() != counts.size())
    throw Error(ErrorCode::malformed, "strip offset/byte-count mismatch");

  const std::uint64_t rows_per_strip = scalar(tag_rows_per_strip, height);
  if (rows_per_strip == 0) throw Error(ErrorCode::malformed, "RowsPerStrip of zero");
  const std::uint64_t expected_strips =
      rows_per_strip >= height ? 1 : (height + rows_per_strip - 1) / rows_per_strip;
  if (offsets.size() != expected_strips)
    throw Error(ErrorCode::malformed, "strip count disagrees with RowsPerStrip");

  const std::size_t bytes_per_row = static_cast<std::size_t>(width) * spp * sample_size(sample_type);
  Raster raster = Raster::make(static_cast<std::uint32_t>(width), static_cast<std::uint32_t>(height),
                               static_cast<std::uint32_t>(spp), sample_type);
  std::size_t filled = 0;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    const std::uint64_t rows =
        std::min<std::uint64_t>(rows_per_strip, height - i * rows_per_strip);
    const std::size_t want = static_cast<std::size_t>(rows) * bytes_per_row;
    if (counts[i] != want)
      throw Error(ErrorCode::malformed, "strip byte count inconsistent with uncompressed size");
    reader.require(offsets[i], want, "strip data");
    std::memcpy(raster.data.data() + filled, bytes.data() + offsets[i], want);
    filled += want;
  }
  if (filled != raster.data.size())
    throw Error(ErrorCode::malformed, "strips do not cover the image");

  if (expected) validate_modality(raster, *expected, /*strict=*/false);
  return raster;
}

inline std::vector<std::uint8_t> write_tiff(const Raster& raster) {
  using namespace tiff_detail;
  if (!raster.valid()) throw Error(ErrorCode::invalid_argument, "invalid raster");

  const std::size_t elem = sample_size(raster.sample_type);
  const std::size_t bytes_per_row = static_cast<std::size_t>(raster.width) * raster.bands * elem;
  // Strips target ~64 KiB apiece, mirroring common encoder defaults.
  const std::uint32_t rows_per_strip = static_cast<std::uint32_t>(
      std::clamp<std::size_t>(65536 / bytes_per_row, 1, raster.height));
  const std::uint32_t n_strips = (raster.height + rows_per_strip - 1) / rows_per_strip;

  std::vector<std::uint8_t> out;
  out.reserve(raster.data.size() + 512);
  out.push_back('I');
  out.push_back('I');
  store_u16(out, 42);
  store_u32(out, 0);  // IFD offset, patched below

  auto pad_even = [&out] {
    if (out.size() % 2) out.push_back(0);
  };

  std::vector<std::uint32_t> strip_offsets(n_strips), strip_counts(n_strips);
  for (std::uint32_t i = 0; i < n_strips; ++i) {
    const std::uint32_t rows = std::min(rows_per_strip, raster.height - i * rows_per_strip);
    const std::size_t count = static_cast<std::size_t>(rows) * bytes_per_row;
    strip_offsets[i] = static_cast<std::uint32_t>(out.size());
    strip_counts[i] = static_cast<std::uint32_t>(count);
    const std::size_t begin = static_cast<std::size_t>(i) * rows_per_strip * bytes_per_row;
    out.insert(out.end(), raster.data.begin() + begin, raster.data.begin() + begin + count);
    pad_even();
  }

  // Array values that do not fit a 4-byte entry value go in front of the IFD.
  auto place_shorts = [&](const std::vector<std::uint16_t>& values) -> std::uint32_t {
    pad_even();
    const std::uint32_t at = static_cast<std::uint32_t>(out.size());
    for (auto v : values) store_u16(out, v);
    return at;
  };
  auto place_longs = [&](const std::vector<std::uint32_t>& values) -> std::uint32_t {
    pad_even();
    const std::uint32_t at = static_cast<std::uint32_t>(out.size());
    for (auto v : values) store_u32(out, v);
    return at;
  };

  const std::uint16_t bits = raster.sample_type == SampleType::u8 ? 8 : 32;
  const std::uint16_t format = raster.sample_type == SampleType::u8 ? 1 : 3;
  std::uint32_t bits_at = 0, format_at = 0, offsets_at = 0, counts_at = 0;
  if (raster.bands > 2) {
    bits_at = place_shorts(std::vector<std::uint16_t>(raster.bands, bits));
    format_at = place_shorts(std::vector<std::uint16_t>(raster.bands, format));
  }
  if (n_strips > 1) {
    offsets_at = place_longs(strip_offsets);
    counts_at = place_longs(strip_counts);
  }

  pad_even();
  const std::uint32_t ifd_at = static_cast<std::uint32_t>(out.size());
  out[4] = static_cast<std::uint8_t>(ifd_at & 0xff);
  out[5] = static_cast<std::uint8_t>((ifd_at >> 8) & 0xff);
  out[6] = static_cast<std::uint8_t>((ifd_at >> 16) & 0xff);
  out[7] = static_cast<std::uint8_t>((ifd_at >> 24) & 0xff);

  struct EntrySpec {
    std::uint16_t tag;
    std::uint16_t type;
    std::uint32_t count;
    std::uint32_t value;  // inline value or offset
    std::uint16_t inline_short = 0;
    bool short_pair = false;  // two shorts packed inline
    std::uint16_t inline_short2 = 0;
  };
  std::vector<EntrySpec> specs;
  specs.push_back({tag_image_width, type_long, 1, raster.width});
  specs.push_back({tag_image_length, type_long, 1, raster.height});
  if (raster.bands == 1) {
    specs.push_back({tag_bits_per_sample, type_short, 1, bits});
  } else if (raster.bands == 2) {
    specs.push_back({tag_bits_per_sample, type_short, 2, 0, bits, true, bits});
  } else {
    specs.push_back({tag_bits_per_sample, type_short, raster.bands, bits_at});
  }
  specs.push_back({tag_compression, type_short, 1, 1});
  specs.push_back({tag_photometric, type_short, 1, 1});  // BlackIsZero
  if (n_strips == 1) {
    specs.push_back({tag_strip_offsets, type_long, 1, strip_offsets[0]});
  } else {
    specs.push_back({tag_strip_offsets, type_long, n_strips, offsets_at});
  }
  specs.push_back({tag_samples_per_pixel, type_short, 1, static_cast<std::uint16_t>(raster.bands)});
  specs.push_back({tag_rows_per_strip, type_long, 1, rows_per_strip});
  if (n_strips == 1) {
    specs.push_back({tag_strip_byte_counts, type_long, 1, strip_counts[0]});
  } else {
    specs.push_back({tag_strip_byte_counts, type_long, n_strips, counts_at});
  }
  specs.push_back({tag_planar_configuration, type_short, 1, 1});
  if (raster.bands == 1) {
    specs.push_back({tag_sample_format, type_short, 1, format});
  } else if (raster.bands == 2) {
    specs.push_back({tag_sample_format, type_short, 2, 0, format, true, format});
  } else {
    specs.push_back({tag_sample_format, type_short, raster.bands, format_at});
  }

  store_u16(out, static_cast<std::uint16_t>(specs.size()));
  for (const auto& spec : specs) {
    store_u16(out, spec.tag);
    store_u16(out, spec.type);
    store_u32(out, spec.count);
    if (spec.short_pair) {
      store_u16(out, spec.inline_short);
      store_u16(out, spec.inline_short2);
    } else if (spec.type == type_short && spec.count == 1) {
      store_u16(out, static_cast<std::uint16_t>(spec.value));
      store_u16(out, 0);
    } else {
      store_u32(out, spec.value);
    }
  }
  store_u32(out, 0);  // no further IFDs
  return out;
}

inline Raster read_tiff_file(const std::filesystem::path& path,
                             std::optional<ModalityKind> expected = std::nullopt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::input_missing, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return read_tiff(bytes, expected);
}

inline void write_tiff_file(const std::filesystem::path& path, const Raster& raster) {
  const std::vector<std::uint8_t> bytes = write_tiff(raster);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::input_missing, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::stage_failure, "short write to " + path.string());
}

}  // namespace mayakit
