// Acceptance suite: runs every criterion end to end and prints one pass/fail
// line per criterion. Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mayakit/mayakit.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace mayakit;

namespace {

struct Options {
  std::string cli;
  fs::path workdir;
  std::string python = "python3";
  std::string crosscheck;
};

Options options;

struct CheckFailure {
  std::string message;
};

void require(bool condition, const std::string& message) {
  if (!condition) throw CheckFailure{message};
}

int run_command(const std::string& command) {
  const int status = std::system(command.c_str());
  return status;
}

void run_cli(const std::string& args) {
  const std::string command = options.cli + " " + args + " 2>>" +
                              (options.workdir / "cli_stderr.log").string();
  require(run_command(command) == 0, "CLI failed: " + args);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(bool(in), "missing file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// ---------------------------------------------------------------------------
// 1. Leaderboard arithmetic
// ---------------------------------------------------------------------------

struct PublishedRow {
  const char* name;
  double overall, aguadas, platforms, buildings;
};

// Final top-7 leaderboard (two teams share rank 7).
const PublishedRow published[] = {
    {"Aksell", 0.8341, 0.9844, 0.7651, 0.7530},
    {"ArchAI", 0.8316, 0.9873, 0.7611, 0.7464},
    {"German Computer Archaeologists", 0.8275, 0.9851, 0.7404, 0.7569},
    {"dmitrykonov", 0.8262, 0.9836, 0.7542, 0.7409},
    {"The Sentinels", 0.8183, 0.9854, 0.7300, 0.7394},
    {"taka", 0.8127, 0.9771, 0.7354, 0.7256},
    {"cayala", 0.8110, 0.9863, 0.7082, 0.7386},
    {"sankovalev", 0.8110, 0.9844, 0.7421, 0.7066},
};

void criterion_leaderboard() {
  const auto start = std::chrono::steady_clock::now();

  // Feed the rows scrambled; the module must restore the printed order.
  std::vector<LeaderboardEntry> entries;
  for (int i : {4, 7, 0, 3, 6, 1, 5, 2}) {
    const auto& row = published[i];
    entries.push_back({row.name, row.aguadas, row.platforms, row.buildings});
  }
  const auto rows = leaderboard(entries);
  require(rows.size() == 8, "expected 8 rows");

  int within_strict = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i].name == published[i].name,
            "ordering mismatch at position " + std::to_string(i) + ": " + rows[i].name);
    const double err = std::abs(rows[i].avg_iou - published[i].overall);
    // The class averages in the table are themselves rounded to 4 decimals,
    // so the recomputed overall can sit up to one display ulp (1e-4) from
    // the printed value; 7 of the 8 rows land within the half-ulp 5e-5.
    require(err <= 1e-4 + 1e-12,
            std::string(rows[i].name) + " overall off by " + std::to_string(err));
    if (err <= 5e-5 + 1e-12) ++within_strict;
  }
  require(within_strict >= 7, "fewer than 7 rows within 5e-5");

  const int expected_ranks[] = {1, 2, 3, 4, 5, 6, 7, 7};
  for (std::size_t i = 0; i < rows.size(); ++i)
    require(rows[i].rank == expected_ranks[i],
            std::string(rows[i].name) + " rank " + std::to_string(rows[i].rank));

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  require(elapsed < 1.0, "leaderboard arithmetic exceeded 1 s");
}

// ---------------------------------------------------------------------------
// 2. Published metrics-table consistency
// ---------------------------------------------------------------------------

void criterion_metrics_table() {
  const auto start = std::chrono::steady_clock::now();
  struct MetricsRow {
    double iou_pos, iou_neg, miou;
  };
  // (IoU+, IoU-, mIoU) for building/platform/aguada/average x train/valid.
  const MetricsRow table[] = {
      {0.7330, 0.9948, 0.8639}, {0.7215, 0.9946, 0.8581},
      {0.7367, 0.9899, 0.8633}, {0.6350, 0.9899, 0.8125},
      {0.3815, 0.9969, 0.6892}, {0.4034, 0.9979, 0.7006},
      {0.6171, 0.9939, 0.8055}, {0.5866, 0.9941, 0.7904},
  };
  for (const auto& row : table) {
    const double mean = (row.iou_pos + row.iou_neg) / 2.0;
    require(std::abs(mean - row.miou) <= 5e-5 + 1e-12,
            "mIoU inconsistency: " + std::to_string(mean) + " vs " + std::to_string(row.miou));
  }
  // The module computes mIoU by exactly this aggregation.
  Rng rng(2);
  const auto pred = oracle::random_mask(16, 16, rng);
  const auto gt = oracle::random_mask(16, 16, rng);
  const SegMetrics m = tile_metrics(pred, gt);
  require(m.miou == (m.iou_pos + m.iou_neg) / 2.0, "SegMetrics miou is not the IoU mean");

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  require(elapsed < 1.0, "metrics table check exceeded 1 s");
}

// ---------------------------------------------------------------------------
// 3. IoU oracle equivalence
// ---------------------------------------------------------------------------

void criterion_iou_oracle() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::uint32_t w = 1 + std::uint32_t(rng.uniform(64));
    const std::uint32_t h = 1 + std::uint32_t(rng.uniform(64));
    const auto pred = oracle::random_mask(w, h, rng, rng.uniform_real());
    const auto gt = oracle::random_mask(w, h, rng, rng.uniform_real());
    const auto c = oracle::confusion(pred, gt);

    require(tile_iou(pred, gt) == oracle::iou(pred, gt), "tile_iou disagrees with the oracle");
    const SegMetrics m = tile_metrics(pred, gt);
    require(m.iou_pos == oracle::safe_ratio(c.tp(), c.tp() + c.fp() + c.fn()), "iou_pos");
    require(m.iou_neg == oracle::safe_ratio(c.tn(), c.tn() + c.fp() + c.fn()), "iou_neg");
    require(m.miou == (m.iou_pos + m.iou_neg) / 2.0, "miou");
    require(m.tpr == oracle::safe_ratio(c.tp(), c.tp() + c.fn()), "tpr");
    require(m.fpr == oracle::safe_ratio(c.fp(), c.fp() + c.tn()), "fpr");
    require(m.tnr == oracle::safe_ratio(c.tn(), c.tn() + c.fp()), "tnr");
    require(m.fnr == oracle::safe_ratio(c.fn(), c.tp() + c.fn()), "fnr");
    require(m.ppv == oracle::safe_ratio(c.tp(), c.tp() + c.fp()), "ppv");
  }

  const auto empty = BinaryMask::make(64, 64);
  require(tile_iou(empty, empty) == 1.0, "both-empty must score 1.0");
  auto left = BinaryMask::make(8, 8);
  auto right = BinaryMask::make(8, 8);
  left.set(0, 0, true);
  right.set(7, 7, true);
  require(tile_iou(left, right) == 0.0, "disjoint masks must score 0.0");

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  require(elapsed < 10.0, "IoU oracle check exceeded 10 s");
}

// ---------------------------------------------------------------------------
// 4. Threshold semantics
// ---------------------------------------------------------------------------

void criterion_threshold() {
  ProbMap levels = ProbMap::make(256, 1);
  for (int q = 0; q < 256; ++q) levels.set(std::uint32_t(q), 0, float(q) / 255.0f);

  // t = 0.50 admits exactly the quantized levels >= 128...
  const auto at_half = binarize(levels, 0.50);
  for (int q = 0; q < 256; ++q)
    require(at_half.at(std::uint32_t(q), 0) == (q >= 128),
            "t=0.50 admitted the wrong set at level " + std::to_string(q));
  // ...which means a pixel needs confidence above 127/255 ~ 49.8%.
  require(std::abs(127.0 / 255.0 - 0.498) <= 1e-4, "49.8% effective cut");

  // T = 55 (t = 55/255) cuts at 21.57% +- 0.01%.
  const auto at_55 = binarize(levels, 55.0 / 255.0);
  for (int q = 0; q < 256; ++q)
    require(at_55.at(std::uint32_t(q), 0) == (q >= 55),
            "t=55/255 admitted the wrong set at level " + std::to_string(q));
  require(std::abs(55.0 / 255.0 - 0.2157) <= 1e-4, "21.57% effective cut");

  // Exhaustive threshold sweep: every quantized threshold admits a suffix.
  for (int cut = 0; cut <= 255; ++cut) {
    const auto mask = binarize(levels, double(cut) / 255.0);
    require(mask.count_true() == std::size_t(256 - cut),
            "threshold " + std::to_string(cut) + " admitted the wrong count");
  }
}

// ---------------------------------------------------------------------------
// 5. Morphology properties
// ---------------------------------------------------------------------------

void criterion_morphology() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto mask = oracle::random_mask(48, 48, rng, rng.uniform_real(0.2, 0.7));

    std::set<std::set<std::uint32_t>> got;
    for (const auto& region : connected_components(mask))
      got.insert(std::set<std::uint32_t>(region.pixels.begin(), region.pixels.end()));
    require(got == oracle::flood_regions(mask, true), "labeling disagrees with flood fill");

    const auto filtered = blob_filter(mask, 5, 3);
    require(blob_filter(filtered, 5, 3) == filtered, "blob_filter not idempotent");
    require(filtered.count_true() <= mask.count_true(), "blob_filter grew the mask");

    const auto filled = fill_holes(mask);
    require(fill_holes(filled) == filled, "fill_holes not idempotent");
    for (std::size_t i = 0; i < mask.bits.size(); ++i)
      require(!mask.bits[i] || filled.bits[i], "fill_holes dropped a true pixel");

    // Complement flood fill: every false region must reach the boundary.
    BinaryMask complement = BinaryMask::make(48, 48);
    for (std::size_t i = 0; i < filled.bits.size(); ++i) complement.bits[i] = !filled.bits[i];
    for (const auto& region : oracle::flood_regions(complement, false)) {
      bool touches = false;
      for (auto idx : region) {
        const std::uint32_t x = idx % 48, y = idx / 48;
        if (x == 0 || y == 0 || x == 47 || y == 47) touches = true;
      }
      require(touches, "an enclosed background region survived fill_holes");
    }
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  require(elapsed < 30.0, "morphology check exceeded 30 s");
}

// ---------------------------------------------------------------------------
// 6. Dihedral group laws and TTA
// ---------------------------------------------------------------------------

class PointwisePredictor final : public Predictor {
 public:
  ProbMap predict(const TileRecord& tile, StructureClass) const override {
    const Raster& als = tile.require(ModalityKind::als);
    ProbMap map = ProbMap::make(als.width, als.height);
    for (std::uint32_t y = 0; y < als.height; ++y)
      for (std::uint32_t x = 0; x < als.width; ++x)
        map.set(x, y, float(als.u8(x, y, 0)) / 255.0f);
    return map;
  }
  std::string name() const override { return "pointwise"; }
};

void criterion_dihedral() {
  Rng rng(6);
  Raster raster = Raster::make(21, 21, 2, SampleType::u8);
  for (auto& v : raster.data) v = std::uint8_t(rng.uniform(256));

  // All 64 compositions closed and consistent with sequential application.
  for (Dihedral a : all_dihedral)
    for (Dihedral b : all_dihedral) {
      const Dihedral c = dihedral_compose(a, b);
      require(int(c) >= 0 && int(c) < 8, "composition left the group");
      require(dihedral_apply(dihedral_apply(raster, b), a) == dihedral_apply(raster, c),
              "composition table disagrees with application");
    }
  for (Dihedral e : all_dihedral) {
    require(dihedral_apply(dihedral_apply(raster, e), dihedral_inverse(e)) == raster,
            "apply-inverse is not the identity");
  }

  // TTA of a constant predictor is that constant everywhere, exactly.
  TileRecord tile;
  tile.tile_id = 0;
  tile.rasters[ModalityKind::als] = raster;
  Raster als3 = Raster::make(21, 21, 3, SampleType::u8);
  for (auto& v : als3.data) v = std::uint8_t(rng.uniform(256));
  tile.rasters[ModalityKind::als] = als3;

  const ProbMap constant = tta_predict(ConstantPredictor(0.7f, 21), tile,
                                       StructureClass::building);
  for (float v : constant.values) require(v == 0.7f, "constant TTA drifted");

  // An equivariant predictor passes through TTA unchanged (within 1e-7).
  const PointwisePredictor pointwise;
  const ProbMap plain = pointwise.predict(tile, StructureClass::building);
  const ProbMap averaged = tta_predict(pointwise, tile, StructureClass::building);
  for (std::size_t i = 0; i < plain.values.size(); ++i)
    require(std::abs(plain.values[i] - averaged.values[i]) <= 1e-7f,
            "equivariant TTA deviates from the plain prediction");
}

// ---------------------------------------------------------------------------
// 7. Statistics oracle
// ---------------------------------------------------------------------------

void criterion_statistics() {
  Rng rng(7);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = 1 + rng.uniform(32);
    std::vector<double> series(n);
    for (auto& v : series) v = rng.uniform_real();
    const TemporalStats got = temporal_stats(series);
    const oracle::Stats want = oracle::stats(series);
    require(std::abs(got.mean - want.mean) <= 1e-9, "mean");
    require(std::abs(got.median - want.median) <= 1e-9, "median");
    require(std::abs(got.stddev - want.stddev) <= 1e-9, "stddev");
    require(std::abs(got.cv - want.cv) <= 1e-9, "cv");
    require(std::abs(got.p5 - want.p5) <= 1e-9, "p5");
    require(std::abs(got.p95 - want.p95) <= 1e-9, "p95");
  }

  // Normalization anchors, exact at the dB entry point.
  require(unit_from_db(-30.0) == 0.0, "-30 dB anchor");
  require(unit_from_db(5.0) == 1.0, "+5 dB anchor");
  require(unit_from_db(-12.5) == 0.5, "-12.5 dB anchor");
  require(std::abs(sigma0_to_unit(std::pow(10.0, -3.0)) - 0.0) <= 1e-12, "sigma0 -30 dB");
  require(std::abs(sigma0_to_unit(std::pow(10.0, 0.5)) - 1.0) <= 1e-12, "sigma0 +5 dB");
  require(std::abs(sigma0_to_unit(std::pow(10.0, -1.25)) - 0.5) <= 1e-12, "sigma0 -12.5 dB");

  // Built tiles are 120 bands with the layout order: give every
  // (orbit, polarization, year) group its own constant and check each
  // period/statistic slot.
  std::vector<S1Acquisition> acqs;
  auto group_value = [](int orbit, int pol, int year) {
    return 0.01 * (1 + orbit * 8 + pol * 4 + (year - 2017)) + 0.1;
  };
  for (int orbit = 0; orbit < 2; ++orbit)
    for (int pol = 0; pol < 2; ++pol)
      for (int year = 2017; year <= 2020; ++year) {
        Raster image = Raster::make(24, 24, 1, SampleType::f32);
        for (auto& v : image.f32_samples()) v = float(group_value(orbit, pol, year));
        acqs.push_back({Orbit(orbit), Polarization(pol), year, std::move(image)});
      }
  const Raster tile = build_s1_tile(acqs, S1Input::unit_interval);
  require(tile.bands == 120, "S1 tile must have 120 bands");
  for (int orbit = 0; orbit < 2; ++orbit)
    for (int pol = 0; pol < 2; ++pol) {
      for (int period = 0; period < 4; ++period) {
        const int base = S1Layout::band_index(period, Orbit(orbit), Polarization(pol), 0);
        const double v = group_value(orbit, pol, 2017 + period);
        require(std::abs(tile.f32(5, 9, std::uint32_t(base)) - v) <= 1e-7,
                "per-year mean band out of place");
        require(tile.f32(5, 9, std::uint32_t(base + 2)) == 0.0f, "per-year std must vanish");
      }
      std::vector<double> pooled;
      for (int year = 2017; year <= 2020; ++year) pooled.push_back(group_value(orbit, pol, year));
      const auto want = oracle::stats(pooled);
      const int base = S1Layout::band_index(4, Orbit(orbit), Polarization(pol), 0);
      require(std::abs(tile.f32(5, 9, std::uint32_t(base)) - want.mean) <= 1e-7, "pooled mean");
      require(std::abs(tile.f32(5, 9, std::uint32_t(base + 2)) - want.stddev) <= 1e-7,
              "pooled std");
      require(std::abs(tile.f32(5, 9, std::uint32_t(base + 5)) - want.p95) <= 1e-7, "pooled p95");
    }
}

// ---------------------------------------------------------------------------
// 8. Synthesis contract
// ---------------------------------------------------------------------------

void criterion_synthesis() {
  Rng seedgen(8);
  std::vector<SynthSource> backgrounds, donors;
  for (int i = 0; i < 5; ++i) {
    Raster image = Raster::make(64, 64, 3, SampleType::u8);
    for (auto& v : image.data) v = std::uint8_t(seedgen.uniform(256));
    backgrounds.push_back({std::uint64_t(i), std::move(image), BinaryMask::make(64, 64)});
  }
  for (int i = 0; i < 7; ++i) {
    SynthSource donor;
    donor.tile_id = 100 + i;
    donor.image = Raster::make(64, 64, 3, SampleType::u8);
    for (auto& v : donor.image.data) v = std::uint8_t(seedgen.uniform(256));
    donor.mask = BinaryMask::make(64, 64);
    // A few irregular components.
    for (int blob = 0; blob < 1 + int(seedgen.uniform(3)); ++blob) {
      const std::uint32_t cx = 6 + std::uint32_t(seedgen.uniform(50));
      const std::uint32_t cy = 6 + std::uint32_t(seedgen.uniform(50));
      for (int dy = -3; dy <= 3; ++dy)
        for (int dx = -3; dx <= 3; ++dx)
          if (seedgen.bernoulli(0.75) || (dx == 0 && dy == 0))
            donor.mask.set(cx + dx, cy + dy, true);
    }
    donors.push_back(std::move(donor));
  }

  const CropStyle styles[] = {CropStyle::rectangular(), CropStyle::pixel_precise(),
                              CropStyle::padded(3)};
  int total = 0;
  for (const CropStyle style : styles) {
    const std::uint64_t seed = 800 + total;
    const auto dataset = generate_dataset(backgrounds, donors, style, 67, seed);
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
      const auto& entry = dataset.manifest[i];
      const auto& sample = dataset.samples[i];

      // Replay the per-sample stream to recover the donor footprint.
      const SynthSource* donor = nullptr;
      for (const auto& d : donors)
        if (d.tile_id == entry.donor_id) donor = &d;
      require(donor != nullptr, "manifest names an unknown donor");
      Rng replay = derive_rng(seed, i);
      replay.uniform(donors.size());
      const Patch patch = extract_instance(donor->image, donor->mask, style, replay);

      BinaryMask expected = BinaryMask::make(64, 64);
      for (std::uint32_t y = 0; y < patch.footprint.height; ++y)
        for (std::uint32_t x = 0; x < patch.footprint.width; ++x)
          if (patch.footprint.at(x, y))
            expected.set(entry.paste_x + x, entry.paste_y + y, true);
      require(sample.mask == expected, "generated mask is not the translated footprint");

      if (style.kind == CropStyle::Kind::pixel_precise) {
        const auto& background = backgrounds[i % backgrounds.size()];
        for (std::uint32_t y = 0; y < 64; ++y)
          for (std::uint32_t x = 0; x < 64; ++x)
            if (!sample.mask.at(x, y))
              for (std::uint32_t b = 0; b < 3; ++b)
                require(sample.image.u8(x, y, b) == background.image.u8(x, y, b),
                        "pixel-precise paste touched the background");
      }
      ++total;
    }
  }
  require(total == 201, "expected 201 generated samples");

  // CLI manifests are identical under different job counts.
  const fs::path data = options.workdir / "synth_data";
  if (!fs::exists(data / "manifest.json"))
    run_cli("--seed 42 fixtures --out " + data.string() + " --no-raw-s1");
  const fs::path out1 = options.workdir / "synth_j1";
  const fs::path out2 = options.workdir / "synth_j4";
  fs::remove_all(out1);
  fs::remove_all(out2);
  run_cli("--seed 9 --jobs 1 synth --data " + data.string() + " --out " + out1.string() +
          " --class building --style precise --count 24");
  run_cli("--seed 9 --jobs 4 synth --data " + data.string() + " --out " + out2.string() +
          " --class building --style precise --count 24");
  require(slurp(out1 / "synth_manifest.json") == slurp(out2 / "synth_manifest.json"),
          "synth manifests differ across --jobs");
  require(slurp(out1 / "tile_100005_lidar.tif") == slurp(out2 / "tile_100005_lidar.tif"),
          "synth outputs differ across --jobs");
}

// ---------------------------------------------------------------------------
// 9. Sampling and splitting
// ---------------------------------------------------------------------------

void criterion_sampling() {
  // Presence-stratified 5-fold split with imbalance <= 1 per stratum.
  std::vector<TileClassSummary> tiles;
  for (int i = 0; i < 47; ++i) {
    TileClassSummary s;
    s.tile_id = i;
    s.total_pixels = 100;
    if (i % 3 == 0) s.class_pixels[int(StructureClass::building)] = 10;
    s.union_pixels = s.class_pixels[int(StructureClass::building)];
    tiles.push_back(s);
  }
  const auto folds =
      stratified_kfold(tiles, 5, FoldStrategy::presence(StructureClass::building), 4242);
  int with[5] = {0}, without[5] = {0};
  for (const auto& [id, fold] : folds.assignment)
    (id % 3 == 0 ? with : without)[fold] += 1;
  for (int stratum = 0; stratum < 2; ++stratum) {
    int lo = 1 << 20, hi = 0;
    for (int f = 0; f < 5; ++f) {
      const int v = stratum == 0 ? with[f] : without[f];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    require(hi - lo <= 1, "per-stratum fold imbalance exceeds 1");
  }

  // Aguada bins for the worked fractions.
  const double fractions[] = {0.0, 0.01, 0.1, 0.2};
  const int expected_bins[] = {0, 0, 1, 2};
  for (int i = 0; i < 4; ++i)
    require(fraction_bin(fractions[i], 0.05, 0.15) == expected_bins[i],
            "aguada bin mismatch at fraction " + std::to_string(fractions[i]));

  // Equal-preset draw frequencies within 2% of a quarter at n = 100000.
  std::vector<TileClassSummary> pool;
  for (int i = 0; i < 40; ++i) {
    TileClassSummary s;
    s.tile_id = i;
    s.total_pixels = 100;
    if (i >= 10 && i < 20) s.class_pixels[int(StructureClass::aguada)] = 5;
    if (i >= 20 && i < 30) s.class_pixels[int(StructureClass::building)] = 5;
    if (i >= 30) s.class_pixels[int(StructureClass::platform)] = 5;
    s.union_pixels = s.class_pixels[0] + s.class_pixels[1] + s.class_pixels[2];
    pool.push_back(s);
  }
  const auto draws = weighted_sample(pool, SamplerWeights::equal(), 100000, 20250810);
  std::size_t counts[4] = {0, 0, 0, 0};
  for (const auto& draw : draws) ++counts[draw.class_index];
  for (int c = 0; c < 4; ++c) {
    const double freq = double(counts[c]) / 100000.0;
    require(std::abs(freq - 0.25) <= 0.02,
            "class " + std::to_string(c) + " frequency " + std::to_string(freq));
  }

  // Oversampling arithmetic: 2 of 10 tiles at factor 6 -> 20.
  std::vector<TileClassSummary> ten;
  for (int i = 0; i < 10; ++i) {
    TileClassSummary s;
    s.tile_id = i;
    s.total_pixels = 100;
    if (i < 2) s.class_pixels[int(StructureClass::aguada)] = 3;
    ten.push_back(s);
  }
  require(oversample(ten, StructureClass::aguada, 6).size() == 20, "oversample length");
}

// ---------------------------------------------------------------------------
// 10. Raster roundtrip + reference cross-check
// ---------------------------------------------------------------------------

void criterion_roundtrip() {
  struct Case {
    const char* name;
    std::uint32_t w, h, b;
    SampleType type;
  };
  const Case cases[] = {
      {"s1", 24, 24, 120, SampleType::f32},
      {"s2", 24, 24, 221, SampleType::f32},
      {"als", 480, 480, 3, SampleType::u8},
      {"mask", 480, 480, 1, SampleType::u8},
  };

  const fs::path dir = options.workdir / "crosscheck";
  fs::remove_all(dir);
  fs::create_directories(dir);

  Rng rng(10);
  std::vector<Raster> originals;
  json descriptors = json::array();
  for (const auto& c : cases) {
    Raster raster = Raster::make(c.w, c.h, c.b, c.type);
    if (c.type == SampleType::u8) {
      for (auto& v : raster.data) v = std::uint8_t(rng.uniform(256));
    } else {
      for (auto& v : raster.f32_samples()) v = float(rng.uniform_real(-50.0, 50.0));
    }
    const auto bytes = write_tiff(raster);
    require(read_tiff(bytes) == raster, std::string("roundtrip failed for ") + c.name);

    std::ofstream tif(dir / (std::string("ours_") + c.name + ".tif"), std::ios::binary);
    tif.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    std::ofstream bin(dir / (std::string(c.name) + ".bin"), std::ios::binary);
    bin.write(reinterpret_cast<const char*>(raster.data.data()),
              std::streamsize(raster.data.size()));
    descriptors.push_back(json{{"name", c.name},
                               {"width", c.w},
                               {"height", c.h},
                               {"bands", c.b},
                               {"dtype", c.type == SampleType::u8 ? "uint8" : "<f4"}});
    originals.push_back(std::move(raster));
  }
  std::ofstream(dir / "cases.json") << descriptors.dump();

  const std::string command = options.python + " " + options.crosscheck + " " + dir.string() +
                              " >" + (dir / "crosscheck.log").string() + " 2>&1";
  require(run_command(command) == 0,
          "reference TIFF implementation disagreed (see crosscheck.log)");

  // Decode the reference encoder's files with our reader.
  for (std::size_t i = 0; i < originals.size(); ++i) {
    const Raster back = read_tiff_file(dir / (std::string("ref_") + cases[i].name + ".tif"));
    require(back == originals[i],
            std::string("decoding the reference file for ") + cases[i].name + " diverged");
  }
}

// ---------------------------------------------------------------------------
// 11. End-to-end desk-scale run
// ---------------------------------------------------------------------------

// Overall average IoU of the seeded fixture pipeline, pinned at the first
// green run; any drift means the pipeline stopped being deterministic.
constexpr const char* pinned_overall = "0.977377515184";

std::string run_pipeline(const fs::path& root) {
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string data = (root / "data").string();
  const std::string probs = (root / "probs").string();
  const std::string ens = (root / "ens").string();
  const std::string masks = (root / "masks").string();
  const std::string report = (root / "report.json").string();

  run_cli("--seed 42 --jobs 4 fixtures --out " + data + " --no-raw-s1");
  for (int variant = 0; variant < 3; ++variant)
    run_cli("--seed 42 --jobs 4 predict --data " + data + " --out " + probs +
            " --model baseline --variant " + std::to_string(variant) + " --tta");
  run_cli("--seed 42 --jobs 4 ensemble --probs " + probs + " --out " + ens +
          " --members baseline_v0,baseline_v1,baseline_v2 --mode soft");
  run_cli("--seed 42 --jobs 4 postprocess --probs " + ens + " --out " + masks +
          " --model ensemble --threshold 0.5 --min-area 24 --min-area-boundary 12 --fill-holes");
  run_cli("--seed 42 --jobs 4 score --pred " + masks + " --truth " + data + " --out " + report);
  return slurp(report);
}

void criterion_end_to_end() {
  const auto start = std::chrono::steady_clock::now();
  const std::string report_a = run_pipeline(options.workdir / "e2e_a");
  const std::string report_b = run_pipeline(options.workdir / "e2e_b");
  require(report_a == report_b, "reports differ between identically seeded runs");

  const json doc = json::parse(report_a);
  const double overall = doc["overall_avg_iou"].get<double>();
  require(overall > 0.0 && overall <= 1.0, "overall IoU out of range");

  std::ostringstream formatted;
  formatted.precision(12);
  formatted << overall;
  require(formatted.str() == pinned_overall,
          "overall IoU " + formatted.str() + " does not match the pinned value " +
              pinned_overall);

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  require(elapsed / 2.0 < 60.0, "end-to-end run exceeded 60 s");
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--cli") options.cli = argv[i + 1];
    else if (flag == "--workdir") options.workdir = argv[i + 1];
    else if (flag == "--python") options.python = argv[i + 1];
    else if (flag == "--crosscheck") options.crosscheck = argv[i + 1];
  }
  if (options.cli.empty() || options.workdir.empty() || options.crosscheck.empty()) {
    std::cerr << "usage: acceptance --cli PATH --workdir DIR --python PATH --crosscheck SCRIPT\n";
    return 2;
  }
  fs::create_directories(options.workdir);

  struct Criterion {
    int id;
    const char* label;
    std::function<void()> body;
  };
  const std::vector<Criterion> criteria = {
      {1, "leaderboard arithmetic reproduces the published table", criterion_leaderboard},
      {2, "published metrics table is mIoU-consistent", criterion_metrics_table},
      {3, "IoU and confusion metrics equal the brute-force oracle", criterion_iou_oracle},
      {4, "quantized threshold semantics", criterion_threshold},
      {5, "morphology idempotence and flood-fill equivalence", criterion_morphology},
      {6, "dihedral group laws and TTA invariances", criterion_dihedral},
      {7, "temporal statistics oracle and S1 layout", criterion_statistics},
      {8, "synthesis contract and job-count determinism", criterion_synthesis},
      {9, "sampling and splitting guarantees", criterion_sampling},
      {10, "raster roundtrip and reference TIFF cross-check", criterion_roundtrip},
      {11, "deterministic end-to-end desk-scale run", criterion_end_to_end},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    try {
      criterion.body();
      std::cout << "[PASS] criterion " << criterion.id << ": " << criterion.label << "\n";
    } catch (const CheckFailure& f) {
      std::cout << "[FAIL] criterion " << criterion.id << ": " << criterion.label << " — "
                << f.message << "\n";
      ++failures;
    } catch (const std::exception& e) {
      std::cout << "[FAIL] criterion " << criterion.id << ": " << criterion.label
                << " — unexpected error: " << e.what() << "\n";
      ++failures;
    }
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << "\n";
  return failures == 0 ? 0 : 1;
}
