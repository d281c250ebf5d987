// Command-line frontend for the segmentation pipeline: dataset validation,
// satellite preprocessing, copy-paste synthesis, sampling/splitting,
// augmentation, prediction with test-time augmentation, ensembling,
// post-processing, and IoU scoring. Every run writes a manifest with the
// effective configuration so any artifact can be reproduced from raw inputs.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mayakit/mayakit.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace mayakit;

namespace {

// ---------------------------------------------------------------------------
// Logging (MAYAKIT_LOG = debug | info | warn | error)
// ---------------------------------------------------------------------------

int log_level() {
  static const int level = [] {
    const char* env = std::getenv("MAYAKIT_LOG");
    if (!env) return 2;
    const std::string v = env;
    if (v == "debug") return 3;
    if (v == "info") return 2;
    if (v == "warn") return 1;
    return 0;
  }();
  return level;
}

void log_info(const std::string& message) {
  if (log_level() >= 2) std::cerr << "[mayakit] " << message << "\n";
}

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string hex64(std::uint64_t v) {
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(v));
  return buffer;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::stage_failure, "cannot write " + path.string());
  out << text;
}

// The manifest pins command, seed, jobs, and the effective stage parameters.
// No timestamps: identical runs must produce identical bytes.
void emit_manifest(const fs::path& out, bool out_is_directory, const std::string& command,
                   std::uint64_t seed, unsigned jobs, const json& params) {
  json manifest;
  manifest["tool"] = "mayakit";
  manifest["version"] = std::string(version);
  manifest["command"] = command;
  manifest["seed"] = seed;
  manifest["jobs"] = jobs;
  manifest["params"] = params;
  manifest["config_hash"] = hex64(fnv1a64(params.dump()));
  const fs::path path =
      out_is_directory ? out / "manifest.json" : fs::path(out.string() + ".manifest.json");
  write_text(path, manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Shared option plumbing
// ---------------------------------------------------------------------------

struct CommonOptions {
  std::string config_path;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  json config;  // parsed --config file, or empty object

  void load() {
    config = json::object();
    if (config_path.empty()) return;
    std::ifstream in(config_path);
    if (!in) throw Error(ErrorCode::config_invalid, "cannot open config " + config_path);
    try {
      in >> config;
    } catch (const std::exception& e) {
      throw Error(ErrorCode::config_invalid, std::string("config parse: ") + e.what());
    }
  }

  template <typename T>
  T get(const char* key, T fallback) const {
    if (config.contains(key)) return config[key].get<T>();
    return fallback;
  }
};

std::vector<StructureClass> parse_classes(const std::string& text) {
  if (text.empty() || text == "all")
    return {StructureClass::aguada, StructureClass::building, StructureClass::platform};
  std::vector<StructureClass> classes;
  std::string token;
  std::stringstream stream(text);
  while (std::getline(stream, token, ',')) {
    const auto cls = class_from_name(token);
    if (!cls) throw Error(ErrorCode::config_invalid, "unknown class " + token);
    classes.push_back(*cls);
  }
  if (classes.empty()) throw Error(ErrorCode::config_invalid, "no classes given");
  return classes;
}

ScanResult scan_or_throw(const fs::path& data, bool lenient = false) {
  log_info("scanning " + data.string());
  return scan_dataset(data, {}, /*strict_masks=*/!lenient);
}

// Config-file fallback: a flag not given on the command line takes its value
// from the named config section.
json config_section(const json& config, const char* name) {
  if (config.contains(name) && config[name].is_object()) return config[name];
  return json::object();
}

template <typename T>
void fall_back(const CLI::Option* option, const json& section, const char* key, T& target) {
  if (option && option->count() == 0 && section.contains(key))
    target = section[key].get<T>();
}

void require_path_option(const std::string& value, const char* what) {
  if (value.empty())
    throw Error(ErrorCode::config_invalid,
                std::string(what) + " missing (flag or config entry required)");
}

// Tile ids that carry a given modality in a scan.
std::vector<const TileRecord*> tiles_with(const ScanResult& scan, ModalityKind kind) {
  std::vector<const TileRecord*> out;
  for (const auto& record : scan.records)
    if (record.find(kind)) out.push_back(&record);
  return out;
}

// ---------------------------------------------------------------------------
// fixtures
// ---------------------------------------------------------------------------

int run_fixtures(const CommonOptions& common, const std::string& out, unsigned tiles,
                 bool skip_raw_s1) {
  FixtureOptions options;
  options.tiles = tiles;
  options.with_raw_s1 = !skip_raw_s1;
  write_fixture_dataset(out, common.seed, options, common.jobs);
  json params;
  params["out"] = out;
  params["tiles"] = options.tiles;
  params["empty_tiles"] = options.empty_tiles;
  params["raw_s1"] = options.with_raw_s1;
  emit_manifest(out, true, "fixtures", common.seed, common.jobs, params);
  log_info("wrote " + std::to_string(options.tiles) + " fixture tiles");
  return 0;
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

int run_validate(const CommonOptions& common, const std::string& data, const std::string& out,
                 bool lenient) {
  const ScanResult result = scan_or_throw(data, lenient);
  const std::string report = report_jsonl(result.reports);
  if (out.empty() || out == "-") {
    std::cout << report;
  } else {
    write_text(out, report);
    json params;
    params["data"] = data;
    params["lenient"] = lenient;
    params["files"] = result.reports.size();
    params["errors"] = result.error_count();
    emit_manifest(out, false, "validate", common.seed, common.jobs, params);
  }
  log_info(std::to_string(result.records.size()) + " tiles, " +
           std::to_string(result.error_count()) + " validation errors");
  return result.ok() ? 0 : 1;
}

// ---------------------------------------------------------------------------
// preprocess-s1
// ---------------------------------------------------------------------------

int run_preprocess_s1(const CommonOptions& common, const std::string& data,
                      const std::string& out, const std::string& input_kind) {
  const S1Input input = input_kind == "unit" ? S1Input::unit_interval : S1Input::sigma0_linear;
  const std::regex pattern(
      R"(^tile_(\d+)_s1acq_(asc|desc)_(vv|vh)_(\d{4})_(\d+)\.tif$)");
  std::map<std::uint64_t, std::vector<S1Acquisition>> by_tile;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(data))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    std::smatch match;
    const std::string name = path.filename().string();
    if (!std::regex_match(name, match, pattern)) continue;
    S1Acquisition acq;
    acq.orbit = match[2].str() == "asc" ? Orbit::ascending : Orbit::descending;
    acq.polarization = match[3].str() == "vv" ? Polarization::vv : Polarization::vh;
    acq.year = std::stoi(match[4].str());
    acq.image = read_tiff_file(path);
    by_tile[std::stoull(match[1].str())].push_back(std::move(acq));
  }
  if (by_tile.empty())
    throw Error(ErrorCode::input_missing, "no Sentinel-1 acquisitions found in " + data);

  fs::create_directories(out);
  std::vector<std::uint64_t> ids;
  for (const auto& [id, acqs] : by_tile) ids.push_back(id);
  parallel_for(ids.size(), common.jobs, [&](std::size_t i) {
    const Raster tile = build_s1_tile(by_tile.at(ids[i]), input);
    write_tiff_file(fs::path(out) / NamingConvention::filename(ids[i], ModalityKind::s1), tile);
  });

  json params;
  params["data"] = data;
  params["out"] = out;
  params["input"] = input_kind;
  params["tiles"] = ids.size();
  params["band_order"] = "statistic fastest: mean, median, std, cv, p5, p95; "
                         "then polarization (vv, vh); orbit (asc, desc); "
                         "period (2017, 2018, 2019, 2020, pooled)";
  emit_manifest(out, true, "preprocess-s1", common.seed, common.jobs, params);
  log_info("built " + std::to_string(ids.size()) + " Sentinel-1 statistic tiles");
  return 0;
}

// ---------------------------------------------------------------------------
// preprocess-s2
// ---------------------------------------------------------------------------

int run_preprocess_s2(const CommonOptions& common, const std::string& data,
                      const std::string& out, const std::string& channels_text,
                      double quantile) {
  std::vector<int> channels;
  std::vector<std::string> channel_names;
  {
    std::string token;
    std::stringstream stream(channels_text);
    while (std::getline(stream, token, ',')) {
      channels.push_back(S2Layout::band_index_by_name(token));
      channel_names.push_back(token);
    }
  }
  const ScanResult scan = scan_or_throw(data);
  const auto tiles = tiles_with(scan, ModalityKind::s2);
  if (tiles.empty()) throw Error(ErrorCode::input_missing, "no Sentinel-2 stacks in " + data);

  fs::create_directories(out);
  parallel_for(tiles.size(), common.jobs, [&](std::size_t i) {
    const Raster& stack = tiles[i]->require(ModalityKind::s2);
    const Raster composite = s2_median_composite(stack, channels);
    const Raster scaled = robust_minmax(composite, quantile);
    write_tiff_file(fs::path(out) / ("tile_" + std::to_string(tiles[i]->tile_id) + "_s2comp.tif"),
                    scaled);
  });

  json params;
  params["data"] = data;
  params["out"] = out;
  params["channels"] = channel_names;
  params["upper_quantile"] = quantile;
  params["fill_policy"] = "tile-wide clear-pixel median; zero when no clear pixel exists";
  params["tiles"] = tiles.size();
  emit_manifest(out, true, "preprocess-s2", common.seed, common.jobs, params);
  log_info("composited " + std::to_string(tiles.size()) + " Sentinel-2 tiles");
  return 0;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

int run_synth(const CommonOptions& common, const std::string& data, const std::string& out,
              const std::string& class_name_text, const std::string& style_name, int pad,
              std::uint64_t count, std::uint64_t first_id, std::uint32_t instances) {
  const auto cls = class_from_name(class_name_text);
  if (!cls) throw Error(ErrorCode::config_invalid, "unknown class " + class_name_text);
  const CropStyle style = CropStyle::from_name(style_name, pad);

  const ScanResult scan = scan_or_throw(data);
  std::vector<SynthSource> backgrounds, donors;
  for (const auto& record : scan.records) {
    const Raster* als = record.find(ModalityKind::als);
    if (!als) continue;
    std::array<std::optional<BinaryMask>, 3> masks;
    bool complete = true;
    for (auto c : all_classes) {
      const Raster* m = record.find(mask_kind_of(c));
      if (!m) complete = false;
      else masks[int(c)] = mask_decode(*m);
    }
    if (!complete) continue;
    const bool any_structure = masks[0]->count_true() || masks[1]->count_true() ||
                               masks[2]->count_true();
    if (!any_structure) {
      backgrounds.push_back({record.tile_id, *als, BinaryMask::make(als->width, als->height)});
    } else if (masks[int(*cls)]->count_true() > 0) {
      donors.push_back({record.tile_id, *als, *masks[int(*cls)]});
    }
  }

  const SynthDataset dataset = generate_dataset(backgrounds, donors, style, count, common.seed,
                                                first_id, common.jobs, instances);

  fs::create_directories(out);
  const BinaryMask empty = BinaryMask::make(480, 480);
  for (const auto& sample : dataset.samples) {
    write_tiff_file(fs::path(out) / NamingConvention::filename(sample.tile_id, ModalityKind::als),
                    sample.image);
    write_tiff_file(
        fs::path(out) / NamingConvention::filename(sample.tile_id, mask_kind_of(*cls)),
        mask_encode(sample.mask));
    // The untouched classes stay empty so the output is a complete record.
    for (auto other : all_classes)
      if (other != *cls)
        write_tiff_file(
            fs::path(out) / NamingConvention::filename(sample.tile_id, mask_kind_of(other)),
            mask_encode(BinaryMask::make(sample.image.width, sample.image.height)));
  }

  json samples = json::array();
  for (const auto& entry : dataset.manifest) {
    json row;
    row["index"] = entry.index;
    row["instance"] = entry.instance;
    row["tile_id"] = entry.tile_id;
    row["background_id"] = entry.background_id;
    row["donor_id"] = entry.donor_id;
    row["style"] = entry.style;
    row["pad"] = entry.pad;
    row["component"] = {entry.component_x, entry.component_y};
    row["position"] = {entry.paste_x, entry.paste_y};
    row["footprint_pixels"] = entry.footprint_pixels;
    samples.push_back(std::move(row));
  }
  write_text(fs::path(out) / "synth_manifest.json", samples.dump(2) + "\n");

  json params;
  params["data"] = data;
  params["out"] = out;
  params["class"] = class_name_text;
  params["style"] = style.name();
  params["pad"] = pad;
  params["count"] = count;
  params["instances"] = instances;
  params["first_id"] = first_id;
  params["backgrounds"] = backgrounds.size();
  params["donors"] = donors.size();
  emit_manifest(out, true, "synth", common.seed, common.jobs, params);
  log_info("generated " + std::to_string(count) + " synthetic tiles");
  return 0;
}

// ---------------------------------------------------------------------------
// split
// ---------------------------------------------------------------------------

int run_split(const CommonOptions& common, const std::string& data, const std::string& out,
              int k, const std::string& strategy_name, const std::string& class_name_text,
              double t1, double t2) {
  const ScanResult scan = scan_or_throw(data);
  const auto summaries = summarize_tiles(scan.records);

  FoldStrategy strategy;
  if (strategy_name == "presence") {
    const auto cls = class_from_name(class_name_text);
    if (!cls) throw Error(ErrorCode::config_invalid, "unknown class " + class_name_text);
    strategy = FoldStrategy::presence(*cls);
  } else if (strategy_name == "aguada-bins") {
    strategy = FoldStrategy::aguada_bins(t1, t2);
  } else {
    throw Error(ErrorCode::config_invalid, "unknown strategy " + strategy_name);
  }

  const FoldAssignment folds = stratified_kfold(summaries, k, strategy, common.seed);
  json doc;
  doc["k"] = k;
  doc["strategy"] = strategy_name;
  doc["class"] = class_name_text;
  if (strategy_name == "aguada-bins") doc["thresholds"] = {t1, t2};
  json assignment = json::array();
  for (const auto& [id, fold] : folds.assignment)
    assignment.push_back(json{{"tile", id}, {"fold", fold}});
  doc["assignment"] = std::move(assignment);
  write_text(out, doc.dump(2) + "\n");

  json params;
  params["data"] = data;
  params["out"] = out;
  params["k"] = k;
  params["strategy"] = strategy_name;
  params["class"] = class_name_text;
  emit_manifest(out, false, "split", common.seed, common.jobs, params);
  return 0;
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

int run_sample(const CommonOptions& common, const std::string& data, const std::string& out,
               const std::string& weights_text, std::uint64_t n) {
  SamplerWeights weights = SamplerWeights::equal();
  if (!weights_text.empty() && weights_text != "equal") {
    std::vector<double> values;
    std::string token;
    std::stringstream stream(weights_text);
    while (std::getline(stream, token, ',')) values.push_back(std::stod(token));
    if (values.size() != 4)
      throw Error(ErrorCode::config_invalid,
                  "weights must be 'equal' or background,aguada,building,platform");
    weights = SamplerWeights::custom(values[0], values[1], values[2], values[3]);
  }

  const ScanResult scan = scan_or_throw(data);
  const auto summaries = summarize_tiles(scan.records);
  const auto draws = weighted_sample(summaries, weights, n, common.seed);

  static const char* names[4] = {"background", "aguada", "building", "platform"};
  json doc;
  doc["n"] = n;
  doc["weights"] = weights.weights;
  json list = json::array();
  for (const auto& draw : draws)
    list.push_back(json{{"class", names[draw.class_index]}, {"tile", draw.tile_id}});
  doc["draws"] = std::move(list);
  write_text(out, doc.dump(2) + "\n");

  json params;
  params["data"] = data;
  params["out"] = out;
  params["weights"] = weights.weights;
  params["n"] = n;
  emit_manifest(out, false, "sample", common.seed, common.jobs, params);
  return 0;
}

// ---------------------------------------------------------------------------
// augment
// ---------------------------------------------------------------------------

int run_augment(const CommonOptions& common, const std::string& data, const std::string& out,
                const std::string& preset, unsigned variants) {
  const AugmentConfig config = AugmentConfig::preset(preset);
  const ScanResult scan = scan_or_throw(data);
  const auto tiles = tiles_with(scan, ModalityKind::als);
  if (tiles.empty()) throw Error(ErrorCode::input_missing, "no lidar tiles in " + data);

  fs::create_directories(out);
  parallel_for(tiles.size() * variants, common.jobs, [&](std::size_t item) {
    const std::size_t tile_index = item / variants;
    const std::size_t variant = item % variants;
    const TileRecord& record = *tiles[tile_index];
    Rng rng = derive_rng(common.seed, record.tile_id * 1000 + variant);

    Raster image = record.require(ModalityKind::als);
    std::vector<BinaryMask> masks;
    for (auto cls : all_classes) {
      const Raster* m = record.find(mask_kind_of(cls));
      masks.push_back(m ? mask_decode(*m)
                        : BinaryMask::make(image.width, image.height));
    }
    if (config.crop_min_side > 0) {
      auto [cropped, cropped_masks] =
          random_crop(image, masks, config.crop_min_side,
                      std::min(config.crop_max_side, image.width), rng);
      image = std::move(cropped);
      masks = std::move(cropped_masks);
    }
    auto [warped, warped_masks] = geometric_augment(image, masks, config, rng);

    // Photometric stages run on unit-interval floats.
    Raster floats = Raster::make(warped.width, warped.height, warped.bands, SampleType::f32);
    for (std::uint32_t b = 0; b < warped.bands; ++b)
      for (std::uint32_t y = 0; y < warped.height; ++y)
        for (std::uint32_t x = 0; x < warped.width; ++x)
          floats.set_f32(x, y, b, static_cast<float>(warped.value(x, y, b) /
                                                     (warped.sample_type == SampleType::u8
                                                          ? 255.0
                                                          : 1.0)));
    const Raster final_image = photometric_augment(floats, config, rng);

    const std::string stem =
        "tile_" + std::to_string(record.tile_id) + "_aug" + std::to_string(variant);
    write_tiff_file(fs::path(out) / (stem + "_lidar.tif"), final_image);
    for (auto cls : all_classes)
      write_tiff_file(fs::path(out) / (stem + "_mask_" + class_name(cls) + ".tif"),
                      mask_encode(warped_masks[int(cls)]));
  });

  json params;
  params["data"] = data;
  params["out"] = out;
  params["preset"] = preset;
  params["variants"] = variants;
  params["tiles"] = tiles.size();
  emit_manifest(out, true, "augment", common.seed, common.jobs, params);
  log_info("augmented " + std::to_string(tiles.size()) + " tiles x " +
           std::to_string(variants) + " variants");
  return 0;
}

// ---------------------------------------------------------------------------
// predict
// ---------------------------------------------------------------------------

int run_predict(const CommonOptions& common, const std::string& data, const std::string& out,
                const std::string& model, double constant_value, int variant,
                const std::string& classes_text, bool tta) {
  const auto classes = parse_classes(classes_text);
  std::unique_ptr<Predictor> predictor;
  if (model == "baseline") {
    predictor = std::make_unique<HeuristicBaselinePredictor>(variant);
  } else if (model == "constant") {
    predictor = std::make_unique<ConstantPredictor>(static_cast<float>(constant_value));
  } else {
    throw Error(ErrorCode::config_invalid, "unknown model " + model);
  }

  const ScanResult scan = scan_or_throw(data);
  const auto tiles = tiles_with(scan, ModalityKind::als);
  if (tiles.empty()) throw Error(ErrorCode::input_missing, "no lidar tiles in " + data);

  fs::create_directories(out);
  parallel_for(tiles.size() * classes.size(), common.jobs, [&](std::size_t item) {
    const TileRecord& full = *tiles[item / classes.size()];
    const StructureClass cls = classes[item % classes.size()];
    // Only the predictor's input modality goes through TTA; ground-truth
    // masks never enter the prediction path.
    TileRecord record;
    record.tile_id = full.tile_id;
    record.rasters[ModalityKind::als] = full.require(ModalityKind::als);
    const ProbMap map = tta ? tta_predict(*predictor, record, cls)
                            : predictor->predict(record, cls);
    write_tiff_file(fs::path(out) / NamingConvention::prob_filename(record.tile_id, cls,
                                                                    predictor->name()),
                    prob_to_raster(map));
  });

  json params;
  params["data"] = data;
  params["out"] = out;
  params["model"] = predictor->name();
  params["tta"] = tta;
  params["classes"] = classes_text.empty() ? "all" : classes_text;
  params["tiles"] = tiles.size();
  emit_manifest(out, true, "predict", common.seed, common.jobs, params);
  log_info("predicted " + std::to_string(tiles.size()) + " tiles with " + predictor->name());
  return 0;
}

// ---------------------------------------------------------------------------
// ensemble
// ---------------------------------------------------------------------------

// Probability files in a directory, keyed by (tile, class, model).
struct ProbIndex {
  std::set<std::uint64_t> tiles;
  std::map<StructureClass, std::set<std::string>> models;
};

ProbIndex index_probs(const fs::path& dir) {
  const std::regex pattern(R"(^tile_(\d+)_prob_(aguada|building|platform)_(.+)\.tif$)");
  ProbIndex index;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::smatch match;
    const std::string name = entry.path().filename().string();
    if (!std::regex_match(name, match, pattern)) continue;
    index.tiles.insert(std::stoull(match[1].str()));
    index.models[*class_from_name(match[2].str())].insert(match[3].str());
  }
  return index;
}

int run_ensemble(const CommonOptions& common, const std::string& probs_dir,
                 const std::string& out, const std::string& members_text,
                 const std::string& roster_path, const std::string& mode, double threshold) {
  // Per-class member lists, either from a roster file or one shared list.
  std::map<StructureClass, std::vector<std::string>> roster;
  if (!roster_path.empty()) {
    std::ifstream in(roster_path);
    if (!in) throw Error(ErrorCode::config_invalid, "cannot open roster " + roster_path);
    json doc;
    in >> doc;
    for (auto cls : all_classes) {
      if (!doc["classes"].contains(class_name(cls))) continue;
      for (const auto& member : doc["classes"][class_name(cls)])
        roster[cls].push_back(member.get<std::string>());
    }
  } else if (!members_text.empty()) {
    std::vector<std::string> members;
    std::string token;
    std::stringstream stream(members_text);
    while (std::getline(stream, token, ',')) members.push_back(token);
    for (auto cls : all_classes) roster[cls] = members;
  } else {
    throw Error(ErrorCode::config_invalid, "ensemble needs --members or --roster");
  }

  const ProbIndex index = index_probs(probs_dir);
  if (index.tiles.empty())
    throw Error(ErrorCode::input_missing, "no probability maps in " + probs_dir);

  fs::create_directories(out);
  const std::vector<std::uint64_t> tiles(index.tiles.begin(), index.tiles.end());
  parallel_for(tiles.size(), common.jobs, [&](std::size_t i) {
    const std::uint64_t id = tiles[i];
    for (auto cls : all_classes) {
      const auto it = roster.find(cls);
      if (it == roster.end() || it->second.empty()) continue;
      std::vector<ProbMap> members;
      for (const auto& model : it->second)
        members.push_back(prob_from_raster(read_tiff_file(
            fs::path(probs_dir) / NamingConvention::prob_filename(id, cls, model))));
      if (mode == "soft") {
        const ProbMap vote = soft_vote(members);
        write_tiff_file(fs::path(out) / NamingConvention::prob_filename(id, cls, "ensemble"),
                        prob_to_raster(vote));
      } else {
        std::vector<BinaryMask> decisions;
        decisions.reserve(members.size());
        for (const auto& member : members) decisions.push_back(binarize(member, threshold));
        const BinaryMask vote = hard_vote(decisions);
        write_tiff_file(fs::path(out) / NamingConvention::filename(id, mask_kind_of(cls)),
                        mask_encode(vote));
      }
    }
  });

  json params;
  params["probs"] = probs_dir;
  params["out"] = out;
  params["mode"] = mode;
  if (mode == "hard") params["threshold"] = threshold;
  json roster_json;
  for (const auto& [cls, members] : roster) roster_json[class_name(cls)] = members;
  params["roster"] = roster_json;
  params["tiles"] = tiles.size();
  emit_manifest(out, true, "ensemble", common.seed, common.jobs, params);
  log_info("ensembled " + std::to_string(tiles.size()) + " tiles (" + mode + ")");
  return 0;
}

// ---------------------------------------------------------------------------
// postprocess
// ---------------------------------------------------------------------------

int run_postprocess(const CommonOptions& common, const std::string& probs_dir,
                    const std::string& out, const std::string& model,
                    const std::string& config_path, double threshold, std::uint64_t min_area,
                    std::uint64_t min_area_boundary, bool fill) {
  // One config per class, in the one-vs-all spirit; flags set a shared
  // default, the JSON file overrides per class.
  std::map<StructureClass, PostprocessConfig> configs;
  for (auto cls : all_classes)
    configs[cls] = PostprocessConfig{threshold, min_area, min_area_boundary, fill};
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw Error(ErrorCode::config_invalid, "cannot open config " + config_path);
    json doc;
    in >> doc;
    for (auto cls : all_classes) {
      if (!doc.contains(class_name(cls))) continue;
      const auto& c = doc[class_name(cls)];
      auto& target = configs[cls];
      if (c.contains("threshold")) target.probability_threshold = c["threshold"].get<double>();
      if (c.contains("min_area")) target.min_area = c["min_area"].get<std::uint64_t>();
      if (c.contains("min_area_boundary"))
        target.min_area_boundary = c["min_area_boundary"].get<std::uint64_t>();
      if (c.contains("fill_holes")) target.fill_holes = c["fill_holes"].get<bool>();
    }
  }

  const ProbIndex index = index_probs(probs_dir);
  if (index.tiles.empty())
    throw Error(ErrorCode::input_missing, "no probability maps in " + probs_dir);

  fs::create_directories(out);
  const std::vector<std::uint64_t> tiles(index.tiles.begin(), index.tiles.end());
  parallel_for(tiles.size(), common.jobs, [&](std::size_t i) {
    for (auto cls : all_classes) {
      const fs::path path =
          fs::path(probs_dir) / NamingConvention::prob_filename(tiles[i], cls, model);
      if (!fs::exists(path)) continue;
      const ProbMap prob = prob_from_raster(read_tiff_file(path));
      const BinaryMask mask = postprocess_pipeline(prob, configs[cls]);
      write_tiff_file(fs::path(out) / NamingConvention::filename(tiles[i], mask_kind_of(cls)),
                      mask_encode(mask));
    }
  });

  json params;
  params["probs"] = probs_dir;
  params["out"] = out;
  params["model"] = model;
  json per_class;
  for (auto cls : all_classes) {
    const auto& c = configs[cls];
    per_class[class_name(cls)] = {{"threshold", c.probability_threshold},
                                  {"min_area", c.min_area},
                                  {"min_area_boundary", c.min_area_boundary},
                                  {"fill_holes", c.fill_holes}};
  }
  params["config"] = per_class;
  params["tiles"] = tiles.size();
  emit_manifest(out, true, "postprocess", common.seed, common.jobs, params);
  log_info("post-processed " + std::to_string(tiles.size()) + " tiles");
  return 0;
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

int run_score(const CommonOptions& common, const std::string& pred_dir,
              const std::string& truth_dir, const std::string& out) {
  const ScanResult truth = scan_or_throw(truth_dir);
  std::vector<const TileRecord*> scored;
  for (const auto& record : truth.records) {
    bool all_masks = true;
    for (auto cls : all_classes)
      if (!record.find(mask_kind_of(cls))) all_masks = false;
    if (all_masks) scored.push_back(&record);
  }
  if (scored.empty()) throw Error(ErrorCode::input_missing, "no ground-truth masks");

  std::vector<std::array<double, 3>> ious(scored.size());
  parallel_for(scored.size(), common.jobs, [&](std::size_t i) {
    const TileRecord& record = *scored[i];
    for (auto cls : all_classes) {
      const fs::path path =
          fs::path(pred_dir) / NamingConvention::filename(record.tile_id, mask_kind_of(cls));
      if (!fs::exists(path))
        throw Error(ErrorCode::missing_class,
                    "submission lacks " + path.filename().string());
      const BinaryMask pred = mask_decode(read_tiff_file(path, mask_kind_of(cls)));
      const BinaryMask gt = mask_decode(record.require(mask_kind_of(cls)));
      ious[i][int(cls)] = tile_iou(pred, gt);
    }
  });
  const DatasetScore score = dataset_score(ious);

  json doc;
  doc["overall_avg_iou"] = score.overall;
  doc["class_avg_iou"] = {{"aguada", score.class_average[int(StructureClass::aguada)]},
                          {"building", score.class_average[int(StructureClass::building)]},
                          {"platform", score.class_average[int(StructureClass::platform)]}};
  json tiles = json::array();
  for (std::size_t i = 0; i < scored.size(); ++i)
    tiles.push_back(json{{"tile", scored[i]->tile_id},
                         {"aguada", ious[i][int(StructureClass::aguada)]},
                         {"building", ious[i][int(StructureClass::building)]},
                         {"platform", ious[i][int(StructureClass::platform)]}});
  doc["tiles"] = std::move(tiles);
  write_text(out, doc.dump(2) + "\n");

  json params;
  params["pred"] = pred_dir;
  params["truth"] = truth_dir;
  params["out"] = out;
  params["tiles"] = scored.size();
  emit_manifest(out, false, "score", common.seed, common.jobs, params);
  log_info("overall average IoU " + format_score(score.overall));
  return 0;
}

// ---------------------------------------------------------------------------
// leaderboard
// ---------------------------------------------------------------------------

int run_leaderboard(const CommonOptions& common, const std::string& entries_path,
                    const std::string& out_prefix) {
  std::ifstream in(entries_path);
  if (!in) throw Error(ErrorCode::input_missing, "cannot open " + entries_path);
  json doc;
  in >> doc;
  std::vector<LeaderboardEntry> entries;
  for (const auto& row : doc) {
    entries.push_back({row["name"].get<std::string>(), row["aguadas"].get<double>(),
                       row["platforms"].get<double>(), row["buildings"].get<double>()});
  }
  const auto rows = leaderboard(entries);

  write_text(out_prefix + ".csv", leaderboard_csv(rows));
  json out = json::array();
  for (const auto& row : rows)
    out.push_back(json{{"rank", row.rank},
                       {"name", row.name},
                       {"avg_iou", round_half_up(row.avg_iou)},
                       {"aguadas", round_half_up(row.aguadas)},
                       {"platforms", round_half_up(row.platforms)},
                       {"buildings", round_half_up(row.buildings)}});
  write_text(out_prefix + ".json", out.dump(2) + "\n");

  json params;
  params["entries"] = entries_path;
  params["out"] = out_prefix;
  params["rows"] = rows.size();
  emit_manifest(out_prefix, false, "leaderboard", common.seed, common.jobs, params);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mayakit: segmentation pipeline toolkit"};
  app.require_subcommand(1);

  CommonOptions common;
  app.add_option("--config", common.config_path,
                 "JSON pipeline config; command-line flags override it");
  auto* opt_seed = app.add_option("--seed", common.seed, "seed for every stochastic stage");
  auto* opt_jobs =
      app.add_option("--jobs", common.jobs, "worker threads (output is identical for any value)");

  std::string data, out, preset;

  // fixtures
  auto* cmd_fixtures = app.add_subcommand("fixtures", "emit the synthetic desk-scale dataset");
  unsigned fixture_tiles = 32;
  bool skip_raw_s1 = false;
  auto* fixtures_out = cmd_fixtures->add_option("--out", out, "output directory");
  auto* fixtures_tiles = cmd_fixtures->add_option("--tiles", fixture_tiles, "tile count");
  cmd_fixtures->add_flag("--no-raw-s1", skip_raw_s1, "skip per-acquisition Sentinel-1 files");

  // validate
  auto* cmd_validate = app.add_subcommand("validate", "scan and validate a dataset directory");
  bool lenient = false;
  auto* validate_data = cmd_validate->add_option("--data", data, "dataset directory");
  cmd_validate->add_option("--out", out, "JSONL report path ('-' for stdout)");
  cmd_validate->add_flag("--lenient", lenient, "accept anti-aliased mask values (<128 = present)");

  // preprocess-s1
  auto* cmd_s1 = app.add_subcommand("preprocess-s1", "build 120-band Sentinel-1 statistics tiles");
  std::string s1_input = "sigma0";
  auto* s1_data = cmd_s1->add_option("--data", data, "directory of per-acquisition tiffs");
  auto* s1_out = cmd_s1->add_option("--out", out, "output directory");
  auto* s1_in = cmd_s1->add_option("--input", s1_input,
                                   "sigma0 (linear, normalized here) or unit (pass-through)")
                    ->check(CLI::IsMember({"sigma0", "unit"}));

  // preprocess-s2
  auto* cmd_s2 = app.add_subcommand("preprocess-s2", "cloud-free median composites");
  std::string channels = "B02,B03,B04,B08";
  double quantile = 0.90;
  auto* s2_data = cmd_s2->add_option("--data", data, "dataset directory with s2 stacks");
  auto* s2_out = cmd_s2->add_option("--out", out, "output directory");
  auto* s2_channels = cmd_s2->add_option("--channels", channels, "comma-separated spectral bands");
  auto* s2_quantile = cmd_s2->add_option("--quantile", quantile, "upper scaling quantile");

  // synth
  auto* cmd_synth = app.add_subcommand("synth", "copy-paste synthetic training tiles");
  std::string synth_class = "building", synth_style = "rect";
  int synth_pad = 4;
  std::uint64_t synth_count = 10, synth_first_id = 100000;
  std::uint32_t synth_instances = 1;
  auto* synth_data = cmd_synth->add_option("--data", data, "dataset directory");
  auto* synth_out = cmd_synth->add_option("--out", out, "output directory");
  auto* synth_cls = cmd_synth->add_option("--class", synth_class, "structure class to synthesize");
  auto* synth_sty = cmd_synth->add_option("--style", synth_style, "rect | precise | padded");
  auto* synth_pd = cmd_synth->add_option("--pad", synth_pad, "padding pixels for the padded style");
  auto* synth_cnt = cmd_synth->add_option("--count", synth_count, "samples to generate");
  auto* synth_inst =
      cmd_synth->add_option("--instances", synth_instances, "instances pasted per generated tile");
  auto* synth_fid =
      cmd_synth->add_option("--first-id", synth_first_id, "tile id of the first generated sample");

  // split
  auto* cmd_split = app.add_subcommand("split", "stratified k-fold assignment");
  int split_k = 5;
  std::string split_strategy = "presence", split_class = "building";
  double split_t1 = 0.05, split_t2 = 0.15;
  auto* split_data = cmd_split->add_option("--data", data, "dataset directory");
  auto* split_out = cmd_split->add_option("--out", out, "assignment JSON path");
  auto* split_kk = cmd_split->add_option("--k", split_k, "fold count");
  auto* split_strat = cmd_split->add_option("--strategy", split_strategy, "presence | aguada-bins");
  auto* split_cls = cmd_split->add_option("--class", split_class, "class for the presence strategy");
  auto* split_tt1 = cmd_split->add_option("--t1", split_t1, "first fraction threshold");
  auto* split_tt2 = cmd_split->add_option("--t2", split_t2, "second fraction threshold");

  // sample
  auto* cmd_sample = app.add_subcommand("sample", "weighted tile sampling");
  std::string sample_weights = "equal";
  std::uint64_t sample_n = 1000;
  auto* sample_data = cmd_sample->add_option("--data", data, "dataset directory");
  auto* sample_out = cmd_sample->add_option("--out", out, "draw manifest JSON path");
  auto* sample_w = cmd_sample->add_option("--weights", sample_weights,
                                          "'equal' or background,aguada,building,platform");
  auto* sample_nn = cmd_sample->add_option("--n", sample_n, "number of draws");

  // augment
  auto* cmd_augment = app.add_subcommand("augment", "apply an augmentation preset");
  unsigned augment_variants = 1;
  auto* augment_data = cmd_augment->add_option("--data", data, "dataset directory");
  auto* augment_out = cmd_augment->add_option("--out", out, "output directory");
  auto* augment_preset = cmd_augment->add_option("--preset", preset, "ch1 | ch3 | dihedral-only");
  auto* augment_var =
      cmd_augment->add_option("--variants", augment_variants, "augmented copies per tile");

  // predict
  auto* cmd_predict = app.add_subcommand("predict", "run a predictor (with optional TTA)");
  std::string predict_model = "baseline", predict_classes = "all";
  double predict_value = 0.5;
  int predict_variant = 0;
  bool predict_tta = false;
  auto* predict_data = cmd_predict->add_option("--data", data, "dataset directory");
  auto* predict_out = cmd_predict->add_option("--out", out, "probability output directory");
  auto* predict_mdl = cmd_predict->add_option("--model", predict_model, "baseline | constant");
  auto* predict_val = cmd_predict->add_option("--value", predict_value, "constant model value");
  auto* predict_vr = cmd_predict->add_option("--variant", predict_variant, "baseline jitter variant");
  auto* predict_cls = cmd_predict->add_option("--classes", predict_classes, "classes to predict");
  cmd_predict->add_flag("--tta", predict_tta, "average over the 8 dihedral transforms");

  // ensemble
  auto* cmd_ensemble = app.add_subcommand("ensemble", "combine member predictions");
  std::string ensemble_probs, ensemble_members, ensemble_roster, ensemble_mode = "soft";
  double ensemble_threshold = 0.5;
  auto* ens_probs =
      cmd_ensemble->add_option("--probs", ensemble_probs, "directory of member probabilities");
  auto* ens_out = cmd_ensemble->add_option("--out", out, "output directory");
  auto* ens_members =
      cmd_ensemble->add_option("--members", ensemble_members, "comma-separated model ids");
  auto* ens_roster =
      cmd_ensemble->add_option("--roster", ensemble_roster, "JSON roster with per-class members");
  auto* ens_mode = cmd_ensemble->add_option("--mode", ensemble_mode, "soft | hard")
                       ->check(CLI::IsMember({"soft", "hard"}));
  auto* ens_thr = cmd_ensemble->add_option("--threshold", ensemble_threshold,
                                           "binarization threshold for hard voting");

  // postprocess
  auto* cmd_post = app.add_subcommand("postprocess", "threshold, blob-filter, fill holes");
  std::string post_probs, post_model = "ensemble", post_config;
  double post_threshold = 0.5;
  std::uint64_t post_min_area = 0, post_min_area_boundary = 0;
  bool post_fill = false;
  auto* post_pr = cmd_post->add_option("--probs", post_probs, "probability directory");
  auto* post_out = cmd_post->add_option("--out", out, "mask output directory");
  auto* post_mdl = cmd_post->add_option("--model", post_model, "probability model tag to consume");
  auto* post_cfg = cmd_post->add_option("--config", post_config, "per-class JSON config");
  auto* post_thr = cmd_post->add_option("--threshold", post_threshold, "probability threshold");
  auto* post_ma = cmd_post->add_option("--min-area", post_min_area,
                                       "interior blob threshold (pixels)");
  auto* post_mab = cmd_post->add_option("--min-area-boundary", post_min_area_boundary,
                                        "boundary blob threshold (pixels)");
  cmd_post->add_flag("--fill-holes", post_fill, "fill enclosed background");

  // score
  auto* cmd_score = app.add_subcommand("score", "average IoU of a submission");
  std::string score_pred, score_truth;
  auto* score_pr = cmd_score->add_option("--pred", score_pred, "submission mask directory");
  auto* score_tr = cmd_score->add_option("--truth", score_truth, "ground-truth directory");
  auto* score_out = cmd_score->add_option("--out", out, "report JSON path");

  // leaderboard
  auto* cmd_lb = app.add_subcommand("leaderboard", "rank entries by overall average IoU");
  std::string lb_entries;
  auto* lb_in = cmd_lb->add_option("--entries", lb_entries, "entries JSON");
  auto* lb_out = cmd_lb->add_option("--out", out, "output prefix (.csv/.json)");

  CLI11_PARSE(app, argc, argv);

  try {
    common.load();
    fall_back(opt_seed, common.config, "seed", common.seed);
    fall_back(opt_jobs, common.config, "jobs", common.jobs);
    if (common.jobs == 0) common.jobs = 1;

    // Paths may come from the config's top level ("data", "out") or from the
    // active stage's section.
    auto resolve_paths = [&](const char* section_name, CLI::Option* data_opt,
                             CLI::Option* out_opt) {
      const json section = config_section(common.config, section_name);
      if (data_opt) {
        fall_back(data_opt, section, "data", data);
        fall_back(data_opt, common.config, "data", data);
      }
      if (out_opt) {
        fall_back(out_opt, section, "out", out);
        fall_back(out_opt, common.config, "out", out);
      }
      return section;
    };

    if (cmd_fixtures->parsed()) {
      const json section = resolve_paths("fixtures", nullptr, fixtures_out);
      fall_back(fixtures_tiles, section, "tiles", fixture_tiles);
      require_path_option(out, "fixtures --out");
      return run_fixtures(common, out, fixture_tiles, skip_raw_s1);
    }
    if (cmd_validate->parsed()) {
      resolve_paths("validate", validate_data, nullptr);
      require_path_option(data, "validate --data");
      return run_validate(common, data, out, lenient);
    }
    if (cmd_s1->parsed()) {
      const json section = resolve_paths("preprocess_s1", s1_data, s1_out);
      fall_back(s1_in, section, "input", s1_input);
      require_path_option(data, "preprocess-s1 --data");
      require_path_option(out, "preprocess-s1 --out");
      return run_preprocess_s1(common, data, out, s1_input);
    }
    if (cmd_s2->parsed()) {
      const json section = resolve_paths("preprocess_s2", s2_data, s2_out);
      fall_back(s2_channels, section, "channels", channels);
      fall_back(s2_quantile, section, "quantile", quantile);
      require_path_option(data, "preprocess-s2 --data");
      require_path_option(out, "preprocess-s2 --out");
      return run_preprocess_s2(common, data, out, channels, quantile);
    }
    if (cmd_synth->parsed()) {
      const json section = resolve_paths("synth", synth_data, synth_out);
      fall_back(synth_cls, section, "class", synth_class);
      fall_back(synth_sty, section, "style", synth_style);
      fall_back(synth_pd, section, "pad", synth_pad);
      fall_back(synth_cnt, section, "count", synth_count);
      fall_back(synth_inst, section, "instances", synth_instances);
      fall_back(synth_fid, section, "first_id", synth_first_id);
      require_path_option(data, "synth --data");
      require_path_option(out, "synth --out");
      return run_synth(common, data, out, synth_class, synth_style, synth_pad, synth_count,
                       synth_first_id, synth_instances);
    }
    if (cmd_split->parsed()) {
      const json section = resolve_paths("split", split_data, split_out);
      fall_back(split_kk, section, "k", split_k);
      fall_back(split_strat, section, "strategy", split_strategy);
      fall_back(split_cls, section, "class", split_class);
      fall_back(split_tt1, section, "t1", split_t1);
      fall_back(split_tt2, section, "t2", split_t2);
      require_path_option(data, "split --data");
      require_path_option(out, "split --out");
      return run_split(common, data, out, split_k, split_strategy, split_class, split_t1,
                       split_t2);
    }
    if (cmd_sample->parsed()) {
      const json section = resolve_paths("sample", sample_data, sample_out);
      fall_back(sample_w, section, "weights", sample_weights);
      fall_back(sample_nn, section, "n", sample_n);
      require_path_option(data, "sample --data");
      require_path_option(out, "sample --out");
      return run_sample(common, data, out, sample_weights, sample_n);
    }
    if (cmd_augment->parsed()) {
      const json section = resolve_paths("augment", augment_data, augment_out);
      fall_back(augment_preset, section, "preset", preset);
      fall_back(augment_var, section, "variants", augment_variants);
      require_path_option(data, "augment --data");
      require_path_option(out, "augment --out");
      if (preset.empty()) throw Error(ErrorCode::config_invalid, "augment needs a preset");
      return run_augment(common, data, out, preset, augment_variants);
    }
    if (cmd_predict->parsed()) {
      const json section = resolve_paths("predict", predict_data, predict_out);
      fall_back(predict_mdl, section, "model", predict_model);
      fall_back(predict_val, section, "value", predict_value);
      fall_back(predict_vr, section, "variant", predict_variant);
      fall_back(predict_cls, section, "classes", predict_classes);
      require_path_option(data, "predict --data");
      require_path_option(out, "predict --out");
      return run_predict(common, data, out, predict_model, predict_value, predict_variant,
                         predict_classes, predict_tta);
    }
    if (cmd_ensemble->parsed()) {
      const json section = resolve_paths("ensemble", nullptr, ens_out);
      fall_back(ens_probs, section, "probs", ensemble_probs);
      fall_back(ens_members, section, "members", ensemble_members);
      fall_back(ens_roster, section, "roster", ensemble_roster);
      fall_back(ens_mode, section, "mode", ensemble_mode);
      fall_back(ens_thr, section, "threshold", ensemble_threshold);
      require_path_option(ensemble_probs, "ensemble --probs");
      require_path_option(out, "ensemble --out");
      return run_ensemble(common, ensemble_probs, out, ensemble_members, ensemble_roster,
                          ensemble_mode, ensemble_threshold);
    }
    if (cmd_post->parsed()) {
      const json section = resolve_paths("postprocess", nullptr, post_out);
      fall_back(post_pr, section, "probs", post_probs);
      fall_back(post_mdl, section, "model", post_model);
      fall_back(post_cfg, section, "config", post_config);
      fall_back(post_thr, section, "threshold", post_threshold);
      fall_back(post_ma, section, "min_area", post_min_area);
      fall_back(post_mab, section, "min_area_boundary", post_min_area_boundary);
      require_path_option(post_probs, "postprocess --probs");
      require_path_option(out, "postprocess --out");
      return run_postprocess(common, post_probs, out, post_model, post_config, post_threshold,
                             post_min_area, post_min_area_boundary, post_fill);
    }
    if (cmd_score->parsed()) {
      const json section = resolve_paths("score", nullptr, score_out);
      fall_back(score_pr, section, "pred", score_pred);
      fall_back(score_tr, section, "truth", score_truth);
      require_path_option(score_pred, "score --pred");
      require_path_option(score_truth, "score --truth");
      require_path_option(out, "score --out");
      return run_score(common, score_pred, score_truth, out);
    }
    if (cmd_lb->parsed()) {
      const json section = resolve_paths("leaderboard", nullptr, lb_out);
      fall_back(lb_in, section, "entries", lb_entries);
      require_path_option(lb_entries, "leaderboard --entries");
      require_path_option(out, "leaderboard --out");
      return run_leaderboard(common, lb_entries, out);
    }
    return 2;
  } catch (const Error& e) {
    std::cerr << json{{"error", e.code_name()}, {"message", e.what()}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "StageFailure"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
}
