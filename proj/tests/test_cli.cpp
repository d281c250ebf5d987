// Integration drive of the command-line surface: every subcommand runs
// against the fixture dataset and its outputs are checked for the documented
// contracts. Prints one line per scenario; exits nonzero on any failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mayakit/mayakit.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace mayakit;

namespace {

std::string cli_path;
fs::path workdir;
int failures = 0;

struct CheckFailure {
  std::string message;
};

void require(bool condition, const std::string& message) {
  if (!condition) throw CheckFailure{message};
}

int run(const std::string& args) {
  const std::string command =
      cli_path + " " + args + " >>" + (workdir / "cli.log").string() + " 2>&1";
  return std::system(command.c_str());
}

void run_ok(const std::string& args) {
  require(run(args) == 0, "CLI failed: " + args);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(bool(in), "missing file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void scenario(const char* label, void (*body)()) {
  try {
    body();
    std::cout << "[ok] " << label << "\n";
  } catch (const CheckFailure& f) {
    std::cout << "[FAILED] " << label << ": " << f.message << "\n";
    ++failures;
  } catch (const std::exception& e) {
    std::cout << "[FAILED] " << label << ": " << e.what() << "\n";
    ++failures;
  }
}

fs::path data_dir() { return workdir / "fixtures"; }

void scenario_fixtures_and_validate() {
  run_ok("--seed 7 --jobs 4 fixtures --out " + data_dir().string() + " --tiles 12");
  require(fs::exists(data_dir() / "tile_0_lidar.tif"), "fixture lidar missing");
  require(fs::exists(data_dir() / "manifest.json"), "fixture manifest missing");
  require(fs::exists(data_dir() / "s1_raw"), "raw acquisitions missing");

  const fs::path report = workdir / "validate.jsonl";
  run_ok("validate --data " + data_dir().string() + " --out " + report.string());
  std::ifstream in(report);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    require(line.find("\"status\":\"ok\"") != std::string::npos,
            "validation reported an error: " + line);
    ++lines;
  }
  require(lines == 12 * 6, "expected one report line per fixture file");
}

void scenario_preprocess_s1_matches_fixture() {
  const fs::path out = workdir / "s1";
  run_ok("preprocess-s1 --data " + (data_dir() / "s1_raw").string() + " --out " + out.string());
  // The fixture's own 120-band product was built from the same acquisitions
  // by the same statistics path, so the rebuilt tile must be bit-identical.
  for (int id : {0, 5, 11}) {
    const Raster rebuilt = read_tiff_file(out / NamingConvention::filename(id, ModalityKind::s1));
    const Raster original =
        read_tiff_file(data_dir() / NamingConvention::filename(id, ModalityKind::s1));
    require(rebuilt == original, "rebuilt S1 tile differs from the fixture product");
  }
}

void scenario_preprocess_s2() {
  const fs::path out = workdir / "s2";
  run_ok("preprocess-s2 --data " + data_dir().string() + " --out " + out.string());
  const Raster composite = read_tiff_file(out / "tile_3_s2comp.tif");
  require(composite.bands == 4, "default composite carries B02,B03,B04,B08");
  require(composite.width == 24 && composite.height == 24, "composite keeps the tile size");
  for (float v : composite.f32_samples())
    require(v >= 0.0f && v <= 1.0f, "composite left the unit interval");
}

void scenario_synth_multi_instance() {
  const fs::path out = workdir / "synth2";
  run_ok("--seed 3 synth --data " + data_dir().string() + " --out " + out.string() +
         " --class building --style padded --pad 2 --count 4 --instances 3");
  const json manifest = json::parse(slurp(out / "synth_manifest.json"));
  require(manifest.size() == 12, "expected one manifest row per pasted instance");
  require(manifest[0]["instance"] == 0 && manifest[2]["instance"] == 2, "instance numbering");
  const Raster mask_raster = read_tiff_file(out / "tile_100000_mask_building.tif");
  require(mask_decode(mask_raster).count_true() > 0, "generated mask is empty");
}

void scenario_split_and_sample() {
  const fs::path split_path = workdir / "folds.json";
  run_ok("--seed 5 split --data " + data_dir().string() + " --out " + split_path.string() +
         " --k 3 --strategy presence --class building");
  const json folds = json::parse(slurp(split_path));
  require(folds["k"] == 3, "fold count");
  require(folds["assignment"].size() == 12, "every tile assigned");
  for (const auto& row : folds["assignment"])
    require(row["fold"].get<int>() >= 0 && row["fold"].get<int>() < 3, "fold out of range");

  const fs::path sample_path = workdir / "draws.json";
  run_ok("--seed 5 sample --data " + data_dir().string() + " --out " + sample_path.string() +
         " --weights equal --n 50");
  const json draws = json::parse(slurp(sample_path));
  require(draws["draws"].size() == 50, "draw count");

  const fs::path split2 = workdir / "folds_aguada.json";
  run_ok("--seed 5 split --data " + data_dir().string() + " --out " + split2.string() +
         " --k 3 --strategy aguada-bins");
  require(json::parse(slurp(split2))["strategy"] == "aguada-bins", "strategy echoed");
}

void scenario_augment_presets() {
  for (const std::string preset : {"ch1", "ch3", "dihedral-only"}) {
    const fs::path out = workdir / ("aug_" + preset);
    run_ok("--seed 11 augment --data " + data_dir().string() + " --out " + out.string() +
           " --preset " + preset);
    const Raster image = read_tiff_file(out / "tile_2_aug0_lidar.tif");
    require(image.sample_type == SampleType::f32, "augmented image is float");
    if (preset == "ch3")
      require(image.width >= 256 && image.width <= 400, "ch3 crop side range");
    else
      require(image.width == 480, "non-cropping preset keeps size");
    const Raster mask = read_tiff_file(out / "tile_2_aug0_mask_building.tif");
    require(mask.width == image.width, "mask cropped jointly with the image");
    for (auto v : mask.data) require(v == 0 || v == 255, "augmented mask left the 0/255 alphabet");
  }
}

void scenario_predict_ensemble_postprocess_score() {
  const fs::path probs = workdir / "probs";
  for (int variant = 0; variant < 2; ++variant)
    run_ok("--jobs 4 predict --data " + data_dir().string() + " --out " + probs.string() +
           " --model baseline --variant " + std::to_string(variant) + " --tta");
  run_ok("predict --data " + data_dir().string() + " --out " + probs.string() +
         " --model constant --value 0.0");

  // Roster file: constant member only for aguada, baselines elsewhere.
  const fs::path roster = workdir / "roster.json";
  {
    json doc;
    doc["classes"]["aguada"] = {"baseline_v0", "baseline_v1"};
    doc["classes"]["building"] = {"baseline_v0", "baseline_v1"};
    doc["classes"]["platform"] = {"baseline_v0", "baseline_v1"};
    std::ofstream(roster) << doc.dump(2);
  }
  const fs::path ens = workdir / "ens";
  run_ok("ensemble --probs " + probs.string() + " --out " + ens.string() + " --roster " +
         roster.string() + " --mode soft");
  require(fs::exists(ens / "tile_0_prob_building_ensemble.tif"), "soft ensemble output missing");

  const fs::path hard = workdir / "hard";
  run_ok("ensemble --probs " + probs.string() + " --out " + hard.string() +
         " --members baseline_v0,baseline_v1 --mode hard --threshold 0.5");
  require(fs::exists(hard / "tile_0_mask_building.tif"), "hard ensemble output missing");

  const fs::path masks = workdir / "masks";
  run_ok("postprocess --probs " + ens.string() + " --out " + masks.string() +
         " --model ensemble --threshold 0.5 --min-area 24 --min-area-boundary 12 --fill-holes");

  const fs::path report = workdir / "score.json";
  run_ok("score --pred " + masks.string() + " --truth " + data_dir().string() + " --out " +
         report.string());
  const json score = json::parse(slurp(report));
  require(score["overall_avg_iou"].get<double>() > 0.5, "pipeline score implausibly low");

  // A submission identical to the ground truth scores a perfect 1.0.
  const fs::path perfect = workdir / "perfect";
  fs::create_directories(perfect);
  for (int id = 0; id < 12; ++id)
    for (auto cls : all_classes) {
      const auto name = NamingConvention::filename(id, mask_kind_of(cls));
      fs::copy_file(data_dir() / name, perfect / name, fs::copy_options::overwrite_existing);
    }
  const fs::path perfect_report = workdir / "perfect.json";
  run_ok("score --pred " + perfect.string() + " --truth " + data_dir().string() + " --out " +
         perfect_report.string());
  require(json::parse(slurp(perfect_report))["overall_avg_iou"].get<double>() == 1.0,
          "perfect submission must score exactly 1.0");
}

void scenario_leaderboard() {
  const fs::path entries = workdir / "entries.json";
  {
    json doc = json::array();
    doc.push_back({{"name", "b"}, {"aguadas", 0.9}, {"platforms", 0.7}, {"buildings", 0.7}});
    doc.push_back({{"name", "a"}, {"aguadas", 0.99}, {"platforms", 0.8}, {"buildings", 0.8}});
    std::ofstream(entries) << doc.dump(2);
  }
  const fs::path prefix = workdir / "lb";
  run_ok("leaderboard --entries " + entries.string() + " --out " + prefix.string());
  const json rows = json::parse(slurp(prefix.string() + ".json"));
  require(rows[0]["name"] == "a" && rows[0]["rank"] == 1, "leaderboard ordering");
  require(slurp(prefix.string() + ".csv").rfind("rank,name", 0) == 0, "CSV header");
}

void scenario_config_file() {
  const fs::path config = workdir / "pipeline.json";
  {
    json doc;
    doc["seed"] = 5;
    doc["data"] = data_dir().string();
    doc["sample"] = {{"n", 25}, {"weights", "equal"}, {"out", (workdir / "cfg_draws.json").string()}};
    std::ofstream(config) << doc.dump(2);
  }
  run_ok("--config " + config.string() + " sample");
  const json draws = json::parse(slurp(workdir / "cfg_draws.json"));
  require(draws["draws"].size() == 25, "config-driven draw count");

  // Flags override the config.
  run_ok("--config " + config.string() + " sample --n 9 --out " +
         (workdir / "cfg_draws2.json").string());
  require(json::parse(slurp(workdir / "cfg_draws2.json"))["draws"].size() == 9,
          "flag must override config");

  // Manifests pin the effective parameters.
  const json manifest = json::parse(slurp(workdir / "cfg_draws.json.manifest.json"));
  require(manifest["seed"] == 5, "manifest seed");
  require(manifest["params"]["n"] == 25, "manifest params");
  require(manifest.contains("config_hash"), "manifest hash");
}

void scenario_structured_errors() {
  const std::string err_log = (workdir / "err.log").string();
  const int status = std::system(
      (cli_path + " validate --data /nonexistent_mayakit 2>" + err_log + " >/dev/null").c_str());
  require(status != 0, "missing input must fail");
  const std::string err = slurp(err_log);
  require(err.find("\"error\"") != std::string::npos, "error output must be structured JSON");
  require(err.find("InputMissing") != std::string::npos, "error code must be named");

  const int status2 = std::system(
      (cli_path + " ensemble --probs /nonexistent --out /tmp/x 2>>" + err_log + " >/dev/null")
          .c_str());
  require(status2 != 0, "ensemble without members must fail");
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--cli") cli_path = argv[i + 1];
    else if (flag == "--workdir") workdir = argv[i + 1];
  }
  if (cli_path.empty() || workdir.empty()) {
    std::cerr << "usage: cli_tests --cli PATH --workdir DIR\n";
    return 2;
  }
  fs::remove_all(workdir);
  fs::create_directories(workdir);

  scenario("fixtures + validate", scenario_fixtures_and_validate);
  scenario("preprocess-s1 rebuilds the fixture product", scenario_preprocess_s1_matches_fixture);
  scenario("preprocess-s2 composites", scenario_preprocess_s2);
  scenario("synth with multiple instances", scenario_synth_multi_instance);
  scenario("split + sample", scenario_split_and_sample);
  scenario("augment presets", scenario_augment_presets);
  scenario("predict -> ensemble -> postprocess -> score", scenario_predict_ensemble_postprocess_score);
  scenario("leaderboard rendering", scenario_leaderboard);
  scenario("config-file fallbacks", scenario_config_file);
  scenario("structured errors", scenario_structured_errors);

  if (failures == 0) {
    std::cout << "all CLI scenarios passed\n";
    return 0;
  }
  std::cout << failures << " CLI scenarios failed\n";
  return 1;
}
