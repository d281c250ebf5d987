#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "mayakit/error.hpp"
#include "mayakit/raster.hpp"

namespace mayakit {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;
};

inline ConfusionCounts confusion_counts(const BinaryMask& pred, const BinaryMask& gt) {
  if (pred.width != gt.width || pred.height != gt.height)
    throw Error(ErrorCode::shape_mismatch, "prediction and ground truth differ in shape");
  ConfusionCounts c;
  for (std::size_t i = 0; i < pred.bits.size(); ++i) {
    const bool p = pred.bits[i] != 0;
    const bool g = gt.bits[i] != 0;
    if (p && g)
      ++c.tp;
    else if (p && !g)
      ++c.fp;
    else if (!p && g)
      ++c.fn;
    else
      ++c.tn;
  }
  return c;
}

// Pixel IoU between two masks. Empty-vs-empty scores 1.0: the published
// aguada averages (~0.985 on a test set where most tiles contain none) are
// only possible under that convention.
inline double tile_iou(const BinaryMask& pred, const BinaryMask& gt) {
  const ConfusionCounts c = confusion_counts(pred, gt);
  const std::uint64_t inter = c.tp;
  const std::uint64_t uni = c.tp + c.fp + c.fn;
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

struct SegMetrics {
  double iou_pos = 0.0;
  double iou_neg = 0.0;
  double miou = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  double tnr = 0.0;
  double fnr = 0.0;
  double ppv = 0.0;
};

inline SegMetrics tile_metrics(const BinaryMask& pred, const BinaryMask& gt) {
  const ConfusionCounts c = confusion_counts(pred, gt);
  // Every 0/0 ratio scores 1.0, matching the tile_iou empty-agreement rule.
  auto ratio = [](std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  SegMetrics m;
  m.iou_pos = ratio(c.tp, c.tp + c.fp + c.fn);
  m.iou_neg = ratio(c.tn, c.tn + c.fp + c.fn);
  m.miou = (m.iou_pos + m.iou_neg) / 2.0;
  m.tpr = ratio(c.tp, c.tp + c.fn);
  m.fpr = ratio(c.fp, c.fp + c.tn);
  m.tnr = ratio(c.tn, c.tn + c.fp);
  m.fnr = ratio(c.fn, c.tp + c.fn);
  m.ppv = ratio(c.tp, c.tp + c.fp);
  return m;
}

struct DatasetScore {
  std::array<double, 3> class_average{};  // indexed by StructureClass
  double overall = 0.0;
};

// Challenge aggregation: per-class mean over tiles, then the unweighted mean
// of the three class averages.
inline DatasetScore dataset_score(const std::vector<std::array<double, 3>>& per_tile_ious) {
  if (per_tile_ious.empty()) throw Error(ErrorCode::missing_class, "no tiles scored");
  DatasetScore s;
  for (std::size_t c = 0; c < 3; ++c) {
    double sum = 0.0;
    for (const auto& tile : per_tile_ious) sum += tile[c];
    s.class_average[c] = sum / static_cast<double>(per_tile_ious.size());
  }
  s.overall = (s.class_average[0] + s.class_average[1] + s.class_average[2]) / 3.0;
  return s;
}

struct LeaderboardEntry {
  std::string name;
  double aguadas = 0.0;
  double platforms = 0.0;
  double buildings = 0.0;
};

struct LeaderboardRow {
  int rank = 0;
  std::string name;
  double avg_iou = 0.0;
  double aguadas = 0.0;
  double platforms = 0.0;
  double buildings = 0.0;
};

inline double round_half_up(double v, int decimals = 4) {
  const double scale = std::pow(10.0, decimals);
  return std::floor(v * scale + 0.5) / scale;
}

// Rows sorted by overall average descending (name ascending on exact ties).
// Entries equal at display precision share a rank, competition style.
inline std::vector<LeaderboardRow> leaderboard(std::vector<LeaderboardEntry> entries) {
  if (entries.empty()) throw Error(ErrorCode::invalid_argument, "leaderboard needs >= 1 entry");
  std::vector<LeaderboardRow> rows;
  rows.reserve(entries.size());
  for (const auto& e : entries) {
    LeaderboardRow r;
    r.name = e.name;
    r.aguadas = e.aguadas;
    r.platforms = e.platforms;
    r.buildings = e.buildings;
    r.avg_iou = (e.aguadas + e.platforms + e.buildings) / 3.0;
    rows.push_back(std::move(r));
  }
  std::sort(rows.begin(), rows.end(), [](const LeaderboardRow& a, const LeaderboardRow& b) {
    if (a.avg_iou != b.avg_iou) return a.avg_iou > b.avg_iou;
    return a.name < b.name;
  });
  int rank = 0;
  double prev = -1.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double display = round_half_up(rows[i].avg_iou);
    if (i == 0 || display != prev) rank = static_cast<int>(i) + 1;
    rows[i].rank = rank;
    prev = display;
  }
  return rows;
}

inline std::string format_score(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.4f", round_half_up(v));
  return buffer;
}

inline std::string leaderboard_csv(const std::vector<LeaderboardRow>& rows) {
  std::string out = "rank,name,avg_iou,aguadas,platforms,buildings\n";
  for (const auto& r : rows) {
    out += std::to_string(r.rank) + "," + r.name + "," + format_score(r.avg_iou) + "," +
           format_score(r.aguadas) + "," + format_score(r.platforms) + "," +
           format_score(r.buildings) + "\n";
  }
  return out;
}

}  // namespace mayakit
