#include "tad/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace tad {

namespace {

std::unordered_map<std::string, std::size_t> index_by_video(std::span<const VideoGroundTruth> gts) {
  std::unordered_map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < gts.size(); ++i) idx.emplace(gts[i].video_id, i);
  return idx;
}

std::size_t count_matched(std::span<const ScoredInterval> proposals,
                          std::span<const GroundTruthInstance> gts, double threshold) {
  std::size_t matched = 0;
  for (const auto& g : gts) {
    for (const auto& p : proposals) {
      if (iou(p.interval, g.interval) >= threshold) {
        ++matched;
        break;
      }
    }
  }
  return matched;
}

struct RankedDetection {
  const Detection* det;
  std::size_t gt_video;  // index into the ground-truth list, or npos
};

double ap_from_flags(const std::vector<bool>& is_tp, std::size_t num_gt) {
  if (num_gt == 0) return 0.0;
  const std::size_t n = is_tp.size();
  std::vector<double> precision(n);
  std::vector<double> recall(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (is_tp[i]) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(num_gt);
  }
  for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

void check_threshold(double t) {
  if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("IOU threshold must lie in (0, 1]");
}

}  // namespace

EvalThresholds EvalThresholds::anet_detection() { return {{0.5, 0.75, 0.95}}; }

EvalThresholds EvalThresholds::thumos_detection() { return {{0.1, 0.2, 0.3, 0.4, 0.5}}; }

EvalThresholds EvalThresholds::averaged() {
  EvalThresholds t;
  for (int k = 10; k <= 19; ++k) t.iou_grid.push_back(k / 20.0);
  return t;
}

void EvalThresholds::validate() const {
  if (iou_grid.empty()) throw std::invalid_argument("empty IOU grid");
  for (std::size_t i = 0; i < iou_grid.size(); ++i) {
    check_threshold(iou_grid[i]);
    if (i > 0 && iou_grid[i] < iou_grid[i - 1]) throw std::invalid_argument("IOU grid must be sorted");
  }
}

double recall_at_iou(std::span<const TemporalInterval> proposals,
                     std::span<const GroundTruthInstance> gts, double threshold) {
  check_threshold(threshold);
  if (gts.empty()) return 1.0;
  std::vector<ScoredInterval> scored;
  for (const auto& p : proposals) scored.push_back({p, 0.0, std::nullopt});
  return static_cast<double>(count_matched(scored, gts, threshold)) / static_cast<double>(gts.size());
}

double recall_at_iou(std::span<const VideoProposals> proposals,
                     std::span<const VideoGroundTruth> gts, double threshold) {
  check_threshold(threshold);
  std::unordered_map<std::string, const VideoProposals*> by_video;
  for (const auto& vp : proposals) by_video.emplace(vp.video_id, &vp);
  std::size_t total = 0;
  std::size_t matched = 0;
  for (const auto& vg : gts) {
    total += vg.instances.size();
    const auto it = by_video.find(vg.video_id);
    if (it != by_video.end()) matched += count_matched(it->second->proposals, vg.instances, threshold);
  }
  return total == 0 ? 1.0 : static_cast<double>(matched) / static_cast<double>(total);
}

EvalReport average_recall(std::span<const VideoProposals> proposals,
                          std::span<const VideoGroundTruth> gts, const EvalThresholds& grid) {
  grid.validate();
  EvalReport report;
  report.metric = "AR";
  for (const auto& vg : gts) report.num_ground_truth += vg.instances.size();
  for (const auto& vp : proposals) report.num_predictions += vp.proposals.size();
  if (report.num_ground_truth == 0) report.warnings.push_back("no ground-truth instances; recall defined as 1");

  double sum = 0.0;
  for (double t : grid.iou_grid) {
    const double r = recall_at_iou(proposals, gts, t);
    report.per_threshold.emplace_back(t, r);
    sum += r;
  }
  report.average = sum / static_cast<double>(grid.iou_grid.size());
  return report;
}

double average_precision(std::span<const VideoDetections> detections,
                         std::span<const VideoGroundTruth> gts, int class_id, double threshold) {
  check_threshold(threshold);
  const auto gt_index = index_by_video(gts);

  std::size_t num_gt = 0;
  // Per video: positions of class instances and their matched flags.
  std::vector<std::vector<std::size_t>> class_gts(gts.size());
  std::vector<std::vector<bool>> matched(gts.size());
  for (std::size_t v = 0; v < gts.size(); ++v) {
    for (std::size_t i = 0; i < gts[v].instances.size(); ++i) {
      if (gts[v].instances[i].class_id == class_id) class_gts[v].push_back(i);
    }
    matched[v].assign(class_gts[v].size(), false);
    num_gt += class_gts[v].size();
  }
  if (num_gt == 0) return 0.0;

  std::vector<RankedDetection> ranked;
  for (const auto& vd : detections) {
    const auto it = gt_index.find(vd.video_id);
    const std::size_t v = it == gt_index.end() ? static_cast<std::size_t>(-1) : it->second;
    for (const auto& d : vd.detections) {
      if (d.class_id == class_id) ranked.push_back({&d, v});
    }
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedDetection& a, const RankedDetection& b) {
    if (a.det->s_det != b.det->s_det) return a.det->s_det > b.det->s_det;
    return a.det->interval.start() < b.det->interval.start();
  });

  std::vector<bool> is_tp;
  is_tp.reserve(ranked.size());
  for (const auto& r : ranked) {
    bool tp = false;
    if (r.gt_video != static_cast<std::size_t>(-1)) {
      const auto& inst = gts[r.gt_video].instances;
      auto& flags = matched[r.gt_video];
      double best = -1.0;
      std::size_t best_k = 0;
      for (std::size_t k = 0; k < flags.size(); ++k) {
        if (flags[k]) continue;
        const double v = iou(r.det->interval, inst[class_gts[r.gt_video][k]].interval);
        if (v >= threshold && v > best) {
          best = v;
          best_k = k;
        }
      }
      if (best >= 0.0) {
        flags[best_k] = true;
        tp = true;
      }
    }
    is_tp.push_back(tp);
  }
  return ap_from_flags(is_tp, num_gt);
}

double average_precision(std::span<const Detection> detections,
                         std::span<const GroundTruthInstance> gts, int class_id, double threshold) {
  const VideoDetections vd{"", {detections.begin(), detections.end()}};
  const VideoGroundTruth vg{"", {gts.begin(), gts.end()}};
  return average_precision(std::span(&vd, 1), std::span(&vg, 1), class_id, threshold);
}

EvalReport mean_ap(std::span<const VideoDetections> detections,
                   std::span<const VideoGroundTruth> gts, const EvalThresholds& grid) {
  grid.validate();
  EvalReport report;
  report.metric = "mAP";
  std::set<int> classes;
  for (const auto& vg : gts) {
    report.num_ground_truth += vg.instances.size();
    for (const auto& g : vg.instances) classes.insert(g.class_id);
  }
  std::set<int> predicted;
  for (const auto& vd : detections) {
    report.num_predictions += vd.detections.size();
    for (const auto& d : vd.detections) predicted.insert(d.class_id);
  }
  if (classes.empty()) report.warnings.push_back("no ground-truth instances; mAP defined as 0");
  for (int c : predicted) {
    if (!classes.contains(c)) {
      report.warnings.push_back("class " + std::to_string(c) + " has detections but no ground truth");
    }
  }

  for (int c : classes) report.per_class[c].reserve(grid.iou_grid.size());
  double sum = 0.0;
  for (double t : grid.iou_grid) {
    double class_sum = 0.0;
    for (int c : classes) {
      const double ap = average_precision(detections, gts, c, t);
      report.per_class[c].push_back(ap);
      class_sum += ap;
    }
    const double m = classes.empty() ? 0.0 : class_sum / static_cast<double>(classes.size());
    report.per_threshold.emplace_back(t, m);
    sum += m;
  }
  report.average = sum / static_cast<double>(grid.iou_grid.size());
  return report;
}

std::string format_table(std::span<const std::pair<std::string, EvalReport>> rows) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header{"Method", "Metric", "#Pred"};
  if (!rows.empty()) {
    for (const auto& [t, v] : rows.front().second.per_threshold) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "@%.2f", t);
      header.emplace_back(buf);
    }
  }
  header.emplace_back("Avg");
  cells.push_back(header);

  for (const auto& [name, report] : rows) {
    std::vector<std::string> row{name, report.metric, std::to_string(report.num_predictions)};
    char buf[32];
    for (const auto& [t, v] : report.per_threshold) {
      std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
      row.emplace_back(buf);
    }
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * report.average);
    row.emplace_back(buf);
    cells.push_back(std::move(row));
  }

  std::vector<std::size_t> width;
  for (const auto& row : cells) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::ostringstream os;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t i = 0; i < cells[r].size(); ++i) {
      if (i > 0) os << " | ";
      const auto pad = std::string(width[i] - cells[r][i].size(), ' ');
      os << (i == 0 ? cells[r][i] + pad : pad + cells[r][i]);
    }
    os << '\n';
    if (r == 0) {
      for (std::size_t i = 0; i < width.size(); ++i) {
        if (i > 0) os << "-+-";
        os << std::string(width[i], '-');
      }
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace tad
