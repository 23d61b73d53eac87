#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tad/corpus.hpp"

namespace tad {

struct EvalThresholds {
  std::vector<double> iou_grid;

  /// {0.5, 0.75, 0.95}
  static EvalThresholds anet_detection();
  /// {0.1, 0.2, 0.3, 0.4, 0.5}
  static EvalThresholds thumos_detection();
  /// [0.5 : 0.05 : 0.95], used for average recall and average mAP.
  static EvalThresholds averaged();

  void validate() const;
};

struct EvalReport {
  std::string metric;
  /// (threshold, value) in grid order.
  std::vector<std::pair<double, double>> per_threshold;
  /// Arithmetic mean of per_threshold values.
  double average = 0.0;
  /// mAP only: class -> AP at each grid threshold.
  std::map<int, std::vector<double>> per_class;
  std::size_t num_ground_truth = 0;
  std::size_t num_predictions = 0;
  std::vector<std::string> warnings;
};

// Single-video forms.

/// Fraction of instances matched by some proposal with IOU >= threshold.
/// An empty instance list yields 1.0.
double recall_at_iou(std::span<const TemporalInterval> proposals,
                     std::span<const GroundTruthInstance> gts, double threshold);

/// All-point AP with greedy score-order matching; 0 when the class has no instance.
double average_precision(std::span<const Detection> detections,
                         std::span<const GroundTruthInstance> gts, int class_id, double threshold);

// Corpus forms: instances and predictions are matched within the same video.

double recall_at_iou(std::span<const VideoProposals> proposals,
                     std::span<const VideoGroundTruth> gts, double threshold);

EvalReport average_recall(std::span<const VideoProposals> proposals,
                          std::span<const VideoGroundTruth> gts, const EvalThresholds& grid);

double average_precision(std::span<const VideoDetections> detections,
                         std::span<const VideoGroundTruth> gts, int class_id, double threshold);

/// Per threshold, mean AP over the classes present in the ground truth.
EvalReport mean_ap(std::span<const VideoDetections> detections,
                   std::span<const VideoGroundTruth> gts, const EvalThresholds& grid);

/// Aligned plain-text table with one column per threshold plus the average.
std::string format_table(std::span<const std::pair<std::string, EvalReport>> rows);

}  // namespace tad
