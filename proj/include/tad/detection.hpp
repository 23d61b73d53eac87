#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tad/intervals.hpp"
#include "tad/svm.hpp"
#include "tad/tag.hpp"

namespace tad {

/// Per-snippet probabilities over K activity classes followed by background
/// (index K).
struct SnippetScoreTrack {
  std::string video_id;
  double snippet_stride = 1.0;
  std::vector<std::vector<double>> probs;

  int num_classes() const noexcept {
    return probs.empty() ? 0 : static_cast<int>(probs.front().size()) - 1;
  }
  int background_index() const noexcept { return num_classes(); }
  double duration() const noexcept { return snippet_stride * static_cast<double>(probs.size()); }

  /// Throws std::invalid_argument on ragged rows, entries outside [0, 1] or a
  /// row whose sum differs from 1 by more than 1e-6.
  void validate() const;
};

struct GroundTruthInstance {
  TemporalInterval interval;
  int class_id = 0;
};

// ---------------------------------------------------------------------------
// Training sample selection

struct ActivitySamples {
  std::vector<std::pair<TemporalInterval, int>> positives;
  std::vector<TemporalInterval> negatives;
};

/// Positive when the best-matching instance has IOU > 0.7 (labelled with its
/// class); negative when less than 5% of the proposal overlaps any instance.
/// Proposals meeting neither rule are dropped.
ActivitySamples select_training_samples(std::span<const TemporalInterval> proposals,
                                        std::span<const GroundTruthInstance> gts);

inline constexpr double kPositiveIou = 0.7;
inline constexpr double kNegativeOverlap = 0.05;
inline constexpr double kIncompleteIou = 0.3;

/// Per-class proposal labels for a class-specific filter.
struct ClassSamples {
  int class_id = 0;
  std::vector<TemporalInterval> positives;
  std::vector<TemporalInterval> negatives;
};

/// Completeness labels: positives have IOU > 0.7 with a class-c instance;
/// negatives have 0 < IOU < 0.3 with their best class-c instance (partial or
/// over-extended coverage). Proposals touching no class-c instance belong to
/// the activity stage and are excluded. One entry per class in [0, K).
std::vector<ClassSamples> completeness_samples(std::span<const TemporalInterval> proposals,
                                               std::span<const GroundTruthInstance> gts,
                                               int num_classes);

/// Single-stage labels: positives as above; every proposal whose best IOU
/// over all instances is below 0.3 is a negative for every class, so
/// background and incomplete proposals share one negative pool.
std::vector<ClassSamples> one_stage_samples(std::span<const TemporalInterval> proposals,
                                            std::span<const GroundTruthInstance> gts,
                                            int num_classes);

// ---------------------------------------------------------------------------
// Activity classification

enum class Pooling { kMean, kMax };

/// Region-level class distribution from the snippets whose midpoints lie in
/// `region` (the nearest snippet when none does). Throws std::out_of_range
/// when the region starts at or after the end of the track.
std::vector<double> aggregate_region_scores(const SnippetScoreTrack& track,
                                            const TemporalInterval& region,
                                            Pooling pooling = Pooling::kMean);

struct ActivityLabel {
  int class_id = 0;
  double p_a = 0.0;
};

/// Argmax over the distribution, lowest index on ties. std::nullopt when the
/// background entry (last) wins.
std::optional<ActivityLabel> classify_activity(std::span<const double> region_probs);

// ---------------------------------------------------------------------------
// Completeness

struct CompletenessFeature {
  double whole = 0.0;
  double first_half = 0.0;
  double second_half = 0.0;
  double before = 0.0;
  double after = 0.0;

  FeatureVector as_vector() const noexcept { return {whole, first_half, second_half, before, after}; }
  /// Same feature with only the whole-region pooling kept.
  CompletenessFeature region_only() const noexcept { return {whole, 0.0, 0.0, 0.0, 0.0}; }
  friend bool operator==(const CompletenessFeature&, const CompletenessFeature&) = default;
};

/// Two-level temporal pyramid plus before/after context of the class channel.
/// Spans are pooled by time-weighted mean and clipped to the track; context
/// spans are context_ratio * duration long and read 0 when clipped to nothing.
CompletenessFeature completeness_features(const SnippetScoreTrack& track,
                                          const TemporalInterval& region, int class_id,
                                          double context_ratio = 0.25);

struct LinearModel {
  int class_id = 0;
  FeatureVector weights{};
  double bias = 0.0;
};

struct LabeledFeatures {
  int class_id = 0;
  std::vector<CompletenessFeature> positives;
  std::vector<CompletenessFeature> negatives;
};

struct FilterTraining {
  std::vector<LinearModel> models;
  /// Classes lacking positives or negatives; no model is produced for them.
  std::vector<int> skipped_classes;
  std::vector<SvmResult> traces;
};

FilterTraining train_completeness_filters(std::span<const LabeledFeatures> features,
                                          const SvmConfig& config);

double completeness_score(const LinearModel& model, const CompletenessFeature& feature) noexcept;

/// p_a * exp(s_c). Throws std::invalid_argument unless 0 < p_a <= 1.
double detection_confidence(double p_a, double s_c);

/// p_a * T^alpha for relative duration T in (0, 1].
double heuristic_h1(double p_a, double relative_duration, double alpha = 0.7);

/// Normalised duration histogram over [edges.front(), edges.back()].
class DurationHistogram {
 public:
  DurationHistogram(std::vector<double> edges, std::vector<double> frequencies);

  /// `num_bins` log-spaced bins spanning the observed durations.
  static DurationHistogram from_durations(std::span<const double> durations, int num_bins = 10);

  /// Frequency of the bin containing `duration`; 0 outside the support.
  double frequency(double duration) const noexcept;

  const std::vector<double>& edges() const noexcept { return edges_; }
  const std::vector<double>& frequencies() const noexcept { return freqs_; }

 private:
  std::vector<double> edges_;
  std::vector<double> freqs_;
};

double heuristic_h2(double p_a, double duration, const DurationHistogram& histogram);

// ---------------------------------------------------------------------------
// Detection

struct Detection {
  TemporalInterval interval;
  int class_id = 0;
  double p_a = 0.0;
  double s_c = 0.0;
  double s_det = 0.0;
};

enum class ScoringMode {
  /// Completeness filters on the pyramid + context feature (the full cascade).
  kCompleteness,
  /// Single-stage classifiers that only see the whole-region pooling.
  kOneStage,
  kHeuristicH1,
  kHeuristicH2,
};

struct DetectOptions {
  double nms_iou = 0.6;
  double context_ratio = 0.25;
  Pooling pooling = Pooling::kMean;
  ScoringMode mode = ScoringMode::kCompleteness;
  double h1_alpha = 0.7;
  std::optional<DurationHistogram> histogram;
};

inline constexpr double kAnetNmsIou = 0.6;
inline constexpr double kThumosNmsIou = 0.2;

struct DetectDiagnostics {
  std::size_t proposals = 0;
  std::size_t background_rejected = 0;
  std::size_t missing_model = 0;
  /// Heuristic multipliers of zero cannot be expressed as exp(s_c).
  std::size_t zero_score = 0;
};

struct DetectResult {
  std::vector<Detection> detections;
  DetectDiagnostics diagnostics;
};

/// Runs the cascade over one video's proposals and applies class-aware NMS.
/// Detections are sorted by s_det descending. For heuristic modes s_c holds
/// the log of the duration multiplier so that s_det = p_a * exp(s_c) holds in
/// every mode. Throws std::invalid_argument when the tracks disagree on video
/// id, stride or length.
DetectResult detect(const ActionnessTrack& actionness, const SnippetScoreTrack& scores,
                    std::span<const TemporalInterval> proposals,
                    std::span<const LinearModel> models, const DetectOptions& options);

}  // namespace tad
