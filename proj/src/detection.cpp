#include "tad/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace tad {

namespace {

struct BestMatch {
  double iou = 0.0;
  std::ptrdiff_t index = -1;
};

// Highest-IOU instance (lowest index on ties), optionally restricted to a class.
BestMatch best_match(const TemporalInterval& p, std::span<const GroundTruthInstance> gts,
                     std::optional<int> class_id = std::nullopt) {
  BestMatch best;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    if (class_id && gts[i].class_id != *class_id) continue;
    const double v = iou(p, gts[i].interval);
    if (v > best.iou) best = {v, static_cast<std::ptrdiff_t>(i)};
  }
  return best;
}

// Time-weighted mean of one class channel over [lo, hi) clipped to the track.
double span_mean(const SnippetScoreTrack& track, int channel, double lo, double hi) {
  lo = std::max(lo, 0.0);
  hi = std::min(hi, track.duration());
  if (!(hi > lo)) return 0.0;
  const double stride = track.snippet_stride;
  const auto n = track.probs.size();
  auto first = static_cast<std::size_t>(std::max(0.0, std::floor(lo / stride)));
  double acc = 0.0;
  double weight = 0.0;
  for (std::size_t i = first; i < n; ++i) {
    const double s0 = static_cast<double>(i) * stride;
    if (s0 >= hi) break;
    const double s1 = static_cast<double>(i + 1) * stride;
    const double w = std::min(s1, hi) - std::max(s0, lo);
    if (w <= 0.0) continue;
    acc += w * track.probs[i][static_cast<std::size_t>(channel)];
    weight += w;
  }
  return weight > 0.0 ? acc / weight : 0.0;
}

void check_class(const SnippetScoreTrack& track, int class_id) {
  if (class_id < 0 || class_id >= track.num_classes()) {
    throw std::invalid_argument("class id " + std::to_string(class_id) + " outside [0, " +
                                std::to_string(track.num_classes()) + ")");
  }
}

}  // namespace

void SnippetScoreTrack::validate() const {
  if (!(snippet_stride > 0.0) || !std::isfinite(snippet_stride)) {
    throw std::invalid_argument("score track '" + video_id + "': stride must be positive");
  }
  if (probs.empty()) throw std::invalid_argument("score track '" + video_id + "' is empty");
  const auto width = probs.front().size();
  if (width < 2) {
    throw std::invalid_argument("score track '" + video_id + "': need at least one class plus background");
  }
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const auto& row = probs[i];
    if (row.size() != width) {
      throw std::invalid_argument("score track '" + video_id + "': ragged row " + std::to_string(i));
    }
    double sum = 0.0;
    for (double v : row) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument("score track '" + video_id + "': probability outside [0, 1]");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw std::invalid_argument("score track '" + video_id + "': row " + std::to_string(i) +
                                  " does not sum to 1");
    }
  }
}

ActivitySamples select_training_samples(std::span<const TemporalInterval> proposals,
                                        std::span<const GroundTruthInstance> gts) {
  std::vector<TemporalInterval> gt_intervals;
  gt_intervals.reserve(gts.size());
  for (const auto& g : gts) gt_intervals.push_back(g.interval);

  ActivitySamples out;
  for (const auto& p : proposals) {
    const BestMatch m = best_match(p, gts);
    if (m.index >= 0 && m.iou > kPositiveIou) {
      out.positives.emplace_back(p, gts[static_cast<std::size_t>(m.index)].class_id);
    } else if (overlap_fraction(p, gt_intervals) < kNegativeOverlap) {
      out.negatives.push_back(p);
    }
  }
  return out;
}

std::vector<ClassSamples> completeness_samples(std::span<const TemporalInterval> proposals,
                                               std::span<const GroundTruthInstance> gts,
                                               int num_classes) {
  std::vector<ClassSamples> out(static_cast<std::size_t>(std::max(num_classes, 0)));
  for (int c = 0; c < num_classes; ++c) out[static_cast<std::size_t>(c)].class_id = c;
  for (const auto& p : proposals) {
    for (int c = 0; c < num_classes; ++c) {
      const BestMatch m = best_match(p, gts, c);
      if (m.index < 0) continue;
      auto& bucket = out[static_cast<std::size_t>(c)];
      if (m.iou > kPositiveIou) {
        bucket.positives.push_back(p);
      } else if (m.iou > 0.0 && m.iou < kIncompleteIou) {
        bucket.negatives.push_back(p);
      }
    }
  }
  return out;
}

std::vector<ClassSamples> one_stage_samples(std::span<const TemporalInterval> proposals,
                                            std::span<const GroundTruthInstance> gts,
                                            int num_classes) {
  std::vector<ClassSamples> out(static_cast<std::size_t>(std::max(num_classes, 0)));
  for (int c = 0; c < num_classes; ++c) out[static_cast<std::size_t>(c)].class_id = c;
  for (const auto& p : proposals) {
    const BestMatch m = best_match(p, gts);
    if (m.index >= 0 && m.iou > kPositiveIou) {
      const int c = gts[static_cast<std::size_t>(m.index)].class_id;
      if (c >= 0 && c < num_classes) out[static_cast<std::size_t>(c)].positives.push_back(p);
    } else if (m.iou < kIncompleteIou) {
      for (auto& bucket : out) bucket.negatives.push_back(p);
    }
  }
  return out;
}

std::vector<double> aggregate_region_scores(const SnippetScoreTrack& track,
                                            const TemporalInterval& region, Pooling pooling) {
  if (track.probs.empty() || region.start() >= track.duration()) {
    throw std::out_of_range("region [" + std::to_string(region.start()) + ", " +
                            std::to_string(region.end()) + ") lies outside track '" +
                            track.video_id + "'");
  }
  const double stride = track.snippet_stride;
  const std::size_t n = track.probs.size();
  const std::size_t width = track.probs.front().size();

  std::vector<double> acc(width, 0.0);
  std::size_t count = 0;
  const double lo_idx = std::floor(region.start() / stride - 0.5);
  for (auto i = static_cast<std::size_t>(std::max(0.0, lo_idx)); i < n; ++i) {
    const double mid = (static_cast<double>(i) + 0.5) * stride;
    if (mid >= region.end()) break;
    if (mid < region.start()) continue;
    const auto& row = track.probs[i];
    for (std::size_t k = 0; k < width; ++k) {
      acc[k] = pooling == Pooling::kMean ? acc[k] + row[k] : (count == 0 ? row[k] : std::max(acc[k], row[k]));
    }
    ++count;
  }
  if (count == 0) {
    const auto nearest = std::min<std::size_t>(
        n - 1, static_cast<std::size_t>(std::max(0.0, std::floor(region.midpoint() / stride))));
    return track.probs[nearest];
  }
  double total = 0.0;
  for (double v : acc) total += v;
  for (double& v : acc) v /= (pooling == Pooling::kMean ? static_cast<double>(count) : total);
  return acc;
}

std::optional<ActivityLabel> classify_activity(std::span<const double> region_probs) {
  if (region_probs.size() < 2) throw std::invalid_argument("need at least one class plus background");
  std::size_t arg = 0;
  for (std::size_t k = 1; k < region_probs.size(); ++k) {
    if (region_probs[k] > region_probs[arg]) arg = k;
  }
  if (arg + 1 == region_probs.size()) return std::nullopt;
  return ActivityLabel{static_cast<int>(arg), region_probs[arg]};
}

CompletenessFeature completeness_features(const SnippetScoreTrack& track,
                                          const TemporalInterval& region, int class_id,
                                          double context_ratio) {
  check_class(track, class_id);
  if (!(context_ratio >= 0.0)) throw std::invalid_argument("context ratio must be non-negative");
  const double s = region.start();
  const double e = region.end();
  const double mid = region.midpoint();
  const double ctx = context_ratio * region.duration();
  return {
      span_mean(track, class_id, s, e),
      span_mean(track, class_id, s, mid),
      span_mean(track, class_id, mid, e),
      span_mean(track, class_id, s - ctx, s),
      span_mean(track, class_id, e, e + ctx),
  };
}

FilterTraining train_completeness_filters(std::span<const LabeledFeatures> features,
                                          const SvmConfig& config) {
  config.validate();
  FilterTraining out;
  for (const auto& set : features) {
    if (set.positives.empty() || set.negatives.empty()) {
      out.skipped_classes.push_back(set.class_id);
      continue;
    }
    std::vector<FeatureVector> pos;
    std::vector<FeatureVector> neg;
    for (const auto& f : set.positives) pos.push_back(f.as_vector());
    for (const auto& f : set.negatives) neg.push_back(f.as_vector());
    SvmConfig per_class = config;
    per_class.seed = config.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(set.class_id + 1);
    SvmResult r = train_svm_with_mining(pos, neg, per_class);
    out.models.push_back({set.class_id, r.model.weights, r.model.bias});
    out.traces.push_back(std::move(r));
  }
  return out;
}

double completeness_score(const LinearModel& model, const CompletenessFeature& feature) noexcept {
  const FeatureVector x = feature.as_vector();
  double s = model.bias;
  for (std::size_t k = 0; k < kFeatureDim; ++k) s += model.weights[k] * x[k];
  return s;
}

double detection_confidence(double p_a, double s_c) {
  if (!(p_a > 0.0 && p_a <= 1.0)) throw std::invalid_argument("p_a must lie in (0, 1]");
  return p_a * std::exp(s_c);
}

double heuristic_h1(double p_a, double relative_duration, double alpha) {
  if (!(relative_duration > 0.0)) throw std::invalid_argument("relative duration must be positive");
  return p_a * std::pow(relative_duration, alpha);
}

DurationHistogram::DurationHistogram(std::vector<double> edges, std::vector<double> frequencies)
    : edges_(std::move(edges)), freqs_(std::move(frequencies)) {
  if (edges_.size() < 2 || freqs_.size() + 1 != edges_.size()) {
    throw std::invalid_argument("histogram needs n + 1 edges for n bins");
  }
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (!(edges_[i] > edges_[i - 1])) throw std::invalid_argument("histogram edges must increase");
  }
}

DurationHistogram DurationHistogram::from_durations(std::span<const double> durations, int num_bins) {
  if (durations.empty() || num_bins < 1) {
    throw std::invalid_argument("histogram needs durations and at least one bin");
  }
  const auto [mn, mx] = std::minmax_element(durations.begin(), durations.end());
  if (!(*mn > 0.0)) throw std::invalid_argument("durations must be positive");
  double lo = std::log(*mn);
  double hi = std::log(*mx);
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  std::vector<double> edges(static_cast<std::size_t>(num_bins) + 1);
  for (int i = 0; i <= num_bins; ++i) {
    edges[static_cast<std::size_t>(i)] = std::exp(lo + (hi - lo) * i / num_bins);
  }
  // Exact observed extremes so that every sample falls inside the support.
  edges.front() = std::min(edges.front(), *mn);
  edges.back() = std::max(edges.back(), *mx);

  std::vector<double> counts(static_cast<std::size_t>(num_bins), 0.0);
  DurationHistogram h(edges, counts);
  for (double d : durations) {
    const auto it = std::upper_bound(h.edges_.begin(), h.edges_.end(), d);
    auto bin = static_cast<std::size_t>(std::distance(h.edges_.begin(), it)) - 1;
    bin = std::min(bin, counts.size() - 1);
    counts[bin] += 1.0;
  }
  for (double& c : counts) c /= static_cast<double>(durations.size());
  h.freqs_ = std::move(counts);
  return h;
}

double DurationHistogram::frequency(double duration) const noexcept {
  if (!(duration >= edges_.front() && duration <= edges_.back())) return 0.0;
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), duration);
  auto bin = static_cast<std::size_t>(std::distance(edges_.begin(), it)) - 1;
  return freqs_[std::min(bin, freqs_.size() - 1)];
}

double heuristic_h2(double p_a, double duration, const DurationHistogram& histogram) {
  return p_a * histogram.frequency(duration);
}

DetectResult detect(const ActionnessTrack& actionness, const SnippetScoreTrack& scores,
                    std::span<const TemporalInterval> proposals,
                    std::span<const LinearModel> models, const DetectOptions& options) {
  if (actionness.video_id != scores.video_id || actionness.snippet_stride != scores.snippet_stride ||
      actionness.scores.size() != scores.probs.size()) {
    throw std::invalid_argument("actionness and score tracks for '" + actionness.video_id +
                                "' are not aligned");
  }
  if ((options.mode == ScoringMode::kHeuristicH2) && !options.histogram) {
    throw std::invalid_argument("H2 scoring needs a duration histogram");
  }
  std::map<int, const LinearModel*> by_class;
  for (const auto& m : models) by_class.emplace(m.class_id, &m);

  DetectResult result;
  result.diagnostics.proposals = proposals.size();
  std::vector<Detection> raw;
  const double video_duration = actionness.duration();

  for (const auto& p : proposals) {
    const auto probs = aggregate_region_scores(scores, p, options.pooling);
    const auto label = classify_activity(probs);
    if (!label) {
      ++result.diagnostics.background_rejected;
      continue;
    }
    double s_c = 0.0;
    switch (options.mode) {
      case ScoringMode::kCompleteness:
      case ScoringMode::kOneStage: {
        const auto it = by_class.find(label->class_id);
        if (it == by_class.end()) {
          ++result.diagnostics.missing_model;
          continue;
        }
        auto feature = completeness_features(scores, p, label->class_id, options.context_ratio);
        if (options.mode == ScoringMode::kOneStage) feature = feature.region_only();
        s_c = completeness_score(*it->second, feature);
        break;
      }
      case ScoringMode::kHeuristicH1:
        s_c = options.h1_alpha * std::log(std::min(1.0, p.duration() / video_duration));
        break;
      case ScoringMode::kHeuristicH2: {
        const double f = options.histogram->frequency(p.duration());
        if (f <= 0.0) {
          ++result.diagnostics.zero_score;
          continue;
        }
        s_c = std::log(f);
        break;
      }
    }
    raw.push_back({p, label->class_id, label->p_a, s_c, detection_confidence(label->p_a, s_c)});
  }

  std::vector<ScoredInterval> items;
  items.reserve(raw.size());
  for (const auto& d : raw) items.push_back({d.interval, d.s_det, d.class_id});
  for (std::size_t idx : nms_indices(items, options.nms_iou, /*class_aware=*/true)) {
    result.detections.push_back(raw[idx]);
  }
  return result;
}

}  // namespace tad
