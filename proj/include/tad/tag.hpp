#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tad/intervals.hpp"

namespace tad {

/// Per-video actionness scores. Snippet i covers [i * stride, (i + 1) * stride).
struct ActionnessTrack {
  std::string video_id;
  double snippet_stride = 1.0;
  std::vector<double> scores;

  /// Throws std::invalid_argument on a non-positive stride, an empty track,
  /// or a score outside [0, 1].
  void validate() const;
  double duration() const noexcept { return snippet_stride * static_cast<double>(scores.size()); }
  /// Seconds spanned by snippets [first, last].
  TemporalInterval span_of(std::size_t first, std::size_t last) const;
};

/// Inclusive snippet index range.
struct SnippetRange {
  std::size_t first = 0;
  std::size_t last = 0;

  std::size_t length() const noexcept { return last - first + 1; }
  friend auto operator<=>(const SnippetRange&, const SnippetRange&) = default;
};

/// Maximal run of snippets whose score is >= the extraction threshold.
using Fragment = SnippetRange;

struct TagConfig {
  std::vector<double> tau_grid;
  std::vector<double> gamma_grid;
  double dedup_iou = 0.95;

  /// tau in {0.1, ..., 0.9}, gamma in {0.0, ..., 0.9}.
  static TagConfig defaults();
  /// Throws std::invalid_argument on empty or unsorted grids or values outside [0, 1].
  void validate() const;
};

std::vector<Fragment> extract_fragments(const ActionnessTrack& track, double tau);

/// Grows a region forward from fragments[start] by absorbing succeeding
/// fragments one at a time. A candidate is committed only while the fraction
/// of snippets scoring below tau in the extended region stays <= gamma; growth
/// stops at the first rejected candidate.
SnippetRange grow_from_fragment(std::span<const Fragment> fragments, std::size_t start, double tau,
                                double gamma, const ActionnessTrack& track);

/// A grown region together with the grid cell that produced it.
struct TagCandidate {
  SnippetRange range;
  double tau = 0.0;
  double gamma = 0.0;
};

/// Every region produced over the tau x gamma grid before duplicate pruning,
/// in grid order (tau-major, then gamma, then starting fragment).
std::vector<TagCandidate> tag_candidates(const ActionnessTrack& track, const TagConfig& config);

/// Temporal actionness grouping proposals: the union of all grid cells,
/// pruned class-agnostically by NMS at config.dedup_iou with mean actionness
/// as the ranking score. Sorted by start time.
std::vector<ScoredInterval> tag_propose(const ActionnessTrack& track, const TagConfig& config);

/// Multi-scale sliding windows. Lengths base_length * scale_factor^k for
/// k < num_scales; each scale is placed at multiples of step_ratio * length
/// plus one window flush with the end of the video.
std::vector<TemporalInterval> sliding_windows(double total_duration, int num_scales = 20,
                                              double base_length = 0.3, double step_ratio = 0.4,
                                              double scale_factor = 2.0);

}  // namespace tad
