#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace tad {

/// Closed time span in seconds. Arithmetic treats it as half-open
/// [start, end) so that adjacent intervals share no time.
class TemporalInterval {
 public:
  /// Throws std::invalid_argument unless 0 <= start < end and both are finite.
  TemporalInterval(double start, double end);

  double start() const noexcept { return start_; }
  double end() const noexcept { return end_; }
  double duration() const noexcept { return end_ - start_; }
  double midpoint() const noexcept { return 0.5 * (start_ + end_); }

  friend bool operator==(const TemporalInterval&, const TemporalInterval&) = default;

 private:
  double start_;
  double end_;
};

/// Length of a ∩ b; 0 when disjoint or touching.
double intersection_length(const TemporalInterval& a, const TemporalInterval& b) noexcept;

double iou(const TemporalInterval& a, const TemporalInterval& b) noexcept;

/// Fraction of `a`'s span covered by the union of `annotations`.
/// Time covered by several annotations counts once.
double overlap_fraction(const TemporalInterval& a, std::span<const TemporalInterval> annotations);

struct ScoredInterval {
  TemporalInterval interval;
  double score = 0.0;
  std::optional<int> class_id;
};

/// Ordering used by NMS: higher score first, then earlier start, then shorter.
bool ranks_before(const ScoredInterval& a, const ScoredInterval& b) noexcept;

/// Greedy non-maximal suppression. Keeps the best-ranked remaining item and
/// discards every remaining item whose IOU with it exceeds `threshold`
/// (restricted to the same class when `class_aware`). The result is ordered
/// by `ranks_before`. Throws std::invalid_argument when threshold is outside
/// [0, 1] or a score is not finite.
std::vector<ScoredInterval> nms(std::span<const ScoredInterval> items, double threshold,
                                bool class_aware);

/// Same as nms() but returns positions in `items` of the kept elements.
std::vector<std::size_t> nms_indices(std::span<const ScoredInterval> items, double threshold,
                                     bool class_aware);

}  // namespace tad
