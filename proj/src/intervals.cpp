#include "tad/intervals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

namespace tad {

TemporalInterval::TemporalInterval(double start, double end) : start_(start), end_(end) {
  if (!std::isfinite(start) || !std::isfinite(end) || start < 0.0 || !(end > start)) {
    throw std::invalid_argument("invalid interval [" + std::to_string(start) + ", " +
                                std::to_string(end) + "]");
  }
}

double intersection_length(const TemporalInterval& a, const TemporalInterval& b) noexcept {
  const double lo = std::max(a.start(), b.start());
  const double hi = std::min(a.end(), b.end());
  return hi > lo ? hi - lo : 0.0;
}

double iou(const TemporalInterval& a, const TemporalInterval& b) noexcept {
  const double inter = intersection_length(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.duration() + b.duration() - inter;
  return std::min(1.0, inter / uni);
}

double overlap_fraction(const TemporalInterval& a, std::span<const TemporalInterval> annotations) {
  // Clip every annotation to `a`, then measure the union of the clipped pieces.
  std::vector<std::pair<double, double>> pieces;
  pieces.reserve(annotations.size());
  for (const auto& g : annotations) {
    const double lo = std::max(a.start(), g.start());
    const double hi = std::min(a.end(), g.end());
    if (hi > lo) pieces.emplace_back(lo, hi);
  }
  if (pieces.empty()) return 0.0;
  std::sort(pieces.begin(), pieces.end());

  double covered = 0.0;
  double run_lo = pieces.front().first;
  double run_hi = pieces.front().second;
  for (std::size_t i = 1; i < pieces.size(); ++i) {
    if (pieces[i].first <= run_hi) {
      run_hi = std::max(run_hi, pieces[i].second);
    } else {
      covered += run_hi - run_lo;
      run_lo = pieces[i].first;
      run_hi = pieces[i].second;
    }
  }
  covered += run_hi - run_lo;
  return std::min(1.0, covered / a.duration());
}

bool ranks_before(const ScoredInterval& a, const ScoredInterval& b) noexcept {
  if (a.score != b.score) return a.score > b.score;
  if (a.interval.start() != b.interval.start()) return a.interval.start() < b.interval.start();
  return a.interval.duration() < b.interval.duration();
}

std::vector<std::size_t> nms_indices(std::span<const ScoredInterval> items, double threshold,
                                     bool class_aware) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("nms threshold must lie in [0, 1]");
  }
  for (const auto& it : items) {
    if (!std::isfinite(it.score)) throw std::invalid_argument("nms score must be finite");
  }

  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return ranks_before(items[x], items[y]);
  });

  // Kept intervals indexed by start, one bucket per class. If iou(a, b) > t
  // then |start(a) - start(b)| <= (1 - t) / t * duration(a), which bounds the
  // range of kept items worth testing.
  std::map<int, std::multimap<double, std::size_t>> kept_by_class;
  std::vector<std::size_t> kept;
  const double reach_factor = threshold > 0.0 ? (1.0 - threshold) / threshold
                                              : std::numeric_limits<double>::infinity();

  for (std::size_t idx : order) {
    const ScoredInterval& cand = items[idx];
    const int bucket = class_aware ? cand.class_id.value_or(-1) : 0;
    auto& index = kept_by_class[bucket];

    bool suppressed = false;
    if (!index.empty()) {
      const double reach = reach_factor * cand.interval.duration() * (1.0 + 1e-9) + 1e-12;
      auto lo = std::isinf(reach) ? index.begin() : index.lower_bound(cand.interval.start() - reach);
      auto hi = std::isinf(reach) ? index.end() : index.upper_bound(cand.interval.start() + reach);
      for (auto it = lo; it != hi; ++it) {
        if (iou(items[it->second].interval, cand.interval) > threshold) {
          suppressed = true;
          break;
        }
      }
    }
    if (!suppressed) {
      index.emplace(cand.interval.start(), idx);
      kept.push_back(idx);
    }
  }
  return kept;
}

std::vector<ScoredInterval> nms(std::span<const ScoredInterval> items, double threshold,
                                bool class_aware) {
  std::vector<ScoredInterval> out;
  for (std::size_t idx : nms_indices(items, threshold, class_aware)) out.push_back(items[idx]);
  return out;
}

}  // namespace tad
