#include <doctest.h>

#include <algorithm>
#include <random>
#include <stdexcept>

#include "oracles.hpp"
#include "tad/intervals.hpp"

using tad::ScoredInterval;
using tad::TemporalInterval;

TEST_CASE("interval construction rejects empty, reversed and negative spans") {
  CHECK_THROWS_AS(TemporalInterval(5.0, 5.0), std::invalid_argument);
  CHECK_THROWS_AS(TemporalInterval(5.0, 4.0), std::invalid_argument);
  CHECK_THROWS_AS(TemporalInterval(-1.0, 4.0), std::invalid_argument);
  const TemporalInterval a(2.0, 7.5);
  CHECK(a.duration() == 5.5);
}

TEST_CASE("iou examples") {
  CHECK(tad::iou({0, 10}, {0, 10}) == 1.0);
  CHECK(tad::iou({0, 5}, {5, 10}) == 0.0);
  CHECK(tad::iou({0, 10}, {5, 15}) == doctest::Approx(5.0 / 15.0).epsilon(1e-15));
  CHECK(tad::iou({0, 1}, {3, 4}) == 0.0);
}

TEST_CASE("iou properties on random pairs") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const auto a = oracle::random_interval(rng, 50.0, 0.01, 30.0);
    const auto b = oracle::random_interval(rng, 50.0, 0.01, 30.0);
    const double v = tad::iou(a, b);
    CHECK(v == tad::iou(b, a));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(tad::iou(a, a) == 1.0);
    CHECK(v == doctest::Approx(oracle::iou(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("overlap_fraction examples") {
  const TemporalInterval a(0, 10);
  CHECK(tad::overlap_fraction(a, {}) == 0.0);
  const std::vector<TemporalInterval> two{{2, 4}, {3, 6}};
  CHECK(tad::overlap_fraction(a, two) == doctest::Approx(0.4).epsilon(1e-15));
  const std::vector<TemporalInterval> outer{{0, 10}};
  CHECK(tad::overlap_fraction({2, 4}, outer) == 1.0);
}

TEST_CASE("overlap_fraction is one on itself and monotone as annotations grow") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = oracle::random_interval(rng, 20.0, 0.5, 10.0);
    const std::vector<TemporalInterval> self{a};
    CHECK(tad::overlap_fraction(a, self) == 1.0);
    std::vector<TemporalInterval> anns;
    double prev = 0.0;
    for (int k = 0; k < 8; ++k) {
      anns.push_back(oracle::random_interval(rng, 25.0, 0.1, 5.0));
      const double f = tad::overlap_fraction(a, anns);
      CHECK(f >= prev);
      CHECK(f <= 1.0);
      prev = f;
    }
  }
}

TEST_CASE("nms examples") {
  const std::vector<ScoredInterval> dup{{{0, 10}, 0.9, {}}, {{0, 10}, 0.8, {}}};
  const auto kept = tad::nms(dup, 0.5, false);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].score == 0.9);

  const std::vector<ScoredInterval> apart{{{0, 10}, 0.9, {}}, {{20, 30}, 0.8, {}}};
  CHECK(tad::nms(apart, 0.5, false).size() == 2);

  CHECK(tad::nms(std::vector<ScoredInterval>{}, 0.5, false).empty());
  CHECK_THROWS_AS(tad::nms(dup, 1.5, false), std::invalid_argument);
}

TEST_CASE("nms tie-break prefers earlier start, then shorter duration") {
  const std::vector<ScoredInterval> items{
      {{1, 11}, 0.5, {}}, {{0, 10}, 0.5, {}}, {{0, 9}, 0.5, {}}, {{40, 41}, 0.7, {}}};
  const auto kept = tad::nms(items, 1.0, false);
  REQUIRE(kept.size() == 4);
  CHECK(kept[0].interval == TemporalInterval(40, 41));
  CHECK(kept[1].interval == TemporalInterval(0, 9));
  CHECK(kept[2].interval == TemporalInterval(0, 10));
  CHECK(kept[3].interval == TemporalInterval(1, 11));
}

TEST_CASE("class-aware nms only suppresses within a class") {
  const std::vector<ScoredInterval> items{{{0, 10}, 0.9, 0}, {{0, 10}, 0.8, 1}, {{0, 10}, 0.7, 0}};
  const auto aware = tad::nms(items, 0.5, true);
  REQUIRE(aware.size() == 2);
  CHECK(aware[0].class_id == 0);
  CHECK(aware[1].class_id == 1);
  CHECK(tad::nms(items, 0.5, false).size() == 1);
}

TEST_CASE("nms matches the exhaustive reference on random sets") {
  std::mt19937_64 rng(2024);
  for (double threshold : {0.0, 0.2, 0.6, 0.95, 1.0}) {
    for (int trial = 0; trial < 40; ++trial) {
      std::vector<ScoredInterval> items;
      for (int i = 0; i < 50; ++i) {
        const auto iv = oracle::random_interval(rng, 40.0, 0.2, 15.0);
        items.push_back({iv, std::floor(std::uniform_real_distribution<double>(0, 10)(rng)) / 10.0,
                         static_cast<int>(rng() % 3)});
      }
      for (bool aware : {false, true}) {
        const auto got = tad::nms(items, threshold, aware);
        const auto want = oracle::nms(items, threshold, aware);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
          CHECK(got[i].interval == want[i].interval);
          CHECK(got[i].score == want[i].score);
        }
        // No retained same-class pair overlaps beyond the threshold.
        for (std::size_t i = 0; i < got.size(); ++i) {
          for (std::size_t j = i + 1; j < got.size(); ++j) {
            if (aware && got[i].class_id != got[j].class_id) continue;
            CHECK(tad::iou(got[i].interval, got[j].interval) <= threshold);
          }
        }
      }
    }
  }
}

TEST_CASE("nms at threshold 1 keeps every item with distinct support") {
  std::mt19937_64 rng(8);
  std::vector<ScoredInterval> items;
  for (int i = 0; i < 30; ++i) items.push_back({oracle::random_interval(rng, 10.0, 0.1, 4.0), 0.5, {}});
  CHECK(tad::nms(items, 1.0, false).size() == items.size());
}

TEST_CASE("nms keeps a subset that includes the top-ranked item") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ScoredInterval> items;
    const std::size_t n = 1 + rng() % 40;
    for (std::size_t i = 0; i < n; ++i) {
      items.push_back({oracle::random_interval(rng, 30.0, 0.5, 10.0), static_cast<double>(rng() % 100) / 100.0, {}});
    }
    const auto kept = tad::nms(items, 0.4, false);
    const auto top = oracle::nms(items, 1.0, false).front();
    CHECK(kept.front().interval == top.interval);
    CHECK(kept.front().score == top.score);
    for (const auto& k : kept) {
      const bool found = std::any_of(items.begin(), items.end(), [&](const ScoredInterval& it) {
        return it.interval == k.interval && it.score == k.score;
      });
      CHECK(found);
    }
  }
}
