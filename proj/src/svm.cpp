#include "tad/svm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace tad {

namespace {

// std::uniform_int_distribution and std::shuffle are implementation-defined;
// these keep training bit-identical across standard libraries.
std::size_t bounded(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

template <typename T>
void fisher_yates(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[bounded(rng, i)]);
}

struct Sample {
  const FeatureVector* x;
  double y;
};

double norm_sq(const LinearWeights& w) {
  double s = w.bias * w.bias;
  for (double v : w.weights) s += v * v;
  return s;
}

double objective(const LinearWeights& w, const std::vector<Sample>& set, double lambda) {
  double loss = 0.0;
  for (const auto& s : set) loss += std::max(0.0, 1.0 - s.y * w.decision(*s.x));
  return 0.5 * lambda * norm_sq(w) + (set.empty() ? 0.0 : loss / static_cast<double>(set.size()));
}

class Pegasos {
 public:
  Pegasos(double lambda, std::mt19937_64& rng) : lambda_(lambda), rng_(rng) {}

  // Runs `epochs` passes over `set` starting at `w` and returns the best epoch
  // iterate (the starting point included). The step counter persists across
  // calls so warm-started rounds continue with small steps.
  LinearWeights train(LinearWeights w, const std::vector<Sample>& set, int epochs) {
    LinearWeights best = w;
    double best_obj = objective(w, set, lambda_);
    const double radius = 1.0 / std::sqrt(lambda_);

    std::vector<std::size_t> order(set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (int e = 0; e < epochs; ++e) {
      fisher_yates(order, rng_);
      for (std::size_t idx : order) {
        ++t_;
        const double eta = 1.0 / (lambda_ * static_cast<double>(t_));
        const Sample& s = set[idx];
        const double margin = s.y * w.decision(*s.x);
        const double shrink = 1.0 - eta * lambda_;
        for (double& v : w.weights) v *= shrink;
        w.bias *= shrink;
        if (margin < 1.0) {
          for (std::size_t k = 0; k < kFeatureDim; ++k) w.weights[k] += eta * s.y * (*s.x)[k];
          w.bias += eta * s.y;
        }
        const double n = std::sqrt(norm_sq(w));
        if (n > radius) {
          const double scale = radius / n;
          for (double& v : w.weights) v *= scale;
          w.bias *= scale;
        }
      }
      const double obj = objective(w, set, lambda_);
      if (obj < best_obj) {
        best_obj = obj;
        best = w;
      }
    }
    return best;
  }

 private:
  double lambda_;
  std::mt19937_64& rng_;
  std::uint64_t t_ = 0;
};

}  // namespace

void SvmConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("svm lambda must be positive");
  if (epochs < 0 || mining_rounds < 0 || mining_batch < 0) {
    throw std::invalid_argument("svm epochs, mining rounds and mining batch must be non-negative");
  }
}

double LinearWeights::decision(const FeatureVector& x) const noexcept {
  double s = bias;
  for (std::size_t k = 0; k < kFeatureDim; ++k) s += weights[k] * x[k];
  return s;
}

double hinge_loss(const LinearWeights& w, std::span<const FeatureVector> positives,
                  std::span<const FeatureVector> negatives) {
  const std::size_t n = positives.size() + negatives.size();
  if (n == 0) return 0.0;
  double loss = 0.0;
  for (const auto& x : positives) loss += std::max(0.0, 1.0 - w.decision(x));
  for (const auto& x : negatives) loss += std::max(0.0, 1.0 + w.decision(x));
  return loss / static_cast<double>(n);
}

double svm_objective(const LinearWeights& w, std::span<const FeatureVector> positives,
                     std::span<const FeatureVector> negatives, double lambda) {
  return 0.5 * lambda * norm_sq(w) + hinge_loss(w, positives, negatives);
}

SvmResult train_svm_with_mining(std::span<const FeatureVector> positives,
                                std::span<const FeatureVector> negatives, const SvmConfig& config) {
  config.validate();
  if (positives.empty() || negatives.empty()) {
    throw std::invalid_argument("svm training needs at least one positive and one negative");
  }
  std::mt19937_64 rng(config.seed);
  Pegasos solver(config.lambda, rng);

  std::vector<Sample> set;
  for (const auto& x : positives) set.push_back({&x, 1.0});

  // Seeded random initial negatives; the rest form the mining pool.
  std::vector<std::size_t> pool(negatives.size());
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  fisher_yates(pool, rng);
  const std::size_t initial = std::min(positives.size(), negatives.size());
  std::vector<std::size_t> chosen(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(initial));
  std::sort(chosen.begin(), chosen.end());
  pool.erase(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(initial));
  std::sort(pool.begin(), pool.end());
  for (std::size_t i : chosen) set.push_back({&negatives[i], -1.0});

  SvmResult result;
  LinearWeights w;
  const auto run_round = [&]() {
    MiningRound round;
    round.num_negatives = set.size() - positives.size();
    round.objective_before = objective(w, set, config.lambda);
    w = solver.train(w, set, config.epochs);
    round.objective_after = objective(w, set, config.lambda);
    result.rounds.push_back(round);
  };
  run_round();

  const std::size_t batch =
      config.mining_batch > 0 ? static_cast<std::size_t>(config.mining_batch) : positives.size();
  for (int r = 0; r < config.mining_rounds && !pool.empty(); ++r) {
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(pool.size());
    for (std::size_t i : pool) scored.emplace_back(w.decision(negatives[i]), i);
    const std::size_t take = std::min(batch, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(),
                      [](const auto& a, const auto& b) {
                        return a.first != b.first ? a.first > b.first : a.second < b.second;
                      });
    std::vector<std::size_t> taken;
    for (std::size_t k = 0; k < take; ++k) taken.push_back(scored[k].second);
    std::sort(taken.begin(), taken.end());
    for (std::size_t i : taken) set.push_back({&negatives[i], -1.0});
    std::vector<std::size_t> rest;
    std::set_difference(pool.begin(), pool.end(), taken.begin(), taken.end(), std::back_inserter(rest));
    pool = std::move(rest);
    run_round();
  }
  result.model = w;
  return result;
}

}  // namespace tad
