#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tad {

inline constexpr std::size_t kFeatureDim = 5;
using FeatureVector = std::array<double, kFeatureDim>;

/// Hyperparameters for the L2-regularised hinge-loss solver.
struct SvmConfig {
  double lambda = 1e-4;
  int epochs = 200;
  int mining_rounds = 3;
  /// Negatives added per mining round; 0 means "as many as there are positives".
  int mining_batch = 0;
  std::uint64_t seed = 7;

  /// Throws std::invalid_argument on non-positive lambda or negative counts.
  void validate() const;
};

struct LinearWeights {
  FeatureVector weights{};
  double bias = 0.0;

  double decision(const FeatureVector& x) const noexcept;
};

/// lambda/2 * (|w|^2 + b^2) + mean hinge loss over the labelled set.
/// The bias is regularised because it is learned as an augmented constant feature.
double svm_objective(const LinearWeights& w, std::span<const FeatureVector> positives,
                     std::span<const FeatureVector> negatives, double lambda);

/// Mean hinge loss only.
double hinge_loss(const LinearWeights& w, std::span<const FeatureVector> positives,
                  std::span<const FeatureVector> negatives);

/// Per-round bookkeeping of the mining loop. Entry r describes the training
/// set after round r (entry 0 is the initial positives + random negatives).
struct MiningRound {
  std::size_t num_negatives = 0;
  /// Objective on this round's training set at the previous round's weights
  /// (zero weights for round 0).
  double objective_before = 0.0;
  /// Objective on this round's training set after retraining.
  double objective_after = 0.0;
};

struct SvmResult {
  LinearWeights model;
  std::vector<MiningRound> rounds;
};

/// Pegasos-style stochastic subgradient training with hard negative mining.
/// Starts from all positives plus an equal-size seeded random subset of the
/// negatives; every mining round scores the unused negatives, adds the
/// `mining_batch` highest-scoring ones and retrains from the current weights.
/// Each retraining returns the best epoch iterate on its training set, so the
/// objective on the accumulated set never increases at a round boundary.
/// Bit-identical output for identical input and seed.
SvmResult train_svm_with_mining(std::span<const FeatureVector> positives,
                                std::span<const FeatureVector> negatives, const SvmConfig& config);

}  // namespace tad
