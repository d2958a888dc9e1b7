#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "swnet/rng.hpp"
#include "swnet/vec.hpp"

namespace swnet {

enum class ArrivalKind { kDeterministic, kBernoulli, kIidBatch, kMarkovModulated };

std::string to_string(ArrivalKind kind);

/// Exogenous arrival process with stationary increments. `rate` is always the exact
/// analytic mean of one increment.
struct ArrivalModel {
  ArrivalKind kind = ArrivalKind::kDeterministic;
  Vec rate;

  // bernoulli: queue n receives batch[n] units with probability prob[n]
  Vec prob;
  Vec batch;

  // iid_batch: queue n receives values[n][k] with probability probs[n][k]
  std::vector<Vec> values;
  std::vector<Vec> probs;

  // markov_modulated: a single chain drives all queues; in state s every queue receives
  // increments[s]
  std::vector<Vec> transition;
  std::vector<Vec> increments;
  Vec stationary;

  std::size_t dim() const { return rate.size(); }
  /// Largest possible one-slot increment over all queues.
  double a_max() const;

  static ArrivalModel deterministic(Vec lambda);
  /// Unit batches, lambda in [0,1]^N.
  static ArrivalModel bernoulli(Vec lambda);
  static ArrivalModel bernoulli(Vec prob, Vec batch);
  static ArrivalModel iid_batch(std::vector<Vec> values, std::vector<Vec> probs);
  /// Irreducible finite chain; the stationary law is solved for and fixes `rate`.
  static ArrivalModel markov_modulated(std::vector<Vec> transition, std::vector<Vec> increments);
};

/// Slot-by-slot generator. One stream per replication; the stream seed should come from
/// derive_seed so replications are order independent.
class ArrivalStream {
 public:
  ArrivalStream(const ArrivalModel& model, std::uint64_t seed);

  /// Increment dA(tau) for the next slot.
  const Vec& next();

 private:
  const ArrivalModel* model_;
  Rng rng_;
  std::size_t state_ = 0;
  std::uint64_t tau_ = 0;
  Vec buf_;
};

/// Cumulative path A(0..horizon); A(0) = 0.
std::vector<Vec> sample_increments(const ArrivalModel& model, std::uint64_t horizon,
                                   std::uint64_t seed);

struct DeviationReport {
  std::vector<std::uint64_t> horizons;
  /// max over reps of sup_{tau <= z} |A(tau) - lambda tau| / z
  Vec sup_dev;
  /// median over reps of the same quantity
  Vec median_dev;
  Vec delta;
  std::vector<bool> pass_fluid;
};

/// Default delta_z = z^{-1/3} when `delta` is empty.
DeviationReport deviation_diagnostic(const ArrivalModel& model,
                                     const std::vector<std::uint64_t>& horizons, std::size_t reps,
                                     std::uint64_t seed, const Vec& delta = {});

}  // namespace swnet
