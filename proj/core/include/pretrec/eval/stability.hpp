#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace pretrec {

double mean(std::span<const double> values);
// Population standard deviation (divides by n); 0 for fewer than two values.
double population_std(std::span<const double> values);

struct SeedOutcome {
  std::uint64_t seed = 0;
  bool ok = false;
  double value = 0.0;
  std::string error;
};

// Mean and population std over the completed seeds; failed seeds are kept and counted.
struct StabilityReport {
  std::vector<SeedOutcome> seeds;
  double mean = 0.0;
  double std = 0.0;
  std::size_t failures = 0;

  std::vector<double> completed_values() const;
};

StabilityReport summarize_stability(std::vector<SeedOutcome> outcomes);

// One pipeline run per seed returning its NDCG@10.
using SeedJob = std::function<double(std::uint64_t seed)>;

// Runs `job` once per seed (seed-parallel up to `workers`). A throwing seed is recorded as
// failed. Needs at least two seeds.
StabilityReport stability_run(const SeedJob& job, std::span<const std::uint64_t> seeds,
                              std::size_t workers = 1);

struct SweepArm {
  double parameter = 0.0;
  StabilityReport runs;
};

using SweepJob = std::function<double(double parameter, std::uint64_t seed)>;

// Every (parameter, seed) pair as an independent job; results grouped per parameter.
std::vector<SweepArm> sweep(const SweepJob& job, std::span<const double> parameters,
                            std::span<const std::uint64_t> seeds, std::size_t workers = 1);

// Feature-dropout ablation: `job(ratio, seed)` drops features, rebuilds graphs, pre-trains,
// fine-tunes and evaluates. Ratios must lie in [0, 1).
std::vector<SweepArm> ablation_sweep(const SweepJob& job, std::span<const double> ratios,
                                     std::span<const std::uint64_t> seeds, std::size_t workers = 1);

}  // namespace pretrec
