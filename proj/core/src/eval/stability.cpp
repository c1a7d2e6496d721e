#include "pretrec/eval/stability.hpp"

#include <cmath>
#include <numeric>

#include "pretrec/error.hpp"
#include "pretrec/parallel.hpp"

namespace pretrec {

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double population_std(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

std::vector<double> StabilityReport::completed_values() const {
  std::vector<double> out;
  for (const auto& s : seeds)
    if (s.ok) out.push_back(s.value);
  return out;
}

StabilityReport summarize_stability(std::vector<SeedOutcome> outcomes) {
  StabilityReport r;
  r.seeds = std::move(outcomes);
  for (const auto& s : r.seeds) r.failures += !s.ok;
  const auto values = r.completed_values();
  r.mean = mean(values);
  r.std = population_std(values);
  return r;
}

namespace {

SeedOutcome run_seed(const SeedJob& job, std::uint64_t seed) {
  SeedOutcome o;
  o.seed = seed;
  try {
    o.value = job(seed);
    o.ok = true;
  } catch (const std::exception& e) {
    o.error = e.what();
  }
  return o;
}

}  // namespace

StabilityReport stability_run(const SeedJob& job, std::span<const std::uint64_t> seeds,
                              std::size_t workers) {
  if (seeds.size() < 2) throw ConfigError("stability_run needs at least two seeds");
  std::vector<SeedOutcome> outcomes(seeds.size());
  run_parallel(seeds.size(), workers, [&](std::size_t i) { outcomes[i] = run_seed(job, seeds[i]); });
  return summarize_stability(std::move(outcomes));
}

std::vector<SweepArm> sweep(const SweepJob& job, std::span<const double> parameters,
                            std::span<const std::uint64_t> seeds, std::size_t workers) {
  if (seeds.empty()) throw ConfigError("sweep needs at least one seed");
  const std::size_t per = seeds.size();
  std::vector<SeedOutcome> outcomes(parameters.size() * per);
  run_parallel(outcomes.size(), workers, [&](std::size_t i) {
    const double p = parameters[i / per];
    outcomes[i] = run_seed([&](std::uint64_t s) { return job(p, s); }, seeds[i % per]);
  });
  std::vector<SweepArm> arms;
  for (std::size_t a = 0; a < parameters.size(); ++a) {
    std::vector<SeedOutcome> mine(outcomes.begin() + static_cast<std::ptrdiff_t>(a * per),
                                  outcomes.begin() + static_cast<std::ptrdiff_t>((a + 1) * per));
    arms.push_back({parameters[a], summarize_stability(std::move(mine))});
  }
  return arms;
}

std::vector<SweepArm> ablation_sweep(const SweepJob& job, std::span<const double> ratios,
                                     std::span<const std::uint64_t> seeds, std::size_t workers) {
  for (double r : ratios)
    if (!(r >= 0.0 && r < 1.0)) throw ConfigError("feature dropout ratios must lie in [0, 1)");
  return sweep(job, ratios, seeds, workers);
}

}  // namespace pretrec
