#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pretrec/app/config.hpp"
#include "pretrec/data/sampling.hpp"
#include "pretrec/data/synthetic.hpp"
#include "pretrec/error.hpp"
#include "pretrec/eval/stability.hpp"

namespace pretrec {

// A pipeline failure tagged with the stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct StageRecord {
  std::string name;
  double wall_seconds = 0.0;
  std::string model;
  std::string initialization;
  std::optional<TrainingResult> training;
};

struct DimensionSweep {
  std::string arm;  // e.g. "mf-bce+com-p"
  std::vector<SweepArm> points;
};

struct RunReport {
  ExperimentConfig config;
  std::string config_hash;
  std::vector<StageRecord> stages;
  std::optional<EvaluationReport> metrics;
  std::optional<StabilityReport> stability;
  std::vector<SweepArm> ablation;
  std::vector<DimensionSweep> dimension_sweep;
  std::map<std::string, std::filesystem::path> artifacts;
};

// Loads (or generates) the dataset, splits it and builds the fixed candidate sets once; each
// operation below then runs one pipeline variant on that shared state.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig config);

  const ExperimentConfig& config() const noexcept { return config_; }
  const Dataset& dataset() const noexcept { return data_; }
  const InteractionMatrix& split() const noexcept { return split_; }
  const EvalCandidateSet& validation() const noexcept { return validation_; }
  const std::vector<EvalCandidateSet>& test_sets() const noexcept { return tests_; }

  // Pre-train (unless none), persist embeddings, fine-tune, evaluate; adds a stability run when
  // two or more seeds are configured and a dimension sweep when sweep_dimensions is set.
  RunReport run();
  RunReport pretrain_only();
  RunReport finetune_from(const std::filesystem::path& embeddings_dir);
  // Scores candidates by the raw dot products of the stored embeddings.
  RunReport evaluate_embeddings(const std::filesystem::path& embeddings_dir);
  RunReport stability(std::span<const std::uint64_t> seeds);
  RunReport ablate();

  // One full pipeline run for `seed` with the given feature-dropout ratio and dimension,
  // returning the stability metric.
  double seed_metric(std::uint64_t seed, double feature_dropout, std::size_t dim, bool use_pretrainer) const;

 private:
  RunReport base_report() const;
  std::vector<std::uint64_t> run_seeds() const;

  ExperimentConfig config_;
  Dataset data_;
  InteractionMatrix split_;
  EvalCandidateSet validation_;
  std::vector<EvalCandidateSet> tests_;
};

// `volatile_fields` adds wall times, artifact paths and path-valued config keys; without them
// the JSON depends only on the config and seed.
std::string report_json(const RunReport& report, bool volatile_fields = true);

// Writes report.json plus the CSV plot data under `out_dir` and records every path in
// report.artifacts. Unwritable directories raise IoError.
void emit_report(RunReport& report, const std::filesystem::path& out_dir);

}  // namespace pretrec
