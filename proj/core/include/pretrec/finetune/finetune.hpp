#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pretrec/eval/metrics.hpp"
#include "pretrec/finetune/models.hpp"

namespace pretrec {

struct FinetuneConfig {
  FinetunerKind kind = FinetunerKind::mf_bce;
  FinetuneModelConfig model;
  TrainingConfig training;
  std::vector<std::size_t> cutoffs{1, 3, 5, 10};
};

struct FinetuneReport {
  std::string model;
  std::string initialization;  // "random" or the pre-trainer's name
  std::uint64_t seed = 0;
  std::string config_hash;
  TrainingResult training;
  EvaluationReport evaluation;  // per test set and averaged
};

struct FinetuneOutcome {
  EmbeddingSet embeddings;
  FinetuneReport report;
};

// Trains an already initialized model with early stopping on `validation`, then evaluates the
// best-epoch parameters on every test set.
FinetuneOutcome finetune(FinetuneModel& model, const InteractionMatrix& split,
                         const EvalCandidateSet& validation, std::span<const EvalCandidateSet> test_sets,
                         const FinetuneConfig& config, RngStream rng);

// Builds the configured fine-tuner from `seed`, copies `pretrained` into it when given, and
// runs finetune().
FinetuneOutcome run_finetune(const FinetuneConfig& config, const InteractionMatrix& split,
                             const EmbeddingSet* pretrained, const EvalCandidateSet& validation,
                             std::span<const EvalCandidateSet> test_sets, std::uint64_t seed);

}  // namespace pretrec
