#include "pretrec/finetune/finetune.hpp"

namespace pretrec {

FinetuneOutcome finetune(FinetuneModel& model, const InteractionMatrix& split,
                         const EvalCandidateSet& validation, std::span<const EvalCandidateSet> test_sets,
                         const FinetuneConfig& config, RngStream rng) {
  FinetuneOutcome out;
  out.report.model = model.name();
  out.report.training = train_with_early_stopping(model, split, validation, config.training, rng);
  out.report.evaluation = evaluate(model, test_sets, config.cutoffs);
  out.embeddings = model.embeddings();
  out.embeddings.validate();
  return out;
}

FinetuneOutcome run_finetune(const FinetuneConfig& config, const InteractionMatrix& split,
                             const EmbeddingSet* pretrained, const EvalCandidateSet& validation,
                             std::span<const EvalCandidateSet> test_sets, std::uint64_t seed) {
  const RngStream rng(seed);
  auto model = make_finetuner(config.kind, config.model, split, rng.split("finetune-init"));
  if (pretrained) model->init_from_pretrained(*pretrained);
  auto out = finetune(*model, split, validation, test_sets, config, rng.split("finetune-train"));
  out.report.initialization = pretrained ? pretrained->model : "random";
  out.report.seed = seed;
  out.embeddings.seed = seed;
  return out;
}

}  // namespace pretrec
