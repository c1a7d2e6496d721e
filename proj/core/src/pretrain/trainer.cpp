#include "pretrec/pretrain/trainer.hpp"

#include <cmath>
#include <string>

#include "pretrec/error.hpp"

namespace pretrec {

namespace {

std::string offending_parameter(const std::vector<Parameter*>& params) {
  for (const Parameter* p : params)
    if (!p->value.all_finite() || !p->gradient.all_finite()) return p->name;
  return "none";
}

}  // namespace

TrainingResult train_with_early_stopping(TrainableModel& model, const InteractionMatrix& split,
                                         const EvalCandidateSet& validation,
                                         const TrainingConfig& config, RngStream rng) {
  if (config.batch_size == 0) throw ConfigError("batch size must be >= 1");
  const auto params = model.parameters();
  Adam adam(params, config.adam);
  const TrainSampler sampler(split, config.batch_size, config.negatives_per_positive);

  TrainingResult result;
  std::vector<Tensor2> best_values;
  model.refresh();
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto batches = sampler.epoch(rng);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      adam.zero_grad();
      Tape tape;
      Var loss = model.batch_loss(tape, batches[b], rng);
      const double value = loss.value()(0, 0);
      tape.backward(loss);
      if (!std::isfinite(value)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(b + 1) + " (parameter " + offending_parameter(params) + ")");
      }
      adam.step();
    }
    model.refresh();
    const double ndcg = mean_ndcg(model, validation, config.validation_cutoff);
    result.validation_curve.push_back(ndcg);
    result.epochs_run = epoch;
    if (result.best_epoch == 0 || ndcg > result.best_validation) {
      result.best_epoch = epoch;
      result.best_validation = ndcg;
      best_values.clear();
      for (const Parameter* p : params) best_values.push_back(p->value);
    } else if (epoch - result.best_epoch >= config.patience) {
      break;
    }
  }
  if (!best_values.empty()) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best_values[i];
    model.refresh();
  }
  return result;
}

}  // namespace pretrec
