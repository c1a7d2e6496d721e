#pragma once

#include <cstddef>
#include <vector>

#include "pretrec/data/sampling.hpp"
#include "pretrec/eval/metrics.hpp"
#include "pretrec/numeric/adam.hpp"

namespace pretrec {

// A model trained by mini-batch Adam on sampled (user, item, label) triples.
class TrainableModel : public Scorer {
 public:
  virtual std::vector<Parameter*> parameters() = 0;
  // Scalar loss of one batch with dropout active.
  virtual Var batch_loss(Tape& tape, const TrainBatch& batch, RngStream& rng) = 0;
  // Recomputes cached inference state (dropout off) after the parameters changed.
  virtual void refresh() = 0;
};

struct TrainingConfig {
  AdamConfig adam;
  std::size_t batch_size = 1000;
  std::size_t negatives_per_positive = 4;
  std::size_t max_epochs = 500;
  std::size_t patience = 20;
  std::size_t validation_cutoff = 10;
};

struct TrainingResult {
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;  // 1-based; 0 when no epoch ran
  double best_validation = 0.0;
  std::vector<double> validation_curve;  // NDCG@cutoff after each epoch
};

// Trains until max_epochs or until `patience` epochs pass without a strict improvement of
// validation NDCG, then restores the parameters of the best epoch. A non-finite batch loss
// throws NumericError naming the epoch, batch and the first parameter with a non-finite
// value or gradient.
TrainingResult train_with_early_stopping(TrainableModel& model, const InteractionMatrix& split,
                                         const EvalCandidateSet& validation,
                                         const TrainingConfig& config, RngStream rng);

}  // namespace pretrec
