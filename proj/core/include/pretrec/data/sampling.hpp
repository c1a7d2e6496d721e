#pragma once

#include <cstdint>
#include <vector>

#include "pretrec/data/interactions.hpp"
#include "pretrec/numeric/rng.hpp"

namespace pretrec {

inline constexpr std::size_t kMinInteractionsForEval = 3;

// Per user with >= 3 interactions, one uniformly chosen entry becomes test, another validation,
// the rest train. Users with fewer interactions keep everything in train and are flagged
// eval-excluded. The returned entries keep the input order.
InteractionMatrix leave_one_out_split(const InteractionMatrix& r, RngStream rng);

struct UserCandidates {
  std::size_t user = 0;
  std::size_t positive = 0;
  std::vector<std::size_t> negatives;
  bool short_of_negatives = false;  // fewer than N_eval eligible items existed
};

// One sampled ranking task per evaluable user: the held-out positive plus sampled negatives.
struct EvalCandidateSet {
  std::uint64_t seed = 0;
  Split target = Split::test;
  std::size_t n_eval = 100;
  std::vector<UserCandidates> users;
  std::size_t short_users = 0;
};

// Negatives are drawn uniformly without replacement from items the user never interacted with
// in any split.
EvalCandidateSet build_candidate_set(const InteractionMatrix& r, Split target, std::size_t n_eval,
                                     std::uint64_t seed);
// Set i is seeded with base_seed + i.
std::vector<EvalCandidateSet> build_eval_sets(const InteractionMatrix& r, std::size_t n_sets,
                                              std::size_t n_eval, std::uint64_t base_seed);

// Triples laid out as groups: one positive followed by its sampled negatives.
struct TrainBatch {
  std::vector<std::size_t> users;
  std::vector<std::size_t> items;
  std::vector<double> labels;
  std::size_t positives = 0;
  std::size_t negatives_per_positive = 0;

  std::size_t size() const noexcept { return users.size(); }
};

// Shuffles the train positives once per epoch and cuts them into batches of `batch_size`
// triples (batch_size / (1 + negatives_per_positive) positives each). Negatives for user u
// avoid every item u interacted with in any split.
class TrainSampler {
 public:
  TrainSampler(const InteractionMatrix& r, std::size_t batch_size,
               std::size_t negatives_per_positive = 4);

  std::vector<TrainBatch> epoch(RngStream& rng) const;
  std::size_t train_positives() const noexcept { return positives_.size(); }
  std::size_t positives_per_batch() const noexcept { return per_batch_; }

 private:
  UserItemIndex index_;
  std::vector<Interaction> positives_;
  std::size_t per_batch_;
  std::size_t negatives_;
};

// First batch of a freshly shuffled epoch.
TrainBatch sample_train_batch(const InteractionMatrix& r, std::size_t batch_size,
                              std::size_t negatives_per_positive, RngStream& rng);

}  // namespace pretrec
