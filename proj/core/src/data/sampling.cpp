#include "pretrec/data/sampling.hpp"

#include <algorithm>

#include "pretrec/error.hpp"

namespace pretrec {

InteractionMatrix leave_one_out_split(const InteractionMatrix& r, RngStream rng) {
  r.validate();
  InteractionMatrix out = r;
  out.eval_excluded.assign(r.n_users, false);
  std::vector<std::vector<std::size_t>> by_user(r.n_users);
  for (std::size_t k = 0; k < out.entries.size(); ++k) {
    out.entries[k].split = Split::train;
    by_user[out.entries[k].user].push_back(k);
  }
  for (std::size_t u = 0; u < r.n_users; ++u) {
    auto& owned = by_user[u];
    if (owned.size() < kMinInteractionsForEval) {
      out.eval_excluded[u] = true;
      continue;
    }
    const std::size_t t = rng.uniform_index(owned.size());
    out.entries[owned[t]].split = Split::test;
    owned.erase(owned.begin() + static_cast<std::ptrdiff_t>(t));
    const std::size_t v = rng.uniform_index(owned.size());
    out.entries[owned[v]].split = Split::validation;
  }
  return out;
}

EvalCandidateSet build_candidate_set(const InteractionMatrix& r, Split target, std::size_t n_eval,
                                     std::uint64_t seed) {
  if (target != Split::test && target != Split::validation) {
    throw ConfigError("candidate sets target the validation or test split");
  }
  const UserItemIndex index(r);
  RngStream rng(seed);
  EvalCandidateSet set;
  set.seed = seed;
  set.target = target;
  set.n_eval = n_eval;
  std::vector<std::size_t> eligible;
  for (std::size_t u = 0; u < r.n_users; ++u) {
    if (!r.eval_excluded.empty() && r.eval_excluded[u]) continue;
    const auto positive = index.held_out(u, target);
    if (!positive) continue;
    const auto seen = index.all_items(u);
    eligible.clear();
    std::size_t p = 0;
    for (std::size_t i = 0; i < r.n_items; ++i) {
      while (p < seen.size() && seen[p] < i) ++p;
      if (p < seen.size() && seen[p] == i) continue;
      eligible.push_back(i);
    }
    UserCandidates c;
    c.user = u;
    c.positive = *positive;
    if (eligible.size() <= n_eval) {
      c.negatives = eligible;
      c.short_of_negatives = eligible.size() < n_eval;
    } else {
      for (std::size_t k : rng.sample_without_replacement(eligible.size(), n_eval))
        c.negatives.push_back(eligible[k]);
    }
    if (c.short_of_negatives) ++set.short_users;
    set.users.push_back(std::move(c));
  }
  return set;
}

std::vector<EvalCandidateSet> build_eval_sets(const InteractionMatrix& r, std::size_t n_sets,
                                              std::size_t n_eval, std::uint64_t base_seed) {
  if (n_sets == 0) throw ConfigError("build_eval_sets: need at least one set");
  std::vector<EvalCandidateSet> sets;
  sets.reserve(n_sets);
  for (std::size_t i = 0; i < n_sets; ++i)
    sets.push_back(build_candidate_set(r, Split::test, n_eval, base_seed + i));
  return sets;
}

TrainSampler::TrainSampler(const InteractionMatrix& r, std::size_t batch_size,
                           std::size_t negatives_per_positive)
    : index_(r), negatives_(negatives_per_positive) {
  if (negatives_per_positive == 0) throw ConfigError("negatives per positive must be >= 1");
  if (batch_size == 0) throw ConfigError("batch size must be >= 1");
  per_batch_ = std::max<std::size_t>(1, batch_size / (1 + negatives_per_positive));
  for (const auto& e : r.entries)
    if (e.split == Split::train || e.split == Split::unassigned) positives_.push_back(e);
}

std::vector<TrainBatch> TrainSampler::epoch(RngStream& rng) const {
  std::vector<std::size_t> order(positives_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  const std::size_t n_items = index_.n_items();
  std::vector<TrainBatch> batches;
  for (std::size_t start = 0; start < order.size(); start += per_batch_) {
    const std::size_t end = std::min(order.size(), start + per_batch_);
    TrainBatch b;
    b.negatives_per_positive = negatives_;
    const std::size_t cap = (end - start) * (1 + negatives_);
    b.users.reserve(cap);
    b.items.reserve(cap);
    b.labels.reserve(cap);
    for (std::size_t k = start; k < end; ++k) {
      const Interaction& pos = positives_[order[k]];
      b.users.push_back(pos.user);
      b.items.push_back(pos.item);
      b.labels.push_back(1.0);
      ++b.positives;
      const std::size_t known = index_.all_items(pos.user).size();
      if (known >= n_items) continue;  // nothing left to contrast against
      for (std::size_t j = 0; j < negatives_; ++j) {
        std::size_t item = rng.uniform_index(n_items);
        while (index_.interacted(pos.user, item)) item = rng.uniform_index(n_items);
        b.users.push_back(pos.user);
        b.items.push_back(item);
        b.labels.push_back(0.0);
      }
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

TrainBatch sample_train_batch(const InteractionMatrix& r, std::size_t batch_size,
                              std::size_t negatives_per_positive, RngStream& rng) {
  auto batches = TrainSampler(r, batch_size, negatives_per_positive).epoch(rng);
  if (batches.empty()) return {};
  return std::move(batches.front());
}

}  // namespace pretrec
