#pragma once

// Small random problem instances shared by the unit and acceptance suites.

#include <vector>

#include "pretrec/data/features.hpp"
#include "pretrec/data/interactions.hpp"
#include "pretrec/data/sampling.hpp"
#include "pretrec/numeric/rng.hpp"

namespace pretrec::test {

inline Tensor2 random_tensor(std::size_t r, std::size_t c, RngStream& rng, double lo = -1.0, double hi = 1.0) {
  Tensor2 t(r, c);
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

inline FeatureMatrix random_binary_features(std::size_t n, std::size_t k, double density, RngStream& rng) {
  FeatureMatrix f(n, k);
  for (double& v : f.values.values()) v = rng.bernoulli(density) ? 1.0 : 0.0;
  f.infer_kinds();
  return f;
}

// Every entry is train; each user has at least one positive and at least one unseen item.
inline InteractionMatrix random_train_matrix(std::size_t users, std::size_t items, double density,
                                             RngStream& rng) {
  InteractionMatrix m;
  m.n_users = users;
  m.n_items = items;
  for (std::size_t u = 0; u < users; ++u) {
    const std::size_t anchor = rng.uniform_index(items);
    for (std::size_t i = 0; i < items; ++i) {
      const bool last_free = items > 1 && i == (anchor + 1) % items;
      if (i == anchor || (!last_free && rng.bernoulli(density))) m.entries.push_back({u, i, 1.0, Split::train});
    }
  }
  m.eval_excluded.assign(users, false);
  return m;
}

struct TinyInstance {
  InteractionMatrix interactions;
  FeatureMatrix user_features;
  FeatureMatrix item_features;
  TrainBatch batch;
};

inline TinyInstance tiny_instance(RngStream& rng, std::size_t max_entities = 6) {
  TinyInstance t;
  const std::size_t n = 2 + rng.uniform_index(max_entities - 1);
  const std::size_t m = 2 + rng.uniform_index(max_entities - 1);
  t.interactions = random_train_matrix(n, m, 0.4, rng);
  t.user_features = random_binary_features(n, 3, 0.5, rng);
  t.item_features = random_binary_features(m, 3, 0.5, rng);
  t.batch = sample_train_batch(t.interactions, 20, 2, rng);
  return t;
}

}  // namespace pretrec::test
