#include "pretrec/data/synthetic.hpp"

#include "pretrec/error.hpp"
#include "pretrec/numeric/rng.hpp"

namespace pretrec {

namespace {

FeatureMatrix cluster_features(std::size_t entities, const ClusterDatasetConfig& c,
                               RngStream rng) {
  FeatureMatrix f(entities, c.clusters + c.noise_columns);
  for (std::size_t e = 0; e < entities; ++e) {
    f.values(e, e % c.clusters) = 1.0;
    for (std::size_t k = 0; k < c.noise_columns; ++k)
      f.values(e, c.clusters + k) = rng.bernoulli(c.noise_density) ? 1.0 : 0.0;
  }
  f.infer_kinds();
  return f;
}

}  // namespace

Dataset generate_cluster_dataset(const ClusterDatasetConfig& c) {
  if (c.clusters == 0 || c.users == 0 || c.items == 0) {
    throw ConfigError("generate_cluster_dataset: users, items and clusters must be positive");
  }
  const RngStream root(c.seed);
  RngStream links = root.split("interactions");
  Dataset d;
  d.users = IndexMap::identity(c.users);
  d.items = IndexMap::identity(c.items);
  d.interactions.n_users = c.users;
  d.interactions.n_items = c.items;
  for (std::size_t u = 0; u < c.users; ++u) {
    for (std::size_t i = 0; i < c.items; ++i) {
      const bool same = (u % c.clusters) == (i % c.clusters);
      if (links.bernoulli(same ? c.within_probability : c.cross_probability))
        d.interactions.entries.push_back({u, i, 1.0, Split::unassigned});
    }
  }
  d.interactions.eval_excluded.assign(c.users, false);
  d.user_features = cluster_features(c.users, c, root.split("user-features"));
  d.item_features = cluster_features(c.items, c, root.split("item-features"));
  return d;
}

}  // namespace pretrec
