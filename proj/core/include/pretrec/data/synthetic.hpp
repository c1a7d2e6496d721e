#pragma once

#include <cstdint>

#include "pretrec/data/features.hpp"
#include "pretrec/data/interactions.hpp"

namespace pretrec {

// Everything one experiment reads: interactions plus side information for both entity types.
struct Dataset {
  InteractionMatrix interactions;
  FeatureMatrix user_features;
  FeatureMatrix item_features;
  IndexMap users;
  IndexMap items;
};

// Planted-cluster generator. User u and item i belong to cluster u % clusters and
// i % clusters. A user interacts with each same-cluster item with probability
// `within_probability` and with each other item with probability `cross_probability`.
// Features are the cluster one-hot followed by `noise_columns` Bernoulli(noise_density) columns.
struct ClusterDatasetConfig {
  std::size_t users = 200;
  std::size_t items = 200;
  std::size_t clusters = 10;
  std::size_t noise_columns = 5;
  double within_probability = 0.3;
  double cross_probability = 0.02;
  double noise_density = 0.5;
  std::uint64_t seed = 0;
};

Dataset generate_cluster_dataset(const ClusterDatasetConfig& config);

}  // namespace pretrec
