#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>

#include "pretrec/data/features.hpp"
#include "pretrec/pretrain/models.hpp"

namespace pretrec {

enum class PretrainerKind : std::uint8_t { gcn_p, com_p, gmf };
std::string_view to_string(PretrainerKind k) noexcept;
std::optional<PretrainerKind> parse_pretrainer(std::string_view name);

struct PretrainConfig {
  PretrainerKind kind = PretrainerKind::com_p;
  EncoderConfig encoder;
  TrainingConfig training;
  double similarity_threshold = 0.0;
  std::optional<std::size_t> relation_cap;
};

struct PretrainResult {
  EmbeddingSet embeddings;
  TrainingResult training;
};

// Builds the feature graphs the chosen pre-trainer needs and returns an untrained model.
std::unique_ptr<Pretrainer> make_pretrainer(const PretrainConfig& config, const FeatureMatrix& users,
                                            const FeatureMatrix& items, RngStream rng);

// Trains a pre-trainer on the train split with early stopping on `validation`, and returns the
// output embeddings of the best-validation epoch (dropout off). Streams for graph sampling,
// initialization and training are split off `seed`.
PretrainResult pretrain(const PretrainConfig& config, const InteractionMatrix& split,
                        const FeatureMatrix& users, const FeatureMatrix& items,
                        const EvalCandidateSet& validation, std::uint64_t seed);

}  // namespace pretrec
