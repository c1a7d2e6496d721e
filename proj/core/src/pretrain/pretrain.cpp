#include "pretrec/pretrain/pretrain.hpp"

#include "pretrec/error.hpp"

namespace pretrec {

std::string_view to_string(PretrainerKind k) noexcept {
  switch (k) {
    case PretrainerKind::gcn_p: return "gcn-p";
    case PretrainerKind::com_p: return "com-p";
    case PretrainerKind::gmf: return "gmf";
  }
  return "?";
}

std::optional<PretrainerKind> parse_pretrainer(std::string_view name) {
  if (name == "gcn-p") return PretrainerKind::gcn_p;
  if (name == "com-p") return PretrainerKind::com_p;
  if (name == "gmf") return PretrainerKind::gmf;
  return std::nullopt;
}

std::unique_ptr<Pretrainer> make_pretrainer(const PretrainConfig& config, const FeatureMatrix& users,
                                            const FeatureMatrix& items, RngStream rng) {
  const RngStream init = rng.split("init");
  switch (config.kind) {
    case PretrainerKind::gcn_p: {
      auto ug = build_single_rel_graph(users, config.similarity_threshold);
      auto ig = build_single_rel_graph(items, config.similarity_threshold);
      return std::make_unique<GcnPModel>(std::move(ug.normalized), std::move(ig.normalized), config.encoder, init);
    }
    case PretrainerKind::com_p: {
      const auto ug = build_multi_rel_graph(users, config.relation_cap, rng.split("user-graph"));
      const auto ig = build_multi_rel_graph(items, config.relation_cap, rng.split("item-graph"));
      return std::make_unique<ComPModel>(ug, ig, config.encoder, init);
    }
    case PretrainerKind::gmf:
      return std::make_unique<GmfModel>(users.entity_count(), items.entity_count(), config.encoder, init);
  }
  throw ConfigError("unknown pre-trainer");
}

PretrainResult pretrain(const PretrainConfig& config, const InteractionMatrix& split,
                        const FeatureMatrix& users, const FeatureMatrix& items,
                        const EvalCandidateSet& validation, std::uint64_t seed) {
  if (users.entity_count() != split.n_users || items.entity_count() != split.n_items)
    throw ConfigError("feature matrices do not match the interaction matrix shape");
  const RngStream rng(seed);
  auto model = make_pretrainer(config, users, items, rng);
  PretrainResult out;
  out.training = train_with_early_stopping(*model, split, validation, config.training, rng.split("train"));
  out.embeddings = model->embeddings();
  out.embeddings.seed = seed;
  out.embeddings.validate();
  return out;
}

}  // namespace pretrec
