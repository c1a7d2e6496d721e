#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "pretrec/pretrain/embedding_set.hpp"
#include "pretrec/pretrain/trainer.hpp"

namespace pretrec {

enum class FinetunerKind : std::uint8_t { mf_bce, mf_bpr, ncf, lightgcn };
std::string_view to_string(FinetunerKind k) noexcept;
std::optional<FinetunerKind> parse_finetuner(std::string_view name);

struct FinetuneModelConfig {
  std::size_t dim = 64;
  double l2 = 1e-4;
  std::size_t lightgcn_layers = 3;
};

// -log s(pos - neg).
double bpr_loss(double positive_score, double negative_score) noexcept;
// Summed over aligned pairs of n x 1 score columns.
Var bpr_loss(Var positive_scores, Var negative_scores);
// Pairs every negative triple of a batch with the most recent positive before it, returning
// the summed BPR loss (a zero constant when the batch has no negatives).
Var batch_bpr_loss(Var scores, const TrainBatch& batch);

class FinetuneModel : public TrainableModel {
 public:
  virtual std::string name() const = 0;
  // Copies the pre-trained U, V into the entity tables. Throws ConfigError when the dimension or
  // entity counts differ. Other parameters keep their fresh initialization.
  virtual void init_from_pretrained(const EmbeddingSet& emb) = 0;
  // Entity representations used for scoring, as of the last refresh().
  virtual EmbeddingSet embeddings() const = 0;
};

// Biased MF: U_u . V_i + b_u + b_i + g, trained with BCE or BPR.
class MfModel final : public FinetuneModel {
 public:
  enum class Loss : std::uint8_t { bce, bpr };
  MfModel(std::size_t n_users, std::size_t n_items, const FinetuneModelConfig& config, Loss loss,
          RngStream init);

  std::string name() const override { return loss_ == Loss::bce ? "mf-bce" : "mf-bpr"; }
  std::vector<Parameter*> parameters() override;
  std::size_t item_count() const override { return items_.value.rows(); }
  void score(std::size_t user, std::span<const std::size_t> items, std::span<double> out) const override;
  Var batch_loss(Tape& tape, const TrainBatch& batch, RngStream& rng) override;
  void refresh() override {}
  void init_from_pretrained(const EmbeddingSet& emb) override;
  EmbeddingSet embeddings() const override;

  const Parameter& users() const { return users_; }
  const Parameter& items() const { return items_; }
  const Parameter& user_bias() const { return user_bias_; }
  const Parameter& item_bias() const { return item_bias_; }
  const Parameter& global_bias() const { return global_bias_; }

 private:
  FinetuneModelConfig config_;
  Loss loss_;
  Parameter users_, items_, user_bias_, item_bias_, global_bias_;
};

// GMF branch (U_g (*) V_g) fused with an MLP tower over [U_m, V_m] of widths 2d -> d -> d/2.
class NcfModel final : public FinetuneModel {
 public:
  NcfModel(std::size_t n_users, std::size_t n_items, const FinetuneModelConfig& config, RngStream init);

  std::string name() const override { return "ncf"; }
  std::vector<Parameter*> parameters() override;
  std::size_t item_count() const override { return gmf_items_.value.rows(); }
  void score(std::size_t user, std::span<const std::size_t> items, std::span<double> out) const override;
  Var batch_loss(Tape& tape, const TrainBatch& batch, RngStream& rng) override;
  void refresh() override {}
  void init_from_pretrained(const EmbeddingSet& emb) override;
  EmbeddingSet embeddings() const override;

  const Parameter& gmf_users() const { return gmf_users_; }
  const Parameter& mlp_users() const { return mlp_users_; }
  // Logits for aligned (user, item) rows, recorded on `tape`.
  Var forward(Tape& tape, std::span<const std::size_t> users, std::span<const std::size_t> items);

 private:
  FinetuneModelConfig config_;
  Parameter gmf_users_, gmf_items_, mlp_users_, mlp_items_;
  Parameter w1_, b1_, w2_, b2_, fusion_, fusion_bias_;
};

// Normalized bipartite adjacency D^-1/2 A D^-1/2 over users [0, n) and items [n, n + m) from
// the train interactions; no self-loops, isolated nodes get empty rows.
SparseMatrix bipartite_adjacency(const InteractionMatrix& split);

// mean over l = 0..L of E^(l), E^(l+1) = A E^(l).
Tensor2 lightgcn_propagate(const Tensor2& e0, const SparseMatrix& adjacency, std::size_t layers);

// LightGCN: E^(0) is the only parameter; scores are dot products of the propagated tables.
class LightGcnModel final : public FinetuneModel {
 public:
  LightGcnModel(const InteractionMatrix& split, const FinetuneModelConfig& config, RngStream init);

  std::string name() const override { return "lightgcn"; }
  std::vector<Parameter*> parameters() override { return {&embeddings0_}; }
  std::size_t item_count() const override { return n_items_; }
  void score(std::size_t user, std::span<const std::size_t> items, std::span<double> out) const override;
  Var batch_loss(Tape& tape, const TrainBatch& batch, RngStream& rng) override;
  void refresh() override;
  void init_from_pretrained(const EmbeddingSet& emb) override;
  EmbeddingSet embeddings() const override;

  const Parameter& initial_embeddings() const { return embeddings0_; }
  Var forward(Tape& tape);

 private:
  FinetuneModelConfig config_;
  std::size_t n_users_;
  std::size_t n_items_;
  SparseMatrix adjacency_;
  Parameter embeddings0_;
  Tensor2 final_;
};

std::unique_ptr<FinetuneModel> make_finetuner(FinetunerKind kind, const FinetuneModelConfig& config,
                                              const InteractionMatrix& split, RngStream init);

}  // namespace pretrec
