#pragma once

#include <string>
#include <vector>

#include "pretrec/pretrain/embedding_set.hpp"
#include "pretrec/pretrain/layers.hpp"
#include "pretrec/pretrain/trainer.hpp"

namespace pretrec {

struct EncoderConfig {
  std::size_t dim = 64;
  std::size_t layers = 3;  // 1..3
  std::size_t bases = 10;
  double dropout = 0.0;
  double l2 = 1e-4;
};

// A trainable model whose user/item tables are the pre-trained output.
class Pretrainer : public TrainableModel {
 public:
  virtual std::string name() const = 0;
  // Output embeddings (and biases) as of the last refresh().
  virtual EmbeddingSet embeddings() const = 0;
};

// Graph encoder scored by U_u . V_i + b_u + b_i and trained with BCE plus an l2 term on the
// trainable node features.
class GraphEncoderModel : public Pretrainer {
 public:
  struct Output {
    Var users;
    Var items;
  };
  virtual Output forward(Tape& tape, RngStream& rng, bool training) = 0;

  std::size_t item_count() const override { return cached_items_.rows(); }
  void score(std::size_t user, std::span<const std::size_t> items, std::span<double> out) const override;
  Var batch_loss(Tape& tape, const TrainBatch& batch, RngStream& rng) override;
  void refresh() override;
  EmbeddingSet embeddings() const override;

  Parameter& user_features() { return user_features_; }
  Parameter& item_features() { return item_features_; }

 protected:
  GraphEncoderModel(std::size_t n_users, std::size_t n_items, const EncoderConfig& config,
                    RngStream& init);
  void check_config() const;
  std::vector<Parameter*> base_parameters();

  EncoderConfig config_;
  Parameter user_features_;
  Parameter item_features_;
  Parameter user_bias_;
  Parameter item_bias_;

 private:
  Tensor2 cached_users_;
  Tensor2 cached_items_;
};

// Stacked GCN layers over the cosine-similarity graphs: H^(l+1) = f(A_hat H^(l) W^(l)), ReLU on
// hidden layers, identity on the last, H^(0) = X.
class GcnPModel final : public GraphEncoderModel {
 public:
  GcnPModel(SparseMatrix user_graph, SparseMatrix item_graph, const EncoderConfig& config, RngStream init);

  std::string name() const override { return "gcn-p"; }
  std::vector<Parameter*> parameters() override;
  Output forward(Tape& tape, RngStream& rng, bool training) override;

 private:
  Var encode(Tape& tape, const SparseMatrix& graph, Parameter& x, std::vector<Parameter>& weights,
             RngStream& rng, bool training);

  SparseMatrix user_graph_;
  SparseMatrix item_graph_;
  std::vector<Parameter> user_weights_;
  std::vector<Parameter> item_weights_;
};

// Composition-GCN over the multi-relational graphs with relation embeddings from a shared basis.
class ComPModel final : public GraphEncoderModel {
 public:
  ComPModel(const MultiRelGraph& user_graph, const MultiRelGraph& item_graph, const EncoderConfig& config,
            RngStream init);

  std::string name() const override { return "com-p"; }
  std::vector<Parameter*> parameters() override;
  Output forward(Tape& tape, RngStream& rng, bool training) override;

 private:
  struct Side {
    CompGcnOperators ops;
    Parameter basis;  // b x d
    Parameter alpha;  // |R^| x b
    std::vector<std::array<Parameter, 3>> direction;
    std::vector<Parameter> relation;
  };
  Side make_side(const MultiRelGraph& g, const std::string& prefix, RngStream& init) const;
  Var encode(Tape& tape, Side& side, Parameter& x, RngStream& rng, bool training);

  Side users_;
  Side items_;
};

// GMF: score = w . (U_u (*) V_i), trained with BCE plus an l2 term on U and V.
class GmfModel final : public Pretrainer {
 public:
  GmfModel(std::size_t n_users, std::size_t n_items, const EncoderConfig& config, RngStream init);

  std::string name() const override { return "gmf"; }
  std::vector<Parameter*> parameters() override { return {&users_, &items_, &weights_}; }
  std::size_t item_count() const override { return items_.value.rows(); }
  void score(std::size_t user, std::span<const std::size_t> items, std::span<double> out) const override;
  Var batch_loss(Tape& tape, const TrainBatch& batch, RngStream& rng) override;
  void refresh() override {}
  EmbeddingSet embeddings() const override;

 private:
  EncoderConfig config_;
  Parameter users_;
  Parameter items_;
  Parameter weights_;  // d x 1
};

}  // namespace pretrec
