#include "pretrec/finetune/models.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "pretrec/error.hpp"
#include "pretrec/numeric/init.hpp"
#include "pretrec/pretrain/layers.hpp"

namespace pretrec {

std::string_view to_string(FinetunerKind k) noexcept {
  switch (k) {
    case FinetunerKind::mf_bce: return "mf-bce";
    case FinetunerKind::mf_bpr: return "mf-bpr";
    case FinetunerKind::ncf: return "ncf";
    case FinetunerKind::lightgcn: return "lightgcn";
  }
  return "?";
}

std::optional<FinetunerKind> parse_finetuner(std::string_view name) {
  if (name == "mf-bce") return FinetunerKind::mf_bce;
  if (name == "mf-bpr") return FinetunerKind::mf_bpr;
  if (name == "ncf") return FinetunerKind::ncf;
  if (name == "lightgcn") return FinetunerKind::lightgcn;
  return std::nullopt;
}

double bpr_loss(double positive_score, double negative_score) noexcept {
  return softplus(negative_score - positive_score);
}

Var bpr_loss(Var positive_scores, Var negative_scores) {
  return neg_log_sigmoid_sum(sub(positive_scores, negative_scores));
}

Var batch_bpr_loss(Var scores, const TrainBatch& batch) {
  std::vector<std::size_t> pos, neg;
  std::optional<std::size_t> last_positive;
  for (std::size_t t = 0; t < batch.size(); ++t) {
    if (batch.labels[t] > 0.5) {
      last_positive = t;
    } else if (last_positive) {
      pos.push_back(*last_positive);
      neg.push_back(t);
    }
  }
  if (pos.empty()) return scores.tape().constant(Tensor2(1, 1));
  return bpr_loss(gather_rows(scores, pos), gather_rows(scores, neg));
}

namespace {

void check_config(const FinetuneModelConfig& c) {
  if (c.dim == 0) throw ConfigError("embedding dimension must be >= 1");
  if (!(c.l2 >= 0.0)) throw ConfigError("l2 weight must be >= 0");
}

void check_pretrained(const EmbeddingSet& emb, std::size_t dim, std::size_t n_users, std::size_t n_items) {
  if (emb.dim() != dim) {
    throw ConfigError("pre-trained dimension " + std::to_string(emb.dim()) + " does not match model dimension " +
                      std::to_string(dim));
  }
  if (emb.users.rows() != n_users || emb.items.rows() != n_items) {
    throw ConfigError("pre-trained tables cover " + std::to_string(emb.users.rows()) + " users / " +
                      std::to_string(emb.items.rows()) + " items, model expects " + std::to_string(n_users) +
                      " / " + std::to_string(n_items));
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

Var add_penalty(Var loss, double lambda, std::span<const Var> tables) {
  if (lambda == 0.0) return loss;
  for (Var t : tables) loss = add(loss, scale(sum_squares(t), lambda));
  return loss;
}

}  // namespace

// --- MF -------------------------------------------------------------------------------------

MfModel::MfModel(std::size_t n_users, std::size_t n_items, const FinetuneModelConfig& config, Loss loss,
                 RngStream init)
    : config_(config), loss_(loss) {
  check_config(config_);
  users_ = Parameter("mf_users", normal_init(n_users, config_.dim, 0.01, init));
  items_ = Parameter("mf_items", normal_init(n_items, config_.dim, 0.01, init));
  user_bias_ = Parameter("mf_user_bias", Tensor2(n_users, 1));
  item_bias_ = Parameter("mf_item_bias", Tensor2(n_items, 1));
  global_bias_ = Parameter("mf_global_bias", Tensor2(1, 1));
}

std::vector<Parameter*> MfModel::parameters() {
  return {&users_, &items_, &user_bias_, &item_bias_, &global_bias_};
}

void MfModel::score(std::size_t user, std::span<const std::size_t> items, std::span<double> out) const {
  const auto u = users_.value.row(user);
  for (std::size_t c = 0; c < items.size(); ++c) {
    out[c] = dot(u, items_.value.row(items[c])) + user_bias_.value(user, 0) +
             item_bias_.value(items[c], 0) + global_bias_.value(0, 0);
  }
}

Var MfModel::batch_loss(Tape& tape, const TrainBatch& batch, RngStream&) {
  Var u = gather_rows(tape.parameter(users_), batch.users);
  Var v = gather_rows(tape.parameter(items_), batch.items);
  Var s = rowwise_dot(u, v);
  s = add(s, gather_rows(tape.parameter(user_bias_), batch.users));
  s = add(s, gather_rows(tape.parameter(item_bias_), batch.items));
  const std::vector<std::size_t> zero(batch.size(), 0);
  s = add(s, gather_rows(tape.parameter(global_bias_), zero));
  const std::array<Var, 2> reg{u, v};
  if (loss_ == Loss::bce) return bce_loss(s, batch.labels, config_.l2, reg);
  return add_penalty(batch_bpr_loss(s, batch), config_.l2, reg);
}

void MfModel::init_from_pretrained(const EmbeddingSet& emb) {
  check_pretrained(emb, config_.dim, users_.value.rows(), items_.value.rows());
  users_.value = emb.users;
  items_.value = emb.items;
}

EmbeddingSet MfModel::embeddings() const {
  EmbeddingSet e;
  e.users = users_.value;
  e.items = items_.value;
  e.user_bias.assign(user_bias_.value.values().begin(), user_bias_.value.values().end());
  e.item_bias.assign(item_bias_.value.values().begin(), item_bias_.value.values().end());
  e.model = name();
  return e;
}

// --- NCF ------------------------------------------------------------------------------------

NcfModel::NcfModel(std::size_t n_users, std::size_t n_items, const FinetuneModelConfig& config, RngStream init)
    : config_(config) {
  check_config(config_);
  const std::size_t d = config_.dim, half = std::max<std::size_t>(1, d / 2);
  gmf_users_ = Parameter("ncf_gmf_users", normal_init(n_users, d, 0.01, init));
  gmf_items_ = Parameter("ncf_gmf_items", normal_init(n_items, d, 0.01, init));
  mlp_users_ = Parameter("ncf_mlp_users", normal_init(n_users, d, 0.01, init));
  mlp_items_ = Parameter("ncf_mlp_items", normal_init(n_items, d, 0.01, init));
  w1_ = Parameter("ncf_w1", xavier_uniform(2 * d, d, init));
  b1_ = Parameter("ncf_b1", Tensor2(1, d));
  w2_ = Parameter("ncf_w2", xavier_uniform(d, half, init));
  b2_ = Parameter("ncf_b2", Tensor2(1, half));
  fusion_ = Parameter("ncf_fusion", xavier_uniform(d + half, 1, init));
  fusion_bias_ = Parameter("ncf_fusion_bias", Tensor2(1, 1));
}

std::vector<Parameter*> NcfModel::parameters() {
  return {&gmf_users_, &gmf_items_, &mlp_users_, &mlp_items_, &w1_, &b1_, &w2_, &b2_, &fusion_, &fusion_bias_};
}

Var NcfModel::forward(Tape& tape, std::span<const std::size_t> users, std::span<const std::size_t> items) {
  Var gmf = hadamard(gather_rows(tape.parameter(gmf_users_), users), gather_rows(tape.parameter(gmf_items_), items));
  Var x = concat_cols(gather_rows(tape.parameter(mlp_users_), users), gather_rows(tape.parameter(mlp_items_), items));
  Var z1 = relu(add_row(matmul(x, tape.parameter(w1_)), tape.parameter(b1_)));
  Var z2 = relu(add_row(matmul(z1, tape.parameter(w2_)), tape.parameter(b2_)));
  return add_row(matmul(concat_cols(gmf, z2), tape.parameter(fusion_)), tape.parameter(fusion_bias_));
}

void NcfModel::score(std::size_t user, std::span<const std::size_t> items, std::span<double> out) const {
  const std::size_t d = config_.dim, half = b2_.value.cols();
  const auto ug = gmf_users_.value.row(user);
  const auto um = mlp_users_.value.row(user);
  std::vector<double> z1(d), z2(half);
  for (std::size_t c = 0; c < items.size(); ++c) {
    const auto vg = gmf_items_.value.row(items[c]);
    const auto vm = mlp_items_.value.row(items[c]);
    double s = fusion_bias_.value(0, 0);
    for (std::size_t k = 0; k < d; ++k) s += ug[k] * vg[k] * fusion_.value(k, 0);
    for (std::size_t o = 0; o < d; ++o) {
      double a = b1_.value(0, o);
      for (std::size_t k = 0; k < d; ++k) a += um[k] * w1_.value(k, o) + vm[k] * w1_.value(d + k, o);
      z1[o] = std::max(a, 0.0);
    }
    for (std::size_t o = 0; o < half; ++o) {
      double a = b2_.value(0, o);
      for (std::size_t k = 0; k < d; ++k) a += z1[k] * w2_.value(k, o);
      z2[o] = std::max(a, 0.0);
      s += z2[o] * fusion_.value(d + o, 0);
    }
    out[c] = s;
  }
}

Var NcfModel::batch_loss(Tape& tape, const TrainBatch& batch, RngStream&) {
  Var s = forward(tape, batch.users, batch.items);
  const std::array<Var, 4> reg{gather_rows(tape.parameter(gmf_users_), batch.users),
                               gather_rows(tape.parameter(gmf_items_), batch.items),
                               gather_rows(tape.parameter(mlp_users_), batch.users),
                               gather_rows(tape.parameter(mlp_items_), batch.items)};
  return bce_loss(s, batch.labels, config_.l2, reg);
}

void NcfModel::init_from_pretrained(const EmbeddingSet& emb) {
  check_pretrained(emb, config_.dim, gmf_users_.value.rows(), gmf_items_.value.rows());
  gmf_users_.value = emb.users;
  mlp_users_.value = emb.users;
  gmf_items_.value = emb.items;
  mlp_items_.value = emb.items;
}

EmbeddingSet NcfModel::embeddings() const {
  EmbeddingSet e;
  e.users = gmf_users_.value;
  e.items = gmf_items_.value;
  e.user_bias.assign(e.users.rows(), 0.0);
  e.item_bias.assign(e.items.rows(), 0.0);
  e.model = name();
  return e;
}

// --- LightGCN -------------------------------------------------------------------------------

SparseMatrix bipartite_adjacency(const InteractionMatrix& split) {
  const std::size_t n = split.n_users, m = split.n_items;
  const UserItemIndex index(split);
  std::vector<double> degree(n + m, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t i : index.train_items(u)) {
      degree[u] += 1.0;
      degree[n + i] += 1.0;
    }
  }
  std::vector<Triplet> t;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t i : index.train_items(u)) {
      const double w = 1.0 / std::sqrt(degree[u] * degree[n + i]);
      t.push_back({u, n + i, w});
      t.push_back({n + i, u, w});
    }
  }
  return SparseMatrix(n + m, n + m, std::move(t));
}

Tensor2 lightgcn_propagate(const Tensor2& e0, const SparseMatrix& adjacency, std::size_t layers) {
  Tensor2 total = e0;
  Tensor2 current = e0;
  for (std::size_t l = 0; l < layers; ++l) {
    current = adjacency.multiply(current);
    for (std::size_t k = 0; k < total.size(); ++k) total.values()[k] += current.values()[k];
  }
  const double inv = 1.0 / static_cast<double>(layers + 1);
  for (double& v : total.values()) v *= inv;
  return total;
}

LightGcnModel::LightGcnModel(const InteractionMatrix& split, const FinetuneModelConfig& config, RngStream init)
    : config_(config),
      n_users_(split.n_users),
      n_items_(split.n_items),
      adjacency_(bipartite_adjacency(split)) {
  check_config(config_);
  embeddings0_ = Parameter("lightgcn_e0", normal_init(n_users_ + n_items_, config_.dim, 0.1, init));
  refresh();
}

Var LightGcnModel::forward(Tape& tape) {
  std::vector<Var> terms{tape.parameter(embeddings0_)};
  for (std::size_t l = 0; l < config_.lightgcn_layers; ++l) terms.push_back(spmm(adjacency_, terms.back()));
  return mean_of(terms);
}

void LightGcnModel::score(std::size_t user, std::span<const std::size_t> items, std::span<double> out) const {
  const auto u = final_.row(user);
  for (std::size_t c = 0; c < items.size(); ++c) out[c] = dot(u, final_.row(n_users_ + items[c]));
}

Var LightGcnModel::batch_loss(Tape& tape, const TrainBatch& batch, RngStream&) {
  Var f = forward(tape);
  std::vector<std::size_t> item_rows(batch.items.begin(), batch.items.end());
  for (auto& i : item_rows) i += n_users_;
  Var s = rowwise_dot(gather_rows(f, batch.users), gather_rows(f, item_rows));
  Var e0 = tape.parameter(embeddings0_);
  const std::array<Var, 2> reg{gather_rows(e0, batch.users), gather_rows(e0, item_rows)};
  return add_penalty(batch_bpr_loss(s, batch), config_.l2, reg);
}

void LightGcnModel::refresh() { final_ = lightgcn_propagate(embeddings0_.value, adjacency_, config_.lightgcn_layers); }

void LightGcnModel::init_from_pretrained(const EmbeddingSet& emb) {
  check_pretrained(emb, config_.dim, n_users_, n_items_);
  for (std::size_t u = 0; u < n_users_; ++u)
    std::copy_n(emb.users.row(u).begin(), config_.dim, embeddings0_.value.row(u).begin());
  for (std::size_t i = 0; i < n_items_; ++i)
    std::copy_n(emb.items.row(i).begin(), config_.dim, embeddings0_.value.row(n_users_ + i).begin());
  refresh();
}

EmbeddingSet LightGcnModel::embeddings() const {
  EmbeddingSet e;
  e.users = Tensor2(n_users_, config_.dim);
  e.items = Tensor2(n_items_, config_.dim);
  for (std::size_t u = 0; u < n_users_; ++u) std::ranges::copy(final_.row(u), e.users.row(u).begin());
  for (std::size_t i = 0; i < n_items_; ++i) std::ranges::copy(final_.row(n_users_ + i), e.items.row(i).begin());
  e.user_bias.assign(n_users_, 0.0);
  e.item_bias.assign(n_items_, 0.0);
  e.model = name();
  return e;
}

std::unique_ptr<FinetuneModel> make_finetuner(FinetunerKind kind, const FinetuneModelConfig& config,
                                              const InteractionMatrix& split, RngStream init) {
  switch (kind) {
    case FinetunerKind::mf_bce:
      return std::make_unique<MfModel>(split.n_users, split.n_items, config, MfModel::Loss::bce, init);
    case FinetunerKind::mf_bpr:
      return std::make_unique<MfModel>(split.n_users, split.n_items, config, MfModel::Loss::bpr, init);
    case FinetunerKind::ncf:
      return std::make_unique<NcfModel>(split.n_users, split.n_items, config, init);
    case FinetunerKind::lightgcn:
      return std::make_unique<LightGcnModel>(split, config, init);
  }
  throw ConfigError("unknown fine-tuner");
}

}  // namespace pretrec
