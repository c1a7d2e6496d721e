#include "pretrec/pretrain/models.hpp"

#include <array>
#include <string>

#include "pretrec/error.hpp"
#include "pretrec/numeric/init.hpp"

namespace pretrec {

namespace {

void check_encoder_config(const EncoderConfig& c) {
  if (c.dim == 0) throw ConfigError("embedding dimension must be >= 1");
  if (c.layers < 1 || c.layers > 3) throw ConfigError("layer count must lie in [1, 3]");
  if (c.bases == 0) throw ConfigError("basis count must be >= 1");
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (!(c.l2 >= 0.0)) throw ConfigError("l2 weight must be >= 0");
}

Parameter zeros(std::string name, std::size_t rows) { return Parameter(std::move(name), Tensor2(rows, 1)); }

}  // namespace

GraphEncoderModel::GraphEncoderModel(std::size_t n_users, std::size_t n_items,
                                     const EncoderConfig& config, RngStream& init)
    : config_(config) {
  check_encoder_config(config_);
  user_features_ = Parameter("user_features", uniform_init(n_users, config_.dim, -0.01, 0.01, init));
  item_features_ = Parameter("item_features", uniform_init(n_items, config_.dim, -0.01, 0.01, init));
  user_bias_ = zeros("user_bias", n_users);
  item_bias_ = zeros("item_bias", n_items);
}

std::vector<Parameter*> GraphEncoderModel::base_parameters() {
  return {&user_features_, &item_features_, &user_bias_, &item_bias_};
}

void GraphEncoderModel::score(std::size_t user, std::span<const std::size_t> items,
                              std::span<double> out) const {
  const auto u = cached_users_.row(user);
  for (std::size_t c = 0; c < items.size(); ++c)
    out[c] = predict_score(u, cached_items_.row(items[c]), user_bias_.value(user, 0),
                           item_bias_.value(items[c], 0));
}

Var GraphEncoderModel::batch_loss(Tape& tape, const TrainBatch& batch, RngStream& rng) {
  const Output out = forward(tape, rng, true);
  Var s = rowwise_dot(gather_rows(out.users, batch.users), gather_rows(out.items, batch.items));
  s = add(s, gather_rows(tape.parameter(user_bias_), batch.users));
  s = add(s, gather_rows(tape.parameter(item_bias_), batch.items));
  const std::array<Var, 2> reg{tape.parameter(user_features_), tape.parameter(item_features_)};
  return bce_loss(s, batch.labels, config_.l2, reg);
}

void GraphEncoderModel::refresh() {
  Tape tape;
  RngStream unused(0);
  const Output out = forward(tape, unused, false);
  cached_users_ = out.users.value();
  cached_items_ = out.items.value();
}

EmbeddingSet GraphEncoderModel::embeddings() const {
  EmbeddingSet e;
  e.users = cached_users_;
  e.items = cached_items_;
  e.user_bias.assign(user_bias_.value.values().begin(), user_bias_.value.values().end());
  e.item_bias.assign(item_bias_.value.values().begin(), item_bias_.value.values().end());
  e.model = name();
  return e;
}

GcnPModel::GcnPModel(SparseMatrix user_graph, SparseMatrix item_graph, const EncoderConfig& config,
                     RngStream init)
    : GraphEncoderModel(user_graph.rows(), item_graph.rows(), config, init),
      user_graph_(std::move(user_graph)),
      item_graph_(std::move(item_graph)) {
  for (std::size_t l = 0; l < config_.layers; ++l) {
    user_weights_.emplace_back("user_w" + std::to_string(l), xavier_uniform(config_.dim, config_.dim, init));
    item_weights_.emplace_back("item_w" + std::to_string(l), xavier_uniform(config_.dim, config_.dim, init));
  }
  refresh();
}

std::vector<Parameter*> GcnPModel::parameters() {
  auto out = base_parameters();
  for (auto& w : user_weights_) out.push_back(&w);
  for (auto& w : item_weights_) out.push_back(&w);
  return out;
}

Var GcnPModel::encode(Tape& tape, const SparseMatrix& graph, Parameter& x, std::vector<Parameter>& weights,
                      RngStream& rng, bool training) {
  Var h = tape.parameter(x);
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const Activation f = l + 1 < weights.size() ? Activation::relu : Activation::identity;
    h = gcn_layer_forward(h, graph, tape.parameter(weights[l]), f, config_.dropout, rng, training);
  }
  return h;
}

GraphEncoderModel::Output GcnPModel::forward(Tape& tape, RngStream& rng, bool training) {
  Var u = encode(tape, user_graph_, user_features_, user_weights_, rng, training);
  Var v = encode(tape, item_graph_, item_features_, item_weights_, rng, training);
  return {u, v};
}

ComPModel::ComPModel(const MultiRelGraph& user_graph, const MultiRelGraph& item_graph,
                     const EncoderConfig& config, RngStream init)
    : GraphEncoderModel(user_graph.node_count(), item_graph.node_count(), config, init) {
  users_ = make_side(user_graph, "user", init);
  items_ = make_side(item_graph, "item", init);
  refresh();
}

ComPModel::Side ComPModel::make_side(const MultiRelGraph& g, const std::string& prefix, RngStream& init) const {
  Side s;
  s.ops = CompGcnOperators::build(g);
  const std::size_t d = config_.dim;
  s.basis = Parameter(prefix + "_basis", xavier_uniform(config_.bases, d, init));
  s.alpha = Parameter(prefix + "_alpha", xavier_uniform(s.ops.relation_count, config_.bases, init));
  static constexpr const char* kDir[] = {"orig", "inv", "self"};
  for (std::size_t l = 0; l < config_.layers; ++l) {
    std::array<Parameter, 3> w;
    for (std::size_t k = 0; k < 3; ++k)
      w[k] = Parameter(prefix + "_w" + kDir[k] + std::to_string(l), xavier_uniform(d, d, init));
    s.direction.push_back(std::move(w));
    s.relation.emplace_back(prefix + "_wrel" + std::to_string(l), xavier_uniform(d, d, init));
  }
  return s;
}

std::vector<Parameter*> ComPModel::parameters() {
  auto out = base_parameters();
  for (Side* s : {&users_, &items_}) {
    out.push_back(&s->basis);
    out.push_back(&s->alpha);
    for (auto& w : s->direction)
      for (auto& p : w) out.push_back(&p);
    for (auto& p : s->relation) out.push_back(&p);
  }
  return out;
}

Var ComPModel::encode(Tape& tape, Side& side, Parameter& x, RngStream& rng, bool training) {
  Var h = tape.parameter(x);
  Var z = matmul(tape.parameter(side.alpha), tape.parameter(side.basis));
  const std::size_t layers = side.direction.size();
  for (std::size_t l = 0; l < layers; ++l) {
    const Activation f = l + 1 < layers ? Activation::relu : Activation::identity;
    CompGcnWeights w{{tape.parameter(side.direction[l][0]), tape.parameter(side.direction[l][1]),
                      tape.parameter(side.direction[l][2])},
                     tape.parameter(side.relation[l])};
    const auto out = compgcn_layer_forward(h, z, side.ops, w, f, config_.dropout, rng, training);
    h = out.h;
    z = out.z;
  }
  return h;
}

GraphEncoderModel::Output ComPModel::forward(Tape& tape, RngStream& rng, bool training) {
  Var u = encode(tape, users_, user_features_, rng, training);
  Var v = encode(tape, items_, item_features_, rng, training);
  return {u, v};
}

GmfModel::GmfModel(std::size_t n_users, std::size_t n_items, const EncoderConfig& config, RngStream init)
    : config_(config) {
  check_encoder_config(config_);
  users_ = Parameter("gmf_users", normal_init(n_users, config_.dim, 0.01, init));
  items_ = Parameter("gmf_items", normal_init(n_items, config_.dim, 0.01, init));
  weights_ = Parameter("gmf_w", xavier_uniform(config_.dim, 1, init));
}

void GmfModel::score(std::size_t user, std::span<const std::size_t> items, std::span<double> out) const {
  for (std::size_t c = 0; c < items.size(); ++c)
    out[c] = gmf_forward(users_.value.row(user), items_.value.row(items[c]), weights_.value.values());
}

Var GmfModel::batch_loss(Tape& tape, const TrainBatch& batch, RngStream&) {
  Var u = tape.parameter(users_);
  Var v = tape.parameter(items_);
  Var s = matmul(hadamard(gather_rows(u, batch.users), gather_rows(v, batch.items)), tape.parameter(weights_));
  const std::array<Var, 2> reg{u, v};
  return bce_loss(s, batch.labels, config_.l2, reg);
}

EmbeddingSet GmfModel::embeddings() const {
  EmbeddingSet e;
  e.users = users_.value;
  e.items = items_.value;
  e.user_bias.assign(users_.value.rows(), 0.0);
  e.item_bias.assign(items_.value.rows(), 0.0);
  e.model = name();
  return e;
}

}  // namespace pretrec
