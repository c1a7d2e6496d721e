#include "pretrec/pretrain/layers.hpp"

#include <algorithm>
#include <string>

#include "pretrec/error.hpp"

namespace pretrec {

Var activate(Var x, Activation f) { return f == Activation::relu ? relu(x) : x; }

Var gcn_layer_forward(Var h, const SparseMatrix& a_hat, Var w, Activation f, double dropout_ratio,
                      RngStream& rng, bool training) {
  if (a_hat.rows() != h.rows() || a_hat.cols() != h.rows()) {
    throw ConfigError("gcn_layer_forward: graph has " + std::to_string(a_hat.rows()) +
                      " nodes, features have " + std::to_string(h.rows()) + " rows");
  }
  if (w.rows() != h.cols()) throw ConfigError("gcn_layer_forward: weight rows differ from feature width");
  Var pre = matmul(spmm(a_hat, h), w);
  return activate(dropout(pre, dropout_ratio, rng, training), f);
}

std::vector<double> compose(std::span<const double> e_s, std::span<const double> e_r) {
  if (e_s.size() != e_r.size()) throw ConfigError("compose: dimension mismatch");
  std::vector<double> out(e_s.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = e_s[k] - e_r[k];
  return out;
}

std::vector<double> relation_embedding(std::span<const double> alpha, const Tensor2& basis) {
  if (alpha.size() != basis.rows()) throw ConfigError("relation_embedding: one weight per basis vector");
  std::vector<double> z(basis.cols(), 0.0);
  for (std::size_t k = 0; k < alpha.size(); ++k)
    for (std::size_t c = 0; c < z.size(); ++c) z[c] += alpha[k] * basis(k, c);
  return z;
}

CompGcnOperators CompGcnOperators::build(const MultiRelGraph& g) {
  const std::size_t n = g.node_count();
  CompGcnOperators ops;
  ops.node_count = n;
  ops.relation_count = g.extended_relation_count();
  std::array<std::vector<double>, 3> degree;
  for (auto& d : degree) d.assign(n, 0.0);
  const auto dir = [&](std::size_t r) { return static_cast<std::size_t>(g.direction(r)); };
  for (const auto& e : g.extended_edges()) degree[dir(e.relation)][e.target] += 1.0;
  std::array<std::vector<Triplet>, 3> nb, rel;
  for (const auto& e : g.extended_edges()) {
    const std::size_t k = dir(e.relation);
    const double w = 1.0 / degree[k][e.target];
    nb[k].push_back({e.target, e.source, w});
    rel[k].push_back({e.target, e.relation, w});
  }
  for (std::size_t k = 0; k < 3; ++k) {
    ops.neighbours[k] = SparseMatrix(n, n, std::move(nb[k]));
    ops.relations[k] = SparseMatrix(n, ops.relation_count, std::move(rel[k]));
  }
  return ops;
}

CompGcnOutput compgcn_layer_forward(Var h, Var z, const CompGcnOperators& ops,
                                    const CompGcnWeights& w, Activation f, double dropout_ratio,
                                    RngStream& rng, bool training) {
  if (h.rows() != ops.node_count) {
    throw ConfigError("compgcn_layer_forward: graph has " + std::to_string(ops.node_count) +
                      " nodes, features have " + std::to_string(h.rows()) + " rows");
  }
  if (z.rows() != ops.relation_count) {
    throw ConfigError("compgcn_layer_forward: " + std::to_string(ops.relation_count) +
                      " relations but " + std::to_string(z.rows()) + " relation embeddings");
  }
  if (z.cols() != h.cols()) throw ConfigError("compgcn_layer_forward: relation and node widths differ");
  Var pre;
  bool have = false;
  for (std::size_t k = 0; k < 3; ++k) {
    if (w.direction[k].rows() != h.cols())
      throw ConfigError("compgcn_layer_forward: direction weight rows differ from feature width");
    if (ops.neighbours[k].nonzeros() == 0) continue;
    Var msg = sub(spmm(ops.neighbours[k], h), spmm(ops.relations[k], z));
    Var term = matmul(msg, w.direction[k]);
    pre = have ? add(pre, term) : term;
    have = true;
  }
  if (!have) pre = h.tape().constant(Tensor2(h.rows(), w.direction[2].cols()));
  return {activate(dropout(pre, dropout_ratio, rng, training), f), matmul(z, w.relation)};
}

double predict_score(std::span<const double> u, std::span<const double> v, double user_bias,
                     double item_bias) {
  if (u.size() != v.size()) throw ConfigError("predict_score: dimension mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) s += u[k] * v[k];
  return s + user_bias + item_bias;
}

Var bce_loss(Var scores, std::span<const double> labels, double lambda,
             std::span<const Var> regularized) {
  Var loss = bce_with_logits(scores, labels);
  if (lambda != 0.0)
    for (Var p : regularized) loss = add(loss, scale(sum_squares(p), lambda));
  return loss;
}

double gmf_forward(std::span<const double> u, std::span<const double> v, std::span<const double> w,
                   Activation f) {
  if (u.size() != v.size() || u.size() != w.size()) throw ConfigError("gmf_forward: dimension mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    double x = u[k] * v[k];
    if (f == Activation::relu) x = std::max(x, 0.0);
    s += w[k] * x;
  }
  return s;
}

}  // namespace pretrec
