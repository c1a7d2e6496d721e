#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "pretrec/graphs/graphs.hpp"
#include "pretrec/numeric/autodiff.hpp"

namespace pretrec {

enum class Activation : std::uint8_t { identity, relu };

Var activate(Var x, Activation f);

// f(dropout(A_hat H W)); dropout only while training. `a_hat` must outlive the tape.
Var gcn_layer_forward(Var h, const SparseMatrix& a_hat, Var w, Activation f, double dropout,
                      RngStream& rng, bool training);

// e_s - e_r.
std::vector<double> compose(std::span<const double> e_s, std::span<const double> e_r);

// Z_r = sum_k alpha_k B_k, with B holding one basis vector per row.
std::vector<double> relation_embedding(std::span<const double> alpha, const Tensor2& basis);

// Per-direction propagation operators of a MultiRelGraph. For direction k and incoming edge
// (j -> i, r): neighbours[k](i, j) and relations[k](i, r) each gain 1 / deg_k(i), so that
// sum_k (neighbours[k] H - relations[k] Z) W_k is the normalized sum of W_k (H_j - Z_r).
struct CompGcnOperators {
  std::size_t node_count = 0;
  std::size_t relation_count = 0;  // extended: 2R + 1
  std::array<SparseMatrix, 3> neighbours;
  std::array<SparseMatrix, 3> relations;

  static CompGcnOperators build(const MultiRelGraph& g);
};

struct CompGcnWeights {
  std::array<Var, 3> direction;  // original, inverse, self-loop
  Var relation;
};

struct CompGcnOutput {
  Var h;
  Var z;
};

// H' = f(dropout(sum_k (S_k H - T_k Z) W_k)), Z' = Z W_rel. Z needs one row per extended
// relation. `ops` must outlive the tape.
CompGcnOutput compgcn_layer_forward(Var h, Var z, const CompGcnOperators& ops,
                                    const CompGcnWeights& w, Activation f, double dropout,
                                    RngStream& rng, bool training);

// U_i . V_j + b_i + b_j.
double predict_score(std::span<const double> u, std::span<const double> v, double user_bias,
                     double item_bias);

// Summed BCE over logits plus lambda * sum of squared norms of `regularized`.
Var bce_loss(Var scores, std::span<const double> labels, double lambda,
             std::span<const Var> regularized);

// w . f(u (*) v).
double gmf_forward(std::span<const double> u, std::span<const double> v, std::span<const double> w,
                   Activation f = Activation::identity);

}  // namespace pretrec
